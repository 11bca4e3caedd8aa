"""Brute-force cross-checks by explicit path enumeration.

Nothing here touches the d^2 x d^2 matrix representation: every path is
propagated with Kraus operators, supports come from eigendecompositions, and
joins from Gram-Schmidt. Enumeration uses an explicit stack and visits paths
in lexicographic order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .config import Tolerances, resolve
from .errors import BudgetExceeded
from .linalg import Subspace, orthonormalize, support
from .program import PathString, Program, is_fair_piece, prepare_state, step_superops
from .superop import SuperOperator, add, compose, trace_gain


@dataclass(frozen=True)
class EnumerationBudget:
    max_path_len: int | None = None  # None means 2d
    max_m: int = 3
    max_d: int = 4
    max_pi_size: int = 100_000

    def check(self, m: int, d: int, path_len: int | None = None) -> None:
        if m > self.max_m:
            raise BudgetExceeded(f"m = {m} exceeds enumeration budget max_m = {self.max_m}")
        if d > self.max_d:
            raise BudgetExceeded(f"d = {d} exceeds enumeration budget max_d = {self.max_d}")
        if path_len is not None:
            limit = 2 * d if self.max_path_len is None else self.max_path_len
            if path_len > limit:
                raise BudgetExceeded(f"paths of length {path_len} exceed budget {limit}")


DEFAULT_BUDGET = EnumerationBudget()


def _walk_paths(p: Program, rho: np.ndarray, max_len: int, prune: float | None = None) -> Iterator[tuple[PathString, np.ndarray]]:
    """Yield ``(f, F_f(rho))`` for every ``|f| <= max_len`` in lexicographic order.

    With ``prune`` set, subtrees below a state of trace ``<= prune`` are
    skipped (every extension of a zero state is zero).
    """
    steps = step_superops(p)
    stack: list[tuple[PathString, np.ndarray]] = [((), rho)]
    while stack:
        f, state = stack.pop()
        yield f, state
        if len(f) == max_len:
            continue
        if prune is not None and float(np.trace(state).real) <= prune:
            continue
        for k in range(p.m, 0, -1):
            stack.append((f + (k,), steps[k - 1](state)))


def _weighted_support(state: np.ndarray, tol: Tolerances) -> list[np.ndarray]:
    """Support vectors of one path state, each scaled by sqrt(eigenvalue).

    The span is exactly the support. The weighting keeps eigenvectors of tiny
    eigenvalues, which are only determined up to about eps / gap, from
    injecting unit-size errors into the join.
    """
    # path maps are trace-nonincreasing, so tr(rho0) = 1 bounds every eigenvalue
    sub = support(state, tol, scale=1.0)
    if sub.dim == 0:
        return []
    h = sub.basis.conj().T @ state @ sub.basis
    weights = np.sqrt(np.clip(np.real(np.diag(h)), 0.0, None))
    return [sub.basis[:, i] * weights[i] for i in range(sub.dim)]


def _join_supports(p: Program, rho0, lengths: range, tol: Tolerances) -> Subspace:
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    vectors: list[np.ndarray] = []
    for f, state in _walk_paths(p, rho, lengths.stop - 1, prune=0.0):
        if len(f) in lengths:
            vectors.extend(_weighted_support(state, tol))
    if not vectors:
        return Subspace.zero(p.dim)
    # amplitudes are sqrt(eigenvalue), so the rank cutoff is taken on that scale
    amp_tol = tol.replace(rank=np.sqrt(tol.rank))
    return orthonormalize(vectors, dim=p.dim, tol=amp_tol)


def bruteforce_reach(p: Program, rho0, budget: EnumerationBudget = DEFAULT_BUDGET, tol: Tolerances | None = None) -> Subspace:
    """Join of ``supp F_f(rho0)`` over all ``|f| <= d - 1``."""
    tol = resolve(tol)
    budget.check(p.m, p.dim, p.dim - 1)
    return _join_supports(p, rho0, range(0, p.dim), tol)


def bruteforce_urr(p: Program, rho0, budget: EnumerationBudget = DEFAULT_BUDGET, tol: Tolerances | None = None) -> Subspace:
    """Join of ``supp F_f(rho0)`` over all ``d <= |f| <= 2d - 1``."""
    tol = resolve(tol)
    budget.check(p.m, p.dim, 2 * p.dim - 1)
    return _join_supports(p, rho0, range(p.dim, 2 * p.dim), tol)


def bruteforce_terminates_all(p: Program, rho0, budget: EnumerationBudget = DEFAULT_BUDGET, tol: Tolerances | None = None) -> bool:
    """True iff ``F_f(rho0) = 0`` for every ``f`` of length ``d``."""
    tol = resolve(tol)
    budget.check(p.m, p.dim, p.dim)
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    for f, state in _walk_paths(p, rho, p.dim, prune=tol.zero):
        if len(f) == p.dim and float(np.trace(state).real) > tol.zero:
            return False
    return True


def pi_size_bound(m: int, d: int) -> int:
    """Number of (permutation, filler) choices before deduplication."""
    return math.factorial(m) * sum(m**j for j in range(d)) ** (m - 1)


def _words_shorter_than(m: int, d: int) -> list[PathString]:
    words: list[PathString] = []
    for n in range(d):
        words.extend(itertools.product(range(1, m + 1), repeat=n))
    return words


def enumerate_pi(m: int, d: int, budget: EnumerationBudget = DEFAULT_BUDGET) -> list[PathString]:
    """All ``s_1 w_1 s_2 .. w_{m-1} s_m`` with ``s`` a permutation and ``|w_i| < d``.

    Deduplicated and sorted lexicographically.
    """
    if m > budget.max_m:
        raise BudgetExceeded(f"m = {m} exceeds enumeration budget max_m = {budget.max_m}")
    bound = pi_size_bound(m, d)
    if bound > budget.max_pi_size:
        raise BudgetExceeded(f"{bound} expansions exceed budget max_pi_size = {budget.max_pi_size}")
    fillers = _words_shorter_than(m, d)
    out: set[PathString] = set()
    for perm in itertools.permutations(range(1, m + 1)):
        # explicit stack over the filler slots
        stack: list[tuple[int, PathString]] = [(1, (perm[0],))]
        while stack:
            slot, prefix = stack.pop()
            if slot == m:
                out.add(prefix)
                continue
            for w in fillers:
                stack.append((slot + 1, prefix + w + (perm[slot],)))
    pieces = sorted(out)
    assert all(is_fair_piece(f, m) for f in pieces)
    return pieces


def pi_superop(p: Program, pieces: list[PathString]) -> SuperOperator:
    """``sum_{f in pieces} F_f`` assembled at the Kraus level with prefix sharing."""
    steps = step_superops(p)
    cache: dict[PathString, SuperOperator] = {(): SuperOperator.identity(p.dim)}

    def path_op(f: PathString) -> SuperOperator:
        if f not in cache:
            cache[f] = compose(path_op(f[:-1]), steps[f[-1] - 1])
        return cache[f]

    return add(path_op(f) for f in pieces)


def bruteforce_terminates_fair(p: Program, rho0, budget: EnumerationBudget = DEFAULT_BUDGET, tol: Tolerances | None = None) -> bool:
    """True iff ``(sum_{f in Pi} F_f)^d (rho0) = 0``."""
    tol = resolve(tol)
    budget.check(p.m, p.dim)
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    pieces = enumerate_pi(p.m, p.dim, budget)
    total = pi_superop(p, pieces)
    gain = trace_gain(total)
    # each F_f is trace-nonincreasing; a gain this far below |Pi| is round-off
    if gain <= tol.zero * len(pieces):
        return True
    state = rho
    for _ in range(p.dim):
        state = total(state) / gain
        t = float(np.trace(state).real)
        if t <= tol.zero:
            return True
        state = state / t
    return False
