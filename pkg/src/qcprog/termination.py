"""Termination under every schedule and under fair schedules.

Under every schedule the program terminates iff ``F^d(rho0) = 0``. Under
fair schedules it terminates iff ``M^d(rho0) = 0`` where

    G_poly = sum_{i<d} N^i,           N = rep(F) = sum_k N_k
    M      = sum over permutations s of N_{s_m} G_poly ... G_poly N_{s_1}

Zero tests
----------
All maps involved are completely positive, so the propagated operator stays
positive and its trace vanishes exactly when the operator does. Each map is
first divided by its trace gain (the largest ``tr T(rho) / tr rho``), making
it trace-nonincreasing, and the state is renormalized to unit trace after
every application. A step whose surviving trace fraction is at most
``tol.zero`` is declared to annihilate the state. ``residual_norm`` is the
smallest surviving fraction seen, so ``terminates == (residual_norm <= zero)``.

A map whose trace gain is at most ``tol.zero`` times its a-priori bound
(``m`` for ``F``; ``m! (sum_{i<d} m^i)^(m-1)`` for ``M``) is itself round-off
and annihilates everything; normalizing by such a gain would blow the noise
back up to unit size.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .config import Tolerances, resolve
from .errors import TooManyProcesses
from .program import (
    PathString,
    Program,
    prepare_state,
    round_robin,
    step_superops,
)
from .superop import MatrixRep, matrix_rep, unvec, vec

DEFAULT_MAX_M = 8


@dataclass(frozen=True)
class TerminationVerdict:
    terminates: bool
    schedule: str
    residual_norm: float
    witness: PathString | None = None
    steps_to_zero: int | None = None
    log10_survival: float = 0.0
    marginal: bool = False

    @property
    def output_bit(self) -> int:
        """Output ``b`` of the decision procedure: 0 terminates, 1 does not."""
        return 0 if self.terminates else 1


@dataclass(frozen=True)
class PermutationMachinery:
    dim: int
    permutations: tuple[PathString, ...]
    step_reps: tuple[np.ndarray, ...]
    g_poly: np.ndarray
    per_perm: tuple[np.ndarray, ...]
    total: np.ndarray = field(repr=False)

    def as_matrix_rep(self) -> MatrixRep:
        return MatrixRep(self.dim, self.total)


def trace_functional(mat: np.ndarray) -> np.ndarray:
    """Row vector ``w`` with ``w @ vec(rho) == tr(mat-map(rho))``."""
    d = int(round(np.sqrt(mat.shape[0])))
    return vec(np.eye(d)) @ mat


def rep_trace_gain(mat: np.ndarray) -> float:
    """Trace gain of the CP map with matrix representation ``mat``."""
    w = unvec(trace_functional(mat))  # tr T(rho) = sum_ij w_ij rho_ij = tr(w^T rho)
    h = w.T
    return float(np.linalg.eigvalsh(0.5 * (h + h.conj().T))[-1])


def _trace(x: np.ndarray) -> float:
    return float(np.trace(unvec(x)).real)


def power_zero_test(mat: np.ndarray, rho: np.ndarray, power: int, tol: Tolerances, gain_bound: float = 1.0):
    """Apply the CP map ``mat`` ``power`` times; see the module docstring.

    Returns ``(annihilated, min_fraction, steps_to_zero, log10_survival)``.
    """
    gain = rep_trace_gain(mat)
    if gain <= tol.zero * gain_bound:
        return True, max(gain, 0.0) / gain_bound, 1, -math.inf
    normed = mat / gain
    x = vec(rho) / _trace(vec(rho))
    smallest = 1.0
    log_survival = 0.0
    for step in range(1, power + 1):
        x = normed @ x
        t = max(_trace(x), 0.0)
        smallest = min(smallest, t)
        if t <= tol.zero:
            return True, smallest, step, -math.inf if t == 0 else log_survival + math.log10(t)
        log_survival += math.log10(t)
        x = x / t
    return False, smallest, None, log_survival


def _marginal(residual: float, tol: Tolerances) -> bool:
    return tol.zero / tol.marginal_factor < residual <= tol.zero * tol.marginal_factor


def greedy_witness(p: Program, rho: np.ndarray, length: int, tol: Tolerances) -> PathString | None:
    """Best-effort path of the given length keeping the state nonzero.

    At each step picks the process whose step leaves the most trace; returns
    ``None`` if the greedy path dies out.
    """
    steps = step_superops(p)
    path = []
    state = rho
    for _ in range(length):
        candidates = [f(state) for f in steps]
        traces = [float(np.trace(c).real) for c in candidates]
        k = int(np.argmax(traces))
        if traces[k] <= tol.zero:
            return None
        path.append(k + 1)
        state = candidates[k] / traces[k]
    return tuple(path)


def terminates_all(p: Program, rho0, tol: Tolerances | None = None) -> TerminationVerdict:
    """Termination under every schedule: ``F^d(rho0) = 0``."""
    tol = resolve(tol)
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    n = np.zeros((p.dim**2, p.dim**2), dtype=complex)
    for f in step_superops(p):
        n += matrix_rep(f).matrix
    zero, residual, steps, logs = power_zero_test(n, rho, p.dim, tol, gain_bound=p.m)
    witness = None if zero else greedy_witness(p, rho, p.dim, tol)
    return TerminationVerdict(
        terminates=zero,
        schedule="all",
        residual_norm=residual,
        witness=witness,
        steps_to_zero=steps,
        log10_survival=logs,
        marginal=_marginal(residual, tol),
    )


def _check_guard(m: int, max_m: int | None) -> None:
    limit = DEFAULT_MAX_M if max_m is None else max_m
    if m > limit:
        raise TooManyProcesses(f"{m} processes need {math.factorial(m)} permutation products; guard is m <= {limit}")


def machinery_gain_bound(m: int, d: int) -> float:
    """Upper bound on the trace gain of ``M``: each ``N_k`` is trace-nonincreasing."""
    return float(math.factorial(m)) * float(sum(m**i for i in range(d))) ** (m - 1)


def build_permutation_machinery(p: Program, max_m: int | None = None) -> PermutationMachinery:
    _check_guard(p.m, max_m)
    d2 = p.dim**2
    reps = tuple(matrix_rep(f).matrix for f in step_superops(p))
    eye = np.eye(d2, dtype=complex)
    n = np.zeros((d2, d2), dtype=complex)
    for r in reps:
        n = r + n
    g = eye.copy()
    for _ in range(p.dim - 1):
        g = eye + n @ g
    perms = tuple(itertools.permutations(range(1, p.m + 1)))
    per_perm = []
    total = np.zeros((d2, d2), dtype=complex)
    for perm in perms:
        acc = reps[perm[0] - 1]
        for k in perm[1:]:
            acc = reps[k - 1] @ g @ acc
        per_perm.append(acc)
        total = total + acc
    return PermutationMachinery(
        dim=p.dim,
        permutations=perms,
        step_reps=reps,
        g_poly=g,
        per_perm=tuple(per_perm),
        total=total,
    )


def terminates_fair(
    p: Program,
    rho0,
    tol: Tolerances | None = None,
    machinery: PermutationMachinery | None = None,
    max_m: int | None = None,
    witness_pi_limit: int = 2000,
) -> TerminationVerdict:
    """Termination under the fair schedule: ``M^d(rho0) = 0``."""
    tol = resolve(tol)
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    if machinery is None:
        machinery = build_permutation_machinery(p, max_m)
    zero, residual, steps, logs = power_zero_test(
        machinery.total, rho, p.dim, tol, gain_bound=machinery_gain_bound(p.m, p.dim)
    )
    witness = None
    if not zero:
        witness = _fair_witness(p, rho, tol, witness_pi_limit)
    return TerminationVerdict(
        terminates=zero,
        schedule="fair",
        residual_norm=residual,
        witness=witness,
        steps_to_zero=steps,
        log10_survival=logs,
        marginal=_marginal(residual, tol),
    )


def _fair_witness(p: Program, rho: np.ndarray, tol: Tolerances, limit: int) -> PathString | None:
    """Greedy concatenation of ``d`` fair pieces from the permutation-expansion set."""
    from .oracle import EnumerationBudget, enumerate_pi
    from .errors import BudgetExceeded

    try:
        pieces = enumerate_pi(p.m, p.dim, EnumerationBudget(max_m=p.m, max_d=p.dim, max_pi_size=limit))
    except BudgetExceeded:
        return None
    steps = step_superops(p)
    path: list[int] = []
    state = rho
    for _ in range(p.dim):
        best, best_tr, best_state = None, 0.0, None
        # pieces are sorted, so consecutive ones share prefixes
        memo: dict[PathString, np.ndarray] = {(): state}
        for piece in pieces:
            n = len(piece)
            while piece[:n] not in memo:
                n -= 1
            s = memo[piece[:n]]
            for j in range(n, len(piece)):
                s = steps[piece[j] - 1](s)
                memo[piece[: j + 1]] = s
            t = float(np.trace(s).real)
            if t > best_tr:
                best, best_tr, best_state = piece, t, s
        if best is None or best_tr <= tol.zero:
            return None
        path.extend(best)
        state = best_state / best_tr
    return tuple(path)


@dataclass(frozen=True)
class PrefixReport:
    path: PathString
    residual: float
    within_zero: bool


def fair_prefix_check(p: Program, rho0, tol: Tolerances | None = None) -> PrefixReport:
    """Surviving trace along the round-robin prefix ``(1 2 .. m)^d``."""
    tol = resolve(tol)
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    path = round_robin(p.m, p.m * p.dim)
    steps = step_superops(p)
    state = rho
    for k in path:
        state = steps[k - 1](state)
    residual = max(float(np.trace(state).real), 0.0)
    return PrefixReport(path=path, residual=residual, within_zero=residual <= tol.zero)
