"""Concurrent quantum programs and their execution-path semantics.

A program is a family of trace-preserving super-operators ``E_1 .. E_m`` on a
shared d-dimensional space together with a yes/no termination measurement
``{M0, M1}``. One guarded step of process ``k`` is
``F_k(rho) = E_k(M1 rho M1^dag)``; a finite path ``f = s_1 .. s_n`` acts as
``F_f = F_{s_n} o ... o F_{s_1}``. States are partial density operators
(probability of not having terminated folded into the trace).

Process labels are the integers ``1..m``; names are kept only for display
and the file format.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .config import Tolerances, resolve
from .errors import DimensionMismatch, InvalidState, UnknownProcess
from .linalg import as_square, is_psd
from .superop import SuperOperator, add, compose, kraus_gram, scale

PathString = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Program:
    processes: tuple[SuperOperator, ...]
    m0: np.ndarray
    m1: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.processes:
            raise DimensionMismatch("a program needs at least one process")
        procs = tuple(p if isinstance(p, SuperOperator) else SuperOperator(p) for p in self.processes)
        d = procs[0].dim
        for k, p in enumerate(procs, start=1):
            if p.dim != d:
                raise DimensionMismatch(f"process {k} acts on dimension {p.dim}, expected {d}")
        m0, m1 = as_square(self.m0, "M0"), as_square(self.m1, "M1")
        for name, mat in (("M0", m0), ("M1", m1)):
            if mat.shape[0] != d:
                raise DimensionMismatch(f"{name} is {mat.shape[0]}x{mat.shape[0]}, expected {d}x{d}")
            mat.setflags(write=False)
        names = tuple(self.names) or tuple(f"p{k}" for k in range(1, len(procs) + 1))
        if len(names) != len(procs):
            raise DimensionMismatch("one name per process is required")
        object.__setattr__(self, "processes", procs)
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return self.processes[0].dim

    @property
    def m(self) -> int:
        return len(self.processes)

    @property
    def labels(self) -> range:
        return range(1, self.m + 1)

    def process(self, k: int) -> SuperOperator:
        if k not in self.labels:
            raise UnknownProcess(f"process label {k!r} not in 1..{self.m}")
        return self.processes[k - 1]


@dataclass(frozen=True)
class ProgramReport:
    ok: bool
    dim: int
    m: int
    completeness_residual: float
    tp_residuals: tuple[float, ...]
    failures: tuple[dict, ...] = field(default=())


def validate(p: Program, tol: Tolerances | None = None) -> ProgramReport:
    """Check measurement completeness and trace preservation of every process."""
    tol = resolve(tol)
    d = p.dim
    eye = np.eye(d)
    failures = []
    comp = float(np.linalg.norm(p.m0.conj().T @ p.m0 + p.m1.conj().T @ p.m1 - eye))
    if comp > tol.channel:
        failures.append({"check": "completeness", "residual": comp, "tolerance": tol.channel})
    residuals = []
    for k, e in zip(p.labels, p.processes):
        r = float(np.linalg.norm(kraus_gram(e) - eye))
        residuals.append(r)
        if r > tol.channel:
            failures.append(
                {"check": "trace_preserving", "process": k, "name": p.names[k - 1], "residual": r, "tolerance": tol.channel}
            )
    return ProgramReport(
        ok=not failures,
        dim=d,
        m=p.m,
        completeness_residual=comp,
        tp_residuals=tuple(residuals),
        failures=tuple(failures),
    )


def measurement_op(p: Program, outcome: int = 1) -> SuperOperator:
    return SuperOperator([p.m1 if outcome == 1 else p.m0])


def step_superop(p: Program, k: int) -> SuperOperator:
    """``F_k(rho) = E_k(M1 rho M1^dag)``."""
    return compose(measurement_op(p, 1), p.process(k))


def step_superops(p: Program) -> list[SuperOperator]:
    return [step_superop(p, k) for k in p.labels]


def total_superop(p: Program) -> SuperOperator:
    """``F = sum_k F_k``."""
    return add(step_superops(p))


def normalized_superop(p: Program) -> SuperOperator:
    """``G = F / m``, trace-nonincreasing."""
    return scale(total_superop(p), 1.0 / p.m)


# -- states -----------------------------------------------------------------


def prepare_state(state, dim: int | None = None, tol: Tolerances | None = None, *, strict: bool = True) -> np.ndarray:
    """Turn a pure vector or a density matrix into a density matrix.

    With ``strict`` the trace must be 1 within ``tol.state_trace`` and is then
    renormalized exactly. Without it any nonzero positive operator is accepted
    and scaled to unit trace; supports, and therefore every analysis verdict,
    are invariant under that scaling.
    """
    tol = resolve(tol)
    a = np.asarray(state, dtype=complex)
    if a.ndim == 1 or (a.ndim == 2 and 1 in a.shape and a.shape[0] != a.shape[1]):
        v = a.ravel()
        rho = np.outer(v, v.conj())
    elif a.ndim == 2 and a.shape[0] == a.shape[1]:
        rho = a.copy()
    else:
        raise InvalidState(f"state must be a vector or a square matrix, got shape {a.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise InvalidState(f"state has dimension {rho.shape[0]}, program has {dim}")
    if not is_psd(rho, tol):
        raise InvalidState("initial state is not positive semidefinite")
    tr = float(np.trace(rho).real)
    if strict and abs(tr - 1.0) > tol.state_trace:
        raise InvalidState(f"initial state has trace {tr!r}, expected 1")
    if tr <= 0:
        raise InvalidState("initial state is zero")
    rho = 0.5 * (rho + rho.conj().T) / tr
    return rho


# -- paths ------------------------------------------------------------------


def as_path(f, m: int | None = None) -> PathString:
    """Normalize a path given as ``"1212"``, ``"1,2,10"`` or a sequence of ints."""
    if isinstance(f, str):
        text = f.strip()
        if "," in text or " " in text:
            syms = tuple(int(t) for t in text.replace(",", " ").split())
        else:
            syms = tuple(int(c) for c in text)
    else:
        syms = tuple(int(s) for s in f)
    if m is not None:
        for s in syms:
            if not 1 <= s <= m:
                raise UnknownProcess(f"path symbol {s} not in 1..{m}")
    return syms


def path_str(f: Sequence[int]) -> str:
    if any(s > 9 for s in f):
        return ",".join(map(str, f))
    return "".join(map(str, f))


def path_superop(p: Program, f) -> SuperOperator:
    """``F_f`` as a Kraus list (identity for the empty path)."""
    f = as_path(f, p.m)
    acc = SuperOperator.identity(p.dim)
    for k in f:
        acc = compose(acc, step_superop(p, k))
    return acc


@dataclass(frozen=True)
class ExecutionTrace:
    path: PathString
    states: tuple[np.ndarray, ...]
    term_probs: tuple[float, ...]
    nonterm_probs: tuple[float, ...]


def run_path(p: Program, f, rho0, tol: Tolerances | None = None) -> ExecutionTrace:
    """Partial states ``F_{f[1..n]}(rho0)`` along ``f``.

    ``term_probs[n]`` is the probability of terminating at the measurement
    that follows step ``n``; ``nonterm_probs[n]`` is the trace of
    ``states[n]``.
    """
    f = as_path(f, p.m)
    rho = prepare_state(rho0, p.dim, tol)
    steps = {k: step_superop(p, k) for k in set(f)}
    states = [rho]
    for k in f:
        rho = steps[k](rho)
        states.append(rho)
    term = tuple(float(np.trace(p.m0 @ s @ p.m0.conj().T).real) for s in states)
    nonterm = tuple(float(np.trace(s).real) for s in states)
    return ExecutionTrace(path=f, states=tuple(states), term_probs=term, nonterm_probs=nonterm)


# -- fairness ---------------------------------------------------------------


@dataclass(frozen=True)
class FairnessStats:
    prefix_len: int
    counts: tuple[int, ...]

    @property
    def min_frequency(self) -> float:
        if self.prefix_len == 0:
            return 0.0
        return min(self.counts) / self.prefix_len

    @property
    def fairness_index(self) -> str:
        # lim inf over an infinite path; a finite prefix cannot decide it
        return "undetermined from prefix"


def fairness_stats(f, m: int) -> FairnessStats:
    f = as_path(f, m)
    counts = [0] * m
    for s in f:
        counts[s - 1] += 1
    return FairnessStats(prefix_len=len(f), counts=tuple(counts))


def is_fair_piece(f, m: int) -> bool:
    return all(c > 0 for c in fairness_stats(f, m).counts)


def round_robin(m: int, n: int) -> PathString:
    """First ``n`` symbols of ``(1 2 .. m)^omega``."""
    return tuple(itertools.islice(itertools.cycle(range(1, m + 1)), n))


def repeat_word(word, n: int) -> PathString:
    """First ``n`` symbols of ``word^omega``."""
    w = as_path(word)
    if not w:
        raise ValueError("cannot repeat the empty word")
    return tuple(itertools.islice(itertools.cycle(w), n))


def random_prefix(m: int, n: int, seed: int | None = None) -> PathString:
    rng = np.random.default_rng(seed)
    return tuple(int(s) for s in rng.integers(1, m + 1, size=n))


def prefixes(word, m: int | None = None) -> Iterator[PathString]:
    w = as_path(word, m)
    for n in range(len(w) + 1):
        yield w[:n]
