"""Random program families for property tests and cross-method checks.

Every generator takes a ``numpy.random.Generator`` and returns
``(program, rho0)`` with ``rho0`` a pure density matrix.

Families
--------
generic
    Channels from random unitary dilations, random two-outcome measurement.
block
    Dynamics and measurement that leave a random proper subspace invariant,
    with ``rho0`` inside it, so reachable spaces are proper subspaces.
chain
    Level-raising channels in a random basis with the top level absorbing;
    terminates under every schedule within ``d`` steps.
fair_chain
    Process 1 only applies phases, the rest are level-raising; terminates
    under fair schedules but not under ``1^omega``.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .program import Program
from .superop import SuperOperator

KINDS = ("generic", "block", "chain", "fair_chain")


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(d, random_state=rng)


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_channel(d: int, rng: np.random.Generator, rank: int | None = None) -> SuperOperator:
    """Trace-preserving channel ``E_i = (<i| (x) I) U (|0> (x) I)``."""
    if rank is None:
        rank = int(rng.integers(1, 3))
    v = random_unitary(d * rank, rng)[:, :d]
    return SuperOperator(v.reshape(rank, d, d))


def random_measurement(d: int, rng: np.random.Generator, projective: bool | None = None):
    """``(M0, M1)`` satisfying the completeness equation."""
    if projective is None:
        projective = bool(rng.random() < 0.7)
    if projective:
        u = random_unitary(d, rng)
        r = int(rng.integers(1, d)) if d > 1 else 1
        p1 = u[:, :r] @ u[:, :r].conj().T
        return np.eye(d) - p1, p1
    v = random_unitary(2 * d, rng)[:, :d]
    return v[:d], v[d:]


def random_program(d: int, m: int, rng: np.random.Generator, kind: str = "generic"):
    build = {
        "generic": _generic,
        "block": _block,
        "chain": _chain,
        "fair_chain": _fair_chain,
    }[kind]
    return build(d, m, rng)


def random_instance(d: int, m: int, rng: np.random.Generator, weights=(0.35, 0.35, 0.15, 0.15)):
    kind = str(rng.choice(KINDS, p=weights))
    if kind == "fair_chain" and m < 2:
        kind = "chain"
    return random_program(d, m, rng, kind)


def _pure_dm(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def _generic(d, m, rng):
    procs = tuple(random_channel(d, rng) for _ in range(m))
    m0, m1 = random_measurement(d, rng)
    return Program(procs, m0, m1), _pure_dm(random_pure(d, rng))


def _block(d, m, rng):
    if d < 2:
        return _generic(d, m, rng)
    w = random_unitary(d, rng)
    k = int(rng.integers(1, d))

    def blockdiag(a, b):
        out = np.zeros((d, d), dtype=complex)
        out[:k, :k] = a
        out[k:, k:] = b
        return w @ out @ w.conj().T

    procs = []
    for _ in range(m):
        r = int(rng.integers(1, 3))
        top = random_channel(k, rng, r).kraus
        bottom = random_channel(d - k, rng, r).kraus
        procs.append(SuperOperator([blockdiag(a, b) for a, b in zip(top, bottom)]))

    # a projective measurement diagonal in the rotated basis, nontrivial on the top block
    diag = rng.random(d) < 0.5
    if k > 1:
        diag[int(rng.integers(0, k))] = False
    else:
        diag[0] = False
    p0 = np.diag(diag.astype(float))
    m0 = w @ p0 @ w.conj().T
    m1 = w @ (np.eye(d) - p0) @ w.conj().T

    v = np.zeros(d, dtype=complex)
    v[:k] = random_pure(k, rng)
    return Program(tuple(procs), m0, m1), _pure_dm(w @ v)


def _chain_channel(d: int, w: np.ndarray, rng, families: int = 2) -> SuperOperator:
    weights = rng.dirichlet(np.ones(families))
    ops = []
    for p in weights:
        for i in range(d):
            target = np.zeros(d, dtype=complex)
            if i < d - 1:
                target[i + 1 :] = random_pure(d - 1 - i, rng)
            else:
                target[:] = random_pure(d, rng)
            k = np.zeros((d, d), dtype=complex)
            k[:, i] = np.sqrt(p) * target
            ops.append(w @ k @ w.conj().T)
    return SuperOperator(ops)


def _chain_measurement(d: int, w: np.ndarray):
    p0 = np.zeros((d, d))
    p0[d - 1, d - 1] = 1
    return w @ p0 @ w.conj().T, w @ (np.eye(d) - p0) @ w.conj().T


def _chain(d, m, rng):
    w = random_unitary(d, rng)
    procs = tuple(_chain_channel(d, w, rng) for _ in range(m))
    m0, m1 = _chain_measurement(d, w)
    return Program(procs, m0, m1), _pure_dm(w @ random_pure(d, rng))


def _fair_chain(d, m, rng):
    if m < 2:
        return _chain(d, m, rng)
    w = random_unitary(d, rng)
    phases = np.exp(2j * np.pi * rng.random(d))
    idle = SuperOperator.unitary(w @ np.diag(phases) @ w.conj().T)
    procs = (idle,) + tuple(_chain_channel(d, w, rng) for _ in range(m - 1))
    m0, m1 = _chain_measurement(d, w)
    # keep some weight below the absorbing level so 1^omega survives
    v = random_pure(d, rng)
    v[d - 1] *= 0.5
    v /= np.linalg.norm(v)
    return Program(procs, m0, m1), _pure_dm(w @ v)
