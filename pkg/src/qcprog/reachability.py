"""Reachable and uniformly repeatedly reachable spaces.

Two routes are provided for each space:

* closed forms on the matrix representation ``G`` of ``F / m``::

      H_R   = supp of the columns of unvec((I - G/2)^{-1} vec(rho0))
      H_URR = supp of the columns of unvec(G^d (I - G/2)^{-1} vec(rho0))

* the monotone subspace chains used to prove them::

      Y_0 = supp rho0,   Y_{n+1} = supp(rho0 + F(P_{Y_n}))     (increasing)
      Z_0 = H_R,         Z_{n+1} = supp F(P_{Z_n})             (decreasing)

The linear system is solved rather than inverted unless a
:class:`ReachCache` is supplied, in which case the stored inverse is reused
for every initial state.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .config import Tolerances, resolve
from .errors import NonConvergence, SingularSystem
from .linalg import Subspace, orthonormalize, subspace_eq, support
from .program import Program, normalized_superop, prepare_state, total_superop
from .superop import image, matrix_rep, unvec, vec


@dataclass(frozen=True)
class ReachResult:
    subspace: Subspace
    method: str
    iterations_used: int = 0
    chain_dims: tuple[int, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.subspace.dim


@dataclass(frozen=True)
class UrrResult:
    subspace: Subspace
    method: str
    iterations_used: int = 0
    chain_dims: tuple[int, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.subspace.dim


def program_fingerprint(p: Program) -> str:
    h = hashlib.sha256()
    h.update(np.int64(p.dim).tobytes())
    for e in p.processes:
        h.update(np.int64(len(e)).tobytes())
        h.update(np.ascontiguousarray(e.kraus).tobytes())
    h.update(np.ascontiguousarray(p.m0).tobytes())
    h.update(np.ascontiguousarray(p.m1).tobytes())
    return h.hexdigest()


class ReachCache:
    """Stored ``(I - G/2)^{-1}`` for a fixed program.

    Parameters
    ----------
    program : Program
    directory : path, optional
        When given, the inverse is loaded from / saved to
        ``<directory>/<fingerprint>.npz`` so separate runs share it.
    """

    def __init__(self, program: Program, directory: str | Path | None = None):
        self.program = program
        self.fingerprint = program_fingerprint(program)
        self.g = _g_matrix(program)
        self.inverse = None
        path = Path(directory) / f"{self.fingerprint}.npz" if directory else None
        if path is not None and path.exists():
            with np.load(path) as data:
                if data["inverse"].shape == self.g.shape:
                    self.inverse = data["inverse"]
        if self.inverse is None:
            self.inverse = _checked_inverse(self.g)
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                np.savez(path, inverse=self.inverse)

    def resolvent_apply(self, x: np.ndarray) -> np.ndarray:
        return self.inverse @ x


def _g_matrix(p: Program) -> np.ndarray:
    return matrix_rep(normalized_superop(p)).matrix


def _system(g: np.ndarray) -> np.ndarray:
    return np.eye(g.shape[0]) - 0.5 * g


def _checked_inverse(g: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.inv(_system(g))
    except np.linalg.LinAlgError as exc:  # spectral radius of G/2 is at most 1/2
        raise SingularSystem(str(exc)) from exc


def _resolvent_apply(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.solve(_system(g), x)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc


def _slices(x: np.ndarray) -> list[np.ndarray]:
    # <j_B|x> is column j of unvec(x)
    mat = unvec(x)
    return [mat[:, j] for j in range(mat.shape[1])]


def _max_slice_norm(x: np.ndarray) -> float:
    return float(max(np.linalg.norm(s) for s in _slices(x)))


def _resolvent_vector(p: Program, rho: np.ndarray, cache: ReachCache | None):
    if cache is not None:
        if cache.fingerprint != program_fingerprint(p):
            raise ValueError("cache was built for a different program")
        return cache.g, cache.resolvent_apply(vec(rho))
    g = _g_matrix(p)
    return g, _resolvent_apply(g, vec(rho))


def reach_algorithm1(p: Program, rho0, tol: Tolerances | None = None, cache: ReachCache | None = None) -> ReachResult:
    """Reachable space via one linear solve and Gram-Schmidt on d slices."""
    tol = resolve(tol)
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    start = support(rho, tol)
    if start.dim == p.dim:
        return ReachResult(Subspace.full(p.dim), "algorithm1")
    _, x = _resolvent_vector(p, rho, cache)
    basis = orthonormalize(_slices(x), dim=p.dim, tol=tol)
    return ReachResult(basis, "algorithm1")


def urr_algorithm2(p: Program, rho0, tol: Tolerances | None = None, cache: ReachCache | None = None) -> UrrResult:
    """Uniformly repeatedly reachable space via ``G^d (I - G/2)^{-1} vec(rho0)``."""
    tol = resolve(tol)
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    g, x = _resolvent_vector(p, rho, cache)
    y = np.linalg.matrix_power(g, p.dim) @ x
    # G is trace-nonincreasing, so the slices of x bound those of y; anything
    # below rank * that scale is round-off from mass that has terminated.
    basis = orthonormalize(_slices(y), dim=p.dim, tol=tol, scale=_max_slice_norm(x))
    return UrrResult(basis, "algorithm2")


def reach_iterative(p: Program, rho0, tol: Tolerances | None = None) -> ReachResult:
    """Increasing chain ``Y_{n+1} = supp(rho0 + F(P_{Y_n}))`` to its fixpoint."""
    tol = resolve(tol)
    rho = prepare_state(rho0, p.dim, tol, strict=False)
    d = p.dim
    y = support(rho, tol)
    dims = [y.dim]
    if y.dim == d:
        return ReachResult(y, "iterative", 0, tuple(dims))
    f = total_superop(p)
    # one spare round so a violated bound shows up in iterations_used
    for n in range(d + 1):
        nxt = support(rho + f(y.projector()), tol)
        dims.append(nxt.dim)
        if subspace_eq(nxt, y, tol):
            return ReachResult(y, "iterative", n, tuple(dims))
        y = nxt
    raise NonConvergence(f"reachability chain did not stabilize within {d} iterations: dims {dims}")


def urr_iterative(p: Program, rho0, tol: Tolerances | None = None) -> UrrResult:
    """Decreasing chain ``Z_{n+1} = F(Z_n)`` from ``Z_0 = H_R``."""
    tol = resolve(tol)
    d = p.dim
    z = reach_iterative(p, rho0, tol).subspace
    dims = [z.dim]
    f = total_superop(p)
    for n in range(d + 2):
        nxt = image(f, z, tol)
        dims.append(nxt.dim)
        if subspace_eq(nxt, z, tol):
            return UrrResult(z, "iterative", n, tuple(dims))
        z = nxt
    raise NonConvergence(f"repeated-reachability chain did not stabilize within {d + 1} iterations: dims {dims}")
