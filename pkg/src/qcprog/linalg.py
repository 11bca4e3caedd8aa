"""Tolerance-aware complex linear algebra on a finite-dimensional state space.

Subspaces are stored as an orthonormal basis (the columns of a ``d x k``
array); projectors are derived on demand.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .config import Tolerances, resolve
from .errors import DimensionMismatch, EmptyAmbient, NotHermitian, NotPositive


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got shape {m.shape}")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    return m


def is_hermitian(a, tol: Tolerances | None = None) -> bool:
    tol = resolve(tol)
    a = as_square(a)
    return np.linalg.norm(a - a.conj().T) <= tol.herm * max(1.0, np.linalg.norm(a))


def is_psd(a, tol: Tolerances | None = None) -> bool:
    tol = resolve(tol)
    if not is_hermitian(a, tol):
        return False
    w = np.linalg.eigvalsh(_hermitian_part(as_square(a)))
    return w[0] >= -tol.psd * max(1.0, w[-1])


def _hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


class Subspace:
    """A subspace of C^d held as an orthonormal basis.

    Instances are immutable; all lattice operations return new objects.
    Construct through :func:`orthonormalize`, :func:`support` or the
    ``zero``/``full``/``span`` helpers rather than passing a basis directly,
    unless the basis is already known to be orthonormal.
    """

    __slots__ = ("_basis",)

    def __init__(self, basis: np.ndarray, *, check: bool = True, tol: Tolerances | None = None):
        basis = np.array(basis, dtype=complex)
        if basis.ndim != 2:
            raise DimensionMismatch("basis must be a d x k array of column vectors")
        if basis.shape[1] > basis.shape[0]:
            raise DimensionMismatch(
                f"{basis.shape[1]} basis vectors cannot be independent in dimension {basis.shape[0]}"
            )
        if check and basis.shape[1]:
            gram = basis.conj().T @ basis
            if np.linalg.norm(gram - np.eye(basis.shape[1])) > resolve(tol).orth:
                raise ValueError("basis is not orthonormal")
        basis.setflags(write=False)
        self._basis = basis

    @classmethod
    def zero(cls, dim: int) -> "Subspace":
        return cls(np.zeros((dim, 0), dtype=complex), check=False)

    @classmethod
    def full(cls, dim: int) -> "Subspace":
        return cls(np.eye(dim, dtype=complex), check=False)

    @classmethod
    def span(cls, vectors: Iterable, dim: int | None = None, tol: Tolerances | None = None) -> "Subspace":
        return orthonormalize(list(vectors), dim=dim, tol=tol)

    @property
    def basis(self) -> np.ndarray:
        """Orthonormal basis, one vector per column."""
        return self._basis

    @property
    def vectors(self) -> list[np.ndarray]:
        return [self._basis[:, i] for i in range(self.dim)]

    @property
    def ambient_dim(self) -> int:
        return self._basis.shape[0]

    @property
    def dim(self) -> int:
        return self._basis.shape[1]

    def projector(self) -> np.ndarray:
        return self._basis @ self._basis.conj().T

    def contains(self, vector, tol: Tolerances | None = None) -> bool:
        v = np.asarray(vector, dtype=complex).ravel()
        if v.shape[0] != self.ambient_dim:
            raise DimensionMismatch("vector dimension differs from ambient dimension")
        n = np.linalg.norm(v)
        if n == 0:
            return True
        residual = v - self._basis @ (self._basis.conj().T @ v)
        return np.linalg.norm(residual) <= resolve(tol).sub * n

    def __repr__(self) -> str:
        return f"<Subspace dim={self.dim} of C^{self.ambient_dim}>"

    # Lattice sugar
    def __or__(self, other: "Subspace") -> "Subspace":
        return join(self, other)

    def __invert__(self) -> "Subspace":
        return orthocomplement(self)

    def __le__(self, other: "Subspace") -> bool:
        return subspace_leq(self, other)

    def __ge__(self, other: "Subspace") -> bool:
        return subspace_leq(other, self)


def support(rho, tol: Tolerances | None = None, scale: float | None = None) -> Subspace:
    """Support of a positive semidefinite operator.

    Eigenvectors are kept when their eigenvalue exceeds
    ``tol.rank * max(lambda_max, scale)``. ``scale`` is an optional reference
    magnitude for callers that know how large ``rho`` would be absent
    cancellation; it keeps round-off in a numerically vanishing operator from
    being promoted to a spurious support.
    """
    tol = resolve(tol)
    rho = as_square(rho, "rho")
    d = rho.shape[0]
    if d == 0:
        raise EmptyAmbient("support of a 0x0 operator")
    fro = np.linalg.norm(rho)
    if np.linalg.norm(rho - rho.conj().T) > tol.herm * max(1.0, fro):
        raise NotHermitian("operator is not Hermitian within tolerance")
    if fro == 0.0:
        return Subspace.zero(d)
    w, v = np.linalg.eigh(_hermitian_part(rho))
    top = w[-1]
    if w[0] < -tol.psd * max(1.0, top, scale or 0.0):
        raise NotPositive(f"operator has eigenvalue {w[0]:.3e} < 0")
    cutoff = tol.rank * max(top, scale or 0.0)
    keep = w > cutoff
    if not keep.any():
        return Subspace.zero(d)
    # eigh sorts ascending; report the dominant direction first
    return Subspace(v[:, keep][:, ::-1], check=False)


def numerical_rank(rho, tol: Tolerances | None = None) -> int:
    return support(rho, tol).dim


def orthonormalize(
    vectors: Sequence,
    dim: int | None = None,
    tol: Tolerances | None = None,
    scale: float | None = None,
) -> Subspace:
    """Gram-Schmidt with one re-orthogonalization pass.

    A vector is dropped when its residual norm is at most
    ``tol.rank * max(largest input norm, scale)``.
    """
    tol = resolve(tol)
    vecs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if dim is None:
        if not vecs:
            raise EmptyAmbient("cannot infer the ambient dimension of an empty vector list")
        dim = vecs[0].shape[0]
    if dim == 0:
        raise EmptyAmbient("ambient dimension is 0")
    for v in vecs:
        if v.shape[0] != dim:
            raise DimensionMismatch(f"vector of length {v.shape[0]} in dimension {dim}")
    if not vecs:
        return Subspace.zero(dim)

    biggest = max(float(np.linalg.norm(v)) for v in vecs)
    cutoff = tol.rank * max(biggest, scale or 0.0)
    if cutoff == 0.0:
        return Subspace.zero(dim)

    basis: list[np.ndarray] = []
    for v in vecs:
        if len(basis) == dim:
            break
        z = v.copy()
        for _ in range(2):
            for b in basis:
                z -= np.vdot(b, z) * b
        n = np.linalg.norm(z)
        if n > cutoff:
            basis.append(z / n)
    if not basis:
        return Subspace.zero(dim)
    return Subspace(np.column_stack(basis), check=False)


def _same_ambient(x: Subspace, y: Subspace) -> None:
    if x.ambient_dim != y.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions differ: {x.ambient_dim} vs {y.ambient_dim}")


def join(x: Subspace, *others: Subspace, tol: Tolerances | None = None) -> Subspace:
    """Span of the union of the given subspaces."""
    for y in others:
        _same_ambient(x, y)
    vectors = list(x.vectors)
    for y in others:
        vectors.extend(y.vectors)
    return orthonormalize(vectors, dim=x.ambient_dim, tol=tol)


def join_all(subspaces: Iterable[Subspace], dim: int, tol: Tolerances | None = None) -> Subspace:
    acc = Subspace.zero(dim)
    for s in subspaces:
        _same_ambient(acc, s)
        acc = join(acc, s, tol=tol)
    return acc


def orthocomplement(x: Subspace) -> Subspace:
    d, k = x.ambient_dim, x.dim
    if k == 0:
        return Subspace.full(d)
    if k == d:
        return Subspace.zero(d)
    q, _ = np.linalg.qr(x.basis, mode="complete")
    return Subspace(q[:, k:], check=False)


def subspace_eq(x: Subspace, y: Subspace, tol: Tolerances | None = None) -> bool:
    _same_ambient(x, y)
    if x.dim != y.dim:
        return False
    return np.linalg.norm(x.projector() - y.projector()) <= resolve(tol).sub


def subspace_leq(x: Subspace, y: Subspace, tol: Tolerances | None = None) -> bool:
    """``x`` is contained in ``y``."""
    _same_ambient(x, y)
    px = x.projector()
    return np.linalg.norm(y.projector() @ px - px) <= resolve(tol).sub


def projector_distance(x: Subspace, y: Subspace) -> float:
    _same_ambient(x, y)
    return float(np.linalg.norm(x.projector() - y.projector()))
