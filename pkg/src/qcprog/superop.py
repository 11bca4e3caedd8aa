"""Super-operators in Kraus form and their d^2 x d^2 matrix representation.

Convention: ``vec(A) = (A (x) I)|Phi>`` with ``|Phi> = sum_j |jj>``, which in
the computational basis is row stacking, ``vec(A)[i*d + j] = A[i, j]``.
With that convention the matrix representation of ``E = sum_i E_i . E_i^dag``
is ``sum_i E_i (x) conj(E_i)`` and satisfies ``M @ vec(A) == vec(E(A))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import Tolerances, resolve
from .errors import DimensionMismatch, NonPositiveScale
from .linalg import Subspace, as_square, orthocomplement, support

# compose() re-extracts a minimal Kraus set once a list grows past this many
# operators per d^2.
CANONICALIZE_FACTOR = 4


class SuperOperator:
    """A completely positive map given by its Kraus operators.

    Parameters
    ----------
    kraus : sequence of (d, d) array_like
        The operators ``E_i`` with ``E(rho) = sum_i E_i rho E_i^dag``.
    """

    __slots__ = ("_kraus",)

    def __init__(self, kraus: Sequence | np.ndarray):
        if len(kraus) == 0:
            raise DimensionMismatch("a super-operator needs at least one Kraus operator")
        mats = [as_square(k, "Kraus operator") for k in kraus]
        if len({m.shape for m in mats}) != 1:
            raise DimensionMismatch("Kraus operators must share one shape")
        ops = np.array(mats, dtype=complex)
        ops.setflags(write=False)
        self._kraus = ops

    @classmethod
    def _wrap(cls, ops: np.ndarray) -> "SuperOperator":
        obj = cls.__new__(cls)
        ops = np.ascontiguousarray(ops, dtype=complex)
        ops.setflags(write=False)
        obj._kraus = ops
        return obj

    @classmethod
    def unitary(cls, u) -> "SuperOperator":
        return cls([u])

    @classmethod
    def identity(cls, dim: int) -> "SuperOperator":
        return cls([np.eye(dim)])

    @property
    def kraus(self) -> np.ndarray:
        """Kraus operators stacked along axis 0, shape ``(r, d, d)``."""
        return self._kraus

    @property
    def dim(self) -> int:
        return self._kraus.shape[1]

    def __len__(self) -> int:
        return self._kraus.shape[0]

    def __call__(self, a) -> np.ndarray:
        return apply(self, a)

    def __repr__(self) -> str:
        return f"<SuperOperator d={self.dim} kraus={len(self)}>"


@dataclass(frozen=True)
class MatrixRep:
    dim: int
    matrix: np.ndarray

    def __matmul__(self, other):
        if isinstance(other, MatrixRep):
            return MatrixRep(self.dim, self.matrix @ other.matrix)
        return self.matrix @ other


@dataclass(frozen=True)
class ChannelReport:
    trace_preserving: bool
    trace_nonincreasing: bool
    max_eig_modulus: float
    tp_residual: float


def _check_dim(e: SuperOperator, d: int) -> None:
    if e.dim != d:
        raise DimensionMismatch(f"super-operator acts on dimension {e.dim}, operand has {d}")


def apply(e: SuperOperator, a) -> np.ndarray:
    a = as_square(a)
    _check_dim(e, a.shape[0])
    k = e.kraus
    return np.einsum("iab,bc,idc->ad", k, a, k.conj(), optimize=True)


def vec(a) -> np.ndarray:
    return as_square(a).reshape(-1).copy()


def unvec(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex).ravel()
    d = int(round(np.sqrt(x.shape[0])))
    if d * d != x.shape[0]:
        raise DimensionMismatch(f"length {x.shape[0]} is not a perfect square")
    return x.reshape(d, d).copy()


def matrix_rep(e: SuperOperator) -> MatrixRep:
    d = e.dim
    m = np.zeros((d * d, d * d), dtype=complex)
    for k in e.kraus:
        m += np.kron(k, k.conj())
    return MatrixRep(d, m)


def dual(e: SuperOperator) -> SuperOperator:
    """Heisenberg-picture adjoint, Kraus operators ``E_i^dag``."""
    return SuperOperator._wrap(np.conj(np.transpose(e.kraus, (0, 2, 1))))


def kraus_gram(e: SuperOperator) -> np.ndarray:
    """``sum_i E_i^dag E_i``; ``tr E(rho) = tr(kraus_gram(E) rho)``."""
    k = e.kraus
    return np.einsum("iba,ibc->ac", k.conj(), k)


def trace_gain(e: SuperOperator) -> float:
    """Largest possible ratio ``tr E(rho) / tr(rho)`` over positive ``rho``."""
    return float(np.linalg.eigvalsh(0.5 * (kraus_gram(e) + kraus_gram(e).conj().T))[-1])


def image(e: SuperOperator, x: Subspace, tol: Tolerances | None = None) -> Subspace:
    """``E(X) = supp E(P_X)``."""
    _check_dim(e, x.ambient_dim)
    if x.dim == 0:
        return Subspace.zero(x.ambient_dim)
    return support(apply(e, x.projector()), tol, scale=trace_gain(e))


def preimage(e: SuperOperator, x: Subspace, tol: Tolerances | None = None) -> Subspace:
    """``E^{-1}(X) = [supp E*(P_{X^perp})]^perp``."""
    _check_dim(e, x.ambient_dim)
    perp = orthocomplement(x)
    if perp.dim == 0:
        return Subspace.full(x.ambient_dim)
    e_star = dual(e)
    return orthocomplement(support(apply(e_star, perp.projector()), tol, scale=trace_gain(e_star)))


def validate_channel(e: SuperOperator, tol: Tolerances | None = None) -> ChannelReport:
    tol = resolve(tol)
    gram = kraus_gram(e)
    residual = float(np.linalg.norm(gram - np.eye(e.dim)))
    top = float(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[-1])
    radius = float(np.max(np.abs(np.linalg.eigvals(matrix_rep(e).matrix))))
    return ChannelReport(
        trace_preserving=residual <= tol.channel,
        trace_nonincreasing=top <= 1.0 + tol.channel,
        max_eig_modulus=radius,
        tp_residual=residual,
    )


def canonicalize(e: SuperOperator, tol: Tolerances | None = None) -> SuperOperator:
    """Re-extract at most d^2 Kraus operators from the Choi matrix."""
    d = e.dim
    vecs = e.kraus.reshape(len(e), d * d)
    choi = vecs.T @ vecs.conj()
    w, v = np.linalg.eigh(0.5 * (choi + choi.conj().T))
    top = w[-1]
    if top <= 0:
        return SuperOperator._wrap(np.zeros((1, d, d), dtype=complex))
    # keep everything above round-off; this is an exact rewrite, not a truncation
    keep = w > 1e-15 * d * d * top
    ops = (v[:, keep] * np.sqrt(w[keep])).T.reshape(-1, d, d)
    return SuperOperator._wrap(ops[::-1])


def _maybe_canonicalize(e: SuperOperator) -> SuperOperator:
    if len(e) > CANONICALIZE_FACTOR * e.dim * e.dim:
        return canonicalize(e)
    return e


def compose(first: SuperOperator, then: SuperOperator) -> SuperOperator:
    """The map ``rho -> then(first(rho))``; Kraus set ``{T_j F_i}``."""
    _check_dim(then, first.dim)
    ops = np.einsum("jab,ibc->jiac", then.kraus, first.kraus).reshape(-1, first.dim, first.dim)
    return _maybe_canonicalize(SuperOperator._wrap(ops))


def add(ops: Iterable[SuperOperator]) -> SuperOperator:
    """Pointwise sum; concatenates the Kraus lists."""
    ops = list(ops)
    if not ops:
        raise DimensionMismatch("sum of an empty list of super-operators")
    d = ops[0].dim
    for e in ops:
        _check_dim(e, d)
    return _maybe_canonicalize(SuperOperator._wrap(np.concatenate([e.kraus for e in ops])))


def scale(e: SuperOperator, p: float) -> SuperOperator:
    if not p > 0:
        raise NonPositiveScale(f"scale factor must be positive, got {p}")
    return SuperOperator._wrap(e.kraus * np.sqrt(p))
