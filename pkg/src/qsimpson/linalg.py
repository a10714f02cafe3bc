"""Small dense complex linear algebra: state vectors and orthogonal projectors.

Everything here is sized for Hilbert spaces of dimension at most ~16, so the
implementations favour clarity and explicit tolerances over speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotAProjector, RankDeficient

# Projector validation (Hermitian / idempotent residuals).
VALIDATION_TOL = 1e-10
# Relative residual below which a spanning vector counts as dependent.
RANK_TOL = 1e-9
# Exact algebraic identities (complements, Pythagoras).
IDENTITY_TOL = 1e-12


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite amplitude")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude vector. May be unnormalized or zero."""

    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.ndim != 1 or amps.size < 1:
            raise DimensionMismatch(f"state must be a non-empty 1-d array, got shape {amps.shape}")
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def __add__(self, other: StateVector) -> StateVector:
        _check_dims(self.dim, other.dim)
        return StateVector(self.amps + other.amps)

    def __sub__(self, other: StateVector) -> StateVector:
        _check_dims(self.dim, other.dim)
        return StateVector(self.amps - other.amps)

    def __mul__(self, scalar: complex) -> StateVector:
        return StateVector(scalar * self.amps)

    __rmul__ = __mul__

    def tensor(self, other: StateVector) -> StateVector:
        """Kronecker product with ``other`` varying fastest."""
        return StateVector(np.kron(self.amps, other.amps))


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector, checked Hermitian and idempotent on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionMismatch(f"projector must be square, got shape {m.shape}")
        herm, idem = projector_residuals(m)
        if herm > VALIDATION_TOL or idem > VALIDATION_TOL:
            raise NotAProjector(
                f"matrix is not an orthogonal projector "
                f"(hermitian residual {herm:.3g}, idempotent residual {idem:.3g})"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))

    def complement(self) -> Projector:
        return Projector(np.eye(self.dim) - self.matrix)

    @classmethod
    def identity(cls, dim: int) -> Projector:
        return cls(np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> Projector:
        return cls(np.zeros((dim, dim)))


def projector_residuals(m: np.ndarray) -> tuple[float, float]:
    """Max-entry residuals ``(|P - P^dagger|, |P^2 - P|)``."""
    herm = float(np.max(np.abs(m - m.conj().T)))
    idem = float(np.max(np.abs(m @ m - m)))
    return herm, idem


def _check_dims(*dims: int) -> None:
    if len(set(dims)) > 1:
        raise DimensionMismatch(f"dimension mismatch: {dims}")


def orthonormalize(vectors: Sequence[np.ndarray], tol: float = RANK_TOL) -> list[np.ndarray]:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Raises RankDeficient when a vector's residual falls below ``tol`` relative
    to its original norm.
    """
    basis: list[np.ndarray] = []
    for k, v in enumerate(vectors):
        w = np.array(v, dtype=np.complex128)
        scale = np.linalg.norm(w)
        if scale == 0.0:
            raise RankDeficient(f"spanning vector {k} is zero")
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        resid = np.linalg.norm(w)
        if resid < tol * scale:
            raise RankDeficient(f"spanning vector {k} is linearly dependent on the previous ones")
        basis.append(w / resid)
    return basis


def projector_from_span(vectors: Sequence[StateVector]) -> Projector:
    """Orthogonal projector onto span(vectors); rank equals ``len(vectors)``."""
    if not vectors:
        raise RankDeficient("empty spanning set")
    _check_dims(*(v.dim for v in vectors))
    basis = orthonormalize([v.amps for v in vectors])
    dim = vectors[0].dim
    m = np.zeros((dim, dim), dtype=np.complex128)
    for q in basis:
        m += np.outer(q, q.conj())
    return Projector(m)


def range_basis(p: Projector, tol: float = 1e-8) -> list[StateVector]:
    """Orthonormal basis of the range of ``p`` (greedy Gram-Schmidt over its columns)."""
    basis: list[np.ndarray] = []
    for col in p.matrix.T:
        w = np.array(col)
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        n = np.linalg.norm(w)
        if n > tol:
            basis.append(w / n)
    return [StateVector(q) for q in basis]


def apply(p: Projector, v: StateVector) -> StateVector:
    _check_dims(p.dim, v.dim)
    return StateVector(p.matrix @ v.amps)


def norm_sq(v: StateVector) -> float:
    a = v.amps
    return float(np.sum(a.real * a.real + a.imag * a.imag))


def commutator_norm(p: Projector, q: Projector) -> float:
    """Max-entry magnitude of ``PQ - QP``."""
    _check_dims(p.dim, q.dim)
    a, b = p.matrix, q.matrix
    return float(np.max(np.abs(a @ b - b @ a)))


def basis_vector(dim: int, index: int) -> StateVector:
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps)
