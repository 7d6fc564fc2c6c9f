"""Dense complex matrix and orthonormal-subspace arithmetic.

Everything downstream (registers, lifting, the Hoare checker) works with
plain ``numpy`` complex arrays.  All comparisons are tolerance-scaled and
every basis-producing routine is deterministic, so results are reproducible
across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes or sizes."""


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-d complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise ValueError("matrix has non-finite entries")
    return m


def as_vector(v) -> np.ndarray:
    """Coerce to a 1-d complex128 array."""
    w = np.asarray(v, dtype=np.complex128)
    if w.ndim == 2 and 1 in w.shape:
        w = w.reshape(-1)
    if w.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got ndim={w.ndim}")
    return w


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def kron(a, b) -> np.ndarray:
    """Tensor product of matrices, row-major (right-associative) convention."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats) -> np.ndarray:
    """Right-associative fold of ``kron`` over a non-empty sequence."""
    mats = list(mats)
    if not mats:
        raise ValueError("kron_all needs at least one matrix")
    out = as_matrix(mats[-1])
    for m in reversed(mats[:-1]):
        out = np.kron(as_matrix(m), out)
    return out


def approx_eq(a, b, tol: float = DEFAULT_TOL) -> bool:
    """Entrywise comparison, absolute difference scaled by operand magnitude."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return True
    scale = 1.0 + max(np.abs(a).max(), np.abs(b).max())
    return float(np.abs(a - b).max()) <= tol * scale


def partial_trace_second(a, m: int, k: int) -> np.ndarray:
    """Trace out the second factor of an ``(m*k) x (m*k)`` operator.

    ``result[i, j] = sum_p a[i*k + p, j*k + p]``.
    """
    a = as_matrix(a)
    n = m * k
    if a.shape != (n, n):
        raise DimensionMismatch(f"expected {n}x{n} matrix for m={m}, k={k}, got {a.shape}")
    return np.einsum("ipjp->ij", a.reshape(m, k, m, k))


def _column_gram_schmidt(a: np.ndarray, cutoff: float) -> np.ndarray:
    """Modified Gram-Schmidt over columns in their given (fixed) order.

    Columns whose residual falls below ``cutoff`` are dropped; accepted
    columns are re-orthogonalized once for stability.  The fixed pivot
    order keeps output bases reproducible.
    """
    n = a.shape[0]
    basis: list[np.ndarray] = []
    for col in a.T:
        v = col.astype(np.complex128)
        for _ in range(2):
            for q in basis:
                v = v - q * (q.conj() @ v)
        norm = np.linalg.norm(v)
        if norm > cutoff:
            basis.append(v / norm)
    if not basis:
        return np.zeros((n, 0), dtype=np.complex128)
    return np.column_stack(basis)


@dataclass(frozen=True)
class Subspace:
    """A closed subspace given by an orthonormal column basis."""

    ambient_dim: int
    basis: np.ndarray  # ambient_dim x r, orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ dagger(self.basis)

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        r = self.dim
        if self.basis.shape[0] != self.ambient_dim or r > self.ambient_dim:
            return False
        return approx_eq(dagger(self.basis) @ self.basis, np.eye(r), tol)

    def contains_vector(self, v, tol: float = DEFAULT_TOL) -> bool:
        v = as_vector(v)
        if v.shape != (self.ambient_dim,):
            raise DimensionMismatch("vector dimension mismatch")
        gap = v - self.projector() @ v
        return float(np.linalg.norm(gap)) <= tol * (1.0 + float(np.linalg.norm(v)))

    @staticmethod
    def full(n: int) -> "Subspace":
        return Subspace(n, np.eye(n, dtype=np.complex128))

    @staticmethod
    def zero(n: int) -> "Subspace":
        return Subspace(n, np.zeros((n, 0), dtype=np.complex128))

    @staticmethod
    def span(vectors, tol: float = DEFAULT_TOL) -> "Subspace":
        cols = np.column_stack([as_vector(v) for v in vectors])
        return orthonormal_range_basis(cols @ dagger(cols), tol)


def orthonormal_range_basis(a, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of ``range(a)`` by deterministic Gram-Schmidt."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch("orthonormal_range_basis expects a square matrix")
    scale = 1.0 + (np.abs(a).max() if a.size else 0.0)
    return Subspace(a.shape[0], _column_gram_schmidt(a, tol * scale))


def _null_space(m: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal null-space basis via SVD (deterministic for fixed input)."""
    if m.shape[1] == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    _, s, vh = np.linalg.svd(m)
    cutoff = tol * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return vh[rank:].conj().T


def subspace_eq(s: Subspace, t: Subspace, tol: float = DEFAULT_TOL) -> bool:
    if s.ambient_dim != t.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    return approx_eq(s.projector(), t.projector(), tol)


def subspace_contains(s: Subspace, t: Subspace, tol: float = DEFAULT_TOL) -> bool:
    """``t`` is contained in ``s`` iff ``P_s P_t = P_t``."""
    if s.ambient_dim != t.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    pt = t.projector()
    return approx_eq(s.projector() @ pt, pt, tol)


def subspace_intersect(s: Subspace, t: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Intersection as the null space of the stacked system ``(1-P_s; 1-P_t)``."""
    if s.ambient_dim != t.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    n = s.ambient_dim
    eye = np.eye(n)
    stacked = np.vstack([eye - s.projector(), eye - t.projector()])
    return Subspace(n, _null_space(stacked, tol))


def subspace_sum(s: Subspace, t: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Smallest subspace containing both, by orthonormalizing the joined bases."""
    if s.ambient_dim != t.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    joined = np.hstack([s.basis, t.basis])
    return Subspace(s.ambient_dim, _column_gram_schmidt(joined, tol * 1.0))


def subspace_ortho(s: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement."""
    n = s.ambient_dim
    return orthonormal_range_basis(np.eye(n) - s.projector(), tol)


def subspace_lattice(kind: str, s: Subspace, t: Subspace | None = None,
                     tol: float = DEFAULT_TOL):
    """Dispatch over the subspace-lattice operations.

    ``contains`` and the binary operations require ``t``; ``ortho`` ignores it.
    """
    if kind == "contains":
        assert t is not None
        return subspace_contains(s, t, tol)
    if kind == "intersect":
        assert t is not None
        return subspace_intersect(s, t, tol)
    if kind == "sum":
        assert t is not None
        return subspace_sum(s, t, tol)
    if kind == "ortho":
        return subspace_ortho(s, tol)
    raise ValueError(f"unknown lattice operation {kind!r}")


@dataclass(frozen=True)
class OperatorFlags:
    unitary: bool
    hermitian: bool
    projector: bool
    positive: bool
    density: bool
    isometry_cols: bool


def classify_operator(a, tol: float = DEFAULT_TOL) -> OperatorFlags:
    """Structural flags for an operator; non-square inputs only test isometry."""
    a = as_matrix(a)
    rows, cols = a.shape
    isometry = approx_eq(dagger(a) @ a, np.eye(cols), tol)
    if rows != cols:
        return OperatorFlags(False, False, False, False, False, isometry)
    eye = np.eye(rows)
    unitary = isometry and approx_eq(a @ dagger(a), eye, tol)
    hermitian = approx_eq(a, dagger(a), tol)
    projector = hermitian and approx_eq(a @ a, a, tol)
    positive = False
    if hermitian:
        scale = 1.0 + (np.abs(a).max() if a.size else 0.0)
        evals = np.linalg.eigvalsh((a + dagger(a)) / 2)
        positive = bool(evals.min() >= -tol * scale) if evals.size else True
    density = positive and abs(np.trace(a) - 1.0) <= tol
    return OperatorFlags(unitary, hermitian, projector, positive, density, isometry)
