"""Finite-dimensional quantum registers in canonical form.

A register with domain dimension ``m`` inside a memory of dimension
``n = m*k`` is stored as ``(m, k, U)`` with action ``a -> U (a ⊗ 1_k) U†``.
Every construction (chain, pair, tensor, complement, ...) produces this
canonical form; equality of registers is always equality of *action* on
the matrix-unit basis, never equality of ``U`` (which is unique only up
to ``U(1 ⊗ W)``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DimensionMismatch,
    approx_eq,
    as_matrix,
    dagger,
    kron,
    partial_trace_second,
)


class NotARegister(ValueError):
    """Raised when a linear map fails the unital *-homomorphism checks."""


class IncompatibleRegisters(ValueError):
    """Raised when pairing registers whose lifted updates do not commute."""


def matrix_unit(m: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((m, m), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def commutation_matrix(p: int, q: int) -> np.ndarray:
    """Permutation ``K`` with ``K (x ⊗ y) = y ⊗ x`` for x in C^p, y in C^q."""
    k = np.zeros((p * q, p * q), dtype=np.complex128)
    for i in range(p):
        for j in range(q):
            k[j * p + i, i * q + j] = 1.0
    return k


@dataclass(frozen=True)
class QRegister:
    """Canonical form ``(m, k, U)`` of a quantum register."""

    m: int
    k: int
    u: np.ndarray  # n x n unitary, n = m*k

    @property
    def n(self) -> int:
        return self.m * self.k

    def __post_init__(self):
        u = as_matrix(self.u)
        if self.m < 1 or self.k < 1:
            raise ValueError("dimensions must be positive")
        if u.shape != (self.n, self.n):
            raise DimensionMismatch(
                f"canonical unitary must be {self.n}x{self.n}, got {u.shape}")
        object.__setattr__(self, "u", u)

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        eye = np.eye(self.n)
        return approx_eq(dagger(self.u) @ self.u, eye, tol) and \
            approx_eq(self.u @ dagger(self.u), eye, tol)

    def block(self, i: int) -> np.ndarray:
        """The n x k column block ``U[:, i*k:(i+1)*k]``; F(E_ij) = block(i) block(j)†."""
        return self.u[:, i * self.k:(i + 1) * self.k]

    def unit_images(self) -> np.ndarray:
        """All lifted matrix units, shape ``(m, m, n, n)``."""
        blocks = self.u.reshape(self.n, self.m, self.k)
        return np.einsum("nik,mjk->ijnm", blocks, blocks.conj())


def apply(reg: QRegister, a) -> np.ndarray:
    """Lift a domain operator through the register: ``U (a ⊗ 1_k) U†``."""
    a = as_matrix(a)
    if a.shape != (reg.m, reg.m):
        raise DimensionMismatch(f"operand must be {reg.m}x{reg.m}, got {a.shape}")
    return reg.u @ kron(a, np.eye(reg.k)) @ dagger(reg.u)


def same_action(f: QRegister, g: QRegister, tol: float = DEFAULT_TOL) -> bool:
    """Extensional register equality: equal images of all matrix units."""
    if f.m != g.m or f.n != g.n:
        return False
    return bool(np.abs(f.unit_images() - g.unit_images()).max()
                <= tol * (1.0 + 1.0))


def id_register(m: int) -> QRegister:
    return QRegister(m, 1, np.eye(m, dtype=np.complex128))


def iso_register(u, tol: float = DEFAULT_TOL) -> QRegister:
    """Sandwich register ``a -> U a U†`` for a unitary ``U``."""
    u = as_matrix(u)
    n = u.shape[0]
    if u.shape != (n, n) or not approx_eq(dagger(u) @ u, np.eye(n), tol):
        raise ValueError("iso_register requires a square unitary")
    return QRegister(n, 1, u)


def fst_register(m: int, k: int) -> QRegister:
    """``a -> a ⊗ 1_k``."""
    return QRegister(m, k, np.eye(m * k, dtype=np.complex128))


def snd_register(m: int, k: int) -> QRegister:
    """``b -> 1_m ⊗ b`` for b of dimension k, realized by a commutation permutation."""
    return QRegister(k, m, commutation_matrix(k, m))


def unit_register(n: int) -> QRegister:
    """Domain-1 register ``c -> c * 1_n``."""
    return QRegister(1, n, np.eye(n, dtype=np.complex128))


def builtin_register(kind: str, *args) -> QRegister:
    """Name-dispatched constructors: id(m), iso(U), fst(m,k), snd(k,m), unit(n)."""
    if kind == "id":
        return id_register(*args)
    if kind == "iso":
        return iso_register(*args)
    if kind == "fst":
        return fst_register(*args)
    if kind == "snd":
        k, m = args
        return snd_register(m, k)
    if kind == "unit":
        return unit_register(*args)
    raise ValueError(f"unknown builtin register {kind!r}")


def chain(f: QRegister, g: QRegister) -> QRegister:
    """Composition ``F.G = F ∘ G`` (``G`` inside ``F``)."""
    if f.m != g.n:
        raise DimensionMismatch(
            f"chain: domain of outer ({f.m}) must equal codomain of inner ({g.n})")
    u = f.u @ kron(g.u, np.eye(f.k))
    return QRegister(g.m, g.k * f.k, u)


# registers are immutable, so derived pairings/compatibility can be memoized
# by operand content; bounded to keep worst-case memory small
_MEMO: dict = {}
_MEMO_LIMIT = 4096


def _reg_key(r: QRegister) -> tuple:
    return (r.m, r.k, r.u.tobytes())


def _memo_get(key):
    return _MEMO.get(key)


def _memo_put(key, value):
    if len(_MEMO) >= _MEMO_LIMIT:
        _MEMO.clear()
    _MEMO[key] = value
    return value


def compatible(f: QRegister, g: QRegister, tol: float = DEFAULT_TOL) -> bool:
    """Commutation of all lifted matrix units (sufficient by bilinearity)."""
    if f.n != g.n:
        raise DimensionMismatch("compatible: codomain dimensions differ")
    key = ("compatible", _reg_key(f), _reg_key(g), tol)
    hit = _memo_get(key)
    if hit is not None:
        return hit
    fu = f.unit_images().reshape(f.m * f.m, f.n, f.n)
    gu = g.unit_images().reshape(g.m * g.m, g.n, g.n)
    fg = np.einsum("aij,bjk->abik", fu, gu)
    gf = np.einsum("bij,ajk->abik", gu, fu)
    return _memo_put(key, bool(np.abs(fg - gf).max() <= tol * 2.0))


@dataclass(frozen=True)
class Superoperator:
    """A linear map on operators, as a matrix on row-major vectorizations."""

    m: int
    n: int
    action: np.ndarray  # n^2 x m^2

    def __post_init__(self):
        a = as_matrix(self.action)
        if a.shape != (self.n * self.n, self.m * self.m):
            raise DimensionMismatch(
                f"action must be {self.n**2}x{self.m**2}, got {a.shape}")
        object.__setattr__(self, "action", a)

    def __call__(self, a) -> np.ndarray:
        a = as_matrix(a)
        if a.shape != (self.m, self.m):
            raise DimensionMismatch(f"operand must be {self.m}x{self.m}")
        return (self.action @ a.reshape(-1)).reshape(self.n, self.n)

    @staticmethod
    def from_callable(m: int, n: int, fn) -> "Superoperator":
        cols = np.empty((n * n, m * m), dtype=np.complex128)
        for i in range(m):
            for j in range(m):
                cols[:, i * m + j] = as_matrix(fn(matrix_unit(m, i, j))).reshape(-1)
        return Superoperator(m, n, cols)

    @staticmethod
    def of_register(reg: QRegister) -> "Superoperator":
        units = reg.unit_images().reshape(reg.m * reg.m, reg.n * reg.n)
        return Superoperator(reg.m, reg.n, units.T.copy())


@dataclass
class HomomorphismReport:
    unital: bool
    multiplicative: bool
    adjoint_preserving: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.unital and self.multiplicative and self.adjoint_preserving


def validate_homomorphism(s: Superoperator, tol: float = DEFAULT_TOL) -> HomomorphismReport:
    """Check F(1)=1, multiplicativity on matrix units, and adjoint preservation."""
    m = s.m
    report = HomomorphismReport(True, True, True)
    if not approx_eq(s(np.eye(m)), np.eye(s.n), tol):
        report.unital = False
        report.failures.append("F(1) != 1")
    images = {}
    for i in range(m):
        for j in range(m):
            images[i, j] = s(matrix_unit(m, i, j))
    for i in range(m):
        for j in range(m):
            if not approx_eq(images[j, i], dagger(images[i, j]), tol):
                report.adjoint_preserving = False
                report.failures.append(f"F(E_{i}{j}†) != F(E_{i}{j})†")
    zero = np.zeros((s.n, s.n))
    for i in range(m):
        for j in range(m):
            for p in range(m):
                for q in range(m):
                    # E_ij E_pq = delta_jp E_iq
                    expect = images[i, q] if j == p else zero
                    got = images[i, j] @ images[p, q]
                    if not approx_eq(got, expect, tol):
                        report.multiplicative = False
                        report.failures.append(
                            f"F(E_{i}{j} E_{p}{q}) != F(E_{i}{j}) F(E_{p}{q})")
    return report


def extract_canonical(s: Superoperator, tol: float = DEFAULT_TOL) -> QRegister:
    """Recover the canonical form from the superoperator of a register.

    Structure-theorem construction: ``P = S(E_00)`` is a rank-``k`` projector,
    an orthonormal basis ``v_j`` of its range yields the unitary columnwise via
    ``U (e_i ⊗ f_j) = S(E_i0) v_j``; validity is confirmed by checking
    ``S(a) = U (a ⊗ 1_k) U†`` on every matrix unit.
    """
    from .linalg import orthonormal_range_basis

    m, n = s.m, s.n
    if not approx_eq(s(np.eye(m)), np.eye(n), tol):
        raise NotARegister("map is not unital: F(1) != 1")
    if n % m != 0:
        raise NotARegister(f"domain dimension {m} does not divide codomain {n}")
    k = n // m
    p = s(matrix_unit(m, 0, 0))
    if not approx_eq(p, dagger(p), tol) or not approx_eq(p @ p, p, tol):
        raise NotARegister("F(E_00) is not a projector")
    rank = int(round(np.trace(p).real))
    if rank != k or abs(np.trace(p).real - rank) > tol * n:
        raise NotARegister(f"F(E_00) has rank {np.trace(p).real:.3g}, expected {k}")
    v = orthonormal_range_basis(p, tol).basis
    if v.shape[1] != k:
        raise NotARegister("could not extract an orthonormal range basis of rank k")
    u = np.empty((n, n), dtype=np.complex128)
    for i in range(m):
        u[:, i * k:(i + 1) * k] = s(matrix_unit(m, i, 0)) @ v
    if not approx_eq(dagger(u) @ u, np.eye(n), tol):
        raise NotARegister("reconstructed U is not unitary")
    reg = QRegister(m, k, u)
    units = reg.unit_images().reshape(m * m, n * n)
    if float(np.abs(units.T - s.action).max()) > tol * (1.0 + np.abs(s.action).max()):
        raise NotARegister("map does not act as U (a ⊗ 1) U† on matrix units")
    return reg


def _pair_superoperator(f: QRegister, g: QRegister) -> Superoperator:
    """Superoperator sending ``E_ij ⊗ E_kl`` to ``F(E_ij) G(E_kl)``."""
    n = f.n
    fu = f.unit_images()
    gu = g.unit_images()
    m = f.m * g.m
    prod = np.einsum("ijnp,klpq->ikjlnq", fu, gu)
    action = prod.reshape(m, m, n * n).reshape(m * m, n * n).T.copy()
    return Superoperator(m, n, action)


def pair(f: QRegister, g: QRegister, tol: float = DEFAULT_TOL) -> QRegister:
    """The unique register with ``⟨F,G⟩(a ⊗ b) = F(a) G(b)``."""
    if f.n != g.n:
        raise DimensionMismatch("pair: codomain dimensions differ")
    if not compatible(f, g, tol):
        raise IncompatibleRegisters(
            f"registers (m={f.m}) and (m={g.m}) do not commute; cannot pair")
    key = ("pair", _reg_key(f), _reg_key(g), tol)
    hit = _memo_get(key)
    if hit is not None:
        return hit
    return _memo_put(key, extract_canonical(_pair_superoperator(f, g), tol))


def pair_all(regs, tol: float = DEFAULT_TOL) -> QRegister:
    """Right-associative pair fold ``⟨F_1, ⟨F_2, ...⟩⟩``."""
    regs = list(regs)
    if not regs:
        raise ValueError("pair_all needs at least one register")
    out = regs[-1]
    for f in reversed(regs[:-1]):
        out = pair(f, out, tol)
    return out


def tensor_registers(f: QRegister, g: QRegister) -> QRegister:
    """``(F ⊗ G)(a ⊗ b) = F(a) ⊗ G(b)``.

    Canonical form: ``U_F ⊗ U_G`` composed with the permutation regrouping
    ``(m_F ⊗ m_G) ⊗ (k_F ⊗ k_G)`` into ``(m_F ⊗ k_F) ⊗ (m_G ⊗ k_G)``.
    """
    mf, kf, mg, kg = f.m, f.k, g.m, g.k
    perm = np.zeros((f.n * g.n, f.n * g.n), dtype=np.complex128)
    for a in range(mf):
        for b in range(mg):
            for p in range(kf):
                for q in range(kg):
                    src = ((a * mg + b) * kf + p) * kg + q
                    dst = ((a * kf + p) * mg + b) * kg + q
                    perm[dst, src] = 1.0
    return QRegister(mf * mg, kf * kg, kron(f.u, g.u) @ perm)


def swap_register(ma: int, mb: int) -> QRegister:
    """``σ(a ⊗ b) = b ⊗ a`` for a of dim ``ma``, b of dim ``mb``."""
    return iso_register(commutation_matrix(ma, mb))


def assoc_register(ma: int, mb: int, mc: int) -> QRegister:
    """``α((a⊗b)⊗c) = a⊗(b⊗c)``; the flat Kronecker layout makes it the identity."""
    return id_register(ma * mb * mc)


def assoc_inv_register(ma: int, mb: int, mc: int) -> QRegister:
    """``α'(a⊗(b⊗c)) = (a⊗b)⊗c``; identity in the flat layout."""
    return id_register(ma * mb * mc)


def permutation_register(kind: str, *dims) -> QRegister:
    if kind == "swap":
        return swap_register(*dims)
    if kind == "assoc":
        return assoc_register(*dims)
    if kind == "assoc_inv":
        return assoc_inv_register(*dims)
    raise ValueError(f"unknown permutation register {kind!r}")


def complement(f: QRegister) -> QRegister:
    """The canonical complement ``c -> U (1_m ⊗ c) U†`` with domain dim ``k``."""
    return QRegister(f.k, f.m, f.u @ commutation_matrix(f.k, f.m))


def as_iso(f: QRegister):
    """If ``F`` is an iso-register, its conjugating unitary and inverse; else None."""
    if f.k != 1:
        return None
    return {"v": f.u, "inverse": iso_register(dagger(f.u))}


def is_iso(f: QRegister) -> bool:
    return f.k == 1


def equivalent(f: QRegister, g: QRegister, tol: float = DEFAULT_TOL):
    """The iso ``I`` with ``F ∘ I = G`` when one exists, else None.

    The candidate is read off the canonical form by partial-tracing
    ``U_F† G(b) U_F`` and validated as an iso-register.
    """
    if f.n != g.n:
        raise DimensionMismatch("equivalent: codomain dimensions differ")
    if f.m != g.m:
        return None
    m, k = f.m, f.k

    def candidate(b):
        return partial_trace_second(dagger(f.u) @ apply(g, b) @ f.u, m, k) / k

    s = Superoperator.from_callable(m, m, candidate)
    try:
        iso = extract_canonical(s, tol)
    except NotARegister:
        return None
    if iso.k != 1 or not same_action(chain(f, iso), g, tol):
        return None
    return iso


def is_complements(f: QRegister, g: QRegister, tol: float = DEFAULT_TOL) -> bool:
    """Compatible with an iso-register pair."""
    if f.n != g.n:
        raise DimensionMismatch("is_complements: codomain dimensions differ")
    if f.m * g.m != f.n or not compatible(f, g, tol):
        return False
    try:
        return is_iso(pair(f, g, tol))
    except NotARegister:
        return False


def is_partition(regs, tol: float = DEFAULT_TOL) -> bool:
    """Pairwise compatible with an iso-register right-associative pair fold."""
    regs = list(regs)
    if not regs:
        return False
    n = regs[0].n
    if any(r.n != n for r in regs):
        raise DimensionMismatch("is_partition: codomain dimensions differ")
    for i in range(len(regs)):
        for j in range(i + 1, len(regs)):
            if not compatible(regs[i], regs[j], tol):
                return False
    if int(np.prod([r.m for r in regs])) != n:
        return False
    try:
        return is_iso(pair_all(regs, tol))
    except NotARegister:
        return False


def is_unit_register(f: QRegister, tol: float = DEFAULT_TOL) -> bool:
    """Unit registers are exactly the complements of the identity."""
    return is_complements(f, id_register(f.n), tol)
