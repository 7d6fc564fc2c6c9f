"""Lifting quantum objects through registers.

Subspaces, mixed and pure states, channels, partial traces and measurements
on a register's domain are transported to the whole memory.  States are plain
numpy arrays (vectors for pure states, matrices for density operators);
channels and measurements get small container classes because they carry
structure (Kraus lists vs. superoperator form, measurement kinds).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DimensionMismatch,
    Subspace,
    approx_eq,
    as_matrix,
    as_vector,
    dagger,
    kron,
    kron_all,
    orthonormal_range_basis,
    partial_trace_second,
)
from .registers import (
    QRegister,
    apply,
    complement,
    is_complements,
    is_partition,
    matrix_unit,
    pair,
    pair_all,
)


def is_density(rho, tol: float = DEFAULT_TOL, sub: bool = False) -> bool:
    """Positive with trace 1 (or trace at most 1 for subdensity operators)."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        return False
    if not approx_eq(rho, dagger(rho), tol):
        return False
    scale = 1.0 + (np.abs(rho).max() if rho.size else 0.0)
    if np.linalg.eigvalsh((rho + dagger(rho)) / 2).min() < -tol * scale:
        return False
    tr = np.trace(rho).real
    return tr <= 1.0 + tol if sub else abs(tr - 1.0) <= tol


def is_pure_state(psi, tol: float = DEFAULT_TOL) -> bool:
    psi = as_vector(psi)
    return abs(np.linalg.norm(psi) - 1.0) <= tol


def eta(dim: int) -> np.ndarray:
    """The fixed reference unit vector of each dimension: the first basis vector.

    This choice satisfies ``eta(m*k) = eta(m) ⊗ eta(k)`` under Kronecker
    ordering, which the pure-state lifting relies on.
    """
    v = np.zeros(dim, dtype=np.complex128)
    v[0] = 1.0
    return v


def xi(b, tol: float = DEFAULT_TOL) -> np.ndarray:
    """A deterministic unit vector in the range of a nonzero operator ``b``.

    Uses ``b @ eta`` when nonzero (so projectors whose range contains the
    reference vector reproduce it exactly), otherwise the first nonzero
    column image.
    """
    b = as_matrix(b)
    n = b.shape[0]
    scale = 1.0 + np.abs(b).max()
    v = b @ eta(n)
    if np.linalg.norm(v) > tol * scale:
        return v / np.linalg.norm(v)
    for j in range(n):
        v = b[:, j]
        if np.linalg.norm(v) > tol * scale:
            return v / np.linalg.norm(v)
    raise ValueError("xi is undefined for the zero operator")


def lift_subspace(f: QRegister, s: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """The image of the lifted projector ``F(P_S)``."""
    if s.ambient_dim != f.m:
        raise DimensionMismatch(
            f"subspace lives in dim {s.ambient_dim}, register domain is {f.m}")
    return orthonormal_range_basis(apply(f, s.projector()), tol)


def _check_partition(regs, tol: float):
    regs = list(regs)
    if not is_partition(regs, tol):
        raise ValueError("registers do not form a partition of the memory")
    return regs


def lift_mixed(regs, rhos, tol: float = DEFAULT_TOL,
               validate: bool = True) -> np.ndarray:
    """Joint state ``⟨F_1,..,F_n⟩(ρ_1 ⊗ .. ⊗ ρ_n)`` of a partition."""
    regs = list(regs)
    rhos = [as_matrix(r) for r in rhos]
    if len(regs) != len(rhos):
        raise DimensionMismatch("one state per register required")
    for reg, rho in zip(regs, rhos):
        if rho.shape != (reg.m, reg.m):
            raise DimensionMismatch(
                f"state shape {rho.shape} does not match register domain {reg.m}")
    if validate:
        _check_partition(regs, tol)
    return apply(pair_all(regs, tol), kron_all(rhos))


def lift_pure(regs, psis, tol: float = DEFAULT_TOL,
              validate: bool = True) -> np.ndarray:
    """Joint pure state of a partition, with the fixed eta/xi conventions."""
    regs = list(regs)
    psis = [as_vector(p) for p in psis]
    if len(regs) != len(psis):
        raise DimensionMismatch("one state per register required")
    for reg, psi in zip(regs, psis):
        if psi.shape != (reg.m,):
            raise DimensionMismatch(
                f"state length {psi.shape[0]} does not match register domain {reg.m}")
    if validate:
        _check_partition(regs, tol)
    fold = pair_all(regs, tol)
    transfer = apply(fold, kron_all(
        [np.outer(psi, eta(reg.m).conj()) for reg, psi in zip(regs, psis)]))
    b = apply(fold, kron_all(
        [np.outer(eta(reg.m), eta(reg.m).conj()) for reg in regs]))
    return transfer @ xi(b, tol)


def is_eta_regular(f: QRegister, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``⟨F,∁F⟩(η_A η_A† ⊗ c) = η_B η_B†`` is solvable for some ``c``.

    The pair with the complement is conjugation by the canonical unitary, so
    the witness is ``c' = U† (η_B η_B†) U``; regularity holds iff it factors
    as ``η_A η_A† ⊗ c``.
    """
    m, k, n = f.m, f.k, f.n
    butter = np.outer(eta(n), eta(n).conj())
    c_prime = dagger(f.u) @ butter @ f.u
    c_block = c_prime[0:k, 0:k]
    return approx_eq(c_prime, kron(np.outer(eta(m), eta(m).conj()), c_block), tol)


@dataclass(frozen=True)
class QChannel:
    """A channel on one register's domain, in Kraus or superoperator form.

    ``action`` is the matrix acting on row-major vectorizations.  At least
    one form is always present; Kraus form is preferred by lifting when
    available.
    """

    dim: int
    kraus: tuple | None = None
    action: np.ndarray | None = None

    @staticmethod
    def from_kraus(ops) -> "QChannel":
        ops = tuple(as_matrix(m) for m in ops)
        if not ops:
            raise ValueError("at least one Kraus operator required")
        d = ops[0].shape[0]
        for m in ops:
            if m.shape != (d, d):
                raise DimensionMismatch("Kraus operators must be square and same-dim")
        return QChannel(d, kraus=ops)

    @staticmethod
    def from_action(action) -> "QChannel":
        action = as_matrix(action)
        d = round(action.shape[0] ** 0.5)
        if action.shape != (d * d, d * d):
            raise DimensionMismatch("superoperator action must be d^2 x d^2")
        return QChannel(d, action=action)

    @staticmethod
    def identity(dim: int) -> "QChannel":
        return QChannel.from_kraus([np.eye(dim, dtype=np.complex128)])

    def action_matrix(self) -> np.ndarray:
        if self.action is not None:
            return self.action
        d = self.dim
        out = np.zeros((d * d, d * d), dtype=np.complex128)
        for m in self.kraus:
            out += np.kron(m, m.conj())
        return out

    def __call__(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"state must be {self.dim}x{self.dim}")
        if self.kraus is not None:
            out = np.zeros_like(rho)
            for m in self.kraus:
                out += m @ rho @ dagger(m)
            return out
        return (self.action @ rho.reshape(-1)).reshape(self.dim, self.dim)

    def compose(self, other: "QChannel") -> "QChannel":
        """``self ∘ other``."""
        if self.dim != other.dim:
            raise DimensionMismatch("channel dimensions differ")
        if self.kraus is not None and other.kraus is not None:
            return QChannel.from_kraus(
                [a @ b for a in self.kraus for b in other.kraus])
        return QChannel.from_action(self.action_matrix() @ other.action_matrix())

    def tensor(self, other: "QChannel") -> "QChannel":
        if self.kraus is not None and other.kraus is not None:
            return QChannel.from_kraus(
                [np.kron(a, b) for a in self.kraus for b in other.kraus])
        return QChannel.from_action(_action_tensor(
            self.action_matrix(), self.dim, other.action_matrix(), other.dim))

    def choi_matrix(self) -> np.ndarray:
        d = self.dim
        return self.action_matrix().reshape(d, d, d, d).transpose(2, 0, 3, 1) \
            .reshape(d * d, d * d)

    def trace_operator(self) -> np.ndarray:
        """The operator ``W`` with ``tr E(x) = tr(W x)``; ``W = 1`` iff trace-preserving."""
        if self.kraus is not None:
            w = np.zeros((self.dim, self.dim), dtype=np.complex128)
            for m in self.kraus:
                w += dagger(m) @ m
            return w
        d = self.dim
        w = np.empty((d, d), dtype=np.complex128)
        act = self.action_matrix().reshape(d, d, d, d)
        for i in range(d):
            for j in range(d):
                w[j, i] = np.einsum("pp->", act[:, :, i, j])
        return w

    def is_completely_positive(self, tol: float = DEFAULT_TOL) -> bool:
        choi = self.choi_matrix()
        if not approx_eq(choi, dagger(choi), tol):
            return False
        scale = 1.0 + np.abs(choi).max()
        return bool(np.linalg.eigvalsh((choi + dagger(choi)) / 2).min()
                    >= -tol * scale)

    def is_channel(self, tol: float = DEFAULT_TOL) -> bool:
        return self.is_completely_positive(tol) and \
            approx_eq(self.trace_operator(), np.eye(self.dim), tol)

    def is_subchannel(self, tol: float = DEFAULT_TOL) -> bool:
        if not self.is_completely_positive(tol):
            return False
        w = self.trace_operator()
        scale = 1.0 + np.abs(w).max()
        gap = np.eye(self.dim) - (w + dagger(w)) / 2
        return bool(np.linalg.eigvalsh(gap).min() >= -tol * scale)


def _action_tensor(act_a: np.ndarray, da: int, act_b: np.ndarray, db: int) -> np.ndarray:
    """Superoperator action of ``A ⊗ B`` on the composite system."""
    a4 = act_a.reshape(da, da, da, da)
    b4 = act_b.reshape(db, db, db, db)
    out = np.einsum("abij,pqPQ->apbqiPjQ", a4, b4)
    n = da * db
    return out.reshape(n * n, n * n)


def lift_channel(f: QRegister, chan: QChannel, comp: QRegister | None = None,
                 tol: float = DEFAULT_TOL) -> QChannel:
    """Lift a channel on the register's domain to one on the whole memory.

    Kraus form lifts operator-by-operator.  Superoperator form goes through
    ``⟨F,∁F⟩ ∘ (E ⊗ id) ∘ ⟨F,∁F⟩⁻¹``; any valid complement may be supplied
    and the result does not depend on the choice.
    """
    if chan.dim != f.m:
        raise DimensionMismatch(
            f"channel dim {chan.dim} does not match register domain {f.m}")
    if chan.kraus is not None and comp is None:
        return QChannel.from_kraus([apply(f, m) for m in chan.kraus])
    if comp is None:
        comp = complement(f)
    if not is_complements(f, comp, tol):
        raise ValueError("supplied register is not a complement")
    iso = pair(f, comp, tol)
    v = iso.u  # k = 1 for the pair with a complement
    ident = np.eye(comp.m * comp.m, dtype=np.complex128)
    inner = _action_tensor(chan.action_matrix(), f.m, ident, comp.m)
    lifted = kron(v, v.conj()) @ inner @ kron(dagger(v), v.T)
    return QChannel.from_action(lifted)


def trace_in(f: QRegister, rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Partial trace keeping exactly the content of the register."""
    rho = as_matrix(rho)
    if rho.shape != (f.n, f.n):
        raise DimensionMismatch(f"state must be {f.n}x{f.n}")
    return partial_trace_second(dagger(f.u) @ rho @ f.u, f.m, f.k)


MEASUREMENT_KINDS = ("projective", "complete", "povm", "general")


@dataclass(frozen=True)
class Measurement:
    """A finite-outcome measurement of one of the four standard kinds."""

    kind: str
    operators: tuple
    labels: tuple

    @staticmethod
    def of(kind: str, operators, labels=None) -> "Measurement":
        if kind not in MEASUREMENT_KINDS:
            raise ValueError(f"unknown measurement kind {kind!r}")
        ops = tuple(as_matrix(m) for m in operators)
        if labels is None:
            labels = tuple(range(len(ops)))
        if len(labels) != len(ops):
            raise DimensionMismatch("one label per operator required")
        return Measurement(kind, ops, tuple(labels))

    @staticmethod
    def computational(dim: int) -> "Measurement":
        units = [matrix_unit(dim, x, x) for x in range(dim)]
        return Measurement.of("complete", units)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def validate(self, tol: float = DEFAULT_TOL) -> list:
        """Kind invariants; returns the list of violated conditions."""
        from .linalg import classify_operator

        failures = []
        d = self.dim
        total = sum(self.operators) if self.kind in ("projective", "complete", "povm") \
            else sum(dagger(m) @ m for m in self.operators)
        if not approx_eq(total, np.eye(d), tol):
            failures.append("completeness relation fails")
        if self.kind in ("projective", "complete"):
            for i, p in enumerate(self.operators):
                flags = classify_operator(p, tol)
                if not flags.projector:
                    failures.append(f"operator {i} is not a projector")
                if self.kind == "complete" and abs(np.trace(p) - 1.0) > tol * d:
                    failures.append(f"operator {i} is not rank one")
            for i in range(len(self.operators)):
                for j in range(i + 1, len(self.operators)):
                    prod = self.operators[i] @ self.operators[j]
                    if not approx_eq(prod, np.zeros((d, d)), tol):
                        failures.append(f"operators {i},{j} are not orthogonal")
        elif self.kind == "povm":
            for i, p in enumerate(self.operators):
                if not classify_operator(p, tol).positive:
                    failures.append(f"operator {i} is not positive")
        return failures


def lift_measurement(f: QRegister, meas: Measurement) -> Measurement:
    """Lift operator-by-operator; complete measurements become projective."""
    if meas.dim != f.m:
        raise DimensionMismatch(
            f"measurement dim {meas.dim} does not match register domain {f.m}")
    kind = "projective" if meas.kind == "complete" else meas.kind
    return Measurement.of(kind, [apply(f, m) for m in meas.operators], meas.labels)


@dataclass(frozen=True)
class MeasureResult:
    probability: float
    post_state: np.ndarray | None  # non-normalized; absent for POVMs


def measure(meas: Measurement, outcome, state,
            tol: float = DEFAULT_TOL) -> MeasureResult:
    """Outcome probability and non-normalized post-state.

    ``state`` is a vector (pure) or square matrix (density operator).
    POVMs only define probabilities; their result carries no post-state.
    """
    if outcome not in meas.labels:
        raise ValueError(f"unknown outcome {outcome!r}")
    op = meas.operators[meas.labels.index(outcome)]
    arr = np.asarray(state, dtype=np.complex128)
    pure = arr.ndim == 1 or (arr.ndim == 2 and 1 in arr.shape
                             and arr.shape != (meas.dim, meas.dim))
    if pure:
        psi = as_vector(arr)
        if psi.shape != (meas.dim,):
            raise DimensionMismatch("state dimension mismatch")
        if meas.kind == "povm":
            prob = float((psi.conj() @ (op @ psi)).real)
            return MeasureResult(prob, None)
        out = op @ psi
        return MeasureResult(float(np.linalg.norm(out) ** 2), out)
    rho = as_matrix(arr)
    if rho.shape != (meas.dim, meas.dim):
        raise DimensionMismatch("state dimension mismatch")
    if meas.kind == "povm":
        return MeasureResult(float(np.trace(op @ rho).real), None)
    post = op @ rho @ dagger(op)
    return MeasureResult(float(np.trace(post).real), post)
