"""Built-in verification scenarios: teleportation, triple-CNOT, mixed circuit.

A scenario is a layout plus a list of checks; the same check objects are
produced by the JSON scenario parser, so built-ins serialize to the CLI
file format.  ``run_scenario`` additionally replays the scenario-specific
closed-form checkpoints (the teleport operator chain and its 8x8 kernel).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import BELL, CNOT, H, SWAP, X, Z, butter, ket, proj
from .hoare import (
    ApplyU,
    Chain,
    Fst,
    Guard,
    Intersect,
    Layout,
    Named,
    Pair,
    Predicate,
    QEq,
    RegisterExpr,
    Snd,
    check_triple,
    denote,
    pred_eval,
    resolve,
)
from .lifting import lift_mixed, lift_pure, trace_in
from .linalg import DEFAULT_TOL, as_matrix, dagger, kron
from .registers import apply, complement, pair_all


# --- generic checks -----------------------------------------------------------

@dataclass(frozen=True)
class TripleCheck:
    name: str
    pre: Predicate
    program: tuple
    post: Predicate


@dataclass(frozen=True)
class OperatorEqCheck:
    name: str
    lhs: tuple  # program
    rhs: tuple  # program


@dataclass(frozen=True)
class StateEqCheck:
    name: str
    initial: tuple  # of (RegisterExpr, density matrix); must form a partition
    program: tuple
    through: RegisterExpr
    expected: np.ndarray


Check = object


@dataclass(frozen=True)
class CheckResult:
    name: str
    kind: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class ScenarioReport:
    name: str
    results: tuple

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)


def run_check(check, layout: Layout, tol: float = DEFAULT_TOL) -> CheckResult:
    if isinstance(check, TripleCheck):
        rep = check_triple(check.pre, list(check.program), check.post, layout, tol)
        return CheckResult(check.name, "triple", rep.holds, rep.residual)
    if isinstance(check, OperatorEqCheck):
        lhs = denote(list(check.lhs), layout, tol)
        rhs = denote(list(check.rhs), layout, tol)
        residual = float(np.abs(lhs - rhs).max())
        scale = 1.0 + max(np.abs(lhs).max(), np.abs(rhs).max())
        return CheckResult(check.name, "operator_eq", residual <= tol * scale, residual)
    if isinstance(check, StateEqCheck):
        regs = [resolve(e, layout, tol) for e, _ in check.initial]
        rho = lift_mixed(regs, [as_matrix(m) for _, m in check.initial], tol)
        d = denote(list(check.program), layout, tol)
        final = d @ rho @ dagger(d)
        got = trace_in(resolve(check.through, layout, tol), final, tol)
        expected = as_matrix(check.expected)
        residual = float(np.abs(got - expected).max())
        scale = 1.0 + max(np.abs(got).max(), np.abs(expected).max())
        return CheckResult(check.name, "state_eq", residual <= tol * scale, residual)
    raise ValueError(f"unknown check {check!r}")


def run_checks(checks, layout: Layout, tol: float = DEFAULT_TOL):
    return [run_check(c, layout, tol) for c in checks]


@dataclass(frozen=True)
class Scenario:
    name: str
    layout: Layout
    checks: tuple
    meta: dict = field(default_factory=dict)


# --- teleportation --------------------------------------------------------------

TELEPORT_ORDER = ("A", "X", "Phi1", "B", "Phi2")


def _random_unit_states(dim: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        out.append(v / np.linalg.norm(v))
    return out


def teleport_program(a: int, b: int):
    """The six commands of ``teleport a b``."""
    phi = Pair(Named("Phi1"), Named("Phi2"))
    return (
        ApplyU(Pair(Named("X"), Chain(phi, Fst())), CNOT),
        ApplyU(Named("X"), H),
        Guard(Chain(phi, Fst()), a),
        Guard(Named("X"), b),
        ApplyU(Chain(phi, Snd()), np.linalg.matrix_power(X, a)),
        ApplyU(Chain(phi, Snd()), np.linalg.matrix_power(Z, b)),
    )


def teleport_kernels(a: int, b: int):
    """The two 8x8 operators whose equality drives the teleport argument.

    Both act on the pair domain ``X ⊗ (Phi1 ⊗ Phi2)``; identities are spelled
    per qubit exactly as in the derivation.
    """
    i2, i4 = np.eye(2), np.eye(4)
    xz_adj = np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
    m = (kron(butter(ket(2, b)), i4)
         @ kron(kron(i2, butter(ket(2, a))), i2)
         @ kron(H, i4)
         @ kron(CNOT, i2)
         @ kron(i2, butter(BELL)))
    swap_x_phi1 = kron(SWAP, i2)           # alpha(U_sigma ⊗ 1) in the flat layout
    w = kron(i2, SWAP)                     # (id ⊗ sigma) conjugation
    m_prime = (kron(i4, 0.5 * xz_adj)
               @ (w @ swap_x_phi1 @ w)
               @ kron(i2, np.outer(ket(4, 2 * a + b), BELL.conj())))
    return m, m_prime


def build_teleport(dim_a: int = 2, dim_b: int = 2, seed: int = 11,
                   order=TELEPORT_ORDER, random_states: int = 4) -> Scenario:
    if dim_a < 1 or dim_b < 1:
        raise ValueError("teleport needs positive payload dimensions")
    dims = {"A": dim_a, "X": 2, "Phi1": 2, "B": dim_b, "Phi2": 2}
    if sorted(order) != sorted(TELEPORT_ORDER):
        raise ValueError(f"order must permute {TELEPORT_ORDER}")
    layout = Layout.of([(name, dims[name]) for name in order])
    phi = Pair(Named("Phi1"), Named("Phi2"))
    xab = Pair(Named("X"), Pair(Named("A"), Named("B")))
    phi2ab = Pair(Chain(phi, Snd()), Pair(Named("A"), Named("B")))
    payload = 2 * dim_a * dim_b
    psis = [ket(payload, x) for x in range(payload)]
    psis += _random_unit_states(payload, random_states, seed)
    checks = []
    for a in (0, 1):
        for b in (0, 1):
            prog = teleport_program(a, b)
            for i, psi in enumerate(psis):
                checks.append(TripleCheck(
                    f"teleport({a},{b}) psi[{i}]",
                    Intersect(QEq(xab, psi), QEq(phi, BELL)),
                    prog,
                    QEq(phi2ab, psi)))
    return Scenario("teleport", layout, tuple(checks),
                    meta={"dim_a": dim_a, "dim_b": dim_b, "seed": seed,
                          "phi": phi, "xab": xab, "phi2ab": phi2ab})


def _teleport_checkpoints(scenario: Scenario, tol: float):
    """The operator chain O1..O7 and its closed forms, per (a, b)."""
    layout = scenario.layout
    phi = scenario.meta["phi"]
    x_reg = resolve(Named("X"), layout, tol)
    phi_reg = resolve(phi, layout, tol)
    phi1_reg = resolve(Chain(phi, Fst()), layout, tol)
    phi2_reg = resolve(Chain(phi, Snd()), layout, tol)
    x_phi1 = resolve(Pair(Named("X"), Chain(phi, Fst())), layout, tol)
    x_phi2 = resolve(Pair(Named("X"), Chain(phi, Snd())), layout, tol)
    x_phi = resolve(Pair(Named("X"), phi), layout, tol)
    results = []
    for a in (0, 1):
        for b in (0, 1):
            m, m_prime = teleport_kernels(a, b)
            o1 = apply(phi_reg, butter(BELL))
            o2 = apply(x_phi1, CNOT) @ o1
            o3 = apply(x_reg, H) @ o2
            o4 = apply(phi1_reg, proj(2, a)) @ o3
            o5 = apply(x_reg, proj(2, b)) @ o4
            o5_prime = apply(x_phi, m_prime)
            o6 = apply(phi2_reg, np.linalg.matrix_power(X, a)) @ o5_prime
            o7 = apply(phi2_reg, np.linalg.matrix_power(Z, b)) @ o6
            closed_o7 = 0.5 * (apply(x_phi2, SWAP)
                               @ apply(phi_reg, np.outer(ket(4, 2 * a + b),
                                                         BELL.conj())))
            prog_op = denote(list(teleport_program(a, b)), layout, tol)
            pairs = [
                (f"O5 = <X,Phi>(M) ({a},{b})", o5, apply(x_phi, m)),
                (f"O5 = O5' ({a},{b})", o5, o5_prime),
                (f"O7 closed form ({a},{b})", o7, closed_o7),
                (f"denotation chain ({a},{b})", prog_op @ o1, o7),
            ]
            for name, lhs, rhs in pairs:
                residual = float(np.abs(lhs - rhs).max())
                scale = 1.0 + max(np.abs(lhs).max(), np.abs(rhs).max())
                results.append(CheckResult(name, "operator_eq",
                                           residual <= tol * scale, residual))
    return results


# --- triple CNOT -----------------------------------------------------------------

def build_triple_cnot(dim_rest: int = 2) -> Scenario:
    """Three alternating CNOTs equal a lifted qubit swap, beside a third register."""
    layout = Layout.of([("F", 2), ("G", 2), ("R", dim_rest)])
    fg = Pair(Named("F"), Named("G"))
    gf = Pair(Named("G"), Named("F"))
    lhs = (ApplyU(fg, CNOT), ApplyU(gf, CNOT), ApplyU(fg, CNOT))
    rhs = (ApplyU(fg, SWAP),)
    checks = (OperatorEqCheck("triple CNOT = lifted swap", lhs, rhs),)
    return Scenario("triple_cnot", layout, checks,
                    meta={"lhs": lhs, "rhs": rhs, "fg": fg})


def _triple_cnot_basis_evaluation(scenario: Scenario, tol: float):
    """Lifted-basis evaluation plus the separating argument.

    Both operators are applied to every lifted product basis state
    ``F(|x>) ▷ G(|y>) ▷ C(|z>)``; the states are confirmed to be an
    orthonormal basis, so agreement on them separates the operators.
    """
    layout = scenario.layout
    f = resolve(Named("F"), layout, tol)
    g = resolve(Named("G"), layout, tol)
    comp = complement(pair_all([f, g], tol))
    lhs = denote(list(scenario.meta["lhs"]), layout, tol)
    rhs = denote(list(scenario.meta["rhs"]), layout, tol)
    states = []
    results = []
    worst = 0.0
    for x in (0, 1):
        for y in (0, 1):
            for z in range(comp.m):
                psi = lift_pure([f, g, comp],
                                [ket(2, x), ket(2, y), ket(comp.m, z)],
                                tol, validate=(not states))
                states.append(psi)
                worst = max(worst, float(np.abs(lhs @ psi - rhs @ psi).max()))
    results.append(CheckResult("agreement on lifted basis states", "state_eq",
                               worst <= tol * 2, worst))
    gram = np.array(states) @ np.array(states).conj().T
    ortho = float(np.abs(gram - np.eye(len(states))).max())
    results.append(CheckResult("lifted states form an orthonormal basis",
                               "state_eq", ortho <= tol * 2, ortho))
    return results


# --- mixed-state circuit -----------------------------------------------------------

def build_mixed_circuit(qubit_environment: bool = False, seed: int = 5) -> Scenario:
    """H on F, CNOT from G to H, H on G, starting from |0>, maximally mixed, |0>.

    With ``qubit_environment`` a fourth seeded random qubit state rides along
    untouched; by default the partition is exactly F, G, H.
    """
    factors = [("F", 2), ("G", 2), ("H", 2)]
    initial = [(Named("F"), proj(2, 0)),
               (Named("G"), np.eye(2) / 2),
               (Named("H"), proj(2, 0))]
    if qubit_environment:
        factors.append(("R", 2))
        rng = np.random.default_rng(seed)
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho_rest = z @ dagger(z)
        rho_rest = rho_rest / np.trace(rho_rest).real
        initial.append((Named("R"), rho_rest))
    layout = Layout.of(factors)
    gh = Pair(Named("G"), Named("H"))
    program = (ApplyU(Named("F"), H),
               ApplyU(gh, CNOT),
               ApplyU(Named("G"), H))
    plus = np.array([1, 1], dtype=np.complex128) / np.sqrt(2)
    minus = np.array([1, -1], dtype=np.complex128) / np.sqrt(2)
    gh_expected = 0.5 * butter(np.kron(plus, ket(2, 0))) \
        + 0.5 * butter(np.kron(minus, ket(2, 1)))
    checks = (
        StateEqCheck("final <G,H> component", tuple(initial), program, gh,
                     gh_expected),
        StateEqCheck("final F component", tuple(initial), program, Named("F"),
                     butter(plus)),
    )
    return Scenario("mixed_circuit", layout, checks,
                    meta={"qubit_environment": qubit_environment})


# --- dispatch -----------------------------------------------------------------------

BUILTIN_SCENARIOS = ("teleport", "triple_cnot", "mixed_circuit")


def build_scenario(name: str, **kwargs) -> Scenario:
    if name == "teleport":
        return build_teleport(**kwargs)
    if name == "triple_cnot":
        return build_triple_cnot(**kwargs)
    if name == "mixed_circuit":
        return build_mixed_circuit(**kwargs)
    raise ValueError(f"unknown scenario {name!r}; builtins: {BUILTIN_SCENARIOS}")


def run_scenario(scenario: Scenario, tol: float = DEFAULT_TOL) -> ScenarioReport:
    """Run the scenario's checks plus its closed-form checkpoints."""
    results = []
    if scenario.name == "teleport":
        worst = 0.0
        for a in (0, 1):
            for b in (0, 1):
                m, m_prime = teleport_kernels(a, b)
                worst = max(worst, float(np.abs(m - m_prime).max()))
        results.append(CheckResult("M = M' (8x8, all a,b)", "operator_eq",
                                   worst <= 1e-12, worst))
        results.extend(_teleport_checkpoints(scenario, tol))
    if scenario.name == "triple_cnot":
        results.extend(_triple_cnot_basis_evaluation(scenario, tol))
    results.extend(run_checks(scenario.checks, scenario.layout, tol))
    return ScenarioReport(scenario.name, tuple(results))
