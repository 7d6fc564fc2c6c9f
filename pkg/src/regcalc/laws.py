"""Seeded randomized law suites.

Four suites mirror the algebraic law tables: ``fig2`` (generic register
laws), ``fig4`` (complement and unit-register laws), ``lifting`` (states,
channels, partial traces, measurements through registers) and ``classical``
(the lens instantiation).  All randomness flows from one integer seed; a
failure records the case index and a short description, so counterexamples
are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classical as cl
from .gates import butter, ket
from .hoare import Layout
from .lifting import (
    QChannel,
    Measurement,
    eta,
    is_density,
    is_eta_regular,
    lift_channel,
    lift_measurement,
    lift_mixed,
    lift_pure,
    lift_subspace,
    measure,
    trace_in,
)
from .linalg import (
    Subspace,
    approx_eq,
    classify_operator,
    dagger,
    kron,
    kron_all,
    orthonormal_range_basis,
    subspace_contains,
    subspace_eq,
    subspace_intersect,
    subspace_ortho,
    subspace_sum,
)
from .registers import (
    IncompatibleRegisters,
    NotARegister,
    QRegister,
    Superoperator,
    apply,
    as_iso,
    chain,
    compatible,
    complement,
    equivalent,
    extract_canonical,
    fst_register,
    id_register,
    is_complements,
    is_partition,
    is_unit_register,
    iso_register,
    pair,
    pair_all,
    snd_register,
    swap_register,
    tensor_registers,
    unit_register,
    _pair_superoperator,
)


# --- seeded generators --------------------------------------------------------

def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish unitary from the QR of a complex Gaussian, phase-normalized."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q @ np.diag(d / np.abs(d))


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_operator(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    a = random_operator(rng, n)
    rho = a @ dagger(a)
    return rho / np.trace(rho).real


def random_projector(rng: np.random.Generator, n: int, rank: int | None = None):
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    u = random_unitary(rng, n)
    basis = u[:, :rank]
    return basis @ dagger(basis)


def random_subspace(rng: np.random.Generator, n: int,
                    rank: int | None = None) -> Subspace:
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    return Subspace(n, random_unitary(rng, n)[:, :rank])


def random_register(rng: np.random.Generator, max_dim: int = 16,
                    domain_dims=(1, 2, 3, 4)) -> QRegister:
    """Random canonical register: admissible ``(m, k)`` plus a random unitary.

    Spans all registers at these sizes by the canonical-form decomposition.
    """
    m = int(rng.choice([d for d in domain_dims if d <= max_dim]))
    k = int(rng.integers(1, max_dim // m + 1))
    return QRegister(m, k, random_unitary(rng, m * k))


def conj_register(v: np.ndarray, reg: QRegister) -> QRegister:
    """Compose a register with a memory-side unitary: ``a -> V F(a) V†``."""
    return QRegister(reg.m, reg.k, v @ reg.u)


def random_compatible_family(rng: np.random.Generator, count: int,
                             max_dim: int = 16, extra_allowed: bool = True):
    """``count`` pairwise-compatible registers on a shared random memory.

    Built as layout embeddings conjugated by one random unitary; an optional
    hidden extra factor keeps the family from always being a partition.
    """
    while True:
        extra = int(rng.integers(0, 2)) if extra_allowed else 0
        dims = [int(rng.integers(1, 5)) for _ in range(count)]
        dims += [int(rng.integers(2, 4))] * extra
        if int(np.prod(dims)) <= max_dim:
            break
    layout = Layout.of([(str(i), d) for i, d in enumerate(dims)])
    v = random_unitary(rng, layout.dim)
    return [conj_register(v, layout.embedding(str(i))) for i in range(count)]


def random_partition(rng: np.random.Generator, count: int, max_dim: int = 16,
                     factor_max: int = 4):
    """A partition of a random memory into ``count`` registers."""
    while True:
        dims = [int(rng.integers(1, factor_max + 1)) for _ in range(count)]
        if 1 < int(np.prod(dims)) <= max_dim:
            break
    layout = Layout.of([(str(i), d) for i, d in enumerate(dims)])
    v = random_unitary(rng, layout.dim)
    return [conj_register(v, layout.embedding(str(i))) for i in range(count)]


def random_kraus_channel(rng: np.random.Generator, n: int, ops: int = 2,
                         sub: bool = False) -> QChannel:
    """Random Kraus family normalized to a channel (or scaled subchannel)."""
    raw = [random_operator(rng, n) for _ in range(ops)]
    total = sum(dagger(m) @ m for m in raw)
    evals, vecs = np.linalg.eigh(total)
    inv_sqrt = vecs @ np.diag(evals ** -0.5) @ dagger(vecs)
    kraus = [m @ inv_sqrt for m in raw]
    if sub:
        scale = np.sqrt(rng.uniform(0.3, 1.0))
        kraus = [scale * m for m in kraus]
    return QChannel.from_kraus(kraus)


def random_measurement(rng: np.random.Generator, kind: str, n: int) -> Measurement:
    if kind == "complete":
        u = random_unitary(rng, n)
        return Measurement.of("complete", [butter(u[:, j]) for j in range(n)])
    if kind == "projective":
        u = random_unitary(rng, n)
        cut = int(rng.integers(1, n + 1))
        first = u[:, :cut] @ dagger(u[:, :cut])
        return Measurement.of("projective", [first, np.eye(n) - first])
    if kind == "povm":
        raw = [random_operator(rng, n) for _ in range(2)]
        pos = [m @ dagger(m) for m in raw]
        total = sum(pos)
        evals, vecs = np.linalg.eigh(total)
        inv_sqrt = vecs @ np.diag(evals ** -0.5) @ dagger(vecs)
        return Measurement.of("povm", [inv_sqrt @ p @ inv_sqrt for p in pos])
    if kind == "general":
        chan = random_kraus_channel(rng, n, ops=3)
        return Measurement.of("general", list(chan.kraus))
    raise ValueError(kind)


# --- suite harness --------------------------------------------------------------

@dataclass(frozen=True)
class LawFailure:
    law: str
    case: int
    message: str


@dataclass
class SuiteResult:
    suite: str
    seed: int
    cases: int
    laws: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


class _Collector:
    def __init__(self, result: SuiteResult):
        self.result = result
        self.case = 0

    def check(self, law: str, ok: bool, message: str = ""):
        if law not in self.result.laws:
            self.result.laws.append(law)
        if not ok:
            self.result.failures.append(LawFailure(law, self.case, message))

    def expect_raise(self, law: str, exc_type, fn, message: str = ""):
        try:
            fn()
        except exc_type:
            self.check(law, True)
        except Exception as exc:  # wrong error type is a failure too
            self.check(law, False, f"{message} (raised {type(exc).__name__}: {exc})")
        else:
            self.check(law, False, f"{message} (no error raised)")


def _fmt(*regs: QRegister) -> str:
    return ", ".join(f"(m={r.m},k={r.k},n={r.n})" for r in regs)


# --- fig2: generic register laws ---------------------------------------------------

def _fig2_case(c: _Collector, rng: np.random.Generator, max_dim: int, tol: float,
               pair_fn):
    f, g, h = random_compatible_family(rng, 3, max_dim)
    n = f.n
    ctx = _fmt(f, g, h)

    fg = pair_fn(f, g, tol)
    c.check("pair.apply: <F,G>(a⊗b) = F(a)G(b)",
            all(approx_eq(apply(fg, kron(a, b)), apply(f, a) @ apply(g, b), tol)
                for a, b in [(random_operator(rng, f.m), random_operator(rng, g.m))]),
            ctx)
    c.check("pair.fst: <F,G>.Fst = F",
            _same(chain(fg, fst_register(f.m, g.m)), f, tol), ctx)
    c.check("pair.snd: <F,G>.Snd = G",
            _same(chain(fg, snd_register(f.m, g.m)), g, tol), ctx)
    c.check("pair.sigma: <F,G>.σ = <G,F>",
            _same(chain(fg, swap_register(g.m, f.m)), pair_fn(g, f, tol), tol), ctx)

    ghp = pair_fn(g, h, tol)
    lhs = chain(pair_fn(f, ghp, tol), id_register(f.m * g.m * h.m))  # α is identity
    rhs = pair_fn(pair_fn(f, g, tol), h, tol)
    c.check("pair.alpha: <F,<G,H>>.α = <<F,G>,H>", _same(lhs, rhs, tol), ctx)

    split = _random_split(rng, max_dim)
    c.check("pair.fst.snd: <Fst,Snd> = id",
            _same(pair_fn(fst_register(*split), snd_register(*split), tol),
                  id_register(split[0] * split[1]), tol), str(split))
    c.check("pair.snd.fst: <Snd,Fst> = σ",
            _same(pair_fn(snd_register(*split), fst_register(*split), tol),
                  swap_register(split[1], split[0]), tol), str(split))

    a, b = random_operator(rng, split[0]), random_operator(rng, split[1])
    c.check("sigma.ab: σ(a⊗b) = b⊗a",
            approx_eq(apply(swap_register(*split), kron(a, b)), kron(b, a), tol),
            str(split))

    # chain/pair interplay on an inner memory seen through an outer register
    inner_f, inner_g = random_compatible_family(rng, 2, max_dim=4,
                                                extra_allowed=False)
    k_out = int(rng.integers(1, max_dim // inner_f.n + 1))
    outer = QRegister(inner_f.n, k_out, random_unitary(rng, inner_f.n * k_out))
    c.check("pair.chain: <C.F, C.G> = C.<F,G>",
            _same(pair_fn(chain(outer, inner_f), chain(outer, inner_g), tol),
                  chain(outer, pair_fn(inner_f, inner_g, tol)), tol),
            _fmt(outer, inner_f, inner_g))
    c.check("compat.chain-right: C.F, C.G compatible",
            compatible(chain(outer, inner_f), chain(outer, inner_g), tol),
            _fmt(outer, inner_f, inner_g))

    # <F,G>.(C⊗D) = <F.C, G.D>
    cd_c = _random_into(rng, f.m)
    cd_d = _random_into(rng, g.m)
    c.check("pair.tensor: <F,G>.(C⊗D) = <F.C, G.D>",
            _same(chain(fg, tensor_registers(cd_c, cd_d)),
                  pair_fn(chain(f, cd_c), chain(g, cd_d), tol), tol),
            _fmt(f, g, cd_c, cd_d))
    ta, tb = random_operator(rng, cd_c.m), random_operator(rng, cd_d.m)
    c.check("tensor.ab: (F⊗G)(a⊗b) = F(a)⊗G(b)",
            approx_eq(apply(tensor_registers(cd_c, cd_d), kron(ta, tb)),
                      kron(apply(cd_c, ta), apply(cd_d, tb)), tol),
            _fmt(cd_c, cd_d))

    c.check("compat.pair-third: <F,G>, H compatible", compatible(fg, h, tol), ctx)
    c.check("compat.chain-left: F.C, G compatible",
            compatible(chain(f, _random_into(rng, f.m)), g, tol), ctx)
    c.check("compat.tensor: F⊗G, ∁F⊗∁G-style pairs stay compatible",
            compatible(tensor_registers(f, _random_into(rng, 2)),
                       tensor_registers(g, unit_register(2)), tol)
            if f.n * 2 <= 64 else True, ctx)

    # monoid/adjoint homomorphism and structure preservation
    reg = random_register(rng, max_dim)
    aa, bb = random_operator(rng, reg.m), random_operator(rng, reg.m)
    c.check("hom: F(1) = 1",
            approx_eq(apply(reg, np.eye(reg.m)), np.eye(reg.n), tol), _fmt(reg))
    c.check("hom: F(ab) = F(a)F(b)",
            approx_eq(apply(reg, aa @ bb), apply(reg, aa) @ apply(reg, bb), tol),
            _fmt(reg))
    c.check("hom: F(a†) = F(a)†",
            approx_eq(apply(reg, dagger(aa)), dagger(apply(reg, aa)), tol),
            _fmt(reg))
    u = random_unitary(rng, reg.m)
    p = random_projector(rng, reg.m)
    c.check("preserve: unitary/projector/norm",
            classify_operator(apply(reg, u), tol).unitary
            and classify_operator(apply(reg, p), tol).projector
            and abs(np.linalg.norm(apply(reg, aa), 2) - np.linalg.norm(aa, 2))
            <= tol * (1 + np.linalg.norm(aa, 2)), _fmt(reg))

    # im F(a) ∩ im G(b) = im F(a)G(b) for compatible F,G and projectors
    pa, pb = random_projector(rng, f.m), random_projector(rng, g.m)
    lhs_s = subspace_intersect(orthonormal_range_basis(apply(f, pa), tol),
                               orthonormal_range_basis(apply(g, pb), tol), tol)
    rhs_s = orthonormal_range_basis(apply(f, pa) @ apply(g, pb), tol)
    c.check("ranges: im F(a) ∩ im G(b) = im F(a)G(b)",
            subspace_eq(lhs_s, rhs_s, tol), ctx)

    c.check("roundtrip: extract_canonical(superop(F)) = F",
            _same(extract_canonical(Superoperator.of_register(reg), tol), reg, tol),
            _fmt(reg))

    if f.m >= 2:
        c.expect_raise("pair.requires-compatibility", IncompatibleRegisters,
                       lambda: pair_fn(f, f, tol), _fmt(f, f))


def _same(x: QRegister, y: QRegister, tol: float) -> bool:
    from .registers import same_action
    return same_action(x, y, tol)


def _random_split(rng, max_dim):
    while True:
        m = int(rng.integers(1, 5))
        k = int(rng.integers(1, 5))
        if m * k <= max_dim:
            return m, k


def _random_into(rng, m: int) -> QRegister:
    """A random register whose codomain dimension is exactly ``m``."""
    divisors = [d for d in range(1, m + 1) if m % d == 0]
    md = int(rng.choice(divisors))
    return QRegister(md, m // md, random_unitary(rng, m))


# --- fig4: complements and unit registers --------------------------------------------

def _fig4_case(c: _Collector, rng: np.random.Generator, max_dim: int, tol: float):
    f = random_register(rng, max_dim)
    cf = complement(f)
    ctx = _fmt(f)

    c.check("compl.dim: dim ∁F = n/m", cf.m == f.n // f.m, ctx)
    c.check("compl: F, ∁F are complements", is_complements(f, cf, tol), ctx)
    c.check("compl.sym: ∁F, F are complements", is_complements(cf, f, tol), ctx)
    c.check("compl.compl: F ≍ ∁∁F",
            equivalent(f, complement(complement(f)), tol) is not None, ctx)

    # another complement obtained from the canonical U(1⊗W) freedom
    w = random_unitary(rng, f.k)
    cf2 = chain(cf, iso_register(w))
    c.check("compl.equiv: complements of F are equivalent",
            is_complements(f, cf2, tol)
            and equivalent(cf, cf2, tol) is not None, ctx)

    fpair, gpair = random_compatible_family(rng, 2, max_dim)
    rest = complement(pair(fpair, gpair, tol))
    c.check("compl.pair: F, <G,∁<F,G>> are complements",
            is_complements(fpair, pair(gpair, rest, tol), tol),
            _fmt(fpair, gpair))

    inner = _random_into(rng, f.m)
    c.check("compl.chain: ∁(F.G) ≍ <∁F, F.∁G>",
            equivalent(complement(chain(f, inner)),
                       pair(cf, chain(f, complement(inner)), tol), tol) is not None,
            _fmt(f, inner))

    if f.n * f.n <= 4 * max_dim:
        g2 = random_register(rng, max(2, max_dim // f.n))
        c.check("compl.tensor: F⊗G, ∁F⊗∁G are complements",
                is_complements(tensor_registers(f, g2),
                               tensor_registers(cf, complement(g2)), tol),
                _fmt(f, g2))

    u = unit_register(f.n)
    c.check("unit.compat: U, F are compatible", compatible(u, f, tol), ctx)
    c.check("unit.pair-equiv: F ≍ <U,F>",
            equivalent(pair(u, f, tol), f, tol) is not None, ctx)
    c.check("unit.chain: F∘u is a unit register",
            is_unit_register(chain(f, unit_register(f.m)), tol), ctx)
    iso = iso_register(random_unitary(rng, 1))
    c.check("unit.iso: U∘I is a unit register",
            is_unit_register(chain(u, iso), tol), ctx)
    c.check("unit.equiv: unit registers are equivalent",
            equivalent(u, chain(f, unit_register(f.m)), tol) is not None, ctx)
    c.check("unit.compl-id: ∁id is a unit register",
            is_unit_register(complement(id_register(f.n)), tol), ctx)
    big_iso = iso_register(random_unitary(rng, f.n))
    c.check("unit.compl-iso: iso and unit are complements",
            is_complements(big_iso, u, tol), ctx)

    c.check("pair-with-complement is iso",
            as_iso(pair(f, cf, tol)) is not None, ctx)


# --- lifting lemmas -------------------------------------------------------------------

def _lifting_case(c: _Collector, rng: np.random.Generator, max_dim: int, tol: float):
    # subspace lemma through one random register
    f = random_register(rng, max_dim, domain_dims=(2, 3, 4))
    s = random_subspace(rng, f.m)
    t = random_subspace(rng, f.m)
    ctx = _fmt(f)
    c.check("lift.sub: ortho", subspace_eq(lift_subspace(f, subspace_ortho(s, tol), tol),
                                           subspace_ortho(lift_subspace(f, s, tol), tol),
                                           tol), ctx)
    c.check("lift.sub: zero and full",
            lift_subspace(f, Subspace.zero(f.m), tol).dim == 0
            and lift_subspace(f, Subspace.full(f.m), tol).dim == f.n, ctx)
    c.check("lift.sub: monotone iff",
            subspace_contains(lift_subspace(f, subspace_sum(s, t, tol), tol),
                              lift_subspace(f, s, tol), tol)
            and (subspace_contains(t, s, tol)
                 == subspace_contains(lift_subspace(f, t, tol),
                                      lift_subspace(f, s, tol), tol)), ctx)
    c.check("lift.sub: intersect",
            subspace_eq(lift_subspace(f, subspace_intersect(s, t, tol), tol),
                        subspace_intersect(lift_subspace(f, s, tol),
                                           lift_subspace(f, t, tol), tol), tol), ctx)
    c.check("lift.sub: sum",
            subspace_eq(lift_subspace(f, subspace_sum(s, t, tol), tol),
                        subspace_sum(lift_subspace(f, s, tol),
                                     lift_subspace(f, t, tol), tol), tol), ctx)

    # mixed-state lemma on a random partition
    regs = random_partition(rng, 3, max_dim)
    pctx = _fmt(*regs)
    rhos = [random_density(rng, r.m) for r in regs]
    subs = [random_density(rng, r.m) * rng.uniform(0.2, 1.0) for r in regs]
    lifted = lift_mixed(regs, rhos, tol)
    c.check("mixed: density preserved", is_density(lifted, 1e-7), pctx)
    c.check("mixed: subdensity preserved",
            is_density(lift_mixed(regs, subs, tol), 1e-7, sub=True), pctx)
    c.check("mixed: trace product",
            abs(np.trace(lift_mixed(regs, subs, tol))
                - np.prod([np.trace(s) for s in subs])) <= tol * 10, pctx)
    perm = list(rng.permutation(len(regs)))
    c.check("mixed: permutation invariance",
            approx_eq(lift_mixed([regs[i] for i in perm], [rhos[i] for i in perm],
                                 tol), lifted, tol), pctx)
    u0, v0 = random_operator(rng, regs[0].m), random_operator(rng, regs[0].m)
    c.check("mixed: F1(UρV) law",
            approx_eq(lift_mixed(regs, [u0 @ rhos[0] @ v0] + rhos[1:], tol),
                      apply(regs[0], u0) @ lifted @ apply(regs[0], v0), tol), pctx)
    rank1 = [butter(random_state(rng, r.m)) for r in regs]
    evals = np.linalg.eigvalsh(lift_mixed(regs, rank1, tol))
    c.check("mixed: rank one iff all rank one",
            int(np.sum(evals > 1e-7)) == 1, pctx)
    c.check("mixed: pair flattening",
            approx_eq(lift_mixed([pair(regs[0], regs[1], tol), regs[2]],
                                 [kron(rhos[0], rhos[1]), rhos[2]], tol),
                      lifted, tol), pctx)
    # nested partitions flatten through chaining
    inner_split = _random_split(rng, 4)
    g1, g2 = fst_register(*inner_split), snd_register(*inner_split)
    host = QRegister(inner_split[0] * inner_split[1], 2,
                     random_unitary(rng, inner_split[0] * inner_split[1] * 2))
    hrest = complement(host)
    sig1 = random_density(rng, g1.m)
    sig2 = random_density(rng, g2.m)
    rho_rest = random_density(rng, hrest.m)
    c.check("mixed: nested partitions flatten",
            approx_eq(lift_mixed([host, hrest],
                                 [lift_mixed([g1, g2], [sig1, sig2], tol), rho_rest],
                                 tol),
                      lift_mixed([chain(host, g1), chain(host, g2), hrest],
                                 [sig1, sig2, rho_rest], tol), tol),
            _fmt(host, g1, g2))

    # pure-state lemma
    psis = [random_state(rng, r.m) * rng.uniform(0.5, 1.5) for r in regs]
    lifted_psi = lift_pure(regs, psis, tol)
    c.check("pure: norm product",
            abs(np.linalg.norm(lifted_psi)
                - np.prod([np.linalg.norm(p) for p in psis])) <= tol * 10, pctx)
    c.check("pure: permutation invariance",
            approx_eq(lift_pure([regs[i] for i in perm],
                                [psis[i] for i in perm], tol).reshape(-1, 1),
                      lifted_psi.reshape(-1, 1), tol), pctx)
    c.check("pure: pair flattening",
            approx_eq(lift_pure([pair(regs[0], regs[1], tol), regs[2]],
                                [np.kron(psis[0], psis[1]), psis[2]],
                                tol).reshape(-1, 1),
                      lifted_psi.reshape(-1, 1), tol), pctx)
    c.check("pure: U law",
            approx_eq(lift_pure(regs, [u0 @ psis[0]] + psis[1:], tol).reshape(-1, 1),
                      (apply(regs[0], u0) @ lifted_psi).reshape(-1, 1), tol), pctx)
    c.check("pure: butterfly",
            approx_eq(lift_mixed(regs, [butter(p) for p in psis], tol),
                      butter(lifted_psi), tol), pctx)
    member = random_subspace(rng, regs[0].m, rank=max(1, regs[0].m - 1))
    inside = member.basis @ random_state(rng, member.dim)
    c.check("pure: membership in lifted subspace",
            lift_subspace(regs[0], member, tol).contains_vector(
                lift_pure(regs, [inside] + psis[1:], tol), tol), pctx)
    # eta-regularity: builtins are regular, pair of regulars is regular
    sp = _random_split(rng, max_dim)
    c.check("pure: Fst/Snd/σ are η-regular",
            is_eta_regular(fst_register(*sp), tol)
            and is_eta_regular(snd_register(*sp), tol)
            and is_eta_regular(swap_register(*sp), tol), str(sp))
    c.check("pure: <Fst,Snd> is η-regular",
            is_eta_regular(pair(fst_register(*sp), snd_register(*sp), tol), tol),
            str(sp))
    # nested flattening when the inner registers are η-regular
    c.check("pure: nested flattening (η-regular inner)",
            _nested_pure_flattening(rng, tol), "")

    # channels
    f1 = regs[0]
    chan = random_kraus_channel(rng, f1.m, sub=True)
    chan2 = random_kraus_channel(rng, f1.m, sub=True)
    lifted_chan = lift_channel(f1, chan, tol=tol)
    c.check("channel: subchannel preserved", lifted_chan.is_subchannel(1e-7), pctx)
    c.check("channel: channel preserved",
            lift_channel(f1, random_kraus_channel(rng, f1.m), tol=tol)
            .is_channel(1e-7), pctx)
    c.check("channel: Kraus and conjugation routes agree",
            approx_eq(lifted_chan.action_matrix(),
                      lift_channel(f1, QChannel.from_action(chan.action_matrix()),
                                   tol=tol).action_matrix(), tol), pctx)
    w = random_unitary(rng, f1.k)
    alt_comp = chain(complement(f1), iso_register(w))
    c.check("channel: complement choice irrelevant",
            approx_eq(lift_channel(f1, QChannel.from_action(chan.action_matrix()),
                                   comp=alt_comp, tol=tol).action_matrix(),
                      lift_channel(f1, QChannel.from_action(chan.action_matrix()),
                                   tol=tol).action_matrix(), tol), pctx)
    c.check("channel: composition",
            approx_eq(lift_channel(f1, chan.compose(chan2), tol=tol).action_matrix(),
                      lift_channel(f1, chan, tol=tol)
                      .compose(lift_channel(f1, chan2, tol=tol)).action_matrix(),
                      tol), pctx)
    c.check("channel: F(id) = id",
            approx_eq(lift_channel(f1, QChannel.identity(f1.m), tol=tol)
                      .action_matrix(), np.eye(f1.n * f1.n), tol), pctx)
    g1c = regs[1]
    chan_g = random_kraus_channel(rng, g1c.m, sub=True)
    pair_fg = pair(f1, g1c, tol)
    c.check("channel: pair = commuting composition",
            approx_eq(lift_channel(pair_fg, chan.tensor(chan_g), tol=tol)
                      .action_matrix(),
                      lift_channel(f1, chan, tol=tol)
                      .compose(lift_channel(g1c, chan_g, tol=tol)).action_matrix(),
                      tol)
            and approx_eq(lift_channel(f1, chan, tol=tol)
                          .compose(lift_channel(g1c, chan_g, tol=tol))
                          .action_matrix(),
                          lift_channel(g1c, chan_g, tol=tol)
                          .compose(lift_channel(f1, chan, tol=tol)).action_matrix(),
                          tol), pctx)
    inner2 = _random_into(rng, f1.m)
    chan_in = random_kraus_channel(rng, inner2.m, sub=True)
    c.check("channel: chain law F(G(E)) = (F.G)(E)",
            approx_eq(lift_channel(f1, lift_channel(inner2, chan_in, tol=tol),
                                   tol=tol).action_matrix(),
                      lift_channel(chain(f1, inner2), chan_in, tol=tol)
                      .action_matrix(), tol), _fmt(f1, inner2))
    sp2 = _random_split(rng, 6)
    ea = random_kraus_channel(rng, sp2[0], sub=True)
    eb = random_kraus_channel(rng, sp2[1], sub=True)
    c.check("channel: σ(E⊗F) = F⊗E",
            approx_eq(lift_channel(swap_register(*sp2), ea.tensor(eb), tol=tol)
                      .action_matrix(), eb.tensor(ea).action_matrix(), tol),
            str(sp2))
    c.check("channel: action on lifted mixed products",
            approx_eq(lift_channel(f1, chan, tol=tol)(lifted),
                      lift_mixed(regs, [chan(rhos[0])] + rhos[1:], tol), tol), pctx)

    # partial trace
    c.check("trace_in: partition extraction",
            all(approx_eq(trace_in(regs[i], lift_mixed(regs, subs, tol), tol),
                          subs[i] * np.prod([np.trace(subs[j]).real
                                             for j in range(3) if j != i]), tol)
                for i in range(3)), pctx)
    rho_big = random_density(rng, f1.n)
    c.check("trace_in: chain law ≫(F.G) = ≫G ∘ ≫F",
            approx_eq(trace_in(chain(f1, inner2), rho_big, tol),
                      trace_in(inner2, trace_in(f1, rho_big, tol), tol), tol),
            _fmt(f1, inner2))
    c.check("trace_in: ≫F ∘ F(E) = E ∘ ≫F",
            approx_eq(trace_in(f1, lift_channel(f1, chan, tol=tol)(rho_big), tol),
                      chan(trace_in(f1, rho_big, tol)), tol), pctx)
    chan_g_full = random_kraus_channel(rng, g1c.m)  # trace-preserving required
    c.check("trace_in: ≫F ∘ G(E) = ≫F for compatible F,G",
            approx_eq(trace_in(f1, lift_channel(g1c, chan_g_full, tol=tol)(rho_big),
                               tol),
                      trace_in(f1, rho_big, tol), tol), pctx)
    c.check("trace_in: complements pair law", _trace_in_pair_law(rng, f1, tol),
            pctx)

    # measurements
    _measurement_case(c, rng, regs, tol)


def _trace_in_pair_law(rng, f1: QRegister, tol: float) -> bool:
    rho = random_density(rng, f1.m)
    sig = random_operator(rng, f1.k)
    joint = lift_mixed([f1, complement(f1)], [rho, sig], tol)
    return approx_eq(trace_in(f1, joint, tol), rho * np.trace(sig), tol)


def _nested_pure_flattening(rng, tol: float) -> bool:
    """F1(G1(γ1) ▷ G2(γ2)) ▷ F2(ψ2) with η-regular inner Fst/Snd."""
    sp = (2, 2)
    g1, g2 = fst_register(*sp), snd_register(*sp)
    host = QRegister(4, 2, random_unitary(rng, 8))
    rest = complement(host)
    gam1, gam2 = random_state(rng, 2), random_state(rng, 2)
    psi2 = random_state(rng, rest.m)
    inner = lift_pure([g1, g2], [gam1, gam2], tol)
    lhs = lift_pure([host, rest], [inner, psi2], tol)
    rhs = lift_pure([chain(host, g1), chain(host, g2), rest],
                    [gam1, gam2, psi2], tol)
    return approx_eq(lhs.reshape(-1, 1), rhs.reshape(-1, 1), tol)


def _measurement_case(c: _Collector, rng, regs, tol: float):
    f1 = regs[0]
    pctx = _fmt(*regs)
    psis = [random_state(rng, r.m) for r in regs]
    rhos = [random_density(rng, r.m) for r in regs]
    lifted_psi = lift_pure(regs, psis, tol)
    lifted_rho = lift_mixed(regs, rhos, tol)

    for kind in ("projective", "complete", "povm", "general"):
        meas = random_measurement(rng, kind, f1.m)
        lifted = lift_measurement(f1, meas)
        c.check(f"meas.{kind}: lifted kind invariants hold",
                not lifted.validate(1e-7), pctx)
        for j in meas.labels:
            base_pure = measure(meas, j, psis[0], tol)
            lift_pure_r = measure(lifted, j, lifted_psi, tol)
            c.check(f"meas.{kind}: pure statistics agree",
                    abs(base_pure.probability - lift_pure_r.probability) <= 1e-7,
                    pctx)
            base_mixed = measure(meas, j, rhos[0], tol)
            lift_mixed_r = measure(lifted, j, lifted_rho, tol)
            c.check(f"meas.{kind}: mixed statistics agree",
                    abs(base_mixed.probability - lift_mixed_r.probability) <= 1e-7,
                    pctx)
            if kind in ("projective", "complete", "general"):
                expect_pure = lift_pure(regs, [base_pure.post_state] + psis[1:],
                                        tol, validate=False)
                c.check(f"meas.{kind}: pure post-state lifts",
                        approx_eq(lift_pure_r.post_state.reshape(-1, 1),
                                  expect_pure.reshape(-1, 1), tol), pctx)
                expect_mixed = lift_mixed(regs, [base_mixed.post_state] + rhos[1:],
                                          tol, validate=False)
                c.check(f"meas.{kind}: mixed post-state lifts",
                        approx_eq(lift_mixed_r.post_state, expect_mixed, tol), pctx)
    # UM law and povm-projective agreement
    meas = random_measurement(rng, "projective", f1.m)
    u = random_unitary(rng, f1.m)
    um = Measurement.of("projective", [u @ p @ dagger(u) for p in meas.operators])
    lifted_um = lift_measurement(f1, um)
    fu = apply(f1, u)
    c.check("meas: F(U) F(M) = F(UM)",
            all(approx_eq(fu @ op @ dagger(fu), lop, tol)
                for op, lop in zip(lift_measurement(f1, meas).operators,
                                   lifted_um.operators)), pctx)
    as_povm = Measurement.of("povm", meas.operators)
    c.check("meas: POVM vs projective probabilities agree",
            all(abs(measure(lift_measurement(f1, meas), j, lifted_rho, tol)
                    .probability
                    - measure(lift_measurement(f1, as_povm), j, lifted_rho, tol)
                    .probability) <= 1e-7
                for j in meas.labels), pctx)


# --- classical laws ----------------------------------------------------------------

def _random_classical_pair(rng):
    """Compatible classical registers: relabeled components of a product memory."""
    sa = int(rng.integers(1, 4))
    sb = int(rng.integers(1, 4))
    while sa * sb > 8:
        sa, sb = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    relabel = cl.cmapped(tuple(rng.permutation(sa * sb)))
    f = cl.cchain(relabel, cl.cfst(sa, sb))
    g = cl.cchain(relabel, cl.csnd(sa, sb))
    return f, g, relabel


def _random_partial_fn(rng, size: int) -> cl.PartialFn:
    images = tuple(None if rng.random() < 0.25 else int(rng.integers(0, size))
                   for _ in range(size))
    return cl.PartialFn(size, images)


def _classical_case(c: _Collector, rng: np.random.Generator, max_dim: int,
                    tol: float):
    f, g, relabel = _random_classical_pair(rng)
    na, nb = f.a_size, g.a_size
    ctx = f"A={na}, B={nb}, memory={f.b_size}"

    c.check("cfig2: compatibility of product components", cl.ccompatible(f, g), ctx)
    if na <= 3 and nb <= 3:
        c.check("cfig2: lens criterion matches brute-force commutation",
                cl.ccompatible(f, g) == cl.brute_force_commute(f, g), ctx)
        if na >= 2:
            c.check("cfig2: F incompatible with itself",
                    (not cl.ccompatible(f, f))
                    and not cl.brute_force_commute(f, f), ctx)

    fg = cl.cpair(f, g)
    a = _random_partial_fn(rng, na)
    b = _random_partial_fn(rng, nb)
    c.check("cfig2: pair property <F,G>(a⊗b) = F(a)∘G(b)",
            cl.capply(fg, cl.ctensor(a, b))
            == cl.capply(f, a).compose(cl.capply(g, b)), ctx)
    c.check("cfig2: <F,G>.Fst = F",
            cl.same_caction(cl.cchain(fg, cl.cfst(na, nb)), f), ctx)
    c.check("cfig2: <F,G>.Snd = G",
            cl.same_caction(cl.cchain(fg, cl.csnd(na, nb)), g), ctx)
    c.check("cfig2: <F,G>.σ = <G,F>",
            cl.same_caction(cl.cchain(fg, cl.cswap(na, nb)), cl.cpair(g, f)), ctx)
    c.check("cfig2: <Fst,Snd> = id",
            cl.same_caction(cl.cpair(cl.cfst(na, nb), cl.csnd(na, nb)),
                            cl.cid(na * nb)), ctx)
    c.check("cfig2: <Snd,Fst> = σ",
            cl.same_caction(cl.cpair(cl.csnd(na, nb), cl.cfst(na, nb)),
                            cl.cswap(na, nb)), ctx)

    # chain laws through an outer register
    outer_extra = int(rng.integers(1, 3))
    outer = cl.cchain(cl.cmapped(tuple(rng.permutation(f.b_size * outer_extra))),
                      cl.cfst(f.b_size, outer_extra))
    c.check("cfig2: <C.F, C.G> = C.<F,G>",
            cl.same_caction(cl.cpair(cl.cchain(outer, f), cl.cchain(outer, g)),
                            cl.cchain(outer, fg)), ctx)
    c.check("cfig2: chain compat closure",
            cl.ccompatible(cl.cchain(outer, f), cl.cchain(outer, g)), ctx)

    # tensor law on the doubled memory
    cc = cl.cmapped(tuple(rng.permutation(na)))
    dd = cl.cmapped(tuple(rng.permutation(nb)))
    c.check("cfig2: <F,G>.(C⊗D) = <F.C, G.D>",
            cl.same_caction(cl.cchain(fg, cl.ctensor_registers(cc, dd)),
                            cl.cpair(cl.cchain(f, cc), cl.cchain(g, dd))), ctx)
    ta = _random_partial_fn(rng, cc.a_size)
    tb = _random_partial_fn(rng, dd.a_size)
    c.check("cfig2: (a⊗b)∘(c⊗d) = (a∘c)⊗(b∘d)",
            cl.ctensor(a, b).compose(cl.ctensor(
                _pad_to(ta, na), _pad_to(tb, nb)))
            == cl.ctensor(a.compose(_pad_to(ta, na)),
                          b.compose(_pad_to(tb, nb))), ctx)

    # monoid homomorphism
    a2 = _random_partial_fn(rng, na)
    c.check("cfig2: capply is a monoid homomorphism",
            cl.capply(f, cl.PartialFn.identity(na)) == cl.PartialFn.identity(f.b_size)
            and cl.capply(f, a.compose(a2))
            == cl.capply(f, a).compose(cl.capply(f, a2)), ctx)

    # unit register
    u = cl.cunit(f.b_size)
    c.check("cfig2: unit register compatible with all",
            cl.ccompatible(u, f) and cl.ccompatible(u, g), ctx)

    # validity of construction outputs (constructors raise on invalid lenses)
    c.check("cfig2: constructions produce valid lenses",
            not cl.validate_lens(fg.lens) and not cl.validate_lens(outer.lens)
            and not cl.validate_lens(cl.cpair(g, f).lens), ctx)


def _pad_to(fn: cl.PartialFn, size: int) -> cl.PartialFn:
    if fn.size == size:
        return fn
    images = tuple(fn.images[i] if i < fn.size and fn.images[i] is not None
                   and fn.images[i] < size else None for i in range(size))
    return cl.PartialFn(size, images)


# --- runner -----------------------------------------------------------------------

_SUITE_FNS = {
    "fig2": _fig2_case,
    "fig4": _fig4_case,
    "lifting": _lifting_case,
    "classical": _classical_case,
}

SUITE_NAMES = tuple(_SUITE_FNS) + ("all",)


def run_suite(suite: str, seed: int = 0, cases: int = 100, max_dim: int = 16,
              tol: float = 1e-8, pair_fn=pair) -> SuiteResult:
    """Run one suite; deterministic for a fixed seed."""
    if suite not in _SUITE_FNS:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITE_NAMES}")
    result = SuiteResult(suite, seed, cases)
    collector = _Collector(result)
    rng = np.random.default_rng(seed)
    for case in range(cases):
        collector.case = case
        if suite == "fig2":
            _fig2_case(collector, rng, max_dim, tol, pair_fn)
        elif suite == "fig4":
            _fig4_case(collector, rng, max_dim, tol)
        elif suite == "lifting":
            _lifting_case(collector, rng, min(max_dim, 16), tol)
        else:
            _classical_case(collector, rng, max_dim, tol)
    return result


def run_suites(suites, seed: int = 0, cases: int = 100, max_dim: int = 16,
               tol: float = 1e-8):
    names = list(_SUITE_FNS) if suites in ("all", ["all"]) else list(suites)
    return [run_suite(name, seed, cases, max_dim, tol) for name in names]


def mutant_pair(f: QRegister, g: QRegister, tol: float = 1e-8) -> QRegister:
    """Pair with the compatibility precondition removed (for mutation testing)."""
    return extract_canonical(_pair_superoperator(f, g), tol)
