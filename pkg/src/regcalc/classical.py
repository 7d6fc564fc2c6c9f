"""Classical registers over finite sets: partial-function updates and lenses.

Elements of a finite set of size ``s`` are the indices ``0..s-1``; product
sets pair row-major (``(x, y) -> x*|B| + y``) to match the Kronecker
ordering used on the quantum side.  A register is a validated getter/setter
pair; its action on a partial update ``a`` is ``b -> s(a(g(b)), b)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .linalg import DimensionMismatch


@dataclass(frozen=True)
class PartialFn:
    """A partial function on ``0..size-1``; undefined points are ``None``."""

    size: int
    images: tuple

    def __post_init__(self):
        if len(self.images) != self.size:
            raise DimensionMismatch("images length must equal the set size")
        for y in self.images:
            if y is not None and not (0 <= y < self.size):
                raise ValueError(f"image {y} outside 0..{self.size - 1}")

    @staticmethod
    def identity(size: int) -> "PartialFn":
        return PartialFn(size, tuple(range(size)))

    @staticmethod
    def nowhere(size: int) -> "PartialFn":
        return PartialFn(size, (None,) * size)

    @staticmethod
    def total(images) -> "PartialFn":
        return PartialFn(len(images), tuple(images))

    def __call__(self, x: int):
        return self.images[x]

    def is_total(self) -> bool:
        return all(y is not None for y in self.images)

    def compose(self, other: "PartialFn") -> "PartialFn":
        """``self ∘ other``: apply ``other`` first."""
        if self.size != other.size:
            raise DimensionMismatch("composition needs equal sets")
        out = tuple(None if y is None else self.images[y] for y in other.images)
        return PartialFn(self.size, out)


def all_partial_fns(size: int):
    """All ``(size+1)^size`` partial functions, in lexicographic order."""
    for images in itertools.product((None, *range(size)), repeat=size):
        yield PartialFn(size, images)


def ctensor(a: PartialFn, b: PartialFn) -> PartialFn:
    """``(a ⊗ b)(x, y) = (a(x), b(y))``, defined iff both sides are."""
    nb = b.size
    images = []
    for x in range(a.size):
        for y in range(nb):
            ax, by = a(x), b(y)
            images.append(None if ax is None or by is None else ax * nb + by)
    return PartialFn(a.size * b.size, tuple(images))


@dataclass(frozen=True)
class Lens:
    """Getter/setter tables for values in ``A`` inside a memory ``B``.

    ``getter[b]`` reads the value; ``setter[a][b]`` writes ``a`` into ``b``.
    """

    a_size: int
    b_size: int
    getter: tuple          # length b_size, entries in A
    setter: tuple          # a_size rows of length b_size, entries in B

    def __post_init__(self):
        if len(self.getter) != self.b_size or len(self.setter) != self.a_size:
            raise DimensionMismatch("getter/setter table shapes are wrong")
        for v in self.getter:
            if not (0 <= v < self.a_size):
                raise ValueError("getter value out of range")
        for row in self.setter:
            if len(row) != self.b_size:
                raise DimensionMismatch("setter row length is wrong")
            for v in row:
                if not (0 <= v < self.b_size):
                    raise ValueError("setter value out of range")

    def get(self, b: int) -> int:
        return self.getter[b]

    def set(self, a: int, b: int) -> int:
        return self.setter[a][b]


def validate_lens(lens: Lens) -> list:
    """Exhaustive check of the three lens laws; returns the violating tuples."""
    failures = []
    for b in range(lens.b_size):
        if lens.set(lens.get(b), b) != b:
            failures.append(("set_get", b))
    for a in range(lens.a_size):
        for b in range(lens.b_size):
            if lens.get(lens.set(a, b)) != a:
                failures.append(("get_set", a, b))
    for a in range(lens.a_size):
        for a2 in range(lens.a_size):
            for b in range(lens.b_size):
                if lens.set(a, lens.set(a2, b)) != lens.set(a, b):
                    failures.append(("set_set", a, a2, b))
    return failures


@dataclass(frozen=True)
class CRegister:
    """A classical register: a lens that passed validation."""

    lens: Lens

    def __post_init__(self):
        failures = validate_lens(self.lens)
        if failures:
            raise ValueError(f"lens laws fail: {failures[:3]}")

    @property
    def a_size(self) -> int:
        return self.lens.a_size

    @property
    def b_size(self) -> int:
        return self.lens.b_size


def capply(reg: CRegister, a: PartialFn) -> PartialFn:
    """``F(a)(b) = s(a(g(b)), b)``, undefined where ``a`` is."""
    if a.size != reg.a_size:
        raise DimensionMismatch("update domain does not match the register")
    lens = reg.lens
    images = []
    for b in range(reg.b_size):
        v = a(lens.get(b))
        images.append(None if v is None else lens.set(v, b))
    return PartialFn(reg.b_size, tuple(images))


def cfst(a_size: int, b_size: int) -> CRegister:
    """First component of a product memory ``A x B``."""
    getter = tuple(b // b_size for b in range(a_size * b_size))
    setter = tuple(tuple(a * b_size + (b % b_size) for b in range(a_size * b_size))
                   for a in range(a_size))
    return CRegister(Lens(a_size, a_size * b_size, getter, setter))


def csnd(a_size: int, b_size: int) -> CRegister:
    """Second component of a product memory ``A x B``."""
    getter = tuple(b % b_size for b in range(a_size * b_size))
    setter = tuple(tuple((b // b_size) * b_size + v for b in range(a_size * b_size))
                   for v in range(b_size))
    return CRegister(Lens(b_size, a_size * b_size, getter, setter))


def cswap(a_size: int, b_size: int) -> CRegister:
    """The iso-register ``B x A -> A x B`` swapping components."""
    n = a_size * b_size
    getter = tuple((b % b_size) * a_size + (b // b_size) for b in range(n))
    setter = []
    for v in range(n):
        y, x = v // a_size, v % a_size
        setter.append(tuple(x * b_size + y for _ in range(n)))
    return CRegister(Lens(n, n, getter, tuple(setter)))


def cmapped(table) -> CRegister:
    """The view through a bijection: getter ``f``, setter ``f⁻¹`` (state-blind)."""
    table = tuple(table)
    n = len(table)
    if sorted(table) != list(range(n)):
        raise ValueError("mapping table is not a bijection")
    inverse = [0] * n
    for x, y in enumerate(table):
        inverse[y] = x
    setter = tuple(tuple(inverse[a] for _ in range(n)) for a in range(n))
    return CRegister(Lens(n, n, table, setter))


def cunit(b_size: int) -> CRegister:
    """Singleton-valued register; setting it has no effect."""
    getter = (0,) * b_size
    setter = (tuple(range(b_size)),)
    return CRegister(Lens(1, b_size, getter, setter))


def builtin_classical(kind: str, *args) -> CRegister:
    if kind == "cfst":
        return cfst(*args)
    if kind == "csnd":
        return csnd(*args)
    if kind == "cswap":
        return cswap(*args)
    if kind == "cmapped":
        return cmapped(*args)
    if kind == "cunit":
        return cunit(*args)
    raise ValueError(f"unknown builtin classical register {kind!r}")


def cpair(f: CRegister, g: CRegister) -> CRegister:
    """``⟨F,G⟩`` with getter ``(g_F, g_G)`` and setter ``s_F after s_G``."""
    if f.b_size != g.b_size:
        raise DimensionMismatch("cpair: memories differ")
    if not ccompatible(f, g):
        raise ValueError("cpair: registers are not compatible")
    na, nb, n = f.a_size, g.a_size, f.b_size
    getter = tuple(f.lens.get(c) * nb + g.lens.get(c) for c in range(n))
    setter = tuple(tuple(f.lens.set(v // nb, g.lens.set(v % nb, c)) for c in range(n))
                   for v in range(na * nb))
    return CRegister(Lens(na * nb, n, getter, setter))


def cpair_all(regs) -> CRegister:
    regs = list(regs)
    if not regs:
        raise ValueError("cpair_all needs at least one register")
    out = regs[-1]
    for f in reversed(regs[:-1]):
        out = cpair(f, out)
    return out


def cchain(f: CRegister, g: CRegister) -> CRegister:
    """``F.G``: the register ``G`` inside the domain of ``F``."""
    if f.a_size != g.b_size:
        raise DimensionMismatch(
            f"cchain: domain of outer ({f.a_size}) must equal memory of inner ({g.b_size})")
    getter = tuple(g.lens.get(f.lens.get(c)) for c in range(f.b_size))
    setter = tuple(tuple(f.lens.set(g.lens.set(a, f.lens.get(c)), c)
                         for c in range(f.b_size))
                   for a in range(g.a_size))
    return CRegister(Lens(g.a_size, f.b_size, getter, setter))


def ctensor_registers(f: CRegister, g: CRegister) -> CRegister:
    """``F ⊗ G`` on the product memory, acting componentwise."""
    nb_f, nb_g = f.b_size, g.b_size
    n = nb_f * nb_g
    getter = tuple(f.lens.get(c // nb_g) * g.a_size + g.lens.get(c % nb_g)
                   for c in range(n))
    setter = tuple(
        tuple(f.lens.set(v // g.a_size, c // nb_g) * nb_g
              + g.lens.set(v % g.a_size, c % nb_g)
              for c in range(n))
        for v in range(f.a_size * g.a_size))
    return CRegister(Lens(f.a_size * g.a_size, n, getter, setter))


def cid(size: int) -> CRegister:
    getter = tuple(range(size))
    setter = tuple((a,) * size for a in range(size))
    return CRegister(Lens(size, size, getter, setter))


def ccompatible(f: CRegister, g: CRegister) -> bool:
    """Lens criterion: setters commute and each getter ignores the other's writes."""
    if f.b_size != g.b_size:
        raise DimensionMismatch("ccompatible: memories differ")
    for a in range(f.a_size):
        for a2 in range(g.a_size):
            for b in range(f.b_size):
                if f.lens.set(a, g.lens.set(a2, b)) != g.lens.set(a2, f.lens.set(a, b)):
                    return False
    for a2 in range(g.a_size):
        for b in range(f.b_size):
            if f.lens.get(g.lens.set(a2, b)) != f.lens.get(b):
                return False
    for a in range(f.a_size):
        for b in range(f.b_size):
            if g.lens.get(f.lens.set(a, b)) != g.lens.get(b):
                return False
    return True


def brute_force_commute(f: CRegister, g: CRegister, max_size: int = 3) -> bool:
    """Definitional compatibility: ``F(a) G(b) = G(b) F(a)`` for every update.

    Enumerates all ``(|A|+1)^|A|`` partial functions per side; the test
    oracle against which the lens criterion is validated.
    """
    if f.b_size != g.b_size:
        raise DimensionMismatch("memories differ")
    if f.a_size > max_size or g.a_size > max_size:
        raise ValueError(f"enumeration capped at domain size {max_size}")
    gs = [capply(g, b) for b in all_partial_fns(g.a_size)]
    for a in all_partial_fns(f.a_size):
        fa = capply(f, a)
        for gb in gs:
            if fa.compose(gb) != gb.compose(fa):
                return False
    return True


def same_caction(f: CRegister, g: CRegister) -> bool:
    """Extensional equality; valid lenses determine the action and vice versa."""
    return f.lens == g.lens


def enumerate_valid_lenses(a_size: int, b_size: int):
    """All valid lenses A-in-B, built from fiber structures of surjective getters."""
    if b_size % a_size != 0:
        return
    fiber = b_size // a_size
    for getter in itertools.product(range(a_size), repeat=b_size):
        fibers = [[b for b in range(b_size) if getter[b] == a] for a in range(a_size)]
        if any(len(fb) != fiber for fb in fibers):
            continue
        # coherent setters = per-value bijections onto fiber 0's index positions
        base = fibers[0]
        position = {}
        for a in range(a_size):
            for idx, b in enumerate(fibers[a]):
                position[b] = idx
        for perms in itertools.product(itertools.permutations(range(fiber)),
                                       repeat=a_size - 1):
            maps = [tuple(range(fiber))] + [tuple(p) for p in perms]
            # setter: write a into b = pick fibers[a][maps[a][inv_maps[getter[b]]...]]
            # normalize: each b has a "rest" index r = inverse of maps at its fiber
            rest = {}
            ok = True
            for b in range(b_size):
                a = getter[b]
                idx = position[b]
                inv = maps[a].index(idx)
                rest[b] = inv
            setter = tuple(tuple(fibers[a][maps[a][rest[b]]] for b in range(b_size))
                           for a in range(a_size))
            lens = Lens(a_size, b_size, tuple(getter), setter)
            if not validate_lens(lens):
                yield lens
