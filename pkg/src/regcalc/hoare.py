"""A minimal quantum Hoare logic over register expressions.

Programs are sequences of two commands: apply a unitary to a register, or
guard on a computational-basis outcome of a register.  Predicates are
subspaces of the memory, written through registers.  Triples are checked
semantically; the five inference rules exist alongside for derivations and
cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    approx_eq,
    as_matrix,
    as_vector,
    dagger,
    orthonormal_range_basis,
    subspace_contains,
    subspace_intersect,
)
from . import registers as qr
from .gates import butter, proj
from .registers import QRegister, apply, chain, compatible, pair


class RegisterTypeError(ValueError):
    """An expression does not typecheck against the layout; carries a path."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path or "<root>"


# Shapes track the tensor structure of a domain: an int leaf or a (left,
# right) pair.  They drive dimension inference for Fst/Snd/Swap/Assoc.
Shape = Union[int, tuple]


def shape_dim(s: Shape) -> int:
    if isinstance(s, int):
        return s
    left, right = s
    return shape_dim(left) * shape_dim(right)


def shape_of(dims) -> Shape:
    """Right-nested shape from an int or a list of ints."""
    if isinstance(dims, int):
        return dims
    dims = list(dims)
    if not dims:
        raise ValueError("empty dimension list")
    if len(dims) == 1:
        return dims[0]
    return (dims[0], shape_of(dims[1:]))


# --- register expressions ---------------------------------------------------

@dataclass(frozen=True)
class Named:
    name: str


@dataclass(frozen=True)
class Fst:
    pass


@dataclass(frozen=True)
class Snd:
    pass


@dataclass(frozen=True)
class Swap:
    pass


@dataclass(frozen=True)
class Assoc:
    pass


@dataclass(frozen=True)
class AssocInv:
    pass


@dataclass(frozen=True)
class Chain:
    outer: "RegisterExpr"
    inner: "RegisterExpr"


@dataclass(frozen=True)
class Pair:
    left: "RegisterExpr"
    right: "RegisterExpr"


@dataclass(frozen=True)
class Tensor:
    left: "RegisterExpr"
    right: "RegisterExpr"


@dataclass(frozen=True)
class Mapped:
    u: np.ndarray
    of: "RegisterExpr"

    def __post_init__(self):
        object.__setattr__(self, "u", as_matrix(self.u))


@dataclass(frozen=True)
class Complement:
    of: "RegisterExpr"


RegisterExpr = Union[Named, Fst, Snd, Swap, Assoc, AssocInv, Chain, Pair,
                     Tensor, Mapped, Complement]


@dataclass(frozen=True)
class Layout:
    """Named memory factors; each factor may itself carry a product shape."""

    factors: tuple  # of (name, Shape)
    aliases: dict = field(default_factory=dict)  # name -> RegisterExpr
    # resolution/denotation memo, keyed structurally; safe because layouts,
    # expressions and registers are all immutable
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @staticmethod
    def of(factors, aliases=None) -> "Layout":
        fs = tuple((name, shape_of(dims)) for name, dims in factors)
        return Layout(fs, dict(aliases or {}))

    @property
    def dim(self) -> int:
        n = 1
        for _, s in self.factors:
            n *= shape_dim(s)
        return n

    @property
    def memory_shape(self) -> Shape:
        shapes = [s for _, s in self.factors]
        if len(shapes) == 1:
            return shapes[0]
        out = shapes[-1]
        for s in reversed(shapes[:-1]):
            out = (s, out)
        return out

    def factor_shape(self, name: str) -> Shape:
        for fname, s in self.factors:
            if fname == name:
                return s
        raise KeyError(name)

    def embedding(self, name: str) -> QRegister:
        """Canonical register for one named factor: ``a -> 1 ⊗ a ⊗ 1``."""
        dims = [shape_dim(s) for _, s in self.factors]
        names = [fname for fname, _ in self.factors]
        i = names.index(name)
        d = dims[i]
        pre = int(np.prod(dims[:i], dtype=np.int64)) if i else 1
        post = int(np.prod(dims[i + 1:], dtype=np.int64)) if i + 1 < len(dims) else 1
        n, k = pre * d * post, pre * post
        u = np.zeros((n, n), dtype=np.complex128)
        for x in range(d):
            for p in range(pre):
                for q in range(post):
                    u[p * d * post + x * post + q, x * k + p * post + q] = 1.0
        return QRegister(d, k, u)


def expr_key(expr) -> tuple:
    """Structural cache key for an expression (matrices by their bytes)."""
    if isinstance(expr, Named):
        return ("named", expr.name)
    if isinstance(expr, (Fst, Snd, Swap, Assoc, AssocInv)):
        return (type(expr).__name__.lower(),)
    if isinstance(expr, Chain):
        return ("chain", expr_key(expr.outer), expr_key(expr.inner))
    if isinstance(expr, Pair):
        return ("pair", expr_key(expr.left), expr_key(expr.right))
    if isinstance(expr, Tensor):
        return ("tensor", expr_key(expr.left), expr_key(expr.right))
    if isinstance(expr, Mapped):
        return ("mapped", expr.u.shape, expr.u.tobytes(), expr_key(expr.of))
    if isinstance(expr, Complement):
        return ("complement", expr_key(expr.of))
    raise RegisterTypeError(f"unknown expression {expr!r}")


def resolve(expr: RegisterExpr, layout: Layout,
            tol: float = DEFAULT_TOL) -> QRegister:
    """Compile a register expression against a layout."""
    key = ("resolve", expr_key(expr), tol)
    hit = layout.cache.get(key)
    if hit is None:
        hit = _resolve(expr, layout, layout.memory_shape, "", tol)
        layout.cache[key] = hit
    return hit[0]


def _resolve(expr, layout: Layout, codomain: Shape, path: str, tol: float):
    if isinstance(expr, Named):
        name = expr.name
        if any(name == fname for fname, _ in layout.factors):
            if codomain != layout.memory_shape:
                raise RegisterTypeError(
                    f"factor {name!r} only exists at the top-level memory", path)
            return layout.embedding(name), layout.factor_shape(name)
        if name in layout.aliases:
            return _resolve(layout.aliases[name], layout, codomain,
                            f"{path}/{name}", tol)
        raise RegisterTypeError(f"unknown register name {name!r}", path)
    if isinstance(expr, Fst):
        if not isinstance(codomain, tuple):
            raise RegisterTypeError("fst needs a product codomain", path)
        left, right = codomain
        return qr.fst_register(shape_dim(left), shape_dim(right)), left
    if isinstance(expr, Snd):
        if not isinstance(codomain, tuple):
            raise RegisterTypeError("snd needs a product codomain", path)
        left, right = codomain
        return qr.snd_register(shape_dim(left), shape_dim(right)), right
    if isinstance(expr, Swap):
        if not isinstance(codomain, tuple):
            raise RegisterTypeError("swap needs a product codomain", path)
        left, right = codomain
        return qr.swap_register(shape_dim(right), shape_dim(left)), (right, left)
    if isinstance(expr, Assoc):
        if not (isinstance(codomain, tuple) and isinstance(codomain[1], tuple)):
            raise RegisterTypeError("assoc needs codomain shape (a, (b, c))", path)
        a, (b, c) = codomain
        return qr.assoc_register(shape_dim(a), shape_dim(b), shape_dim(c)), ((a, b), c)
    if isinstance(expr, AssocInv):
        if not (isinstance(codomain, tuple) and isinstance(codomain[0], tuple)):
            raise RegisterTypeError("assoc_inv needs codomain shape ((a, b), c)", path)
        (a, b), c = codomain
        return qr.assoc_inv_register(shape_dim(a), shape_dim(b), shape_dim(c)), \
            (a, (b, c))
    if isinstance(expr, Chain):
        outer, oshape = _resolve(expr.outer, layout, codomain, f"{path}/chain[0]", tol)
        inner, ishape = _resolve(expr.inner, layout, oshape, f"{path}/chain[1]", tol)
        return chain(outer, inner), ishape
    if isinstance(expr, Pair):
        left, lshape = _resolve(expr.left, layout, codomain, f"{path}/pair[0]", tol)
        right, rshape = _resolve(expr.right, layout, codomain, f"{path}/pair[1]", tol)
        try:
            return pair(left, right, tol), (lshape, rshape)
        except qr.IncompatibleRegisters as exc:
            raise RegisterTypeError(str(exc), f"{path}/pair") from exc
    if isinstance(expr, Tensor):
        if not isinstance(codomain, tuple):
            raise RegisterTypeError("tensor needs a product codomain", path)
        cl, cr = codomain
        left, lshape = _resolve(expr.left, layout, cl, f"{path}/tensor[0]", tol)
        right, rshape = _resolve(expr.right, layout, cr, f"{path}/tensor[1]", tol)
        return qr.tensor_registers(left, right), (lshape, rshape)
    if isinstance(expr, Mapped):
        inner, ishape = _resolve(expr.of, layout, codomain, f"{path}/mapped", tol)
        u = expr.u
        if u.shape != (inner.m, inner.m):
            raise RegisterTypeError(
                f"mapping unitary must be {inner.m}x{inner.m}, got {u.shape}", path)
        try:
            return chain(inner, qr.iso_register(u, tol)), inner.m
        except ValueError as exc:
            raise RegisterTypeError(str(exc), path) from exc
    if isinstance(expr, Complement):
        inner, _ = _resolve(expr.of, layout, codomain, f"{path}/complement", tol)
        return qr.complement(inner), qr.complement(inner).m
    raise RegisterTypeError(f"unknown expression {expr!r}", path)


# --- programs ----------------------------------------------------------------

@dataclass(frozen=True)
class ApplyU:
    reg: RegisterExpr
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", as_matrix(self.u))


@dataclass(frozen=True)
class Guard:
    reg: RegisterExpr
    x: int


Command = Union[ApplyU, Guard]
Program = list


def _command_key(cmd) -> tuple:
    if isinstance(cmd, ApplyU):
        return ("apply", expr_key(cmd.reg), cmd.u.shape, cmd.u.tobytes())
    if isinstance(cmd, Guard):
        return ("guard", expr_key(cmd.reg), cmd.x)
    raise RegisterTypeError(f"unknown command {cmd!r}")


def denote(program, layout: Layout, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Reversed product of lifted command operators; the empty program is 1."""
    key = ("denote", tuple(_command_key(c) for c in program), tol)
    hit = layout.cache.get(key)
    if hit is not None:
        return hit
    n = layout.dim
    out = np.eye(n, dtype=np.complex128)
    for idx, cmd in enumerate(program):
        reg = resolve(cmd.reg, layout, tol)
        if isinstance(cmd, ApplyU):
            u = cmd.u
            if u.shape != (reg.m, reg.m):
                raise RegisterTypeError(
                    f"unitary must be {reg.m}x{reg.m}, got {u.shape}", f"cmd[{idx}]")
            op = apply(reg, u)
        elif isinstance(cmd, Guard):
            if not (0 <= cmd.x < reg.m):
                raise RegisterTypeError(
                    f"guard outcome {cmd.x} outside 0..{reg.m - 1}", f"cmd[{idx}]")
            op = apply(reg, proj(reg.m, cmd.x))
        else:
            raise RegisterTypeError(f"unknown command {cmd!r}", f"cmd[{idx}]")
        out = op @ out
    layout.cache[key] = out
    return out


# --- predicates ---------------------------------------------------------------

@dataclass(frozen=True)
class QEq:
    """``F ≡q ψ``: the image of ``F(ψψ†)``."""
    reg: RegisterExpr
    state: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "state", as_vector(self.state))


@dataclass(frozen=True)
class Intersect:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class ApplyOp:
    """The subspace ``F(U) · S``."""
    reg: RegisterExpr
    u: np.ndarray
    of: "Predicate"

    def __post_init__(self):
        object.__setattr__(self, "u", as_matrix(self.u))


@dataclass(frozen=True)
class Full:
    pass


@dataclass(frozen=True)
class Zero:
    pass


Predicate = Union[QEq, Intersect, ApplyOp, Full, Zero]


def pred_eval(pred: Predicate, layout: Layout, tol: float = DEFAULT_TOL) -> Subspace:
    n = layout.dim
    if isinstance(pred, Full):
        return Subspace.full(n)
    if isinstance(pred, Zero):
        return Subspace.zero(n)
    if isinstance(pred, QEq):
        reg = resolve(pred.reg, layout, tol)
        if pred.state.shape != (reg.m,):
            raise RegisterTypeError(
                f"state length {pred.state.shape[0]} does not match domain {reg.m}")
        return orthonormal_range_basis(apply(reg, butter(pred.state)), tol)
    if isinstance(pred, ApplyOp):
        reg = resolve(pred.reg, layout, tol)
        inner = pred_eval(pred.of, layout, tol)
        op = apply(reg, pred.u)
        return orthonormal_range_basis(op @ inner.projector() @ dagger(op), tol)
    if isinstance(pred, Intersect):
        shortcut = _compatible_lift_shortcut(pred.left, pred.right, layout, tol)
        if shortcut is not None:
            return shortcut
        return subspace_intersect(pred_eval(pred.left, layout, tol),
                                  pred_eval(pred.right, layout, tol), tol)
    raise RegisterTypeError(f"unknown predicate {pred!r}")


def _compatible_lift_shortcut(left, right, layout, tol) -> Optional[Subspace]:
    """``im F(a) ∩ im G(b) = im F(a)G(b)`` for compatible registers."""
    if not (isinstance(left, QEq) and isinstance(right, QEq)):
        return None
    f = resolve(left.reg, layout, tol)
    g = resolve(right.reg, layout, tol)
    key = ("compatible", expr_key(left.reg), expr_key(right.reg), tol)
    hit = layout.cache.get(key)
    if hit is None:
        hit = compatible(f, g, tol)
        layout.cache[key] = hit
    if not hit:
        return None
    prod = apply(f, butter(left.state)) @ apply(g, butter(right.state))
    return orthonormal_range_basis(prod, tol)


# --- triples and rules ----------------------------------------------------------

@dataclass(frozen=True)
class TripleReport:
    holds: bool
    dims: int
    residual: float
    witness: np.ndarray | None  # a violating image vector when holds is False


def check_triple(pre: Predicate, program, post: Predicate, layout: Layout,
                 tol: float = DEFAULT_TOL) -> TripleReport:
    """``{A} P {B}`` holds iff the program maps every basis vector of A into B."""
    a = pred_eval(pre, layout, tol)
    b = pred_eval(post, layout, tol)
    d = denote(program, layout, tol)
    images = d @ a.basis
    pb = b.projector()
    residual = 0.0
    witness = None
    scale = 1.0 + (np.abs(images).max() if images.size else 0.0)
    for col in range(images.shape[1]):
        v = images[:, col]
        gap = float(np.linalg.norm(v - pb @ v))
        residual = max(residual, gap)
        if witness is None and gap > tol * scale:
            witness = v
    return TripleReport(witness is None, layout.dim, residual, witness)


@dataclass(frozen=True)
class Triple:
    pre: Predicate
    program: tuple
    post: Predicate


@dataclass(frozen=True)
class RuleResult:
    ok: bool
    triple: Triple | None = None
    reason: str = ""
    residual: float = 0.0


def _inclusion_residual(s: Subspace, t: Subspace) -> float:
    """How far ``s`` is from being contained in ``t``."""
    if s.dim == 0:
        return 0.0
    gaps = s.basis - t.projector() @ s.basis
    return float(np.linalg.norm(gaps, axis=0).max())


def apply_rule(rule: str, layout: Layout, tol: float = DEFAULT_TOL,
               **premises) -> RuleResult:
    """Derive a triple by one of the five rules, checking side conditions.

    Seq:    triples {A}P1{B}, {B}P2{C} with matching middle predicate
    Weaken: pre A, post B, inner triple {A'}P{B'} with A ⊆ A', B' ⊆ B
    Skip:   pre A, post B with A ⊆ B
    Apply:  pre A, reg F, u U, post B with F(U)·A ⊆ B
    If:     pre A, reg G, x, post B with G(|x><x|)·A ⊆ B
    """
    if rule == "Skip":
        a, b = premises["pre"], premises["post"]
        res = _inclusion_residual(pred_eval(a, layout, tol), pred_eval(b, layout, tol))
        if res > tol * 2:
            return RuleResult(False, reason="A is not contained in B", residual=res)
        return RuleResult(True, Triple(a, (), b))
    if rule == "Seq":
        t1, t2 = premises["first"], premises["second"]
        s1 = pred_eval(t1.post, layout, tol)
        s2 = pred_eval(t2.pre, layout, tol)
        if not approx_eq(s1.projector(), s2.projector(), tol):
            return RuleResult(False, reason="middle predicates differ")
        return RuleResult(True, Triple(t1.pre, t1.program + t2.program, t2.post))
    if rule == "Weaken":
        a, b, inner = premises["pre"], premises["post"], premises["inner"]
        res1 = _inclusion_residual(pred_eval(a, layout, tol),
                                   pred_eval(inner.pre, layout, tol))
        res2 = _inclusion_residual(pred_eval(inner.post, layout, tol),
                                   pred_eval(b, layout, tol))
        res = max(res1, res2)
        if res > tol * 2:
            return RuleResult(False, reason="weakening inclusions fail", residual=res)
        return RuleResult(True, Triple(a, inner.program, b))
    if rule == "Apply":
        a, b = premises["pre"], premises["post"]
        reg_expr, u = premises["reg"], as_matrix(premises["u"])
        reg = resolve(reg_expr, layout, tol)
        sa = pred_eval(a, layout, tol)
        image = orthonormal_range_basis(
            apply(reg, u) @ sa.projector() @ dagger(apply(reg, u)), tol)
        res = _inclusion_residual(image, pred_eval(b, layout, tol))
        if res > tol * 2:
            return RuleResult(False, reason="F(U)·A is not contained in B",
                              residual=res)
        return RuleResult(True, Triple(a, (ApplyU(reg_expr, u),), b))
    if rule == "If":
        a, b = premises["pre"], premises["post"]
        reg_expr, x = premises["reg"], premises["x"]
        reg = resolve(reg_expr, layout, tol)
        p = apply(reg, proj(reg.m, x))
        sa = pred_eval(a, layout, tol)
        image = orthonormal_range_basis(p @ sa.projector() @ p, tol)
        res = _inclusion_residual(image, pred_eval(b, layout, tol))
        if res > tol * 2:
            return RuleResult(False, reason="G(|x><x|)·A is not contained in B",
                              residual=res)
        return RuleResult(True, Triple(a, (Guard(reg_expr, x),), b))
    raise ValueError(f"unknown rule {rule!r}")
