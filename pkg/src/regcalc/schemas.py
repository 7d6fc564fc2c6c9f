"""Scenario file schema and JSON <-> AST conversion.

Scenario files are JSON: complex numbers are two-element ``[re, im]``
arrays, matrices are row-major nested arrays, register expressions are
single-key tagged objects (``{"pair": [e1, e2]}``, ``{"fst": null}``, ...).
Matrices and states may also name a built-in gate/state or a declared
constant.  Parse and dimension errors carry the offending node path.
"""

from __future__ import annotations

from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from .gates import GATES, STATES
from .hoare import (
    ApplyOp,
    ApplyU,
    Assoc,
    AssocInv,
    Chain,
    Complement,
    Fst,
    Full,
    Guard,
    Intersect,
    Layout,
    Mapped,
    Named,
    Pair,
    QEq,
    RegisterTypeError,
    Snd,
    Swap,
    Tensor,
    Zero,
    pred_eval,
    resolve,
)
from .linalg import DEFAULT_TOL, classify_operator
from .scenarios import (
    OperatorEqCheck,
    Scenario,
    StateEqCheck,
    TripleCheck,
)


class ScenarioError(ValueError):
    """Malformed scenario content; ``path`` points at the offending node."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path or "<root>"


# --- pydantic surface -----------------------------------------------------------

class FactorModel(BaseModel):
    name: str
    dims: Union[int, list[int]]


class ScenarioModel(BaseModel):
    name: str = ""
    layout: list[FactorModel]
    constants: dict[str, Any] = Field(default_factory=dict)
    registers: dict[str, Any] = Field(default_factory=dict)
    programs: dict[str, list[Any]] = Field(default_factory=dict)
    predicates: dict[str, Any] = Field(default_factory=dict)
    checks: list[Any] = Field(default_factory=list)


class CheckResultModel(BaseModel):
    name: str
    kind: str
    passed: bool
    residual: float


class VerifyRequest(BaseModel):
    scenario: ScenarioModel
    tol: Optional[float] = None


class VerifyResponse(BaseModel):
    name: str
    passed: bool
    checks: list[CheckResultModel]


class LawsRequest(BaseModel):
    suite: str = "all"
    seed: int = 0
    cases: int = 100
    max_dim: int = 16
    tol: float = 1e-8


class LawFailureModel(BaseModel):
    law: str
    case: int
    message: str


class SuiteResultModel(BaseModel):
    suite: str
    seed: int
    cases: int
    laws: list[str]
    failures: list[LawFailureModel]


class LawsResponse(BaseModel):
    passed: bool
    suites: list[SuiteResultModel]


class InspectRequest(BaseModel):
    expr: str
    layout: list[FactorModel]
    tol: Optional[float] = None


class InspectResponse(BaseModel):
    domain_dim: int
    env_dim: int
    codomain_dim: int
    is_iso: bool
    complement_domain_dim: int
    eta_regular: bool


# --- complex / matrix encoding ------------------------------------------------------

def _to_complex(entry, path: str) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry, 0.0)
    if isinstance(entry, (list, tuple)) and len(entry) == 2 \
            and all(isinstance(x, (int, float)) for x in entry):
        return complex(entry[0], entry[1])
    raise ScenarioError(f"expected a number or [re, im] pair, got {entry!r}", path)


def parse_vector(obj, constants: dict, path: str) -> np.ndarray:
    if isinstance(obj, str):
        if obj in constants:
            return parse_vector(constants[obj], {}, f"{path}({obj})")
        if obj in STATES:
            return STATES[obj].copy()
        raise ScenarioError(f"unknown state constant {obj!r}", path)
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ScenarioError("expected a non-empty vector", path)
    return np.array([_to_complex(e, f"{path}[{i}]") for i, e in enumerate(obj)],
                    dtype=np.complex128)


def parse_matrix(obj, constants: dict, path: str) -> np.ndarray:
    if isinstance(obj, str):
        if obj in constants:
            return parse_matrix(constants[obj], {}, f"{path}({obj})")
        if obj in GATES:
            return GATES[obj].copy()
        raise ScenarioError(f"unknown matrix constant {obj!r}", path)
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ScenarioError("expected a non-empty matrix", path)
    rows = []
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, (list, tuple)) or not row:
            raise ScenarioError("matrix rows must be non-empty arrays", f"{path}[{i}]")
        parsed = [_to_complex(e, f"{path}[{i}][{j}]") for j, e in enumerate(row)]
        if width is None:
            width = len(parsed)
        elif len(parsed) != width:
            raise ScenarioError("ragged matrix rows", f"{path}[{i}]")
        rows.append(parsed)
    return np.array(rows, dtype=np.complex128)


def complex_to_json(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def vector_to_json(v: np.ndarray) -> list:
    return [complex_to_json(z) for z in np.asarray(v).reshape(-1)]


def matrix_to_json(m: np.ndarray) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


# --- expressions ----------------------------------------------------------------------

_NULLARY = {"fst": Fst, "snd": Snd, "swap": Swap, "assoc": Assoc,
            "assoc_inv": AssocInv}


def parse_expr(obj, constants: dict, path: str):
    if isinstance(obj, str):
        return Named(obj)
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ScenarioError(
            "register expression must be a single-key tagged object", path)
    tag, body = next(iter(obj.items()))
    at = f"{path}/{tag}"
    if tag == "named":
        if not isinstance(body, str):
            raise ScenarioError("named expects a string", at)
        return Named(body)
    if tag in _NULLARY:
        return _NULLARY[tag]()
    if tag in ("pair", "chain", "tensor"):
        if not isinstance(body, (list, tuple)) or len(body) != 2:
            raise ScenarioError(f"{tag} expects two sub-expressions", at)
        left = parse_expr(body[0], constants, f"{at}[0]")
        right = parse_expr(body[1], constants, f"{at}[1]")
        if tag == "pair":
            return Pair(left, right)
        if tag == "chain":
            return Chain(left, right)
        return Tensor(left, right)
    if tag == "mapped":
        if not isinstance(body, dict) or set(body) != {"u", "of"}:
            raise ScenarioError('mapped expects {"u": matrix, "of": expr}', at)
        return Mapped(parse_matrix(body["u"], constants, f"{at}/u"),
                      parse_expr(body["of"], constants, f"{at}/of"))
    if tag == "complement":
        return Complement(parse_expr(body, constants, at))
    raise ScenarioError(f"unknown register expression tag {tag!r}", path)


def expr_to_json(expr) -> Any:
    if isinstance(expr, Named):
        return {"named": expr.name}
    for tag, cls in _NULLARY.items():
        if isinstance(expr, cls):
            return {tag: None}
    if isinstance(expr, Pair):
        return {"pair": [expr_to_json(expr.left), expr_to_json(expr.right)]}
    if isinstance(expr, Chain):
        return {"chain": [expr_to_json(expr.outer), expr_to_json(expr.inner)]}
    if isinstance(expr, Tensor):
        return {"tensor": [expr_to_json(expr.left), expr_to_json(expr.right)]}
    if isinstance(expr, Mapped):
        return {"mapped": {"u": matrix_to_json(expr.u), "of": expr_to_json(expr.of)}}
    if isinstance(expr, Complement):
        return {"complement": expr_to_json(expr.of)}
    raise ScenarioError(f"unknown expression {expr!r}")


# --- commands, predicates, checks ---------------------------------------------------

def parse_command(obj, constants: dict, path: str):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ScenarioError("command must be a single-key tagged object", path)
    tag, body = next(iter(obj.items()))
    at = f"{path}/{tag}"
    if tag == "apply":
        if not isinstance(body, dict) or set(body) != {"reg", "u"}:
            raise ScenarioError('apply expects {"reg": expr, "u": matrix}', at)
        return ApplyU(parse_expr(body["reg"], constants, f"{at}/reg"),
                      parse_matrix(body["u"], constants, f"{at}/u"))
    if tag == "guard":
        if not isinstance(body, dict) or set(body) != {"reg", "x"}:
            raise ScenarioError('guard expects {"reg": expr, "x": outcome}', at)
        if not isinstance(body["x"], int):
            raise ScenarioError("guard outcome must be an integer", f"{at}/x")
        return Guard(parse_expr(body["reg"], constants, f"{at}/reg"), body["x"])
    raise ScenarioError(f"unknown command tag {tag!r}", path)


def command_to_json(cmd) -> Any:
    if isinstance(cmd, ApplyU):
        return {"apply": {"reg": expr_to_json(cmd.reg), "u": matrix_to_json(cmd.u)}}
    if isinstance(cmd, Guard):
        return {"guard": {"reg": expr_to_json(cmd.reg), "x": cmd.x}}
    raise ScenarioError(f"unknown command {cmd!r}")


def parse_program(obj, model: ScenarioModel, constants: dict, path: str) -> tuple:
    if isinstance(obj, str):
        if obj not in model.programs:
            raise ScenarioError(f"unknown program reference {obj!r}", path)
        return parse_program(model.programs[obj], model, constants,
                             f"programs/{obj}")
    if not isinstance(obj, (list, tuple)):
        raise ScenarioError("program must be a command list or a name", path)
    return tuple(parse_command(c, constants, f"{path}[{i}]")
                 for i, c in enumerate(obj))


def parse_predicate(obj, model: ScenarioModel, constants: dict, path: str):
    if isinstance(obj, str):
        if obj not in model.predicates:
            raise ScenarioError(f"unknown predicate reference {obj!r}", path)
        return parse_predicate(model.predicates[obj], model, constants,
                               f"predicates/{obj}")
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ScenarioError("predicate must be a single-key tagged object", path)
    tag, body = next(iter(obj.items()))
    at = f"{path}/{tag}"
    if tag == "full":
        return Full()
    if tag == "zero":
        return Zero()
    if tag == "qeq":
        if not isinstance(body, dict) or set(body) != {"reg", "state"}:
            raise ScenarioError('qeq expects {"reg": expr, "state": vector}', at)
        return QEq(parse_expr(body["reg"], constants, f"{at}/reg"),
                   parse_vector(body["state"], constants, f"{at}/state"))
    if tag == "intersect":
        if not isinstance(body, (list, tuple)) or len(body) != 2:
            raise ScenarioError("intersect expects two predicates", at)
        return Intersect(parse_predicate(body[0], model, constants, f"{at}[0]"),
                         parse_predicate(body[1], model, constants, f"{at}[1]"))
    if tag == "apply_op":
        if not isinstance(body, dict) or set(body) != {"reg", "u", "of"}:
            raise ScenarioError(
                'apply_op expects {"reg": expr, "u": matrix, "of": pred}', at)
        return ApplyOp(parse_expr(body["reg"], constants, f"{at}/reg"),
                       parse_matrix(body["u"], constants, f"{at}/u"),
                       parse_predicate(body["of"], model, constants, f"{at}/of"))
    raise ScenarioError(f"unknown predicate tag {tag!r}", path)


def predicate_to_json(pred) -> Any:
    if isinstance(pred, Full):
        return {"full": None}
    if isinstance(pred, Zero):
        return {"zero": None}
    if isinstance(pred, QEq):
        return {"qeq": {"reg": expr_to_json(pred.reg),
                        "state": vector_to_json(pred.state)}}
    if isinstance(pred, Intersect):
        return {"intersect": [predicate_to_json(pred.left),
                              predicate_to_json(pred.right)]}
    if isinstance(pred, ApplyOp):
        return {"apply_op": {"reg": expr_to_json(pred.reg),
                             "u": matrix_to_json(pred.u),
                             "of": predicate_to_json(pred.of)}}
    raise ScenarioError(f"unknown predicate {pred!r}")


def parse_check(obj, model: ScenarioModel, constants: dict, path: str):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ScenarioError('check must be an object with a "kind" field', path)
    kind = obj["kind"]
    name = obj.get("name", f"{kind}@{path}")
    if kind == "triple":
        required = {"kind", "pre", "program", "post"}
        if not required <= set(obj) or not set(obj) <= required | {"name"}:
            raise ScenarioError("triple check needs pre/program/post", path)
        return TripleCheck(
            name,
            parse_predicate(obj["pre"], model, constants, f"{path}/pre"),
            parse_program(obj["program"], model, constants, f"{path}/program"),
            parse_predicate(obj["post"], model, constants, f"{path}/post"))
    if kind == "operator_eq":
        return OperatorEqCheck(
            name,
            parse_program(obj["lhs"], model, constants, f"{path}/lhs"),
            parse_program(obj["rhs"], model, constants, f"{path}/rhs"))
    if kind == "state_eq":
        initial = obj.get("initial")
        if not isinstance(initial, (list, tuple)) or not initial:
            raise ScenarioError("state_eq needs a non-empty initial list", path)
        parsed = []
        for i, item in enumerate(initial):
            if not isinstance(item, dict) or set(item) != {"reg", "state"}:
                raise ScenarioError('initial item must be {"reg": e, "state": m}',
                                    f"{path}/initial[{i}]")
            parsed.append((parse_expr(item["reg"], constants,
                                      f"{path}/initial[{i}]/reg"),
                           parse_matrix(item["state"], constants,
                                        f"{path}/initial[{i}]/state")))
        return StateEqCheck(
            name, tuple(parsed),
            parse_program(obj["program"], model, constants, f"{path}/program"),
            parse_expr(obj["through"], constants, f"{path}/through"),
            parse_matrix(obj["expected"], constants, f"{path}/expected"))
    raise ScenarioError(f"unknown check kind {kind!r}", path)


def check_to_json(check, program_names: dict) -> Any:
    if isinstance(check, TripleCheck):
        return {"kind": "triple", "name": check.name,
                "pre": predicate_to_json(check.pre),
                "program": program_names.get(id(check.program),
                                             [command_to_json(c)
                                              for c in check.program]),
                "post": predicate_to_json(check.post)}
    if isinstance(check, OperatorEqCheck):
        return {"kind": "operator_eq", "name": check.name,
                "lhs": [command_to_json(c) for c in check.lhs],
                "rhs": [command_to_json(c) for c in check.rhs]}
    if isinstance(check, StateEqCheck):
        return {"kind": "state_eq", "name": check.name,
                "initial": [{"reg": expr_to_json(e), "state": matrix_to_json(m)}
                            for e, m in check.initial],
                "program": [command_to_json(c) for c in check.program],
                "through": expr_to_json(check.through),
                "expected": matrix_to_json(check.expected)}
    raise ScenarioError(f"unknown check {check!r}")


# --- whole scenarios ------------------------------------------------------------------

def scenario_from_model(model: ScenarioModel,
                        tol: float = DEFAULT_TOL) -> Scenario:
    """Parse, resolve and dimension-check a scenario model."""
    if not model.layout:
        raise ScenarioError("layout must declare at least one factor", "layout")
    factors = []
    for i, f in enumerate(model.layout):
        dims = f.dims
        bad = dims < 1 if isinstance(dims, int) else \
            (not dims or any(d < 1 for d in dims))
        if bad:
            raise ScenarioError("dimensions must be positive", f"layout[{i}]")
        factors.append((f.name, dims))
    constants = dict(model.constants)
    aliases = {name: parse_expr(e, constants, f"registers/{name}")
               for name, e in model.registers.items()}
    layout = Layout.of(factors, aliases)
    checks = [parse_check(c, model, constants, f"checks[{i}]")
              for i, c in enumerate(model.checks)]
    _dimension_check(layout, checks, tol)
    return Scenario(model.name, layout, tuple(checks))


def _dimension_check(layout: Layout, checks, tol: float):
    """Eagerly resolve every expression and validate operator shapes."""
    for i, check in enumerate(checks):
        path = f"checks[{i}]"
        try:
            if isinstance(check, TripleCheck):
                pred_eval(check.pre, layout, tol)
                pred_eval(check.post, layout, tol)
                _check_program(check.program, layout, tol, f"{path}/program")
            elif isinstance(check, OperatorEqCheck):
                _check_program(check.lhs, layout, tol, f"{path}/lhs")
                _check_program(check.rhs, layout, tol, f"{path}/rhs")
            elif isinstance(check, StateEqCheck):
                for j, (e, m) in enumerate(check.initial):
                    reg = resolve(e, layout, tol)
                    if m.shape != (reg.m, reg.m):
                        raise ScenarioError(
                            f"state is {m.shape}, register domain is {reg.m}",
                            f"{path}/initial[{j}]")
                _check_program(check.program, layout, tol, f"{path}/program")
                through = resolve(check.through, layout, tol)
                if check.expected.shape != (through.m, through.m):
                    raise ScenarioError(
                        f"expected state is {check.expected.shape}, register "
                        f"domain is {through.m}", f"{path}/expected")
        except RegisterTypeError as exc:
            raise ScenarioError(str(exc), path) from exc


def _check_program(program, layout: Layout, tol: float, path: str):
    for i, cmd in enumerate(program):
        reg = resolve(cmd.reg, layout, tol)
        if isinstance(cmd, ApplyU):
            if cmd.u.shape != (reg.m, reg.m):
                raise ScenarioError(
                    f"operator is {cmd.u.shape}, register domain is {reg.m}",
                    f"{path}[{i}]/u")
            if not classify_operator(cmd.u, max(tol, 1e-8)).unitary:
                raise ScenarioError("apply operator is not unitary",
                                    f"{path}[{i}]/u")
        elif isinstance(cmd, Guard):
            if not (0 <= cmd.x < reg.m):
                raise ScenarioError(
                    f"outcome {cmd.x} outside 0..{reg.m - 1}", f"{path}[{i}]/x")


def _shape_to_dims(shape) -> Union[int, list]:
    if isinstance(shape, int):
        return shape
    out = []
    node = shape
    while isinstance(node, tuple):
        out.append(node[0] if isinstance(node[0], int)
                   else _shape_to_dims(node[0]))
        node = node[1]
    out.append(node)
    return out


def scenario_to_model(scenario: Scenario) -> ScenarioModel:
    """Serialize a scenario; shared programs are interned under stable names."""
    program_names: dict = {}
    programs: dict = {}
    for check in scenario.checks:
        if isinstance(check, TripleCheck) and id(check.program) not in program_names:
            key = f"prog{len(programs)}"
            programs[key] = [command_to_json(c) for c in check.program]
            program_names[id(check.program)] = key
    return ScenarioModel(
        name=scenario.name,
        layout=[FactorModel(name=n, dims=_shape_to_dims(s))
                for n, s in scenario.layout.factors],
        registers={n: expr_to_json(e)
                   for n, e in scenario.layout.aliases.items()},
        programs=programs,
        checks=[check_to_json(c, program_names) for c in scenario.checks])
