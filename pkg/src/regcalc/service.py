"""Service operations behind the HTTP API; the CLI calls these in-process.

Everything speaks the pydantic request/response models, so the in-process
path and the HTTP path carry exactly the same payloads.
"""

from __future__ import annotations

import numpy as np

from .gates import GATES
from .hoare import (
    Assoc,
    AssocInv,
    Chain,
    Complement,
    Fst,
    Layout,
    Mapped,
    Named,
    Pair,
    RegisterTypeError,
    Snd,
    Swap,
    Tensor,
    resolve,
)
from .laws import run_suite
from .lifting import is_eta_regular
from .linalg import DEFAULT_TOL
from .registers import complement, is_iso
from .scenarios import BUILTIN_SCENARIOS, build_scenario, run_checks
from .schemas import (
    CheckResultModel,
    InspectRequest,
    InspectResponse,
    LawFailureModel,
    LawsRequest,
    LawsResponse,
    ScenarioError,
    ScenarioModel,
    SuiteResultModel,
    VerifyRequest,
    VerifyResponse,
    scenario_from_model,
    scenario_to_model,
)


def verify(request: VerifyRequest) -> VerifyResponse:
    tol = request.tol if request.tol is not None else DEFAULT_TOL
    if tol < 0:
        raise ScenarioError("tolerance must be non-negative", "tol")
    scenario = scenario_from_model(request.scenario, tol)
    results = run_checks(scenario.checks, scenario.layout, tol)
    checks = [CheckResultModel(name=r.name, kind=r.kind, passed=r.passed,
                               residual=r.residual) for r in results]
    return VerifyResponse(name=scenario.name,
                          passed=all(c.passed for c in checks),
                          checks=checks)


_SUITES = ("fig2", "fig4", "lifting", "classical")


def laws(request: LawsRequest) -> LawsResponse:
    names = _SUITES if request.suite == "all" else (request.suite,)
    for name in names:
        if name not in _SUITES:
            raise ScenarioError(
                f"unknown suite {name!r}; choose from {_SUITES + ('all',)}", "suite")
    suites = []
    for name in names:
        result = run_suite(name, seed=request.seed, cases=request.cases,
                           max_dim=request.max_dim, tol=request.tol)
        suites.append(SuiteResultModel(
            suite=result.suite, seed=result.seed, cases=result.cases,
            laws=list(result.laws),
            failures=[LawFailureModel(law=f.law, case=f.case, message=f.message)
                      for f in result.failures]))
    return LawsResponse(passed=all(not s.failures for s in suites), suites=suites)


def inspect(request: InspectRequest) -> InspectResponse:
    tol = request.tol if request.tol is not None else DEFAULT_TOL
    factors = [(f.name, f.dims) for f in request.layout]
    if not factors:
        raise ScenarioError("inspect needs a layout", "layout")
    layout = Layout.of(factors)
    expr = parse_expr_string(request.expr)
    try:
        reg = resolve(expr, layout, tol)
    except RegisterTypeError as exc:
        raise ScenarioError(str(exc), "expr") from exc
    return InspectResponse(
        domain_dim=reg.m, env_dim=reg.k, codomain_dim=reg.n,
        is_iso=is_iso(reg),
        complement_domain_dim=complement(reg).m,
        eta_regular=is_eta_regular(reg, tol))


def builtin_scenario(name: str) -> ScenarioModel:
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioError(
            f"unknown scenario {name!r}; builtins: {BUILTIN_SCENARIOS}", "name")
    return scenario_to_model(build_scenario(name))


# --- expression strings (the CLI inspect grammar) -----------------------------------

_NULLARY_WORDS = {"fst": Fst, "snd": Snd, "swap": Swap, "assoc": Assoc,
                  "assoc_inv": AssocInv}


class _ExprParser:
    """Recursive-descent parser for ``pair(fst, chain(Phi, snd))`` strings."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def parse(self):
        expr = self._expr()
        self._ws()
        if self.pos != len(self.text):
            raise ScenarioError(
                f"trailing input at column {self.pos}: {self.text[self.pos:]!r}",
                "expr")
        return expr

    def _ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _ident(self) -> str:
        self._ws()
        start = self.pos
        while self.pos < len(self.text) and \
                (self.text[self.pos].isalnum() or self.text[self.pos] in "_"):
            self.pos += 1
        if start == self.pos:
            raise ScenarioError(
                f"expected a name at column {start} in {self.text!r}", "expr")
        return self.text[start:self.pos]

    def _expect(self, ch: str):
        self._ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise ScenarioError(
                f"expected {ch!r} at column {self.pos} in {self.text!r}", "expr")
        self.pos += 1

    def _expr(self):
        name = self._ident()
        self._ws()
        has_args = self.pos < len(self.text) and self.text[self.pos] == "("
        if not has_args:
            if name in _NULLARY_WORDS:
                return _NULLARY_WORDS[name]()
            return Named(name)
        self._expect("(")
        if name in ("pair", "chain", "tensor"):
            left = self._expr()
            self._expect(",")
            right = self._expr()
            self._expect(")")
            cls = {"pair": Pair, "chain": Chain, "tensor": Tensor}[name]
            return cls(left, right)
        if name == "complement":
            inner = self._expr()
            self._expect(")")
            return Complement(inner)
        if name == "mapped":
            gate = self._ident()
            if gate not in GATES:
                raise ScenarioError(
                    f"unknown gate {gate!r}; known: {sorted(GATES)}", "expr")
            self._expect(",")
            inner = self._expr()
            self._expect(")")
            return Mapped(GATES[gate], inner)
        raise ScenarioError(f"unknown operator {name!r}", "expr")


def parse_expr_string(text: str):
    return _ExprParser(text).parse()
