"""JSON problem descriptions: schema validation and assembly into Problem.

A spec file gathers the interval, dimension, exponent pair, operator,
integrand, endpoint constraints, discretization and solver options, plus
optional certificate sections for the hypothesis checkers.  Expressions
(integrand, variable order, substitution map, general kernel) use the
grammar documented in the expression module.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import exprs
from .grid import ConstraintSet, make_grid
from .kernel_ops import KernelSpec, assemble
from .functional import QUADRATURES, Problem
from .lagrangian import (
    GrowthCertificate,
    GrowthTerm,
    LagrangianExpr,
    make_builtin,
    builtin_names,
    parse_lagrangian,
)
from .solver import SolveOptions


BUNDLED_SPECS = (
    "quadratic",
    "rl_quadratic",
    "example_quadratic",
    "scaled_quadratic",
    "quasilinear",
    "trig",
    "noncoercive",
)


def bundled_spec_path(name: str) -> str:
    """Filesystem path of a bundled problem description."""
    if name not in BUNDLED_SPECS:
        raise ValueError(f"unknown bundled spec {name!r}; one of {BUNDLED_SPECS}")
    from importlib.resources import files

    return str(files("varker") / "specs" / f"{name}.json")


class SpecError(ValueError):
    """Invalid problem description; message names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.field_path = path


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise SpecError(f"{path}.{key}" if path else key, "missing required field")
    return d[key]


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(path, f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise SpecError(path, "numbers must be finite")
    return float(v)


def _integer(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecError(path, f"expected an integer, got {type(v).__name__}")
    return v


def _scalar_expr(source, variables: tuple[str, ...], path: str):
    """Compile an expression over scalar variables into a broadcasting callable."""
    if not isinstance(source, str):
        raise SpecError(path, "expected an expression string")
    try:
        ast = exprs.parse(source)
        if exprs.typecheck(ast, {v: "s" for v in variables}) != "s":
            raise SpecError(path, "expression must be scalar valued")
    except (exprs.ExprSyntaxError, exprs.ExprTypeError) as e:
        raise SpecError(path, str(e)) from None

    def fn(*args):
        env = dict(zip(variables, args))
        return exprs.evaluate(ast, env)

    return fn


def _phi_pair(source: str, path: str):
    """Substitution map and its derivative, both from one expression in t."""
    ast = exprs.parse(source)
    if exprs.typecheck(ast, {"t": "s"}) != "s":
        raise SpecError(path, "substitution map must be scalar valued")

    def phi(t):
        return float(np.asarray(exprs.evaluate(ast, {"t": np.asarray([t], dtype=float)}))[0])

    def dphi(t):
        seed = exprs.Dual(np.asarray([t], dtype=float), np.ones((1, 1)))
        out = exprs.evaluate(ast, {"t": seed})
        if isinstance(out, exprs.Dual):
            return float(out.eps[0, 0])
        return 0.0

    return phi, dphi


@dataclass(frozen=True)
class ProblemSpec:
    """Validated spec contents plus everything assembled from them."""

    raw: dict
    problem: Problem
    solve_options: SolveOptions
    lagrangian: LagrangianExpr
    builtin: object = None            # BuiltinLagrangian when the spec named one
    certificates: dict | None = None  # raw certificates section

    @property
    def n(self) -> int:
        return self.problem.grid.n


def load_spec(path: str) -> dict:
    """Read and structurally validate a spec file; raises SpecError."""
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise SpecError(str(path), f"cannot read file: {e}") from None
    except json.JSONDecodeError as e:
        raise SpecError(str(path), f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise SpecError(str(path), "top level must be an object")
    validate_spec(data)
    return data


def validate_spec(data: dict) -> None:
    interval = _require(data, "interval", "")
    a = _number(_require(interval, "a", "interval"), "interval.a")
    b = _number(_require(interval, "b", "interval"), "interval.b")
    if not a < b:
        raise SpecError("interval", f"need a < b, got a={a}, b={b}")
    d = _integer(_require(data, "dim", ""), "dim")
    if d < 1:
        raise SpecError("dim", "dimension must be >= 1")
    exponents = _require(data, "exponents", "")
    p = _number(_require(exponents, "p", "exponents"), "exponents.p")
    q = _number(_require(exponents, "q", "exponents"), "exponents.q")
    if not (1.0 < p < math.inf and 1.0 < q < math.inf):
        raise SpecError("exponents", "p and q must lie in (1, inf)")
    op = _require(data, "operator", "")
    variant = _require(op, "variant", "operator")
    known = ("zero", "identity", "riemann_liouville", "riemann_liouville_variable",
             "hadamard", "substitution", "general")
    if variant not in known:
        raise SpecError("operator.variant", f"unknown variant {variant!r}; one of {known}")
    lag = _require(data, "lagrangian", "")
    if "builtin" not in lag and "expression" not in lag:
        raise SpecError("lagrangian", "needs either a builtin name or an expression")
    if "builtin" in lag and lag["builtin"] not in builtin_names():
        raise SpecError("lagrangian.builtin", f"unknown builtin {lag['builtin']!r}; one of {builtin_names()}")
    disc = _require(data, "discretization", "")
    n = _integer(_require(disc, "n", "discretization"), "discretization.n")
    if n < 2:
        raise SpecError("discretization.n", "need at least 2 nodes")
    quadrature = disc.get("quadrature", "nodes")
    if quadrature not in QUADRATURES:
        raise SpecError("discretization.quadrature", f"one of {QUADRATURES}")
    cons = data.get("constraints", {})
    for side in ("left", "right"):
        if side in cons and cons[side] is not None:
            v = cons[side]
            if not isinstance(v, list) or len(v) != d:
                raise SpecError(f"constraints.{side}", f"expected a list of {d} numbers")
            for i, x in enumerate(v):
                _number(x, f"constraints.{side}[{i}]")


def _build_operator_spec(data: dict) -> KernelSpec:
    op = data["operator"]
    variant = op["variant"]
    p = float(data["exponents"]["p"])
    q = float(data["exponents"]["q"])
    l1 = _number(op.get("lambda1", 1.0), "operator.lambda1")
    l2 = _number(op.get("lambda2", 0.0), "operator.lambda2")
    try:
        if variant == "zero":
            return KernelSpec.zero(p=p, q=q)
        if variant == "identity":
            return KernelSpec.identity(p=p, q=q)
        if variant == "riemann_liouville":
            alpha = _number(_require(op, "alpha", "operator"), "operator.alpha")
            return KernelSpec.riemann_liouville(alpha, l1, l2, p=p, q=q)
        if variant == "riemann_liouville_variable":
            alpha = _require(op, "alpha", "operator")
            alpha_fn = _scalar_expr(alpha, ("t", "x"), "operator.alpha")
            delta = _number(_require(op, "delta", "operator"), "operator.delta")
            return KernelSpec.riemann_liouville_variable(alpha_fn, delta, p=p, lambda1=l1, lambda2=l2, q=q)
        if variant == "hadamard":
            alpha = _number(_require(op, "alpha", "operator"), "operator.alpha")
            return KernelSpec.hadamard(alpha, l1, l2, p=p, q=q)
        if variant == "substitution":
            phi, dphi = _phi_pair(_require(op, "phi", "operator"), "operator.phi")
            return KernelSpec.substitution(phi, dphi, p=p, q=q)
        if variant == "general":
            kernel = _scalar_expr(_require(op, "kernel", "operator"), ("t", "x"), "operator.kernel")
            return KernelSpec.general(kernel, l1, l2, p=p, q=q)
    except (ValueError, exprs.ExprSyntaxError, exprs.ExprTypeError) as e:
        if isinstance(e, SpecError):
            raise
        raise SpecError("operator", str(e)) from None
    raise AssertionError(variant)


def build_problem(data: dict, n: int | None = None, grad_tol: float | None = None,
                  seed: int | None = None) -> ProblemSpec:
    """Assemble the validated spec into a Problem plus solver options.

    n, grad_tol and seed override the file's discretization and solver
    fields (the CLI's --n, --tol and --seed flags).
    """
    validate_spec(data)
    d = data["dim"]
    p = float(data["exponents"]["p"])
    q = float(data["exponents"]["q"])
    disc = data["discretization"]
    n_eff = int(n) if n is not None else disc["n"]
    grid = make_grid(data["interval"]["a"], data["interval"]["b"], n_eff)

    lag = data["lagrangian"]
    builtin = None
    if "builtin" in lag:
        params = lag.get("params", {})
        try:
            builtin = make_builtin(lag["builtin"], d=d, p=p, q=q, **params)
        except (ValueError, exprs.ExprSyntaxError, exprs.ExprTypeError) as e:
            raise SpecError("lagrangian", str(e)) from None
        L = builtin.expr
    else:
        try:
            L = parse_lagrangian(lag["expression"], d, params=lag.get("params"))
        except (ValueError, ArithmeticError) as e:
            raise SpecError("lagrangian.expression", str(e)) from None

    spec_k = _build_operator_spec(data)
    try:
        op = assemble(spec_k, grid)
    except ValueError as e:
        raise SpecError("operator", str(e)) from None

    cons = data.get("constraints", {})
    constraints = ConstraintSet(left=cons.get("left"), right=cons.get("right"))
    try:
        problem = Problem(grid=grid, lagrangian=L, operator=op, constraints=constraints,
                          p=p, q=q, quadrature=disc.get("quadrature", "nodes"))
    except ValueError as e:
        raise SpecError("problem", str(e)) from None

    sol = data.get("solver", {})
    opts = SolveOptions(
        max_iters=_integer(sol.get("max_iters", 5000), "solver.max_iters"),
        grad_tol=float(grad_tol) if grad_tol is not None else _number(sol.get("grad_tol", 1e-8), "solver.grad_tol"),
        memory=_integer(sol.get("memory", 10), "solver.memory"),
        seed=int(seed) if seed is not None else (sol.get("seed") if sol.get("seed") is not None else None),
        nonsmooth=bool(sol.get("nonsmooth", False)),
    )
    return ProblemSpec(raw=data, problem=problem, solve_options=opts,
                       lagrangian=L, builtin=builtin, certificates=data.get("certificates"))


def _parse_terms(items, path: str):
    terms = []
    if not isinstance(items, list):
        raise SpecError(path, "expected a list of envelope terms")
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise SpecError(f"{path}[{i}]", "expected an object")
        coeff = item.get("coeff", 1.0)
        if not isinstance(coeff, (int, float, str)):
            raise SpecError(f"{path}[{i}].coeff", "expected a number or expression string")
        kw = {}
        for name in ("d1", "d2", "d3", "d4"):
            if name in item:
                kw[name] = _number(item[name], f"{path}[{i}].{name}")
        terms.append(GrowthTerm(coeff=coeff if isinstance(coeff, str) else float(coeff), **kw))
    return tuple(terms)


def regularity_certificates(spec: ProblemSpec):
    """The five envelope certificates, explicit or from the builtin."""
    section = (spec.certificates or {}).get("regularity")
    if section is None or section == {"builtin": True} or (isinstance(section, dict) and section.get("builtin")):
        if spec.builtin is not None and spec.builtin.regularity is not None:
            return spec.builtin.regularity
        if section is None:
            raise SpecError("certificates.regularity", "missing section and no builtin defaults")
        raise SpecError("certificates.regularity", "builtin certificates requested but none exist")
    mode = section.get("mode", "P_M")
    p = spec.problem.p
    q = spec.problem.q
    required = {"value": 1.0, "d1": 1.0, "d2": q / (q - 1.0), "d3": p / (p - 1.0), "d4": q / (q - 1.0)}
    out = {}
    for slot in ("value", "d1", "d2", "d3", "d4"):
        terms = _parse_terms(_require(section, slot, "certificates.regularity"),
                             f"certificates.regularity.{slot}")
        out[slot] = GrowthCertificate(terms=terms, M=required[slot], mode=mode)
    return out


def coercivity_certificate(spec: ProblemSpec):
    """(c0, terms, mode), explicit or from the builtin."""
    section = (spec.certificates or {}).get("coercivity")
    if section is None or (isinstance(section, dict) and section.get("builtin")):
        if spec.builtin is not None and spec.builtin.coercivity is not None:
            return spec.builtin.coercivity
        if section is None:
            raise SpecError("certificates.coercivity", "missing section and no builtin defaults")
        raise SpecError("certificates.coercivity", "builtin certificates requested but none exist")
    c0 = _number(_require(section, "c0", "certificates.coercivity"), "certificates.coercivity.c0")
    terms = _parse_terms(section.get("terms", []), "certificates.coercivity.terms")
    return c0, terms, section.get("mode", "P_M")


def convexity_request(spec: ProblemSpec):
    """(mode, samples, seed) for the convexity check."""
    section = (spec.certificates or {}).get("convexity")
    if section is None:
        raise SpecError("certificates.convexity", "missing section")
    mode = section.get("mode", "full")
    samples = _integer(section.get("samples", 1000), "certificates.convexity.samples")
    seed = _integer(section.get("seed", 0), "certificates.convexity.seed")
    return mode, samples, seed
