"""Integrands L(x1, x2, x3, x4, t), their partials, and hypothesis checkers.

The four point variables are d-vectors: x1 the path value, x2 the operator
image K[u], x3 the path slope, x4 the operator image K[u'].  Growth
certificates bound L and its partials by quasi-polynomial envelopes whose
exponent arithmetic is checked exactly; the pointwise domination itself is
spot-checked at random points, since it is not decidable symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import exprs
from .exprs import Dual, EvalDomainError, ExprSyntaxError, ExprTypeError  # re-exported

__all__ = [
    "LagrangianExpr",
    "parse_lagrangian",
    "GrowthTerm",
    "GrowthCertificate",
    "CheckResult",
    "RegularityReport",
    "CoercivityReport",
    "ConvexityReport",
    "check_regularity",
    "check_coercivity",
    "check_convexity",
    "BuiltinLagrangian",
    "builtin_names",
    "make_builtin",
]

_POINT_VARS = ("x1", "x2", "x3", "x4")


def _param_value(v):
    if np.ndim(v) == 0:
        return float(v)
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError("named constants must be scalars or vectors")
    return tuple(float(c) for c in arr)


@dataclass(frozen=True)
class LagrangianExpr:
    """Parsed integrand with forward-mode partials in the four point slots."""

    source: str
    dim: int
    ast: exprs.Node
    params: dict

    def _var_types(self) -> dict[str, str]:
        vt = {"t": "s"}
        point = "s" if self.dim == 1 else "v"
        for name in _POINT_VARS:
            vt[name] = point
        for name, v in self.params.items():
            vt[name] = "s" if isinstance(v, float) else "v"
        return vt

    def _base_env(self) -> dict:
        return dict(self.params)

    def _point_env(self, X, ts, with_seeds: bool):
        """X: four (batch, d) arrays; ts: (batch,)."""
        env = self._base_env()
        env["t"] = ts
        d = self.dim
        m = 4 * d
        batch = ts.shape[0]
        for i, name in enumerate(_POINT_VARS):
            cols = []
            for j in range(d):
                v = X[i][:, j]
                if with_seeds:
                    eps = np.zeros((batch, m))
                    eps[:, i * d + j] = 1.0
                    cols.append(Dual(v, eps))
                else:
                    cols.append(v)
            env[name] = cols[0] if d == 1 else tuple(cols)
        return env

    def eval_batch(self, X1, X2, X3, X4, ts) -> np.ndarray:
        """Values at a batch of points; raises EvalDomainError off-domain."""
        ts = np.asarray(ts, dtype=float)
        out = exprs.evaluate(self.ast, self._point_env((X1, X2, X3, X4), ts, False))
        out = np.broadcast_to(np.asarray(out, dtype=float), ts.shape).copy()
        if not np.all(np.isfinite(out)):
            raise EvalDomainError("integrand left the real domain (log or power of a negative value?)")
        return out

    def partials_batch(self, X1, X2, X3, X4, ts):
        """(values (batch,), partials (batch, 4, d)) by forward-mode seeds."""
        ts = np.asarray(ts, dtype=float)
        batch = ts.shape[0]
        res = exprs.evaluate(self.ast, self._point_env((X1, X2, X3, X4), ts, True))
        if isinstance(res, Dual):
            vals = np.broadcast_to(res.val, (batch,)).astype(float)
            grads = np.broadcast_to(res.eps, (batch, 4 * self.dim)).astype(float)
        else:  # integrand does not involve the point variables at all
            vals = np.broadcast_to(np.asarray(res, dtype=float), (batch,)).astype(float)
            grads = np.zeros((batch, 4 * self.dim))
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(grads))):
            raise EvalDomainError("integrand or partials left the real domain")
        return vals, grads.reshape(batch, 4, self.dim)

    def eval(self, x1, x2, x3, x4, t: float) -> float:
        X = [np.atleast_1d(np.asarray(x, dtype=float))[None, :] for x in (x1, x2, x3, x4)]
        return float(self.eval_batch(*X, np.array([t]))[0])

    def partials(self, x1, x2, x3, x4, t: float):
        """The four partial gradients at one point, each a (d,) array."""
        X = [np.atleast_1d(np.asarray(x, dtype=float))[None, :] for x in (x1, x2, x3, x4)]
        _, grads = self.partials_batch(*X, np.array([t]))
        return tuple(grads[0, i] for i in range(4))

    def pretty(self) -> str:
        return exprs.pretty(self.ast)


def parse_lagrangian(source: str, d: int, params: dict | None = None) -> LagrangianExpr:
    """Parse and type-check an integrand over x1..x4 (d-vectors) and t.

    params binds named constants (scalars or d-vectors) that the source may
    reference; everything else must be a grammar variable or function.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    bound = {k: _param_value(v) for k, v in (params or {}).items()}
    for name in bound:
        if name in _POINT_VARS or name == "t" or name in exprs.FUNCTIONS:
            raise ValueError(f"parameter name {name!r} shadows a grammar name")
        if not isinstance(bound[name], float) and len(bound[name]) != d:
            raise ValueError(f"parameter {name!r} has length {len(bound[name])}, expected {d}")
    ast = exprs.parse(source)
    L = LagrangianExpr(source=source, dim=int(d), ast=ast, params=bound)
    result_type = exprs.typecheck(ast, L._var_types())
    if result_type != "s":
        raise ExprTypeError("integrand must be scalar valued", ast.pos)
    return L


# ---------------------------------------------------------------------------
# Growth certificates


@dataclass(frozen=True)
class GrowthTerm:
    """One envelope term  coeff * |x1|^d1 * |x2|^d2 * |x3|^d3 * |x4|^d4.

    coeff is a nonnegative constant or an expression string in the
    coefficient variables of the certificate mode (plus t).  d1 is only
    meaningful in coercivity lower bounds, where coeff may also be negative.
    """

    coeff: float | str = 1.0
    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0
    d4: float = 0.0


# mode -> variables the coefficient may depend on
_MODE_COEFF_VARS = {
    "P_M": ("x1",),
    "P1_M": ("x1", "x2"),
    "P2_M": ("x1", "x2", "x4"),
}


@dataclass(frozen=True)
class GrowthCertificate:
    """Envelope Sum_k coeff_k(...)·|x2|^d2k·|x3|^d3k·|x4|^d4k in class M.

    mode selects the membership inequality: "P_M" requires
    d2 + (q/p)·d3 + d4 <= q/M; "P1_M" drops the d2 share (coefficients may
    then depend on x1 and x2); "P2_M" only requires d3 <= p (coefficients may
    depend on x1, x2 and x4).  The relaxed modes assume the operator maps
    continuous paths to continuous paths (P1_M), respectively bounded-slope
    paths to continuous paths (P2_M); those are recorded, not checked.
    """

    terms: tuple = ()
    M: float = 1.0
    mode: str = "P_M"

    def __post_init__(self):
        if self.mode not in _MODE_COEFF_VARS:
            raise ValueError(f"unknown growth mode {self.mode!r}")
        if self.M < 1.0:
            raise ValueError(f"class index M must be >= 1, got {self.M}")
        object.__setattr__(self, "terms", tuple(self.terms))

    def membership_violations(self, p: float, q: float, M: float | None = None) -> list[str]:
        """Named inequality violations for each term; empty means member."""
        M = self.M if M is None else M
        out = []
        for k, term in enumerate(self.terms):
            prefix = f"term {k}"
            if self.mode == "P_M":
                if not 0.0 <= term.d2 <= q:
                    out.append(f"{prefix}: d2 = {term.d2:g} outside [0, q] = [0, {q:g}]")
                if not 0.0 <= term.d3 <= p:
                    out.append(f"{prefix}: d3 = {term.d3:g} outside [0, p] = [0, {p:g}]")
                if not 0.0 <= term.d4 <= q:
                    out.append(f"{prefix}: d4 = {term.d4:g} outside [0, q] = [0, {q:g}]")
                lhs = term.d2 + (q / p) * term.d3 + term.d4
                if lhs > q / M + 1e-12:
                    out.append(
                        f"{prefix}: d2 + (q/p)*d3 + d4 = {lhs:g} > q/M = {q / M:g}"
                    )
            elif self.mode == "P1_M":
                if term.d2 != 0.0:
                    out.append(f"{prefix}: d2 must be 0 in P1 mode (x2 belongs in the coefficient)")
                if not 0.0 <= term.d3 <= p:
                    out.append(f"{prefix}: d3 = {term.d3:g} outside [0, p] = [0, {p:g}]")
                if not 0.0 <= term.d4 <= q:
                    out.append(f"{prefix}: d4 = {term.d4:g} outside [0, q] = [0, {q:g}]")
                lhs = (q / p) * term.d3 + term.d4
                if lhs > q / M + 1e-12:
                    out.append(f"{prefix}: (q/p)*d3 + d4 = {lhs:g} > q/M = {q / M:g}")
            else:  # P2_M
                if term.d2 != 0.0 or term.d4 != 0.0:
                    out.append(f"{prefix}: d2 and d4 must be 0 in P2 mode")
                if not 0.0 <= term.d3 <= p:
                    out.append(f"{prefix}: d3 = {term.d3:g} outside [0, p] = [0, {p:g}]")
            if term.d1 != 0.0:
                out.append(f"{prefix}: d1 exponents belong to coercivity bounds only")
        return out

    def evaluate(self, dim: int, X, ts) -> np.ndarray:
        """Envelope values at a batch of points (coefficients included)."""
        X1, X2, X3, X4 = X
        n2 = np.linalg.norm(X2, axis=1)
        n3 = np.linalg.norm(X3, axis=1)
        n4 = np.linalg.norm(X4, axis=1)
        total = np.zeros(ts.shape[0])
        for term in self.terms:
            total += _coeff_values(term.coeff, self.mode, dim, X, ts) * _power(n2, term.d2) * _power(
                n3, term.d3
            ) * _power(n4, term.d4)
        return total

    @property
    def assumptions(self) -> tuple[str, ...]:
        if self.mode == "P1_M":
            return ("operator maps continuous paths to continuous paths",)
        if self.mode == "P2_M":
            return ("operator maps p-integrable slopes to continuous paths",)
        return ()


def _power(base: np.ndarray, e: float) -> np.ndarray:
    if e == 0.0:
        return np.ones_like(base)
    return base**e


def _coeff_values(coeff, mode: str, dim: int, X, ts) -> np.ndarray:
    if isinstance(coeff, (int, float)):
        return np.full(ts.shape[0], float(coeff))
    allowed = _MODE_COEFF_VARS[mode]
    vt = {"t": "s"}
    env: dict = {"t": ts}
    point = "s" if dim == 1 else "v"
    by_name = dict(zip(_POINT_VARS, X))
    for name in allowed:
        vt[name] = point
        arr = by_name[name]
        env[name] = arr[:, 0] if dim == 1 else tuple(arr[:, j] for j in range(dim))
    ast = exprs.parse(coeff)
    if exprs.typecheck(ast, vt) != "s":
        raise ExprTypeError("coefficient expressions must be scalar valued", ast.pos)
    vals = np.broadcast_to(np.asarray(exprs.evaluate(ast, env), dtype=float), ts.shape).copy()
    return vals


# ---------------------------------------------------------------------------
# Checker reports


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    failures: tuple = ()
    empirical_max_violation: float = 0.0
    empirical_points: int = 0


@dataclass(frozen=True)
class RegularityReport:
    results: tuple
    assumptions: tuple = ()

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def summary(self) -> str:
        verdict = "pass" if self.passed else "fail"
        detail = "; ".join(f"{r.name}:{'ok' if r.passed else 'FAIL'}" for r in self.results)
        return f"regularity: {verdict} ({detail})"


@dataclass(frozen=True)
class CoercivityReport:
    certified: bool
    failures: tuple = ()
    empirical_max_violation: float = 0.0
    empirical_points: int = 0

    @property
    def passed(self) -> bool:
        return self.certified

    def summary(self) -> str:
        if self.certified:
            return "coercivity: pass (c0 > 0; per-term d2+(q/p)d3+d4 <= q and d1+d2+d3+d4 < p)"
        return "coercivity: fail (" + "; ".join(self.failures) + ")"


@dataclass(frozen=True)
class ConvexityReport:
    mode: str
    passed: bool
    samples: int
    counterexample: tuple | None = None

    def summary(self) -> str:
        verdict = "pass" if self.passed else "fail"
        note = "midpoint inequality held on all sampled pairs" if self.passed else "counterexample found"
        return f"convexity[{self.mode}]: {verdict} ({note}; {self.samples} random pairs; evidence, not proof)"


_SLOT_CLASS = {"value": lambda p, q: 1.0, "d1": lambda p, q: 1.0,
               "d2": lambda p, q: q / (q - 1.0), "d3": lambda p, q: p / (p - 1.0),
               "d4": lambda p, q: q / (q - 1.0)}


def _sample_points(dim: int, count: int, t_range, rng, scale: float = 2.0):
    X = tuple(rng.normal(0.0, scale, size=(count, dim)) for _ in range(4))
    ts = rng.uniform(t_range[0], t_range[1], size=count)
    return X, ts


def check_regularity(
    certs: dict,
    p: float,
    q: float,
    L: LagrangianExpr | None = None,
    samples: int = 1000,
    t_range=(0.0, 1.0),
    seed: int = 0,
) -> RegularityReport:
    """Verify envelope certificates for L and its four partials.

    certs maps the slots "value", "d1".."d4" to GrowthCertificate objects;
    the required class index per slot is fixed (value and d1 in class 1,
    d2/d4 in class q', d3 in class p').  A certificate declared with a
    smaller M than its slot requires is rejected.  When L is given, the
    domination |L| <= P_value and |dL_i| <= P_di is also spot-checked at
    random points.
    """
    if not 1.0 < p < math.inf or not 1.0 < q < math.inf:
        raise ValueError("exponents p, q must lie in (1, inf)")
    results = []
    assumptions: list[str] = []
    empirical = None
    if L is not None and samples > 0:
        rng = np.random.default_rng(seed)
        X, ts = _sample_points(L.dim, samples, t_range, rng)
        vals, grads = L.partials_batch(*X, ts)
        empirical = (X, ts, vals, grads)
    for slot in ("value", "d1", "d2", "d3", "d4"):
        if slot not in certs:
            raise ValueError(f"missing certificate for slot {slot!r}")
        cert = certs[slot]
        required = _SLOT_CLASS[slot](p, q)
        failures = list(cert.membership_violations(p, q, M=required))
        if cert.M < required - 1e-12:
            failures.append(f"declared class M = {cert.M:g} weaker than required {required:g}")
        assumptions.extend(cert.assumptions)
        max_viol = 0.0
        pts = 0
        if empirical is not None:
            X, ts, vals, grads = empirical
            envelope = cert.evaluate(L.dim, X, ts)
            if slot == "value":
                target = np.abs(vals)
            else:
                i = int(slot[1]) - 1
                target = np.linalg.norm(grads[:, i, :], axis=1)
            viol = target - envelope * (1.0 + 1e-9) - 1e-9
            max_viol = float(viol.max(initial=0.0))
            pts = len(ts)
            if max_viol > 0.0:
                failures.append(f"empirical domination failed by {max_viol:.3e} at a sampled point")
        results.append(
            CheckResult(name=slot, passed=not failures, failures=tuple(failures),
                        empirical_max_violation=max_viol, empirical_points=pts)
        )
    return RegularityReport(results=tuple(results), assumptions=tuple(dict.fromkeys(assumptions)))


def check_coercivity(
    c0: float,
    terms,
    p: float,
    q: float,
    mode: str = "P_M",
    L: LagrangianExpr | None = None,
    samples: int = 1000,
    t_range=(0.0, 1.0),
    seed: int = 0,
) -> CoercivityReport:
    """Verify a lower-bound decomposition L >= c0·|x3|^p + sum of terms.

    Exponent conditions per term: d2 + (q/p)·d3 + d4 <= q (mode "P_M";
    "P1_M" drops the d2 share, "P2_M" only requires d3 <= p) and, always,
    the strict d1 + d2 + d3 + d4 < p.  Coefficients here are plain reals and
    may be negative.  When L is given the bound is spot-checked pointwise.
    """
    if not 1.0 < p < math.inf or not 1.0 < q < math.inf:
        raise ValueError("exponents p, q must lie in (1, inf)")
    failures = []
    if not c0 > 0.0:
        failures.append(f"leading coefficient c0 = {c0:g} is not > 0")
    terms = tuple(terms)
    for k, term in enumerate(terms):
        if isinstance(term.coeff, str):
            failures.append(f"term {k}: lower-bound coefficients must be plain reals")
            continue
        for name, val, hi in (("d2", term.d2, q), ("d3", term.d3, p), ("d4", term.d4, q)):
            if not 0.0 <= val <= hi:
                failures.append(f"term {k}: {name} = {val:g} outside [0, {hi:g}]")
        if term.d1 < 0.0:
            failures.append(f"term {k}: d1 = {term.d1:g} must be >= 0")
        if mode == "P_M":
            lhs = term.d2 + (q / p) * term.d3 + term.d4
            if lhs > q + 1e-12:
                failures.append(f"term {k}: d2 + (q/p)*d3 + d4 = {lhs:g} > q = {q:g}")
        elif mode == "P1_M":
            lhs = (q / p) * term.d3 + term.d4
            if lhs > q + 1e-12:
                failures.append(f"term {k}: (q/p)*d3 + d4 = {lhs:g} > q = {q:g}")
        elif mode == "P2_M":
            if term.d3 > p + 1e-12:
                failures.append(f"term {k}: d3 = {term.d3:g} > p = {p:g}")
        else:
            raise ValueError(f"unknown coercivity mode {mode!r}")
        total = term.d1 + term.d2 + term.d3 + term.d4
        if not total < p - 1e-12:
            failures.append(f"term {k}: d1 + d2 + d3 + d4 = {total:g} not < p = {p:g} (strict)")
    max_viol = 0.0
    pts = 0
    if L is not None and samples > 0 and not failures:
        rng = np.random.default_rng(seed)
        X, ts = _sample_points(L.dim, samples, t_range, rng)
        vals = L.eval_batch(*X, ts)
        norms = [np.linalg.norm(x, axis=1) for x in X]
        bound = c0 * norms[2] ** p
        for term in terms:
            bound = bound + float(term.coeff) * _power(norms[0], term.d1) * _power(
                norms[1], term.d2
            ) * _power(norms[2], term.d3) * _power(norms[3], term.d4)
        viol = bound - vals - 1e-9 * (1.0 + np.abs(vals))
        max_viol = float(viol.max(initial=0.0))
        pts = len(ts)
        if max_viol > 0.0:
            failures.append(f"empirical lower bound failed by {max_viol:.3e} at a sampled point")
    return CoercivityReport(certified=not failures, failures=tuple(failures),
                            empirical_max_violation=max_viol, empirical_points=pts)


_CONVEXITY_BLOCKS = {"full": (0, 1, 2, 3), "in_x2x3x4": (1, 2, 3), "in_x3x4": (2, 3)}


def check_convexity(
    L: LagrangianExpr,
    mode: str = "full",
    samples: int = 1000,
    t_range=(0.0, 1.0),
    seed: int = 0,
    scale: float = 3.0,
) -> ConvexityReport:
    """Monte-Carlo midpoint-convexity test over a variable block.

    For random pairs (y, z) in the block (remaining slots frozen at random
    values) checks L(mid) <= (L(y) + L(z))/2 + 1e-10.  A pass is sampling
    evidence, not a proof; the first counterexample is reported.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if mode not in _CONVEXITY_BLOCKS:
        raise ValueError(f"unknown convexity mode {mode!r}")
    block = _CONVEXITY_BLOCKS[mode]
    rng = np.random.default_rng(seed)
    d = L.dim
    frozen = [rng.normal(0.0, scale, size=(samples, d)) for _ in range(4)]
    Xy = [f.copy() for f in frozen]
    Xz = [f.copy() for f in frozen]
    for i in block:
        Xy[i] = rng.normal(0.0, scale, size=(samples, d))
        Xz[i] = rng.normal(0.0, scale, size=(samples, d))
    Xm = [0.5 * (y + z) if i in block else y for i, (y, z) in enumerate(zip(Xy, Xz))]
    ts = rng.uniform(t_range[0], t_range[1], size=samples)
    fy = L.eval_batch(*Xy, ts)
    fz = L.eval_batch(*Xz, ts)
    fm = L.eval_batch(*Xm, ts)
    gap = fm - 0.5 * (fy + fz)
    bad = np.nonzero(gap > 1e-10)[0]
    if bad.size == 0:
        return ConvexityReport(mode=mode, passed=True, samples=samples)
    k = int(bad[np.argmax(gap[bad])])
    ce = (
        tuple(np.array(x[k]) for x in Xy),
        tuple(np.array(x[k]) for x in Xz),
        float(ts[k]),
        float(gap[k]),
    )
    return ConvexityReport(mode=mode, passed=False, samples=samples, counterexample=ce)


# ---------------------------------------------------------------------------
# Builtin catalog


@dataclass(frozen=True)
class BuiltinLagrangian:
    name: str
    expr: LagrangianExpr
    p: float
    q: float
    regularity: dict | None
    coercivity: tuple | None          # (c0, terms, mode)
    convexity_mode: str               # strongest block expected to pass
    convex_full: bool                 # whether the full-block test should pass


def _quadratic_regularity(scaled: bool, p: float, q: float) -> dict:
    c3 = "0.5*(1 + t)^2" if scaled else 0.5
    g3 = "(1 + t)^2" if scaled else 1.0
    return {
        "value": GrowthCertificate(terms=(
            GrowthTerm(coeff="0.5*norm(x1)^2"),
            GrowthTerm(coeff=0.5, d2=2),
            GrowthTerm(coeff=c3, d3=2),
            GrowthTerm(coeff=0.5, d4=2),
        ), M=1.0),
        "d1": GrowthCertificate(terms=(GrowthTerm(coeff="norm(x1)"),), M=1.0),
        "d2": GrowthCertificate(terms=(GrowthTerm(coeff=1.0, d2=1),), M=q / (q - 1.0)),
        "d3": GrowthCertificate(terms=(GrowthTerm(coeff=g3, d3=1),), M=p / (p - 1.0)),
        "d4": GrowthCertificate(terms=(GrowthTerm(coeff=1.0, d4=1),), M=q / (q - 1.0)),
    }


def _norm_abs(v) -> float:
    return float(np.linalg.norm(np.atleast_1d(np.asarray(v, dtype=float))))


def _make_quasilinear(d: int, p: float, q: float, params: dict) -> BuiltinLagrangian:
    fs = {}
    for k in ("f1", "f2", "f3", "f4"):
        v = params.get(k, 0.0)
        fs[k] = np.full(d, float(v)) if d > 1 and np.ndim(v) == 0 else v
    src = f"norm(x3)^{p:g}/{p:g} + dot(f1, x1) + dot(f2, x2) + dot(f3, x3) + dot(f4, x4)"
    expr = parse_lagrangian(src, d, params=fs)
    nf = {k: _norm_abs(v) for k, v in fs.items()}
    reg = {
        "value": GrowthCertificate(terms=(
            GrowthTerm(coeff=1.0 / p, d3=p),
            GrowthTerm(coeff=f"{nf['f1']!r}*norm(x1)"),
            GrowthTerm(coeff=nf["f2"], d2=1),
            GrowthTerm(coeff=nf["f3"], d3=1),
            GrowthTerm(coeff=nf["f4"], d4=1),
        ), M=1.0),
        "d1": GrowthCertificate(terms=(GrowthTerm(coeff=nf["f1"]),), M=1.0),
        "d2": GrowthCertificate(terms=(GrowthTerm(coeff=nf["f2"]),), M=q / (q - 1.0)),
        "d3": GrowthCertificate(terms=(
            GrowthTerm(coeff=1.0, d3=p - 1.0),
            GrowthTerm(coeff=nf["f3"]),
        ), M=p / (p - 1.0)),
        "d4": GrowthCertificate(terms=(GrowthTerm(coeff=nf["f4"]),), M=q / (q - 1.0)),
    }
    coer = (1.0 / p, tuple(
        GrowthTerm(coeff=-nf[f"f{i}"], **{f"d{i}": 1.0}) for i in (1, 2, 3, 4) if nf[f"f{i}"] > 0.0
    ), "P_M")
    return BuiltinLagrangian("quasilinear", expr, p, q, reg, coer, "full", True)


def make_builtin(name: str, d: int = 1, p: float = 2.0, q: float = 2.0, **params) -> BuiltinLagrangian:
    """Instantiate a named integrand with its default certificates."""
    if name == "dirichlet":
        expr = parse_lagrangian("0.5*norm(x3)^2", d)
        reg = {
            "value": GrowthCertificate(terms=(GrowthTerm(coeff=0.5, d3=2),), M=1.0),
            "d1": GrowthCertificate(M=1.0),
            "d2": GrowthCertificate(M=q / (q - 1.0)),
            "d3": GrowthCertificate(terms=(GrowthTerm(coeff=1.0, d3=1),), M=p / (p - 1.0)),
            "d4": GrowthCertificate(M=q / (q - 1.0)),
        }
        return BuiltinLagrangian(name, expr, p, q, reg, (0.5, (), "P_M"), "full", True)
    if name == "quadratic":
        expr = parse_lagrangian(
            "0.5*(norm(x1)^2 + norm(x2)^2 + norm(x3)^2 + norm(x4)^2)", d
        )
        return BuiltinLagrangian(name, expr, p, q, _quadratic_regularity(False, p, q),
                                 (0.5, (), "P_M"), "full", True)
    if name == "scaled_quadratic":
        c3 = params.get("c3", "1 + t")
        expr = parse_lagrangian(
            f"0.5*(norm(x1)^2 + norm(x2)^2 + norm(({c3})*x3)^2 + norm(x4)^2)", d
        )
        reg = _quadratic_regularity(True, p, q) if c3 == "1 + t" else None
        coer = (0.5, (), "P_M") if c3 == "1 + t" else None
        return BuiltinLagrangian(name, expr, p, q, reg, coer, "full", True)
    if name == "trig_product":
        if d != 1:
            raise ValueError("trig_product is a scalar example (d = 1)")
        f = float(params.get("f", 0.3))
        expr = parse_lagrangian(
            f"cos(x1)*sin(x2) + norm(x3)^{p:g}/{p:g} + dot(f, x4)", 1, params={"f": f}
        )
        reg = {
            "value": GrowthCertificate(terms=(
                GrowthTerm(coeff=1.0),
                GrowthTerm(coeff=1.0 / p, d3=p),
                GrowthTerm(coeff=abs(f), d4=1),
            ), M=1.0, mode="P1_M"),
            "d1": GrowthCertificate(terms=(GrowthTerm(coeff=1.0),), M=1.0, mode="P1_M"),
            "d2": GrowthCertificate(terms=(GrowthTerm(coeff=1.0),), M=q / (q - 1.0), mode="P1_M"),
            "d3": GrowthCertificate(terms=(GrowthTerm(coeff=1.0, d3=p - 1.0),),
                                    M=p / (p - 1.0), mode="P1_M"),
            "d4": GrowthCertificate(terms=(GrowthTerm(coeff=abs(f)),), M=q / (q - 1.0), mode="P1_M"),
        }
        coer = (1.0 / p, (GrowthTerm(coeff=-1.0), GrowthTerm(coeff=-abs(f), d4=1.0)), "P_M")
        return BuiltinLagrangian(name, expr, p, q, reg, coer, "in_x3x4", False)
    if name == "neg_speed":
        # unbounded below along oscillating paths; concave in x3, so no
        # convexity block passes either
        expr = parse_lagrangian("-norm(x3)", d)
        return BuiltinLagrangian(name, expr, p, q, None, None, "none", False)
    if name == "quasilinear":
        return _make_quasilinear(d, p, q, params)
    raise ValueError(f"unknown builtin integrand {name!r}")


def builtin_names() -> tuple[str, ...]:
    return ("dirichlet", "quadratic", "scaled_quadratic", "quasilinear", "trig_product", "neg_speed")
