import numpy as np
import pytest

from varker import (
    GrowthCertificate,
    GrowthTerm,
    check_coercivity,
    check_convexity,
    check_regularity,
    make_builtin,
    parse_lagrangian,
)


# ---------------------------------------------------------------------------
# evaluation


def test_quadratic_value_at_unit_points():
    L = make_builtin("quadratic", d=2).expr
    e1 = [1.0, 0.0]
    assert L.eval(e1, e1, e1, e1, 0.3) == pytest.approx(2.0, rel=1e-14)


def test_dot_value():
    L = parse_lagrangian("dot(x3, x3)", 2)
    assert L.eval([0, 0], [0, 0], [3.0, 4.0], [0, 0], 0.0) == pytest.approx(25.0)


def test_quasilinear_value():
    # p = 2, no offset, unit coefficient vectors, all slots at e1:
    # |x3|^2/2 plus four unit pairings
    L = make_builtin("quasilinear", d=2, p=2.0, q=2.0,
                     f1=[1, 0], f2=[1, 0], f3=[1, 0], f4=[1, 0]).expr
    e1 = [1.0, 0.0]
    assert L.eval(e1, e1, e1, e1, 0.0) == pytest.approx(4.5)


def test_quadratic_partials_are_the_points():
    L = make_builtin("quadratic", d=3).expr
    rng = np.random.default_rng(0)
    xs = [rng.standard_normal(3) for _ in range(4)]
    parts = L.partials(*xs, 0.5)
    for got, want in zip(parts, xs):
        assert np.allclose(got, want, rtol=1e-12)


def test_linear_pairing_partials():
    L = parse_lagrangian("dot(f, x4)", 2, params={"f": [1.0, 2.0]})
    parts = L.partials([0, 0], [0, 0], [0, 0], [5.0, -1.0], 0.0)
    assert np.allclose(parts[3], [1.0, 2.0])
    for i in range(3):
        assert np.allclose(parts[i], 0.0)


@pytest.mark.parametrize("name,kw", [
    ("dirichlet", {}),
    ("quadratic", {}),
    ("scaled_quadratic", {}),
    ("quasilinear", dict(p=3.0, q=3.0, f1=0.1, f2=0.3, f4=0.2)),
    ("trig_product", dict(f=0.3)),
    ("neg_speed", {}),
])
def test_builtin_partials_match_finite_differences(name, kw):
    L = make_builtin(name, d=1, **kw).expr
    rng = np.random.default_rng(7)
    for _ in range(20):
        xs = [rng.standard_normal(1) for _ in range(4)]
        if name == "neg_speed" and abs(xs[2][0]) < 1e-2:
            xs[2][0] = 0.5  # keep clear of the kink for the difference quotient
        t = rng.uniform(0, 1)
        parts = L.partials(*xs, t)
        h = 1e-5
        for i in range(4):
            bump = [x.copy() for x in xs]
            bump[i][0] += h
            up = L.eval(*bump, t)
            bump[i][0] -= 2 * h
            dn = L.eval(*bump, t)
            fd = (up - dn) / (2 * h)
            assert parts[i][0] == pytest.approx(fd, rel=1e-6, abs=1e-6)


# ---------------------------------------------------------------------------
# regularity certificates


def test_quadratic_regularity_passes():
    b = make_builtin("quadratic", d=2, p=2.0, q=2.0)
    rep = check_regularity(b.regularity, 2.0, 2.0, L=b.expr)
    assert rep.passed, [r.failures for r in rep.results]


def test_exponent_violation_is_named():
    # one term with d2 + (q/p) d3 + d4 = 1.5 q in class M = 1
    certs = make_builtin("quadratic", d=1).regularity.copy()
    certs["value"] = GrowthCertificate(terms=(GrowthTerm(coeff=1.0, d2=1.0, d3=1.0, d4=1.0),), M=1.0)
    rep = check_regularity(certs, 2.0, 2.0)
    bad = [r for r in rep.results if r.name == "value"][0]
    assert not bad.passed
    assert any("d2 + (q/p)*d3 + d4" in f for f in bad.failures)


def test_relaxed_slope_only_mode_allows_full_power():
    # d3 = p in the d3 slot fails the strict envelope class but passes the
    # slope-only relaxation
    p = q = 2.0
    strict = dict(make_builtin("quadratic", d=1).regularity)
    strict["d3"] = GrowthCertificate(terms=(GrowthTerm(coeff=1.0, d3=p),), M=p / (p - 1.0))
    rep = check_regularity(strict, p, q)
    assert not rep.passed
    relaxed = dict(strict)
    relaxed["d3"] = GrowthCertificate(terms=(GrowthTerm(coeff=1.0, d3=p),), M=p / (p - 1.0), mode="P2_M")
    rep = check_regularity(relaxed, p, q)
    assert [r for r in rep.results if r.name == "d3"][0].passed
    assert rep.assumptions  # relaxation rides on an operator assumption


def test_trig_regularity_via_coefficient_relaxation():
    b = make_builtin("trig_product", d=1, p=2.0, q=2.0, f=0.3)
    rep = check_regularity(b.regularity, 2.0, 2.0, L=b.expr)
    assert rep.passed, [r.failures for r in rep.results]
    assert "operator maps continuous paths to continuous paths" in rep.assumptions


def test_empirical_domination_failure_detected():
    # claim |L| <= 0.1 for the quadratic: exponent arithmetic fine, bound false
    b = make_builtin("quadratic", d=1)
    certs = dict(b.regularity)
    certs["value"] = GrowthCertificate(terms=(GrowthTerm(coeff=0.1),), M=1.0)
    rep = check_regularity(certs, 2.0, 2.0, L=b.expr)
    bad = [r for r in rep.results if r.name == "value"][0]
    assert not bad.passed and bad.empirical_max_violation > 0.0


# ---------------------------------------------------------------------------
# coercivity certificates


def test_quadratic_coercivity_passes():
    b = make_builtin("quadratic", d=2)
    c0, terms, mode = b.coercivity
    rep = check_coercivity(c0, terms, 2.0, 2.0, mode=mode, L=b.expr)
    assert rep.certified


def test_strict_sum_violation_fails():
    # d1 + d2 + d3 + d4 = p exactly: the strict inequality must reject it
    rep = check_coercivity(1.0, (GrowthTerm(coeff=-1.0, d1=1.0, d3=1.0),), 2.0, 2.0)
    assert not rep.certified
    assert any("not < p" in f for f in rep.failures)


def test_nonpositive_leading_coefficient_fails():
    rep = check_coercivity(0.0, (), 2.0, 2.0)
    assert not rep.certified


def test_scaled_quadratic_negative_factor_flagged():
    # scaling the slope slot by c3(t) = t - 1/2 kills the lower bound at the
    # sign change; the honest-looking certificate fails the empirical check
    b = make_builtin("scaled_quadratic", d=1, c3="t - 0.5")
    rep = check_coercivity(0.5, (), 2.0, 2.0, L=b.expr, seed=3)
    assert not rep.certified
    assert any("empirical" in f for f in rep.failures)


def test_relaxed_coercivity_modes():
    # with p = 6, q = 2: d2 + (q/p) d3 + d4 = 2.2 > q, but the always-on
    # strict sum 3.0 < p holds, so only the first inequality is at stake
    term = GrowthTerm(coeff=-0.5, d2=1.8, d3=1.2)
    assert not check_coercivity(1.0, (term,), 6.0, 2.0, mode="P_M").certified
    # dropping the d2 share admits it ((q/p) d3 = 0.4 <= 2)
    assert check_coercivity(1.0, (term,), 6.0, 2.0, mode="P1_M").certified
    # slope-only mode also admits it (d3 = 1.2 <= p)
    assert check_coercivity(1.0, (term,), 6.0, 2.0, mode="P2_M").certified


# ---------------------------------------------------------------------------
# convexity


def test_quadratic_full_convexity():
    b = make_builtin("quadratic", d=2)
    assert check_convexity(b.expr, "full", samples=500, seed=0).passed


def test_trig_product_block_convexity_only():
    b = make_builtin("trig_product", d=1, f=0.3)
    full = check_convexity(b.expr, "full", samples=1000, seed=0)
    assert not full.passed and full.counterexample is not None
    assert check_convexity(b.expr, "in_x3x4", samples=1000, seed=0).passed


def test_partial_block_convexity():
    L = parse_lagrangian("norm(x3)^2 - norm(x1)^2", 2)
    assert check_convexity(L, "in_x2x3x4", samples=800, seed=1).passed
    assert not check_convexity(L, "full", samples=800, seed=1).passed


def test_full_pass_implies_block_pass_same_seed():
    for name in ("quadratic", "dirichlet"):
        L = make_builtin(name, d=2).expr
        for seed in (0, 1, 2):
            if check_convexity(L, "full", samples=300, seed=seed).passed:
                assert check_convexity(L, "in_x2x3x4", samples=300, seed=seed).passed


# ---------------------------------------------------------------------------
# catalog classifications


def test_builtin_catalog_classifications():
    quad = make_builtin("quadratic", d=1, p=2.0, q=2.0)
    assert check_regularity(quad.regularity, 2.0, 2.0, L=quad.expr).passed
    c0, terms, mode = quad.coercivity
    assert check_coercivity(c0, terms, 2.0, 2.0, mode=mode, L=quad.expr).certified
    assert check_convexity(quad.expr, "full", samples=800, seed=0).passed
    assert quad.convex_full

    # the quasi-linear family certifies for several exponent pairs
    for p in (1.5, 2.0, 3.0):
        ql = make_builtin("quasilinear", d=1, p=p, q=p, f1=0.1, f2=0.3, f4=0.2)
        assert check_regularity(ql.regularity, p, p, L=ql.expr).passed
        c0, terms, mode = ql.coercivity
        assert check_coercivity(c0, terms, p, p, mode=mode, L=ql.expr).certified
        assert check_convexity(ql.expr, "full", samples=500, seed=0).passed

    trig = make_builtin("trig_product", d=1, p=2.0, q=2.0, f=0.3)
    assert check_regularity(trig.regularity, 2.0, 2.0, L=trig.expr).passed
    c0, terms, mode = trig.coercivity
    assert check_coercivity(c0, terms, 2.0, 2.0, mode=mode, L=trig.expr).certified
    assert not check_convexity(trig.expr, "full", samples=1000, seed=0).passed
    assert check_convexity(trig.expr, "in_x3x4", samples=1000, seed=0).passed
    assert trig.convexity_mode == "in_x3x4" and not trig.convex_full
