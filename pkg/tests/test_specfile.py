import json

import numpy as np
import pytest

from varker import SpecError, build_problem, load_spec
from varker.specfile import (
    BUNDLED_SPECS,
    bundled_spec_path,
    coercivity_certificate,
    convexity_request,
    regularity_certificates,
)


def minimal_spec(**overrides):
    spec = {
        "interval": {"a": 0.0, "b": 1.0},
        "dim": 1,
        "exponents": {"p": 2.0, "q": 2.0},
        "operator": {"variant": "zero"},
        "lagrangian": {"expression": "0.5*norm(x3)^2"},
        "constraints": {"left": [0.0], "right": [1.0]},
        "discretization": {"n": 17},
    }
    spec.update(overrides)
    return spec


def test_bundled_specs_all_build():
    for name in BUNDLED_SPECS:
        data = load_spec(bundled_spec_path(name))
        ps = build_problem(data)
        assert ps.problem.grid.n == data["discretization"]["n"]


def test_missing_field_is_named(tmp_path):
    spec = minimal_spec()
    del spec["exponents"]["p"]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(spec))
    with pytest.raises(SpecError) as e:
        build_problem(load_spec(str(path)))
    assert "exponents.p" in str(e.value)


def test_json_parse_error_carries_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "interval": {,}\n}')
    with pytest.raises(SpecError) as e:
        load_spec(str(path))
    assert "line 2" in str(e.value)


def test_unknown_variant_rejected():
    with pytest.raises(SpecError):
        build_problem(minimal_spec(operator={"variant": "mystery"}))


def test_bad_expression_positioned():
    with pytest.raises(SpecError) as e:
        build_problem(minimal_spec(lagrangian={"expression": "norm(x3"}))
    assert "lagrangian.expression" in str(e.value)


def test_constraint_dimension_checked():
    spec = minimal_spec(dim=2, constraints={"left": [0.0]})
    with pytest.raises(SpecError):
        build_problem(spec)


def test_overrides_apply():
    ps = build_problem(minimal_spec(), n=33, grad_tol=1e-6, seed=5)
    assert ps.problem.grid.n == 33
    assert ps.solve_options.grad_tol == 1e-6
    assert ps.solve_options.seed == 5


def test_expression_operator_pieces():
    spec = minimal_spec(operator={
        "variant": "riemann_liouville_variable",
        "alpha": "0.6 + 0.3*(t - x)",
        "delta": 0.6,
    })
    spec["exponents"] = {"p": 2.0, "q": 2.0}
    ps = build_problem(spec)
    assert ps.problem.operator.spec.variant == "riemann_liouville_variable"

    spec = minimal_spec(operator={"variant": "substitution", "phi": "t^2"})
    ps = build_problem(spec)
    # derivative of the map comes from forward-mode differentiation
    assert ps.problem.operator.spec.dphi(0.5) == pytest.approx(1.0)

    spec = minimal_spec(operator={"variant": "general", "kernel": "exp(-(t - x))",
                                  "lambda1": 1.0, "lambda2": 0.0})
    ps = build_problem(spec)
    out = ps.problem.operator.matrix @ np.ones(17)
    exact = 1.0 - np.exp(-ps.problem.grid.nodes)
    assert np.abs(out - exact).max() < 1e-4


def test_certificate_sections_roundtrip():
    data = load_spec(bundled_spec_path("trig"))
    ps = build_problem(data)
    certs = regularity_certificates(ps)
    assert set(certs) == {"value", "d1", "d2", "d3", "d4"}
    assert certs["value"].mode == "P1_M"
    c0, terms, mode = coercivity_certificate(ps)
    assert c0 == pytest.approx(0.5)
    assert len(terms) == 2
    mode, samples, seed = convexity_request(ps)
    assert mode == "in_x3x4" and samples == 1000 and seed == 0


def test_builtin_certificates_resolve():
    data = load_spec(bundled_spec_path("quadratic"))
    ps = build_problem(data)
    certs = regularity_certificates(ps)
    assert certs["value"].terms
    c0, terms, mode = coercivity_certificate(ps)
    assert c0 == pytest.approx(0.5)


def test_missing_certificates_reported():
    # a builtin-backed spec resolves its default certificates even without a
    # certificates section; an expression-only spec has nothing to fall back on
    data = load_spec(bundled_spec_path("rl_quadratic"))
    ps = build_problem(data)
    assert ps.certificates is None
    assert regularity_certificates(ps)["value"].terms

    bare = build_problem(minimal_spec())
    with pytest.raises(SpecError):
        regularity_certificates(bare)
    with pytest.raises(SpecError):
        coercivity_certificate(bare)
    with pytest.raises(SpecError):
        convexity_request(bare)
