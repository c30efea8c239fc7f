from functools import lru_cache

import numpy as np
import pytest

from varker import (
    ConstraintSet,
    KernelSpec,
    Problem,
    SampledPath,
    SolveOptions,
    assemble,
    differential_residual,
    first_integral_residual,
    fractional_el_form,
    make_builtin,
    make_grid,
    parse_lagrangian,
    solve,
)
from varker.residual import _el_pieces


def dirichlet_problem(n=129):
    g = make_grid(0.0, 1.0, n)
    return Problem(grid=g, lagrangian=make_builtin("dirichlet").expr,
                   operator=assemble(KernelSpec.zero(), g),
                   constraints=ConstraintSet(left=[0.0], right=[1.0]), p=2.0, q=2.0)


@lru_cache(maxsize=None)
def rl_problem(n, alpha=0.75, lambdas=(1.0, 0.0)):
    g = make_grid(0.0, 1.0, n)
    return Problem(grid=g, lagrangian=make_builtin("quadratic").expr,
                   operator=assemble(KernelSpec.riemann_liouville(alpha, *lambdas), g),
                   constraints=ConstraintSet(left=[1.0]), p=2.0, q=2.0,
                   quadrature="midpoint")


@lru_cache(maxsize=None)
def rl_solution(n, alpha=0.75, grad_tol=1e-8):
    P = rl_problem(n, alpha)
    return solve(P, SolveOptions(grad_tol=grad_tol, max_iters=40000, memory=30))


def test_straight_line_first_integral_constant():
    P = dirichlet_problem()
    u = SampledPath.from_function(P.grid, lambda t: t)
    rep = first_integral_residual(P, u)
    assert np.allclose(rep.first_integral, 1.0, atol=1e-12)
    assert rep.constancy_defect <= 1e-12
    assert rep.constant_estimate[0] == pytest.approx(1.0, abs=1e-12)


def test_solver_output_passes_first_integral():
    P = dirichlet_problem()
    rep = solve(P, SolveOptions(seed=3))
    r = first_integral_residual(P, rep.u_star)
    assert r.constancy_defect <= 1e-6


def test_bumped_path_fails_first_integral():
    P = dirichlet_problem()
    g = P.grid
    bumped = g.nodes + 0.1 * np.sin(np.pi * g.nodes)
    r = first_integral_residual(P, SampledPath.from_values(g, bumped))
    assert r.constancy_defect >= 1e-2


def test_differential_residual_small_in_interior():
    P = dirichlet_problem()
    u = SampledPath.from_function(P.grid, lambda t: t)
    res = differential_residual(P, u)
    assert np.abs(res[1:-1]).max() <= 1e-8


def test_differential_residual_shrinks_under_refinement():
    # first-order decay for the solver output of a smooth problem
    defects = []
    for n in (65, 129, 257):
        res = differential_residual(rl_problem(n), rl_solution(n).u_star)
        defects.append(np.abs(res[2:-2]).max())
    assert defects[1] <= 0.75 * defects[0]
    assert defects[2] <= 0.75 * defects[1]


def test_classical_case_matches_handcoded_form():
    # identity operator, quadratic integrand: the balance is
    # d/dt(x3 + K*[x4]) - x1 - K*[x2] with K = id, so 2u'' - 2u along u
    g = make_grid(0.0, 1.0, 201)
    L = make_builtin("quadratic").expr
    P = Problem(grid=g, lagrangian=L, operator=assemble(KernelSpec.identity(), g),
                constraints=ConstraintSet(left=[0.0], right=[1.0]), p=2.0, q=2.0)
    u = SampledPath.from_function(g, lambda t: t * t)
    res = differential_residual(P, u)
    t = g.nodes
    x3 = np.gradient(u.values[:, 0], g.h)  # consistent with averaged slopes
    hand = 2.0 * np.gradient(x3, g.h) - 2.0 * t * t
    assert np.abs(res[2:-2, 0] - hand[2:-2]).max() <= 1e-2


def test_first_integral_defect_shrinks_for_solver_outputs():
    d129 = first_integral_residual(rl_problem(129), rl_solution(129).u_star).constancy_defect
    d257 = first_integral_residual(rl_problem(257), rl_solution(257).u_star).constancy_defect
    assert d129 <= 1e-4
    assert d257 <= 0.6 * d129


def test_half_order_defect_documented_behavior():
    # at order 1/2 the defect sits near 6e-4 on 129 nodes (deviation
    # concentrated near the left endpoint) and decays about linearly in h
    d129 = first_integral_residual(rl_problem(129, 0.5), rl_solution(129, 0.5).u_star).constancy_defect
    d257 = first_integral_residual(rl_problem(257, 0.5), rl_solution(257, 0.5).u_star).constancy_defect
    assert 1e-4 <= d129 <= 2e-3
    assert d257 <= 0.65 * d129


def test_gradient_tolerance_controls_defect():
    # discrete zero-residual characterization: a stationary-to-tol path has
    # defect bounded by C*tol + O(h); the h-term dominates at these sizes
    for n, cap in ((129, 1e-4), (257, 5e-5)):
        defect = first_integral_residual(
            rl_problem(n), rl_solution(n, 0.75, 1e-9).u_star
        ).constancy_defect
        tol_term = 1e3 * 1e-9
        h_term = 8.0 * rl_problem(n).grid.h**1.5
        assert defect <= tol_term + h_term
        assert defect <= cap


def test_negative_control_is_two_orders_worse():
    cases = [
        (dirichlet_problem(), solve(dirichlet_problem()).u_star),
        (rl_problem(129), rl_solution(129).u_star),
    ]
    for P, u in cases:
        base = first_integral_residual(P, u).constancy_defect
        vals = u.values.copy()
        vals[:, 0] += 0.1 * np.sin(np.pi * (P.grid.nodes - P.grid.a) / (P.grid.b - P.grid.a))
        bumped = first_integral_residual(P, SampledPath.from_values(P.grid, vals))
        assert bumped.constancy_defect >= 100.0 * max(base, 1e-12)


def test_free_end_natural_condition():
    # at a minimizer with a free right end, S = dL3 + K*[dL4] vanishes at b
    # (the first integral itself settles at the constant -w(b), reported for
    # inspection); S at the last sample is O(h) away from S(b)
    P = rl_problem(129)
    u = rl_solution(129).u_star
    rhs, S, ts, w = _el_pieces(P, u)
    assert np.abs(S[-1]).max() <= 0.05
    r = first_integral_residual(P, u)
    assert r.first_integral.shape[0] == P.grid.n - 1  # midpoint sampling
    assert np.all(np.isfinite(r.endpoint_values[0])) and np.all(np.isfinite(r.endpoint_values[1]))
    # the settled constant matches the report's estimate
    assert r.endpoint_values[1] == pytest.approx(r.constant_estimate, abs=5e-4)


def test_fractional_form_requires_dedicated_variant():
    P = dirichlet_problem()
    u = SampledPath.from_function(P.grid, lambda t: t)
    with pytest.raises(ValueError):
        fractional_el_form(P, u)
    P2 = rl_problem(65, 0.5, (0.5, 0.5))
    u2 = SampledPath.from_values(P2.grid, np.full((65, 1), 1.0))
    with pytest.raises(ValueError):
        fractional_el_form(P2, u2)


def test_fractional_form_agrees_with_differential():
    for alpha in (0.5, 1.0):
        P = rl_problem(129, alpha)
        u = rl_solution(129, alpha).u_star
        frac = fractional_el_form(P, u)
        ref = differential_residual(P, u)
        scale = 1.0 + np.abs(ref).max()
        assert np.abs(frac - ref).max() <= 1e-6 * scale


def test_fractional_form_hadamard_branch():
    g = make_grid(1.0, 2.0, 65)
    P = Problem(grid=g, lagrangian=make_builtin("quadratic").expr,
                operator=assemble(KernelSpec.hadamard(0.5, 0.0, -1.0), g),
                constraints=ConstraintSet(left=[1.0]), p=2.0, q=2.0,
                quadrature="midpoint")
    rep = solve(P)
    frac = fractional_el_form(P, rep.u_star)
    ref = differential_residual(P, rep.u_star)
    assert np.abs(frac - ref).max() <= 1e-6 * (1.0 + np.abs(ref).max())


def test_classical_limit_matches_classical_residual():
    # integrand free of x2 and x4: the rearranged form equals the classical
    # balance exactly whatever the operator
    g = make_grid(0.0, 1.0, 65)
    L = parse_lagrangian("0.5*norm(x3)^2 + 0.5*norm(x1)^2", 1)
    op = assemble(KernelSpec.riemann_liouville(0.5, 1.0, 0.0), g)
    P = Problem(grid=g, lagrangian=L, operator=op,
                constraints=ConstraintSet(left=[1.0]), p=2.0, q=2.0)
    Pz = Problem(grid=g, lagrangian=L, operator=assemble(KernelSpec.zero(), g),
                 constraints=ConstraintSet(left=[1.0]), p=2.0, q=2.0)
    u = SampledPath.from_function(g, lambda t: np.cosh(t))
    frac = fractional_el_form(P, u)
    classical = differential_residual(Pz, u)
    assert np.abs(frac - classical).max() <= 1e-12
