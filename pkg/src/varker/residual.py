"""Euler-Lagrange verification for candidate minimizers.

A stationary path makes d/dt(dL3 + K*[dL4]) = dL1 + K*[dL2] hold along the
path (partials taken at (u, K[u], u', K[u'], t)).  The primary verdict uses
the differentiation-free first-integral form: with w the cumulative
integral of the right-hand side, Phi := dL3 + K*[dL4] - w must be constant,
and the reported defect is Phi's max deviation from its weighted mean.  The
differentiated residual is noisier and kept for reporting; the fractional
rearrangement (slope derivative minus a fractional derivative of dL4) is a
consistency cross-check for the dedicated operator variants.

K* here is the continuous-formula adjoint assembly when the operator has
one (all kernel variants); it is the accurate route for smooth integrands.
Phi is sampled where the problem's quadrature samples the integrand: at the
nodes for the "nodes" treatment, at cell midpoints for "midpoint".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functional import Problem, _check_feasible, _integrand_inputs
from .grid import Grid, SampledPath, averaging_matrix, midpoint_matrix


@dataclass(frozen=True)
class ResidualReport:
    grid: Grid
    first_integral: np.ndarray        # Phi samples, (n, d) or (n-1, d)
    constancy_defect: float
    constant_estimate: np.ndarray     # weighted mean of Phi, (d,)
    endpoint_values: tuple            # (Phi at the first/last sample) for free-end inspection
    differential_residual: np.ndarray | None = None

    def summary(self) -> str:
        return (
            f"constancy defect {self.constancy_defect:.3e}; "
            f"first integral endpoint values {self.endpoint_values[0]} / {self.endpoint_values[1]}"
        )


def _adjoint_apply(problem: Problem):
    """K* acting on samples at the problem's integrand abscissae."""
    op = problem.operator
    Kadj = op.adjoint_continuous if op.adjoint_continuous is not None else op.adjoint_matrix
    if problem.quadrature == "nodes":
        return lambda P: Kadj @ P
    A = averaging_matrix(problem.grid.n)
    B = midpoint_matrix(problem.grid.n)
    return lambda P: B @ (Kadj @ (A @ P))


def _el_pieces(problem: Problem, u: SampledPath):
    """rhs = dL1 + K*[dL2] and S = dL3 + K*[dL4] at the integrand abscissae."""
    X, ts, w = _integrand_inputs(problem, u.values, u.deriv)
    _, parts = problem.lagrangian.partials_batch(*X, ts)
    if not np.all(np.isfinite(parts)):
        raise ArithmeticError("partials are not finite along the path")
    Kstar = _adjoint_apply(problem)
    rhs = parts[:, 0, :] + Kstar(parts[:, 1, :])
    S = parts[:, 2, :] + Kstar(parts[:, 3, :])
    return rhs, S, ts, w


def _cumtrapz(samples: np.ndarray, spacing: float) -> np.ndarray:
    out = np.zeros_like(samples)
    incr = 0.5 * spacing * (samples[:-1] + samples[1:])
    out[1:] = np.cumsum(incr, axis=0)
    return out


def first_integral_residual(problem: Problem, u: SampledPath,
                            include_differential: bool = False) -> ResidualReport:
    """Constancy check of Phi = dL3 + K*[dL4] - cumint(dL1 + K*[dL2]).

    The integration constant is estimated as the weighted mean of Phi (its
    baseline is immaterial, the deviation is what counts); the defect is
    max deviation over all samples and components, normalized by 1 + the
    mean magnitude of Phi.
    """
    _check_feasible(problem, u)
    rhs, S, ts, w = _el_pieces(problem, u)
    phi = S - _cumtrapz(rhs, problem.grid.h)
    total_w = w.sum()
    mean = (w[:, None] * phi).sum(axis=0) / total_w
    mean_mag = float(w @ np.linalg.norm(phi, axis=1)) / total_w
    defect = float(np.abs(phi - mean[None, :]).max()) / (1.0 + mean_mag)
    diff = differential_residual(problem, u) if include_differential else None
    return ResidualReport(
        grid=problem.grid,
        first_integral=phi,
        constancy_defect=defect,
        constant_estimate=mean,
        endpoint_values=(phi[0].copy(), phi[-1].copy()),
        differential_residual=diff,
    )


def _central_diff(samples: np.ndarray, spacing: float) -> np.ndarray:
    """Central differences inside, one-sided at the ends."""
    out = np.empty_like(samples)
    out[1:-1] = (samples[2:] - samples[:-2]) / (2.0 * spacing)
    out[0] = (samples[1] - samples[0]) / spacing
    out[-1] = (samples[-1] - samples[-2]) / spacing
    return out


def differential_residual(problem: Problem, u: SampledPath) -> np.ndarray:
    """d/dt(dL3 + K*[dL4]) - dL1 - K*[dL2], by finite differences.

    Reporting only: differentiating sampled data amplifies noise, so the
    first-integral form is the verdict that counts.
    """
    _check_feasible(problem, u)
    rhs, S, ts, w = _el_pieces(problem, u)
    return _central_diff(S, problem.grid.h) - rhs


def fractional_el_form(problem: Problem, u: SampledPath) -> np.ndarray:
    """Residual of the rearranged fractional form for the dedicated variants.

    For a left power-kernel operator (lambda = (1, 0)) the equation reads
    d/dt(dL3) - D_right[dL4] = dL1 + K*[dL2] with D_right the right
    fractional derivative -d/dt K*; the right-log-kernel operator with
    lambda = (0, -1) gives the mirrored left form.  Both reduce to the
    differentiated equation by linearity, which is asserted here as a
    consistency check before the samples are returned.
    """
    _check_feasible(problem, u)
    spec = problem.operator.spec
    ok = (
        spec.variant == "riemann_liouville" and (spec.lambda1, spec.lambda2) == (1.0, 0.0)
    ) or (
        spec.variant == "hadamard" and (spec.lambda1, spec.lambda2) == (0.0, -1.0)
    )
    if not ok:
        raise ValueError(
            "fractional rearrangement exists only for the left Riemann-Liouville "
            "operator (lambda = (1, 0)) and the right Hadamard operator (lambda = (0, -1))"
        )
    X, ts, w = _integrand_inputs(problem, u.values, u.deriv)
    _, parts = problem.lagrangian.partials_batch(*X, ts)
    Kstar = _adjoint_apply(problem)
    adj4 = Kstar(parts[:, 3, :])
    # minus the fractional derivative of dL4 equals +d/dt of K*[dL4] here
    lhs = _central_diff(parts[:, 2, :], problem.grid.h) + _central_diff(adj4, problem.grid.h)
    rhs = parts[:, 0, :] + Kstar(parts[:, 1, :])
    res = lhs - rhs
    ref = differential_residual(problem, u)
    scale = 1.0 + float(np.abs(ref).max(initial=0.0))
    if np.abs(res - ref).max(initial=0.0) > 1e-6 * scale:
        raise AssertionError("fractional rearrangement disagrees with the differentiated form")
    return res
