"""Variational functionals with linear kernel operators.

Builds discrete kernel operators (Riemann-Liouville, Hadamard, variable
order, substitution, general kernels) with exact discrete adjoints,
evaluates and minimizes integrands L(u, K[u], u', K[u'], t) over endpoint-
constrained path spaces, checks growth/coercivity/convexity certificates,
and verifies candidate minimizers against the generalized Euler-Lagrange
equation in first-integral form.
"""

import os as _os

# VARKER_THREADS caps the linear-algebra thread pools; must be exported
# before numpy initializes its backend.
_cap = _os.environ.get("VARKER_THREADS")
if _cap:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _cap)

from .grid import (
    ConstraintSet,
    Grid,
    SampledPath,
    lp_norm,
    make_grid,
    w1p_norm,
)
from .kernel_ops import (
    DiscreteOperator,
    KernelSpec,
    apply,
    apply_adjoint,
    assemble,
    operator_norm_bound,
)
from .lagrangian import (
    GrowthCertificate,
    GrowthTerm,
    LagrangianExpr,
    builtin_names,
    check_coercivity,
    check_convexity,
    check_regularity,
    make_builtin,
    parse_lagrangian,
)
from .functional import Problem, directional_derivative, evaluate, gradient
from .residual import (
    ResidualReport,
    differential_residual,
    first_integral_residual,
    fractional_el_form,
)
from .solver import (
    CoercivityAssessment,
    LineSearchError,
    SolveOptions,
    SolveReport,
    default_initial_path,
    monitor_coercivity,
    solve,
)
from .specfile import ProblemSpec, SpecError, build_problem, load_spec

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "SampledPath",
    "ConstraintSet",
    "make_grid",
    "lp_norm",
    "w1p_norm",
    "KernelSpec",
    "DiscreteOperator",
    "assemble",
    "apply",
    "apply_adjoint",
    "operator_norm_bound",
    "LagrangianExpr",
    "parse_lagrangian",
    "GrowthTerm",
    "GrowthCertificate",
    "check_regularity",
    "check_coercivity",
    "check_convexity",
    "make_builtin",
    "builtin_names",
    "Problem",
    "evaluate",
    "directional_derivative",
    "gradient",
    "SolveOptions",
    "SolveReport",
    "solve",
    "default_initial_path",
    "monitor_coercivity",
    "CoercivityAssessment",
    "LineSearchError",
    "ResidualReport",
    "first_integral_residual",
    "differential_residual",
    "fractional_el_form",
    "ProblemSpec",
    "SpecError",
    "load_spec",
    "build_problem",
    "__version__",
]
