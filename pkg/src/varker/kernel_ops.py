"""Discrete kernel operators K and their exact discrete adjoints.

K[f](t) = lambda1 * int_a^t k(t,y) f(y) dy + lambda2 * int_t^b k(y,t) f(y) dy
is assembled row by row with product integration: on each cell the smooth
factor is the piecewise-linear interpolant of f (piecewise constant for
cell-based slope inputs) and the kernel moments are integrated in closed
form.  Weakly singular kernels therefore need no cutoff: the diagonal cell
moment is exact.

Variants
  * general kernel (regular k; per-cell Gauss moments),
  * Riemann-Liouville of fixed order, kernel (t-y)^(alpha-1)/Gamma(alpha),
  * Riemann-Liouville of variable order alpha(t,y) in [delta, 1],
  * Hadamard, kernel log^(alpha-1)(t/y)/y on grids with a > 0 (both terms
    reduce to power moments in s = log ratio, where dy/y = ds absorbs the
    1/y factor),
  * substitution f -> f(phi(t)), identity, zero.

The operational adjoint is the quadrature-weighted transpose, so the
discrete duality <g, Kf>_W = <K*g, f>_W holds to machine precision by
construction.  For kernel variants a second adjoint is assembled from the
lambda-swapped continuous formula; it is the cross-check (and the accurate
route for residual verification), never the optimizer's adjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gammafn import gamma, gamma_array
from .grid import Grid, averaging_matrix

_VARIANTS = (
    "general",
    "riemann_liouville",
    "riemann_liouville_variable",
    "hadamard",
    "substitution",
    "identity",
    "zero",
)

_KERNEL_VARIANTS = ("general", "riemann_liouville", "riemann_liouville_variable", "hadamard")


@dataclass(frozen=True)
class KernelSpec:
    """Declarative description of the operator K.

    lambda1 scales the left (past-integrating) term, lambda2 the right one.
    p and q record the exponent regime the spec is declared for; the
    variable-order variant requires p, since its standing hypothesis
    delta > 1/p is meaningless without it.
    """

    variant: str
    lambda1: float = 1.0
    lambda2: float = 0.0
    alpha: float | None = None
    alpha_fn: object = None
    delta: float | None = None
    kernel: object = None
    phi: object = None
    dphi: object = None
    p: float | None = None
    q: float | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown operator variant {self.variant!r}")
        if self.variant in ("riemann_liouville", "hadamard"):
            if self.alpha is None or not 0.0 < self.alpha <= 1.0:
                raise ValueError(f"order must lie in (0, 1], got {self.alpha}")
        if self.variant == "riemann_liouville_variable":
            if not callable(self.alpha_fn):
                raise ValueError("variable order needs a callable alpha(t, y)")
            if self.delta is None or not 0.0 < self.delta <= 1.0:
                raise ValueError(f"order floor delta must lie in (0, 1], got {self.delta}")
            if self.p is None:
                raise ValueError("variable order needs the declared exponent p (hypothesis delta > 1/p)")
            if not self.delta > 1.0 / self.p:
                raise ValueError(f"need delta > 1/p, got delta = {self.delta}, 1/p = {1.0 / self.p}")
        if self.variant == "general" and not callable(self.kernel):
            raise ValueError("general variant needs a callable kernel k(t, y)")
        if self.variant == "substitution" and not callable(self.phi):
            raise ValueError("substitution variant needs a callable phi")

    # -- constructors ------------------------------------------------------

    @classmethod
    def general(cls, kernel, lambda1=1.0, lambda2=0.0, p=None, q=None):
        return cls("general", lambda1, lambda2, kernel=kernel, p=p, q=q)

    @classmethod
    def riemann_liouville(cls, alpha, lambda1=1.0, lambda2=0.0, p=None, q=None):
        return cls("riemann_liouville", lambda1, lambda2, alpha=float(alpha), p=p, q=q)

    @classmethod
    def riemann_liouville_variable(cls, alpha_fn, delta, p, lambda1=1.0, lambda2=0.0, q=None):
        return cls(
            "riemann_liouville_variable", lambda1, lambda2,
            alpha_fn=alpha_fn, delta=float(delta), p=float(p), q=q,
        )

    @classmethod
    def hadamard(cls, alpha, lambda1=1.0, lambda2=0.0, p=None, q=None):
        return cls("hadamard", lambda1, lambda2, alpha=float(alpha), p=p, q=q)

    @classmethod
    def substitution(cls, phi, dphi=None, p=None, q=None):
        return cls("substitution", phi=phi, dphi=dphi, p=p, q=q)

    @classmethod
    def identity(cls, p=None, q=None):
        return cls("identity", p=p, q=q)

    @classmethod
    def zero(cls, p=None, q=None):
        return cls("zero", p=p, q=q)

    # -- regime ------------------------------------------------------------

    def check_regime(self, p: float, q: float) -> None:
        """Refuse (p, q) pairs the variant is not declared for."""
        if not (1.0 < p < math.inf and 1.0 < q < math.inf):
            raise ValueError("exponents p, q must lie in (1, inf)")
        pprime = p / (p - 1.0)
        if self.variant in ("riemann_liouville", "hadamard", "substitution"):
            if abs(q - p) > 1e-12:
                raise ValueError(f"{self.variant} operates in the q = p regime, got p={p}, q={q}")
        elif self.variant == "riemann_liouville_variable":
            if abs(q - pprime) > 1e-12:
                raise ValueError(f"variable order operates in the q = p' regime, got q={q}, p'={pprime}")
            if not self.delta > 1.0 / p:
                raise ValueError(f"need delta > 1/p, got delta={self.delta}, 1/p={1.0 / p}")
        elif self.variant == "general":
            if q < pprime - 1e-12:
                raise ValueError(f"general kernel bound needs q >= p', got q={q}, p'={pprime}")
        elif self.variant == "identity":
            if q > p + 1e-12:
                raise ValueError(f"identity is bounded into L^q only for q <= p, got p={p}, q={q}")
        # zero: any regime


@dataclass(frozen=True)
class DiscreteOperator:
    """Assembled matrices of K on one grid.

    matrix acts on node samples (piecewise-linear inputs), cell_matrix on
    cell samples (piecewise-constant slopes).  adjoint_matrix is the
    W-weighted transpose W^-1 M^T W; adjoint_continuous, when present, is
    the lambda-swapped continuous-formula assembly.
    """

    grid: Grid
    spec: KernelSpec
    matrix: np.ndarray
    cell_matrix: np.ndarray
    adjoint_matrix: np.ndarray
    adjoint_continuous: np.ndarray | None = None

    def apply(self, f):
        return apply(self, f)

    def apply_adjoint(self, g):
        return apply_adjoint(self, g)


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _eval2(fn, T, Y) -> np.ndarray:
    """Evaluate a two-argument callable on broadcast arrays, vectorizing if needed."""
    try:
        out = np.asarray(fn(T, Y), dtype=float)
        if out.shape == np.broadcast_shapes(T.shape, Y.shape):
            return out
    except Exception:
        pass
    return np.vectorize(fn, otypes=[float])(T, Y)


def _power_weights(s_near, s_far, width, alpha):
    """Closed-form moments of s^(alpha-1) against linear basis on [s_near, s_far].

    Returns (i0, w_near, w_far): the plain moment and the weights of the
    sample sitting at s_near resp. s_far.  Arguments may be arrays; invalid
    entries should be masked by the caller.
    """
    i0 = (s_far**alpha - s_near**alpha) / alpha
    raw = (s_far ** (alpha + 1.0) - s_near ** (alpha + 1.0)) / (alpha + 1.0)
    # int s^(a-1) (s - s_near) ds = raw - s_near * i0
    w_far = (raw - s_near * i0) / width
    w_near = i0 - w_far
    return i0, w_near, w_far


def _frozen_order(alpha_fn, T, Y, mask, delta):
    """Cell-midpoint order values, validated on the triangle and 1 off it."""
    vals = np.where(mask, _eval2(alpha_fn, T, Y), 1.0)
    inside = vals[mask]
    if inside.size and (inside.min() < (delta or 0.0) - 1e-9 or inside.max() > 1.0 + 1e-12):
        raise ValueError("variable order must take values in [delta, 1] on the triangle")
    return vals


def _assemble_rl(grid: Grid, lambda1, lambda2, alpha=None, alpha_fn=None, delta=None):
    """Power-kernel product integration; alpha fixed or frozen per cell midpoint."""
    n = grid.n
    t = grid.nodes
    y = grid.nodes
    h = grid.h
    rows = np.arange(n)[:, None]
    cols = np.arange(n - 1)[None, :]
    maskL = cols < rows
    maskR = cols >= rows
    M = np.zeros((n, n))
    C = np.zeros((n, n - 1))

    def add(mask, s_near, s_far, alpha_mat, inv_gamma, lam, near_cols, far_cols):
        if lam == 0.0:
            return
        s_near = np.where(mask, s_near, 0.0)
        s_far = np.where(mask, s_far, 1.0)
        with np.errstate(all="ignore"):
            i0, w_near, w_far = _power_weights(s_near, s_far, h, alpha_mat)
        scale = inv_gamma * lam
        M[:, near_cols] += np.where(mask, w_near * scale, 0.0)
        M[:, far_cols] += np.where(mask, w_far * scale, 0.0)
        C[:] += np.where(mask, i0 * scale, 0.0)

    if alpha_fn is None:
        a_left = a_right = np.float64(alpha)
        ig_left = ig_right = 1.0 / gamma(float(alpha))
    else:
        mids = grid.midpoints
        a_left = _frozen_order(alpha_fn, t[:, None], mids[None, :], maskL, delta)
        a_right = _frozen_order(alpha_fn, mids[None, :], t[:, None], maskR, delta)
        ig_left = 1.0 / gamma_array(a_left)
        ig_right = 1.0 / gamma_array(a_right)

    # left term: cells strictly left of t_i; s = t_i - y decreases across the
    # cell, so the near end of the s-interval is the cell's right node
    add(maskL, t[:, None] - y[None, 1:], t[:, None] - y[None, :-1], a_left, ig_left, lambda1,
        slice(1, n), slice(0, n - 1))
    # right term: cells right of t_i; s = y - t_i grows with y
    add(maskR, y[None, :-1] - t[:, None], y[None, 1:] - t[:, None], a_right, ig_right, lambda2,
        slice(0, n - 1), slice(1, n))
    return M, C


def _assemble_hadamard(grid: Grid, lambda1, lambda2, alpha):
    """Log-kernel product integration in s = log ratio; needs a > 0."""
    if grid.a <= 0.0:
        raise ValueError(f"Hadamard kernels need a > 0, got a = {grid.a}")
    n = grid.n
    t = grid.nodes
    y = grid.nodes
    rows = np.arange(n)[:, None]
    cols = np.arange(n - 1)[None, :]
    inv_g = 1.0 / gamma(float(alpha))
    M = np.zeros((n, n))
    C = np.zeros((n, n - 1))

    def add(mask, s_near, s_far, lam, near_cols, far_cols):
        if lam == 0.0:
            return
        s_near = np.where(mask, s_near, 0.0)
        s_far = np.where(mask, s_far, 1.0)
        width = s_far - s_near
        with np.errstate(all="ignore"):
            i0, w_near, w_far = _power_weights(s_near, s_far, width, np.float64(alpha))
        scale = inv_g * lam
        M[:, near_cols] += np.where(mask, w_near * scale, 0.0)
        M[:, far_cols] += np.where(mask, w_far * scale, 0.0)
        C[:] += np.where(mask, i0 * scale, 0.0)

    logt = np.log(t)
    # left: s = log(t_i / y) decreases across the cell, near end = right node
    maskL = cols < rows
    add(maskL, logt[:, None] - logt[None, 1:], logt[:, None] - logt[None, :-1], lambda1,
        slice(1, n), slice(0, n - 1))
    # right: s = log(y / t_i) grows with y
    maskR = cols >= rows
    add(maskR, logt[None, :-1] - logt[:, None], logt[None, 1:] - logt[:, None], lambda2,
        slice(0, n - 1), slice(1, n))
    return M, C


@lru_cache(maxsize=8)
def _gauss01(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def _assemble_general(grid: Grid, kernel, lambda1, lambda2, gauss: int = 4):
    """Regular-kernel rows by per-cell Gauss moments against the linear basis."""
    n = grid.n
    t = grid.nodes
    h = grid.h
    yl = grid.nodes[:-1]
    gx, gw = _gauss01(gauss)
    # gauss points per cell: (n-1, g)
    Yg = yl[:, None] + h * gx[None, :]
    rows = np.arange(n)[:, None, None]
    cols = np.arange(n - 1)[None, :, None]
    M = np.zeros((n, n))
    C = np.zeros((n, n - 1))
    basis_right = gx[None, None, :]          # (y - y_c)/h at the gauss points
    basis_left = 1.0 - basis_right

    def add(mask, kvals, lam):
        if lam == 0.0:
            return
        kvals = np.where(mask, kvals, 0.0) * (lam * h)
        wl = (kvals * basis_left * gw).sum(axis=2)
        wr = (kvals * basis_right * gw).sum(axis=2)
        M[:, :-1] += wl
        M[:, 1:] += wr
        C[:] += wl + wr

    T3 = t[:, None, None]
    if lambda1 != 0.0:
        add(cols < rows, _eval2(kernel, T3, Yg[None, :, :] * np.ones((n, 1, 1))), lambda1)
    if lambda2 != 0.0:
        add(cols >= rows, _eval2(kernel, Yg[None, :, :] * np.ones((n, 1, 1)), T3), lambda2)
    return M, C


def _assemble_substitution(grid: Grid, phi):
    n = grid.n
    z = np.array([float(phi(tt)) for tt in grid.nodes])
    span = grid.b - grid.a
    if abs(z[0] - grid.a) > 1e-9 * span or abs(z[-1] - grid.b) > 1e-9 * span:
        raise ValueError("substitution map must fix the endpoints")
    if np.any(np.diff(z) <= 0.0):
        raise ValueError("substitution map must be strictly increasing on the grid")
    z = np.clip(z, grid.a, grid.b)
    idx = np.clip(np.searchsorted(grid.nodes, z, side="right") - 1, 0, n - 2)
    theta = (z - grid.nodes[idx]) / grid.h
    M = np.zeros((n, n))
    M[np.arange(n), idx] = 1.0 - theta
    M[np.arange(n), idx + 1] += theta
    C = np.zeros((n, n - 1))
    on_node = theta <= 1e-12
    for i in range(n):
        if on_node[i] and idx[i] >= 1:
            C[i, idx[i] - 1] = 0.5
            C[i, idx[i]] = 0.5
        else:
            C[i, idx[i]] = 1.0
    return M, C


def _node_and_cell_matrices(spec: KernelSpec, grid: Grid, swap: bool = False):
    l1, l2 = (spec.lambda2, spec.lambda1) if swap else (spec.lambda1, spec.lambda2)
    if spec.variant == "riemann_liouville":
        return _assemble_rl(grid, l1, l2, alpha=spec.alpha)
    if spec.variant == "riemann_liouville_variable":
        return _assemble_rl(grid, l1, l2, alpha_fn=spec.alpha_fn, delta=spec.delta)
    if spec.variant == "hadamard":
        return _assemble_hadamard(grid, l1, l2, spec.alpha)
    if spec.variant == "general":
        return _assemble_general(grid, spec.kernel, l1, l2)
    if spec.variant == "substitution":
        return _assemble_substitution(grid, spec.phi)
    if spec.variant == "identity":
        return np.eye(grid.n), averaging_matrix(grid.n)
    if spec.variant == "zero":
        return np.zeros((grid.n, grid.n)), np.zeros((grid.n, grid.n - 1))
    raise AssertionError(spec.variant)


def _substitution_continuous_adjoint(spec: KernelSpec, grid: Grid) -> np.ndarray | None:
    """K*[g] = g(phi^-1) / phi'(phi^-1), with phi inverted on the grid.

    Needs the derivative and a map with nonvanishing slope at the inverse
    points; otherwise there is no usable continuous formula and the caller
    falls back to the weighted transpose.
    """
    if not callable(spec.dphi):
        return None
    z = np.array([float(spec.phi(t)) for t in grid.nodes])
    zinv = np.interp(grid.nodes, z, grid.nodes)
    slopes = np.array([float(spec.dphi(t)) for t in zinv])
    if np.any(slopes <= 1e-12):
        return None
    n = grid.n
    idx = np.clip(np.searchsorted(grid.nodes, zinv, side="right") - 1, 0, n - 2)
    theta = (zinv - grid.nodes[idx]) / grid.h
    A = np.zeros((n, n))
    A[np.arange(n), idx] = (1.0 - theta) / slopes
    A[np.arange(n), idx + 1] += theta / slopes
    return A


def assemble(spec: KernelSpec, grid: Grid) -> DiscreteOperator:
    """Assemble K on a grid, with its weighted-transpose adjoint."""
    if spec.variant == "riemann_liouville_variable" and spec.p is not None:
        if not spec.delta > 1.0 / spec.p:
            raise ValueError(f"need delta > 1/p, got delta={spec.delta}, 1/p={1.0 / spec.p}")
    M, C = _node_and_cell_matrices(spec, grid)
    w = grid.weights
    adjoint = (M.T * w[None, :]) / w[:, None]
    if spec.variant in _KERNEL_VARIANTS:
        cont, _ = _node_and_cell_matrices(spec, grid, swap=True)
    elif spec.variant in ("identity", "zero"):
        cont = M.copy()
    elif spec.variant == "substitution":
        cont = _substitution_continuous_adjoint(spec, grid)
    else:
        cont = None
    return DiscreteOperator(
        grid=grid,
        spec=spec,
        matrix=_freeze(M),
        cell_matrix=_freeze(C),
        adjoint_matrix=_freeze(adjoint),
        adjoint_continuous=None if cont is None else _freeze(cont),
    )


def _apply_matrix(mat: np.ndarray, f, rows: int):
    arr = np.asarray(f, dtype=float)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != rows:
        raise ValueError(f"input has {arr.shape[0]} rows, expected {rows}")
    out = mat @ arr
    return out[:, 0] if squeeze else out


def apply(op: DiscreteOperator, f):
    """K applied to node samples (n rows) or cell samples (n-1 rows)."""
    arr = np.asarray(f, dtype=float)
    rows = arr.shape[0]
    if rows == op.grid.n:
        return _apply_matrix(op.matrix, arr, op.grid.n)
    if rows == op.grid.n - 1:
        return _apply_matrix(op.cell_matrix, arr, op.grid.n - 1)
    raise ValueError(f"{rows} rows fit neither {op.grid.n} nodes nor {op.grid.n - 1} cells")


def apply_adjoint(op: DiscreteOperator, g):
    """The weighted-transpose adjoint applied to node samples."""
    return _apply_matrix(op.adjoint_matrix, np.asarray(g, dtype=float), op.grid.n)


# ---------------------------------------------------------------------------
# Boundedness constant


def _triangle_lq_general(kernel, a, b, qq, npts=48):
    gx, gw = _gauss01(npts)
    t = a + (b - a) * gx
    acc = 0.0
    for ti, wi in zip(t, gw):
        x = a + (ti - a) * gx
        vals = np.abs(np.asarray([kernel(ti, xj) for xj in x], dtype=float)) ** qq
        acc += wi * (b - a) * (ti - a) * float(vals @ gw)
    return acc


def _triangle_lq_rl_variable(alpha_fn, a, b, qq, delta, npts=48, grade=4.0):
    gx, gw = _gauss01(npts)
    t = a + (b - a) * gx
    acc = 0.0
    for ti, wi in zip(t, gw):
        if ti <= a:
            continue
        wgt = gx**grade
        x = ti - (ti - a) * wgt
        al = np.asarray([float(alpha_fn(ti, xj)) for xj in x], dtype=float)
        vals = ((ti - a) * wgt) ** (qq * (al - 1.0)) / gamma_array(al) ** qq
        jac = grade * (ti - a) * gx ** (grade - 1.0)
        acc += wi * (b - a) * float((vals * jac) @ gw)
    return acc


def _triangle_lq_hadamard(alpha, a, b, qq, npts=48, grade=4.0):
    gx, gw = _gauss01(npts)
    t = a + (b - a) * gx
    inv_gq = 1.0 / gamma(float(alpha)) ** qq
    acc = 0.0
    for ti, wi in zip(t, gw):
        S = math.log(ti / a)
        s = S * gx**grade
        vals = s ** (qq * (alpha - 1.0)) * (ti * np.exp(-s)) ** (1.0 - qq)
        jac = grade * S * gx ** (grade - 1.0)
        acc += wi * (b - a) * float((vals * jac) @ gw) * inv_gq
    return acc


def operator_norm_bound(spec: KernelSpec, grid: Grid, p: float, q: float) -> float:
    """Constant (|l1|+|l2|) (b-a)^(1/p'-1/q) |k|_{L^q(triangle)} bounding |K|_{p->q}.

    For the non-kernel variants the exact operator norm is returned instead
    (0 for zero, 1 for identity, (min phi')^(-1/p) for substitution).
    """
    if not (1.0 < p < math.inf and 1.0 < q < math.inf):
        raise ValueError("exponents p, q must lie in (1, inf)")
    if spec.variant == "zero":
        return 0.0
    if spec.variant == "identity":
        return 1.0
    if spec.variant == "substitution":
        if not callable(spec.dphi):
            raise ValueError("substitution norm bound needs the derivative of phi")
        dmin = min(float(spec.dphi(t)) for t in grid.nodes)
        if dmin <= 0.0:
            raise ValueError("substitution norm bound needs phi' > 0 on the grid")
        return dmin ** (-1.0 / p)
    pprime = p / (p - 1.0)
    a, b = grid.a, grid.b
    if spec.variant == "general":
        if q < pprime - 1e-12:
            raise ValueError(f"bound requires q >= p', got q={q}, p'={pprime}")
        knorm = _triangle_lq_general(spec.kernel, a, b, q) ** (1.0 / q)
    elif spec.variant == "riemann_liouville":
        e = q * (spec.alpha - 1.0)
        if e <= -1.0:
            raise ValueError(f"kernel is not L^q on the triangle: q(alpha-1) = {e:g} <= -1")
        knorm = ((b - a) ** (e + 2.0) / ((e + 1.0) * (e + 2.0))) ** (1.0 / q) / gamma(spec.alpha)
    elif spec.variant == "riemann_liouville_variable":
        if not spec.delta > 1.0 / p:
            raise ValueError(f"need delta > 1/p, got delta={spec.delta}, 1/p={1.0 / p}")
        if q * (spec.delta - 1.0) <= -1.0:
            raise ValueError("order floor makes the kernel non-integrable in L^q")
        knorm = _triangle_lq_rl_variable(spec.alpha_fn, a, b, q, spec.delta) ** (1.0 / q)
    elif spec.variant == "hadamard":
        if grid.a <= 0.0:
            raise ValueError(f"Hadamard kernels need a > 0, got a = {grid.a}")
        if q * (spec.alpha - 1.0) <= -1.0:
            raise ValueError("kernel is not L^q on the triangle: q(alpha-1) <= -1")
        knorm = _triangle_lq_hadamard(spec.alpha, a, b, q) ** (1.0 / q)
    else:
        raise AssertionError(spec.variant)
    return (abs(spec.lambda1) + abs(spec.lambda2)) * (b - a) ** (1.0 / pprime - 1.0 / q) * knorm
