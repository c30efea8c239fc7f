"""Uniform grids, sampled paths and discrete Lebesgue/Sobolev norms.

A path u: [a,b] -> R^d is stored by its node values; its derivative is the
piecewise-constant cell slope.  Integrals use composite trapezoid weights at
the nodes and plain h-weights on cells, so node samples and cell samples are
both first-class integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _frozen(arr) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [a, b] with composite trapezoid weights."""

    a: float
    b: float
    n: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def cell_weights(self) -> np.ndarray:
        return np.full(self.n - 1, self.h)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])


def make_grid(a: float, b: float, n: int) -> Grid:
    """Uniform n-node grid on [a, b]; weights integrate affine functions exactly."""
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if n < 2:
        raise ValueError(f"need n >= 2 nodes, got n={n}")
    nodes = np.linspace(a, b, int(n))
    h = (b - a) / (n - 1)
    weights = np.full(int(n), h)
    weights[0] = weights[-1] = 0.5 * h
    return Grid(a=float(a), b=float(b), n=int(n), nodes=_frozen(nodes), weights=_frozen(weights))


def _as_columns(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected a 1-D or 2-D sample array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class SampledPath:
    """Node values of a piecewise-linear path plus its cell-wise slope."""

    grid: Grid
    values: np.ndarray  # (n, d)
    deriv: np.ndarray   # (n-1, d)

    def __post_init__(self):
        vals = _as_columns(self.values)
        der = _as_columns(self.deriv)
        n = self.grid.n
        if vals.shape[0] != n:
            raise ValueError(f"values have {vals.shape[0]} rows, grid has {n} nodes")
        if der.shape != (n - 1, vals.shape[1]):
            raise ValueError(f"deriv shape {der.shape} does not match {(n - 1, vals.shape[1])}")
        expected = np.diff(vals, axis=0) / self.grid.h
        scale = max(1.0, float(np.abs(expected).max(initial=0.0)))
        if np.abs(der - expected).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("deriv is not the difference quotient of values")
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "deriv", _frozen(der))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_values(cls, grid: Grid, values) -> "SampledPath":
        vals = _as_columns(values)
        deriv = np.diff(vals, axis=0) / grid.h
        return cls(grid=grid, values=vals, deriv=deriv)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "SampledPath":
        rows = [np.atleast_1d(np.asarray(fn(t), dtype=float)) for t in grid.nodes]
        return cls.from_values(grid, np.vstack(rows))

    def node_derivative(self) -> np.ndarray:
        """Slope at nodes: adjacent-cell average inside, one-sided at the ends."""
        return averaging_matrix(self.grid.n) @ self.deriv


def averaging_matrix(n: int) -> np.ndarray:
    """(n, n-1) map from cell samples to node samples by adjacent averaging."""
    A = np.zeros((n, n - 1))
    A[0, 0] = 1.0
    A[-1, -1] = 1.0
    for i in range(1, n - 1):
        A[i, i - 1] = 0.5
        A[i, i] = 0.5
    return A


def midpoint_matrix(n: int) -> np.ndarray:
    """(n-1, n) map from node samples to cell-midpoint samples."""
    B = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    B[idx, idx] = 0.5
    B[idx, idx + 1] = 0.5
    return B


def difference_matrix(grid: Grid) -> np.ndarray:
    """(n-1, n) forward-difference map from node values to cell slopes."""
    n = grid.n
    D = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    D[idx, idx] = -1.0 / grid.h
    D[idx, idx + 1] = 1.0 / grid.h
    return D


def lp_norm(f, r: float, grid: Grid | None = None) -> float:
    """Discrete L^r norm of node samples or cell samples.

    Node-sized inputs use the trapezoid weights, cell-sized inputs the
    h-weights; r = inf takes the largest Euclidean row norm.
    """
    if isinstance(f, SampledPath):
        grid = f.grid
        arr = f.values
    else:
        if grid is None:
            raise ValueError("lp_norm of a raw array needs the grid")
        arr = f
    arr = _as_columns(arr)
    if r <= 1:
        raise ValueError(f"exponent must lie in (1, inf], got {r}")
    if arr.shape[0] == grid.n:
        w = grid.weights
    elif arr.shape[0] == grid.n - 1:
        w = grid.cell_weights
    else:
        raise ValueError(f"{arr.shape[0]} rows fit neither {grid.n} nodes nor {grid.n - 1} cells")
    mags = np.linalg.norm(arr, axis=1)
    if math.isinf(r):
        return float(mags.max(initial=0.0))
    return float((w @ mags**r) ** (1.0 / r))


def w1p_norm(u: SampledPath, p: float) -> float:
    """Discrete Sobolev norm (|u|_p^p + |u'|_p^p)^(1/p), finite p only."""
    if math.isinf(p) or p <= 1:
        raise ValueError(f"path exponent must lie in (1, inf), got {p}")
    a = lp_norm(u.values, p, u.grid)
    b = lp_norm(u.deriv, p, u.grid)
    return float((a**p + b**p) ** (1.0 / p))


@dataclass(frozen=True)
class ConstraintSet:
    """Optional endpoint conditions u(a) = left, u(b) = right."""

    left: np.ndarray | None = None
    right: np.ndarray | None = None

    def __post_init__(self):
        for name in ("left", "right"):
            v = getattr(self, name)
            if v is not None:
                v = np.atleast_1d(np.asarray(v, dtype=float))
                if v.ndim != 1:
                    raise ValueError(f"{name} endpoint value must be a vector")
                object.__setattr__(self, name, _frozen(v))

    def validate_dim(self, dim: int) -> None:
        for name in ("left", "right"):
            v = getattr(self, name)
            if v is not None and v.shape != (dim,):
                raise ValueError(f"{name} endpoint has dimension {v.shape[0]}, path has {dim}")

    def constrained_rows(self, n: int) -> list[int]:
        rows = []
        if self.left is not None:
            rows.append(0)
        if self.right is not None:
            rows.append(n - 1)
        return rows

    def project(self, values: np.ndarray) -> np.ndarray:
        out = np.array(values, dtype=float)
        if self.left is not None:
            out[0] = self.left
        if self.right is not None:
            out[-1] = self.right
        return out

    def satisfied_by(self, u: SampledPath, rtol: float = 1e-9) -> bool:
        self.validate_dim(u.dim)
        for v, row in ((self.left, 0), (self.right, u.grid.n - 1)):
            if v is None:
                continue
            if np.abs(u.values[row] - v).max(initial=0.0) > rtol * (1.0 + np.abs(v).max(initial=0.0)):
                return False
        return True
