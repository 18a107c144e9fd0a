"""Chebyshev-Lobatto grids on [0, 1] with barycentric interpolation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from fareychain.errors import DomainError

MIN_NODES = 8
_SNAP = 4 * np.finfo(float).eps


@lru_cache(maxsize=32)
def _lobatto(n: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(n)
    # x_0 = 0 and x_{n-1} = 1 exactly
    x = np.sin(0.5 * np.pi * j / (n - 1)) ** 2
    x[0], x[-1] = 0.0, 1.0
    w = np.where(j % 2 == 0, 1.0, -1.0)
    w[0] *= 0.5
    w[-1] *= 0.5
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def lobatto_nodes(n: int) -> np.ndarray:
    """n Chebyshev-Lobatto points mapped to [0, 1], increasing."""
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {n}")
    return _lobatto(n)[0]


def barycentric_weights(n: int) -> np.ndarray:
    lobatto_nodes(n)
    return _lobatto(n)[1]


def interpolation_matrix(nodes: np.ndarray, weights: np.ndarray, points) -> np.ndarray:
    """Matrix E with ``E @ values`` = barycentric interpolant at ``points``.

    Rows for points within a few ulps of a node reproduce that node exactly;
    closer points would overflow the barycentric weights.
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    diff = points[:, None] - nodes[None, :]
    nearest = np.argmin(np.abs(diff), axis=1)
    idx = np.arange(points.size)
    rows = np.abs(diff[idx, nearest]) <= _SNAP * np.maximum(1.0, np.abs(nodes[nearest]))
    diff[idx[rows], nearest[rows]] = 1.0
    c = weights[None, :] / diff
    mat = c / c.sum(axis=1, keepdims=True)
    mat[rows] = 0.0
    mat[idx[rows], nearest[rows]] = 1.0
    return mat


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on Chebyshev-Lobatto nodes of [0, 1].

    If ``even_beta`` is set the function is extended to x > 1 through
    ``f(x) = x**(-2*even_beta) * f(1/x)``; otherwise evaluation outside
    [0, 1] is refused.
    """

    values: np.ndarray
    even_beta: float | None = None
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("values must be one-dimensional")
        nodes = lobatto_nodes(vals.size)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def from_callable(cls, fn, n: int, even_beta: float | None = None) -> "GridFunction":
        return cls(np.asarray(fn(lobatto_nodes(n)), dtype=float), even_beta=even_beta)

    @classmethod
    def constant(cls, value: float, n: int, even_beta: float | None = None) -> "GridFunction":
        return cls(np.full(n, float(value)), even_beta=even_beta)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def weights(self) -> np.ndarray:
        return barycentric_weights(self.size)

    def _interp(self, pts: np.ndarray) -> np.ndarray:
        return interpolation_matrix(self.nodes, self.weights, pts) @ self.values

    def _scalar(self, t: float) -> float:
        j = int(np.searchsorted(self.nodes, t))
        for i in (j - 1, j):
            if 0 <= i < self.size and abs(t - self.nodes[i]) <= _SNAP:
                return float(self.values[i])
        c = self.weights / (t - self.nodes)
        return float(c @ self.values / c.sum())

    def __call__(self, x):
        if isinstance(x, (float, int)) and 0 <= x <= 1:
            return self._scalar(float(x))
        pts = np.asarray(x, dtype=float)
        scalar = pts.ndim == 0
        pts = np.atleast_1d(pts)
        if np.any(pts < 0) or np.any(~np.isfinite(pts)):
            raise DomainError("grid functions are defined for x >= 0")
        out = np.empty_like(pts)
        inside = pts <= 1.0
        if inside.any():
            out[inside] = self._interp(pts[inside])
        if (~inside).any():
            if self.even_beta is None:
                raise DomainError("evaluation beyond x = 1 needs an evenness extension")
            far = pts[~inside]
            out[~inside] = far ** (-2.0 * self.even_beta) * self._interp(1.0 / far)
        return float(out[0]) if scalar else out

    def with_values(self, values) -> "GridFunction":
        return GridFunction(values, even_beta=self.even_beta)

    def scaled(self, factor: float) -> "GridFunction":
        return self.with_values(self.values * factor)
