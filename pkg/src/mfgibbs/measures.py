"""Finitely supported probability measures and exact Wasserstein-2 distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "DiscreteMeasure",
    "UnsupportedTransportError",
    "empirical",
    "mix",
    "w2_squared",
]

_WEIGHT_TOL = 1e-12


class UnsupportedTransportError(ValueError):
    """Raised for transport instances outside the exact solvers' scope."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with finite support: atoms `points` carrying `weights`.

    Weights must sum to one; duplicate atoms are kept separate so that
    empirical measures of colliding particles retain their cardinality.
    """

    points: np.ndarray  # (n, d)
    weights: np.ndarray  # (n,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.shape[0] != w.shape[0]:
            raise ValueError("points and weights must have equal length")
        if pts.shape[0] < 1:
            raise ValueError("measure needs at least one atom")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite atom coordinates")
        if np.any(w < 0):
            raise ValueError("negative weights")
        if abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum()}, not 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        pts.setflags(write=False)
        w.setflags(write=False)

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def expect(self, values: np.ndarray) -> float | np.ndarray:
        """Integrate per-atom `values` (shape (n,) or (n, k)) against the weights."""
        return np.tensordot(self.weights, np.asarray(values), axes=1)


def empirical(points) -> DiscreteMeasure:
    """Uniform measure on the rows of an (N, d) configuration."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("empty configuration")
    n = pts.shape[0]
    return DiscreteMeasure(pts, np.full(n, 1.0 / n))


def mix(mu: DiscreteMeasure, nu: DiscreteMeasure, t: float) -> DiscreteMeasure:
    """Mixture t*mu + (1-t)*nu; zero-weight atoms are dropped."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"mixture weight t={t} outside [0, 1]")
    if mu.dim != nu.dim:
        raise ValueError("dimension mismatch")
    pts = np.vstack([mu.points, nu.points])
    w = np.concatenate([t * mu.weights, (1.0 - t) * nu.weights])
    keep = w > 0
    return DiscreteMeasure(pts[keep], w[keep] / w[keep].sum())


def _w2_squared_1d(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    # Exact quantile (monotone) coupling: merge the two CDF breakpoint sets.
    xi = np.argsort(mu.points[:, 0], kind="stable")
    yi = np.argsort(nu.points[:, 0], kind="stable")
    x, wx = mu.points[xi, 0], mu.weights[xi]
    y, wy = nu.points[yi, 0], nu.weights[yi]
    cost = 0.0
    i = j = 0
    rx, ry = wx[0], wy[0]
    while True:
        m = min(rx, ry)
        cost += m * (x[i] - y[j]) ** 2
        rx -= m
        ry -= m
        if rx <= 1e-15:
            i += 1
            if i >= len(x):
                break
            rx = wx[i]
        if ry <= 1e-15:
            j += 1
            if j >= len(y):
                break
            ry = wy[j]
    return cost


def _w2_squared_assignment(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    diff = mu.points[:, None, :] - nu.points[None, :, :]
    cost = np.sum(diff * diff, axis=-1)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / mu.n_atoms)


def w2_squared(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Exact squared Wasserstein-2 distance between supported instances.

    d=1 handles arbitrary weights via the quantile coupling; d>=2 requires
    equal-size uniform-weight supports and solves the assignment problem.
    """
    if mu.dim != nu.dim:
        raise UnsupportedTransportError("dimension mismatch")
    if mu.dim == 1:
        return _w2_squared_1d(mu, nu)
    uniform = (
        mu.n_atoms == nu.n_atoms
        and np.allclose(mu.weights, 1.0 / mu.n_atoms, atol=1e-12)
        and np.allclose(nu.weights, 1.0 / nu.n_atoms, atol=1e-12)
    )
    if not uniform:
        raise UnsupportedTransportError(
            "unsupported-transport-instance: d>=2 needs equal-size uniform supports"
        )
    return _w2_squared_assignment(mu, nu)
