"""Brute-force reference answers: dense grid minimum and difference-quotient Lipschitz estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sieve import ObjectiveSpec, evaluate_points

DEFAULT_BUDGET = 10**8


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleResult:
    v_hat: float
    argmins: list[tuple[float, ...]]
    points_per_dim: int
    grid_spacing: float


@dataclass(frozen=True)
class LipschitzEstimate:
    raw: float
    conservative: float


def _axes(spec: ObjectiveSpec, points_per_dim: int) -> list[np.ndarray]:
    return [np.linspace(lo, hi, points_per_dim) if hi > lo else np.array([lo])
            for lo, hi in zip(spec.domain.lower, spec.domain.upper)]


def _check_budget(spec, points_per_dim, budget):
    if points_per_dim < 2:
        raise ValueError("need at least 2 points per dimension")
    total = points_per_dim ** spec.dimension
    if total > budget:
        raise OracleBudgetExceeded(
            f"{points_per_dim}^{spec.dimension} = {total:.3g} grid points exceed the budget {budget:.3g}")


def _slabs(spec, axes, chunk):
    """Yield (first-axis slice, values with the grid's shape) slab by slab."""
    rest = [len(a) for a in axes[1:]]
    per_row = math.prod(rest) if rest else 1
    rows = max(1, chunk // per_row)
    tail = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, len(rest)) \
        if rest else np.empty((1, 0))
    for start in range(0, len(axes[0]), rows):
        head = axes[0][start:start + rows]
        pts = np.concatenate([np.repeat(head, len(tail))[:, None], np.tile(tail, (len(head), 1))], axis=1)
        vals = evaluate_points(spec, pts, chunk_size=chunk)
        yield slice(start, start + len(head)), vals.reshape([len(head)] + rest)


def grid_search(spec: ObjectiveSpec, points_per_dim: int, tie_tol: Optional[float] = None,
                budget: int = DEFAULT_BUDGET, chunk: int = 1 << 20) -> OracleResult:
    """Evaluate ``spec`` on the full tensor grid, endpoints included.

    Returns the grid minimum and every grid point within ``tie_tol`` of it
    (default ``1e-9 * (1 + |min|)``).
    """
    _check_budget(spec, points_per_dim, budget)
    axes = _axes(spec, points_per_dim)
    best = math.inf
    hits: list[np.ndarray] = []
    for sl, vals in _slabs(spec, axes, chunk):
        vmin = float(vals.min())
        if vmin < best:
            best = vmin
        # Keep a generous candidate set; the final filter uses the global minimum.
        tol = tie_tol if tie_tol is not None else 1e-9 * (1 + abs(best))
        idx = np.argwhere(vals <= best + tol)
        if len(idx):
            hit_vals = vals[tuple(idx.T)]
            idx[:, 0] += sl.start
            hits.append(np.column_stack([idx, hit_vals]))
    tol = tie_tol if tie_tol is not None else 1e-9 * (1 + abs(best))
    cand = np.concatenate(hits)
    keep = cand[cand[:, -1] <= best + tol]
    argmins = sorted(tuple(float(axes[d][int(i)]) for d, i in enumerate(row[:-1])) for row in keep)
    spacing = max((a[1] - a[0]) for a in axes if len(a) > 1) if any(len(a) > 1 for a in axes) else 0.0
    return OracleResult(best, argmins, points_per_dim, float(spacing))


def lipschitz_estimates(spec: ObjectiveSpec, points_per_dim: int,
                        budget: int = DEFAULT_BUDGET) -> LipschitzEstimate:
    """Largest axis-neighbour difference quotient on the grid, raw and times sqrt(n).

    The raw value is a lower bound on the Lipschitz constant; the ``sqrt(n)``
    multiple covers gradients that point off-axis.
    """
    _check_budget(spec, points_per_dim, budget)
    axes = _axes(spec, points_per_dim)
    widths = [a[1] - a[0] if len(a) > 1 else 0.0 for a in axes]
    best = 0.0
    prev_last = None
    for sl, vals in _slabs(spec, axes, 1 << 20):
        for d in range(1, len(axes)):
            if len(axes[d]) > 1:
                best = max(best, float(np.abs(np.diff(vals, axis=d)).max()) / widths[d])
        if len(axes[0]) > 1:
            if vals.shape[0] > 1:
                best = max(best, float(np.abs(np.diff(vals, axis=0)).max()) / widths[0])
            if prev_last is not None:
                best = max(best, float(np.abs(vals[0] - prev_last).max()) / widths[0])
            prev_last = vals[-1]
    return LipschitzEstimate(best, best * math.sqrt(spec.dimension))


def estimate_lipschitz(spec: ObjectiveSpec, points_per_dim: int,
                       budget: int = DEFAULT_BUDGET) -> float:
    return lipschitz_estimates(spec, points_per_dim, budget).raw
