"""One granular-sieving pass for a fixed Lipschitz bound.

A level ``k`` holds the retained boxes of a uniform lattice, their center
values and the common diameter ``delta``.  A box is kept ("good") when its
center value is at most ``v_k + delta * M``; every good box is split again
and the dropped ("bad") boxes are never revisited.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .config import GrsConfig
from .geometry import Box, Lattice, lattice_for


class ObjectiveError(ArithmeticError):
    """The objective returned NaN or an infinite value."""


class BoxBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ObjectiveSpec:
    """An objective on a box domain, with optional Lipschitz bound and ground truth.

    ``func`` maps one point (a 1-d array of length n) to a float.  When
    ``vectorized`` is set it must also accept an ``(N, n)`` array and return
    ``N`` values, which is much faster for large levels.
    """

    name: str
    domain: Box
    func: Callable
    vectorized: bool = False
    known_lipschitz: Optional[float] = None
    ground_truth_min: Optional[float] = None
    ground_truth_minimizers: Optional[tuple[tuple[float, ...], ...]] = None

    def __post_init__(self):
        if self.ground_truth_minimizers is not None:
            pts = tuple(tuple(float(c) for c in p) for p in self.ground_truth_minimizers)
            object.__setattr__(self, "ground_truth_minimizers", pts)

    @property
    def dimension(self) -> int:
        return self.domain.dim

    def eval(self, point) -> float:
        x = np.asarray(point, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"{self.name}: expected a point of dimension {self.dimension}")
        if self.vectorized:
            return float(np.asarray(self.func(x[None, :])).reshape(-1)[0])
        return float(self.func(x))

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.vectorized:
            out = np.asarray(self.func(points), dtype=float).reshape(-1)
        else:
            out = np.fromiter((self.func(p) for p in points), dtype=float, count=len(points))
        if out.shape != (len(points),):
            raise ValueError(f"{self.name}: objective returned shape {out.shape} for {len(points)} points")
        return out

    def check_ground_truth(self, rtol: float = 1e-9) -> None:
        """Raise ``ValueError`` unless every listed minimizer reproduces the listed minimum."""
        if self.ground_truth_minimizers is None or self.ground_truth_min is None:
            return
        vmin = self.ground_truth_min
        for p in self.ground_truth_minimizers:
            if not self.domain.contains(p):
                raise ValueError(f"{self.name}: minimizer {p} lies outside the domain")
            fx = self.eval(p)
            if abs(fx - vmin) > rtol * (1 + abs(vmin)):
                raise ValueError(f"{self.name}: f{p} = {fx!r} does not match the minimum {vmin!r}")


def evaluate_points(spec: ObjectiveSpec, points: np.ndarray, workers: int = 1,
                    chunk_size: int = 1 << 18) -> np.ndarray:
    """Evaluate ``spec`` at every row of ``points`` and reject non-finite values.

    Chunk boundaries depend only on ``chunk_size``, never on ``workers``, so
    the output is bit-identical for any degree of parallelism.
    """
    points = np.asarray(points, dtype=float)
    chunks = [points[i:i + chunk_size] for i in range(0, len(points), chunk_size)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(spec.evaluate, chunks))
    else:
        parts = [spec.evaluate(c) for c in chunks]
    values = np.concatenate(parts) if parts else np.empty(0)
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ObjectiveError(
            f"{spec.name}: objective is {values[i]} at {points[i].tolist()}")
    return values


@dataclass(frozen=True)
class EvaluatedBox:
    box: Box
    center_value: float
    point: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Frontier:
    """The retained boxes of one level, stored as lattice indices.

    ``discarded`` counts boxes of this level that were evaluated but not
    stored because they were already known to be bad (see ``run_single_m``).
    """

    lattice: Lattice
    index: np.ndarray
    values: np.ndarray
    level: int
    eval_count: int
    discarded: int = 0

    def __post_init__(self):
        index = np.ascontiguousarray(self.index, dtype=np.int64).reshape(-1, self.lattice.dim)
        values = np.ascontiguousarray(self.values, dtype=float).reshape(-1)
        if len(index) != len(values):
            raise ValueError("index and values disagree in length")
        if len(values) == 0:
            raise ValueError("a frontier must hold at least one box")
        index.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def delta(self) -> float:
        return self.lattice.delta

    @property
    def v_k(self) -> float:
        return float(self.values.min())

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.values))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lattice.bounds(self.index)

    def centers(self) -> np.ndarray:
        return self.lattice.centers(self.index)

    @property
    def boxes(self) -> list[EvaluatedBox]:
        lo, hi = self.bounds()
        pts = self.centers()
        return [EvaluatedBox(Box(tuple(a), tuple(b), self.level), float(v), tuple(p))
                for a, b, v, p in zip(lo, hi, self.values, pts)]

    def subset(self, mask: np.ndarray) -> Frontier:
        return Frontier(self.lattice, self.index[mask], self.values[mask], self.level,
                        self.eval_count)

    def keys(self) -> set[tuple[int, ...]]:
        return {tuple(r) for r in self.index.tolist()}

    def contains_point(self, point, tol: float = 0.0) -> bool:
        lo, hi = self.bounds()
        p = np.asarray(point, dtype=float)
        return bool(np.any(np.all((lo - tol <= p) & (p <= hi + tol), axis=1)))


@dataclass(frozen=True, eq=False)
class Classification:
    frontier: Frontier
    good_mask: np.ndarray
    threshold: float

    @property
    def good_count(self) -> int:
        return int(self.good_mask.sum())

    @property
    def bad_count(self) -> int:
        return len(self.frontier) - self.good_count + self.frontier.discarded

    @property
    def good(self) -> list[EvaluatedBox]:
        return self.good_frontier().boxes

    @property
    def bad(self) -> list[EvaluatedBox]:
        boxes = self.frontier.boxes
        return [b for b, g in zip(boxes, self.good_mask) if not g]

    def good_frontier(self) -> Frontier:
        return self.frontier.subset(self.good_mask)


@dataclass(frozen=True)
class EnclosureInterval:
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class FinesseDiagnostics:
    a_k: float
    b_k: float
    delta_in_range: bool


class RunStatus(enum.Enum):
    CONVERGED = "Converged"
    BOX_BUDGET_EXCEEDED = "BoxBudgetExceeded"
    EVAL_BUDGET_EXCEEDED = "EvalBudgetExceeded"
    TIME_LIMIT_EXCEEDED = "TimeLimitExceeded"


@dataclass(frozen=True)
class LevelStats:
    level: int
    delta: float
    v_k: float
    good_count: int
    bad_count: int

    @property
    def coarse(self) -> bool:
        """Nothing was sieved out: the partition was not fine enough yet."""
        return self.bad_count == 0


@dataclass(frozen=True, eq=False)
class SingleRunResult:
    m_used: float
    v_final: float
    enclosure: EnclosureInterval
    final_frontier: Frontier
    levels_run: int
    eval_count: int
    per_level_stats: list[LevelStats] = field(default_factory=list)
    status: RunStatus = RunStatus.CONVERGED


def evaluate_level(boxes: Sequence[Box], spec: ObjectiveSpec, *, eval_count: int = 0,
                   workers: int = 1, chunk_size: int = 1 << 18) -> Frontier:
    """Evaluate the centers of same-level lattice cells of ``spec.domain``."""
    if not boxes:
        raise ValueError("no boxes to evaluate")
    level = boxes[0].level
    if any(b.level != level for b in boxes):
        raise ValueError("boxes must all share one level")
    for b in boxes:
        if not (spec.domain.contains(b.lower) and spec.domain.contains(b.upper)):
            raise ValueError(f"box {b} is not inside the domain of {spec.name}")
    lattice = lattice_for(boxes, spec.domain)
    index = np.array([lattice.locate(b) for b in boxes], dtype=np.int64)
    return _evaluate_lattice(spec, lattice, index, level, eval_count, workers, chunk_size)


def _evaluate_lattice(spec, lattice, index, level, eval_count, workers=1, chunk_size=1 << 18):
    values = evaluate_points(spec, lattice.centers(index), workers, chunk_size)
    return Frontier(lattice, index, values, level, eval_count + len(values))


def initial_frontier(spec: ObjectiveSpec, config: GrsConfig) -> Frontier:
    """Evaluate the first partition: ``initial_split`` segments along every side."""
    initial, _ = config.splits(spec.dimension)
    lattice = Lattice.over(spec.domain, initial)
    if lattice.size > config.max_boxes:
        raise BoxBudgetExceeded(
            f"initial partition has {lattice.size} boxes, over the cap of {config.max_boxes}")
    if lattice.size > config.max_evals:
        raise BoxBudgetExceeded(
            f"initial partition needs {lattice.size} evaluations, over the cap of {config.max_evals}")
    return _evaluate_lattice(spec, lattice, lattice.all_indices(), 1, 0,
                             config.workers, config.chunk_size)


def classify(frontier: Frontier, m_bound: float) -> Classification:
    if not m_bound > 0:
        raise ValueError("m_bound must be positive")
    threshold = frontier.v_k + frontier.delta * m_bound
    return Classification(frontier, frontier.values <= threshold, threshold)


def enclosure_interval(v_k: float, delta_k: float, m_bound: float) -> EnclosureInterval:
    if delta_k < 0:
        raise ValueError("delta_k must be non-negative")
    return EnclosureInterval(v_k - delta_k * m_bound, v_k + 2 * delta_k * m_bound)


def finesse_bounds(frontier: Frontier, m_bound: float) -> FinesseDiagnostics:
    """Range of diameters for which the level would split into good and bad sets.

    The lower end ignores zero gaps (the argmin box itself), otherwise it
    would always be 0.
    """
    gaps = frontier.values - frontier.v_k
    b_k = float(gaps.max()) / m_bound
    positive = gaps[gaps > 0]
    a_k = float(positive.min()) / m_bound if len(positive) else 0.0
    return FinesseDiagnostics(a_k, b_k, a_k < frontier.delta < b_k)


def sieve_step(frontier: Frontier, spec: ObjectiveSpec, m_bound: float, m_split: int,
               config: Optional[GrsConfig] = None) -> Frontier:
    """Drop the bad boxes, split each good one ``m_split`` ways per side and evaluate.

    Returns the complete next level, every child included.
    """
    config = config or GrsConfig()
    good = classify(frontier, m_bound).good_frontier()
    offsets = frontier.lattice.child_offsets(m_split)
    n_children = len(good) * len(offsets)
    if n_children > config.max_boxes:
        raise BoxBudgetExceeded(
            f"level {frontier.level + 1} would hold {n_children} boxes (cap {config.max_boxes})")
    lattice = frontier.lattice.refine(m_split)
    index = (good.index[:, None, :] * m_split + offsets[None, :, :]).reshape(-1, lattice.dim)
    return _evaluate_lattice(spec, lattice, index, frontier.level + 1, frontier.eval_count,
                             config.workers, config.chunk_size)


class _Deadline:
    def __init__(self, seconds: Optional[float]):
        self.at = None if seconds is None else time.monotonic() + seconds

    def passed(self) -> bool:
        return self.at is not None and time.monotonic() > self.at


def _refine_and_sieve(good: Frontier, spec: ObjectiveSpec, m_bound: float, m_split: int,
                      config: GrsConfig, deadline: _Deadline) -> Optional[Frontier]:
    """Evaluate every child of ``good`` but keep only plausible good ones.

    A child is stored when its value is within ``delta * m_bound`` of the
    running minimum.  The running minimum never falls below the final one,
    so everything dropped here is bad under the final threshold too.
    Returns None when the deadline passes mid-level.
    """
    lattice = good.lattice.refine(m_split)
    offsets = good.lattice.child_offsets(m_split)
    slack = lattice.delta * m_bound
    per_batch = max(1, config.chunk_size // len(offsets))
    starts = list(range(0, len(good), per_batch))

    def run(start):
        idx = (good.index[start:start + per_batch, None, :] * m_split
               + offsets[None, :, :]).reshape(-1, lattice.dim)
        return idx, evaluate_points(spec, lattice.centers(idx), 1, config.chunk_size)

    kept_idx, kept_val = [], []
    best = math.inf
    total = 0
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for g in range(0, len(starts), config.workers):
            group = starts[g:g + config.workers]
            results = list(pool.map(run, group)) if pool else [run(s) for s in group]
            for idx, vals in results:
                total += len(vals)
                best = min(best, float(vals.min()))
                keep = vals <= best + slack
                kept_idx.append(idx[keep])
                kept_val.append(vals[keep])
            if deadline.passed():
                return None
    finally:
        if pool:
            pool.shutdown()
    index = np.concatenate(kept_idx)
    values = np.concatenate(kept_val)
    return Frontier(lattice, index, values, good.level + 1, good.eval_count + total,
                    discarded=total - len(values))


def run_single_m(spec: ObjectiveSpec, m_bound: float, config: Optional[GrsConfig] = None, *,
                 initial: Optional[Frontier] = None, eval_budget: Optional[int] = None,
                 on_level: Optional[Callable[[Classification], None]] = None) -> SingleRunResult:
    """Sieve ``spec`` with the bound ``m_bound`` until the diameter is small enough.

    Stops at the first level where ``delta * m_bound <= tol`` or
    ``delta <= tol``.  The last level is classified too, so the returned
    frontier holds only its good boxes.

    Parameters
    ----------
    initial : Frontier, optional
        A precomputed first partition (it does not depend on the bound, so
        a schedule of runs can share it).  Its evaluations are not counted
        again.
    eval_budget : int, optional
        Evaluations this run may spend; defaults to ``config.max_evals``.
    on_level : callable, optional
        Called with the classification of every level, in order.
    """
    config = config or GrsConfig()
    if not m_bound > 0:
        raise ValueError("m_bound must be positive")
    _, refine = config.splits(spec.dimension)
    budget = config.max_evals if eval_budget is None else eval_budget
    deadline = _Deadline(config.time_limit)

    if initial is None:
        frontier = initial_frontier(spec, config)
        spent = frontier.eval_count
    else:
        frontier = Frontier(initial.lattice, initial.index, initial.values, initial.level, 0)
        spent = 0

    stats: list[LevelStats] = []
    status = RunStatus.CONVERGED
    while True:
        cls = classify(frontier, m_bound)
        stats.append(LevelStats(frontier.level, frontier.delta, frontier.v_k,
                                cls.good_count, cls.bad_count))
        if on_level is not None:
            on_level(cls)
        good = cls.good_frontier()
        delta = frontier.delta
        if delta * m_bound <= config.tol or delta <= config.tol:
            break
        n_children = len(good) * len(good.lattice.child_offsets(refine))
        if n_children > config.max_boxes:
            status = RunStatus.BOX_BUDGET_EXCEEDED
            break
        if spent + n_children > budget:
            status = RunStatus.EVAL_BUDGET_EXCEEDED
            break
        if deadline.passed():
            status = RunStatus.TIME_LIMIT_EXCEEDED
            break
        nxt = _refine_and_sieve(good, spec, m_bound, refine, config, deadline)
        if nxt is None:
            status = RunStatus.TIME_LIMIT_EXCEEDED
            break
        spent += nxt.eval_count - good.eval_count
        frontier = nxt

    final = good
    return SingleRunResult(
        m_used=float(m_bound),
        v_final=final.v_k,
        enclosure=enclosure_interval(final.v_k, final.delta, m_bound),
        final_frontier=Frontier(final.lattice, final.index, final.values, final.level, spent),
        levels_run=len(stats),
        eval_count=spent,
        per_level_stats=stats,
        status=status,
    )
