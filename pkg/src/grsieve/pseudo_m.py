"""Pseudo-Lipschitz schedule: sieve with growing trial bounds until the minimum settles.

The true Lipschitz constant is rarely known.  Any positive trial bound still
gives a convergent sieve, and larger bounds can only lower (or keep) the
minimum found, so the driver runs M_1 < M_2 < ... and stops once three
consecutive runs agree, then checks the answer once more with a larger bound.
"""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .config import GrsConfig
from .geometry import Box
from .sieve import (
    EnclosureInterval,
    Frontier,
    ObjectiveSpec,
    RunStatus,
    SingleRunResult,
    initial_frontier,
    run_single_m,
)


class GrsStatus(enum.Enum):
    STABILIZED = "Stabilized"
    SCHEDULE_EXHAUSTED = "ScheduleExhausted"
    BUDGET_EXCEEDED = "BudgetExceeded"


@dataclass(frozen=True)
class ScheduleEntry:
    m: float
    v: float
    run: SingleRunResult


@dataclass
class MScheduleState:
    m1: float
    history: list[ScheduleEntry] = field(default_factory=list)
    confirmation: Optional[ScheduleEntry] = None

    def append(self, entry: ScheduleEntry) -> None:
        if self.history and not entry.m > self.history[-1].m:
            raise ValueError("trial bounds must increase strictly")
        self.history.append(entry)

    @property
    def values(self) -> list[float]:
        return [e.v for e in self.history]


@dataclass(frozen=True, eq=False)
class MinimizerCluster:
    """One connected group of retained boxes.

    ``radius`` is the largest distance from the representative to a corner
    of a member box, so the group lies inside that ball.
    """

    representative: tuple[float, ...]
    value: float
    lower: np.ndarray
    upper: np.ndarray
    level: int
    radius: float

    @property
    def boxes(self) -> list[Box]:
        return [Box(tuple(a), tuple(b), self.level) for a, b in zip(self.lower, self.upper)]

    def __len__(self) -> int:
        return len(self.lower)

    def captures(self, point) -> bool:
        d = np.linalg.norm(np.asarray(point, dtype=float) - np.asarray(self.representative))
        return bool(d <= self.radius)

    def to_dict(self) -> dict:
        return {
            "representative": list(self.representative),
            "value": self.value,
            "radius": self.radius,
            "n_boxes": len(self),
        }


@dataclass(frozen=True, eq=False)
class GrsResult:
    v: float
    enclosure: EnclosureInterval
    minimizer_clusters: list[MinimizerCluster]
    m_final: float
    delta_final: float
    confirmation_passed: bool
    schedule: MScheduleState
    total_evals: int
    status: GrsStatus

    @property
    def levels(self) -> int:
        return max((e.run.levels_run for e in self.schedule.history), default=0)


def m_schedule(m1: float, i: int, growth: float = 2.0) -> float:
    """i-th trial bound, ``m1 * growth**(i - 1)``."""
    if i < 1:
        raise ValueError("schedule index starts at 1")
    return m1 * growth ** (i - 1)


def confirmation_bound(m1: float, n: int, growth: float = 2.0) -> float:
    """Extra check bound after ``n`` runs: ``(growth**(n - 1) + 1) * m1``.

    With doubling this is ``(2**(n-1) + 1) * M_1``, i.e. ``M_n + M_1``.
    """
    return (growth ** (n - 1) + 1) * m1


def adjacent_quotient_max(frontier: Frontier) -> float:
    """Largest ``|f(a) - f(b)| / |a - b|`` over axis-neighbouring centers.

    ``frontier`` must cover its whole lattice in index order, as the first
    partition does.
    """
    lattice = frontier.lattice
    if len(frontier) != lattice.size:
        raise ValueError("quotients need the complete first partition")
    grid = np.asarray(frontier.values).reshape(lattice.cells)
    widths = lattice.widths
    best = 0.0
    for axis, w in enumerate(widths):
        if lattice.cells[axis] < 2:
            continue
        q = np.abs(np.diff(grid, axis=axis)).max() / w
        best = max(best, float(q))
    return best


def estimate_m1(spec: ObjectiveSpec, config: Optional[GrsConfig] = None,
                initial: Optional[Frontier] = None) -> float:
    """First trial bound from the first partition.

    ``m1_safety`` times the largest difference quotient between axis-adjacent
    centers; 1.0 if the samples are all equal.  ``m1_override`` wins when set.
    """
    config = config or GrsConfig()
    if config.m1_override is not None:
        return float(config.m1_override)
    if initial is None:
        initial = initial_frontier(spec, config)
    q = adjacent_quotient_max(initial)
    if q == 0:
        return 1.0
    return config.m1_safety * q


def _agree(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * (1 + abs(a))


_MAX_OFFSETS = 1024


def _lattice_components(index: np.ndarray, reach: np.ndarray) -> Optional[np.ndarray]:
    """Connected-component labels of lattice cells within ``reach`` of each other.

    Looks up every neighbour offset in turn through sorted linear keys and
    merges components after each one, so memory stays linear in the number
    of cells even when every cell has hundreds of neighbours.  Returns None
    when there are too many offsets or the keys would overflow.
    """
    r = np.floor(reach * (1 + 1e-9)).astype(np.int64)
    if np.prod(2 * r + 1, dtype=float) > _MAX_OFFSETS:
        return None
    lo = index.min(axis=0) - r
    span = index.max(axis=0) + r - lo + 1
    if np.prod(span, dtype=float) >= 2.0 ** 62:
        return None
    strides = np.cumprod(np.concatenate([[1], span[:0:-1]]))[::-1].astype(np.int64)
    keys = (index - lo) @ strides
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    n = len(index)
    labels = np.arange(n)
    for off in itertools.product(*(range(-k, k + 1) for k in r)):
        shift = int(np.dot(off, strides))
        if shift <= 0:  # each unordered pair once; skip the cell itself
            continue
        target = keys + shift
        pos = np.minimum(np.searchsorted(sorted_keys, target), n - 1)
        hit = sorted_keys[pos] == target
        a, b = labels[hit], labels[order[pos[hit]]]
        differ = a != b
        if not differ.any():
            continue
        a, b = a[differ], b[differ]
        graph = coo_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
        _, comp = connected_components(graph, directed=False)
        labels = comp[labels]
    return labels


def cluster_minimizers(frontier: Frontier, cluster_tol: float = 0.0) -> list[MinimizerCluster]:
    """Group retained boxes into connected components.

    Two boxes are linked when they still touch after each is inflated by
    ``cluster_tol``.  Clusters come back sorted by value, then by
    representative.
    """
    if cluster_tol < 0:
        raise ValueError("cluster_tol must be non-negative")
    lattice = frontier.lattice
    widths = lattice.widths
    index = frontier.index
    n = len(frontier)
    live = widths > 0
    if n == 1 or not live.any():
        labels = np.zeros(n, dtype=np.int64)
    else:
        # Boxes whose indices differ by d along an axis leave a gap of
        # (|d| - 1) * w; they touch after inflation iff that gap <= 2 * tol.
        reach = 1.0 + 2.0 * cluster_tol / widths[live]
        labels = _lattice_components(index[:, live], reach)
        if labels is None:
            scaled = index[:, live].astype(float) / reach
            tree = cKDTree(scaled)
            pairs = tree.query_pairs(r=1.0 + 1e-9, p=np.inf, output_type="ndarray")
            graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
            _, labels = connected_components(graph, directed=False)

    lo, hi = frontier.bounds()
    centers = frontier.centers()
    values = frontier.values
    clusters = []
    for lab in np.unique(labels):
        members = np.flatnonzero(labels == lab)
        mv = values[members]
        best = members[mv == mv.min()]
        if len(best) > 1:
            order = np.lexsort(centers[best].T[::-1])
            best = best[order]
        rep = centers[best[0]]
        far = np.maximum(np.abs(lo[members] - rep), np.abs(hi[members] - rep))
        radius = float(np.linalg.norm(far, axis=1).max())
        clusters.append(MinimizerCluster(tuple(float(c) for c in rep), float(mv.min()),
                                         lo[members], hi[members], frontier.level, radius))
    clusters.sort(key=lambda c: (c.value, c.representative))
    return clusters


def run_grs(spec: ObjectiveSpec, config: Optional[GrsConfig] = None, *,
            on_run: Optional[Callable[[ScheduleEntry], None]] = None) -> GrsResult:
    """Minimize ``spec`` with the doubling pseudo-M schedule.

    Runs bounds ``M_1, M_2, ...`` until three consecutive minima agree
    (relative tolerance ``stabilization_tol``) or ``max_m_runs`` is used up,
    then repeats once at the confirmation bound.  At least three runs always
    execute.  Clusters come from the largest bound whose minimum agrees.
    """
    config = config or GrsConfig()
    started = time.monotonic()
    initial = initial_frontier(spec, config)
    total = initial.eval_count
    m1 = estimate_m1(spec, config, initial)
    state = MScheduleState(m1)

    def remaining_config():
        if config.time_limit is None:
            return config
        left = config.time_limit - (time.monotonic() - started)
        return config.with_(time_limit=max(left, 1e-6))

    def single(m):
        nonlocal total
        run = run_single_m(spec, m, remaining_config(), initial=initial,
                           eval_budget=config.max_evals - total)
        total += run.eval_count
        entry = ScheduleEntry(m, run.v_final, run)
        if on_run is not None:
            on_run(entry)
        return entry

    status = GrsStatus.SCHEDULE_EXHAUSTED
    for i in range(1, config.max_m_runs + 1):
        entry = single(m_schedule(m1, i, config.m_growth))
        state.append(entry)
        if entry.run.status is not RunStatus.CONVERGED:
            status = GrsStatus.BUDGET_EXCEEDED
            break
        vals = state.values
        if (len(vals) >= 3 and _agree(vals[-2], vals[-3], config.stabilization_tol)
                and _agree(vals[-1], vals[-2], config.stabilization_tol)):
            status = GrsStatus.STABILIZED
            break

    confirmation_passed = False
    chosen = state.history[-1]
    accepted = chosen
    if status is GrsStatus.STABILIZED:
        n = len(state.history)
        conf = single(confirmation_bound(m1, n, config.m_growth))
        state.confirmation = conf
        confirmation_passed = (conf.run.status is RunStatus.CONVERGED
                               and _agree(conf.v, accepted.v, config.stabilization_tol))
        if confirmation_passed:
            chosen = conf
    elif status is GrsStatus.BUDGET_EXCEEDED:
        done = [e for e in state.history if e.run.status is RunStatus.CONVERGED]
        if done:
            chosen = accepted = done[-1]

    clusters = cluster_minimizers(chosen.run.final_frontier, config.cluster_tol)
    return GrsResult(
        v=accepted.v,
        enclosure=accepted.run.enclosure,
        minimizer_clusters=clusters,
        m_final=chosen.m,
        delta_final=chosen.run.final_frontier.delta,
        confirmation_passed=confirmation_passed,
        schedule=state,
        total_evals=total,
        status=status,
    )
