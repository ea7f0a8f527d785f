"""Registry of standard global-optimization test functions.

Each entry knows its formula, default box, known minimum and minimizers.
Ground truths are checked by substitution when the registry is built: the
formula evaluated at every listed minimizer must reproduce the listed
minimum to within ``1e-9 * (1 + |min|)``.
"""

from __future__ import annotations

import csv
import itertools
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import functions as F
from .geometry import Box
from .sieve import ObjectiveSpec

MAX_DIM = 12

Bounds = Union[float, Sequence[float]]


class UnknownFunction(KeyError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkEntry:
    """Metadata for one test function.

    ``dimension`` is ``None`` for scalable functions; those are built at
    ``default_dim`` unless a dimension is requested.  ``minimum`` and
    ``minimizers`` may be callables of the dimension.
    """

    name: str
    func: Callable
    lower: Bounds
    upper: Bounds
    minimum: Union[float, Callable[[int], float]]
    minimizers: Union[Sequence[Sequence[float]], Callable[[int], list]]
    dimension: Optional[int] = None
    default_dim: int = 2
    tags: frozenset = frozenset()
    hardness_rank: Optional[int] = None
    minimizers_complete: bool = True
    note: str = ""

    @property
    def scalable(self) -> bool:
        return self.dimension is None

    def resolve_dim(self, n: Optional[int] = None) -> int:
        if self.dimension is not None:
            if n is not None and n != self.dimension:
                raise DimensionError(f"{self.name} is fixed at n={self.dimension}, got n={n}")
            return self.dimension
        n = self.default_dim if n is None else n
        if int(n) != n or not 1 <= n <= MAX_DIM:
            raise DimensionError(f"{self.name}: dimension must be an integer in 1..{MAX_DIM}, got {n}")
        return int(n)

    def domain(self, n: Optional[int] = None) -> Box:
        n = self.resolve_dim(n)
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,))
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,))
        return Box(tuple(lo), tuple(hi))

    def ground_truth(self, n: Optional[int] = None) -> tuple[float, tuple[tuple[float, ...], ...]]:
        n = self.resolve_dim(n)
        vmin = self.minimum(n) if callable(self.minimum) else self.minimum
        pts = self.minimizers(n) if callable(self.minimizers) else self.minimizers
        return float(vmin), tuple(tuple(float(c) for c in p) for p in pts)

    def spec(self, n: Optional[int] = None) -> ObjectiveSpec:
        n = self.resolve_dim(n)
        vmin, pts = self.ground_truth(n)
        suffix = "" if self.dimension is not None else f"[n={n}]"
        return ObjectiveSpec(
            name=self.name + suffix,
            domain=self.domain(n),
            func=self.func,
            vectorized=True,
            ground_truth_min=vmin,
            ground_truth_minimizers=pts,
        )


def _tags(*names):
    return frozenset(names)


# Shubert: each global minimizer pairs a maximizer of the 1-d factor with a minimizer.
_SHUBERT_HI = (-7.0835064149, -0.8003211077, 5.4828641993)
_SHUBERT_LO = (-7.7083137429, -1.4251284358, 4.8580568712)
_SHUBERT_MIN = [(a, b) for a in _SHUBERT_HI for b in _SHUBERT_LO] + \
               [(b, a) for a in _SHUBERT_HI for b in _SHUBERT_LO]

_STYBLINSKI_X = -2.9035340341901223
_STYBLINSKI_F = -39.16616570377142

_HOLDER = [(sx * 8.055023452052959, sy * 9.66459003668483)
           for sx, sy in itertools.product((1, -1), repeat=2)]
_CROSS_IN_TRAY = [(sx * 1.3494066, sy * 1.3494066) for sx, sy in itertools.product((1, -1), repeat=2)]


def _build() -> dict[str, BenchmarkEntry]:
    D, N = "differentiable", "non-differentiable"
    S, NS = "separable", "non-separable"
    MM, UM = "multimodal", "unimodal"
    SC = "scalable"
    entries = [
        # The hardness table (ranks 1-10 minus the discontinuous Damavandi).
        BenchmarkEntry("devilliersglasser02", F.devilliers_glasser02, (1.0, 1.0, 1.0, 1.0, 0.0),
                       60.0, 0.0, [(53.81, 1.27, 3.012, 2.13, 0.507)], dimension=5,
                       tags=_tags(D, NS, MM, "table2"), hardness_rank=1,
                       note="x5 lower bound lowered from 1 to 0 so the listed minimizer is inside"),
        BenchmarkEntry("crosslegtable", F.cross_leg_table, -10.0, 10.0, -1.0, [(0.0, 0.0)],
                       dimension=2, tags=_tags(N, NS, MM, "table2"), hardness_rank=3,
                       minimizers_complete=False,
                       note="minimum attained on both coordinate axes"),
        BenchmarkEntry("xinsheyang03", F.xin_she_yang03, -20.0, 20.0, -1.0,
                       lambda n: [(0.0,) * n], tags=_tags(D, NS, UM, SC, "table2"),
                       hardness_rank=4, note="beta=15, m=5"),
        BenchmarkEntry("sineenvelope", F.sine_envelope, -100.0, 100.0, 0.0,
                       lambda n: [(0.0,) * n], tags=_tags(D, NS, MM, SC, "table2"),
                       hardness_rank=5,
                       note="sum of (sin^2(r) - 0.5)/(1 + 0.001 r^2)^2 + 0.5 over consecutive pairs; "
                            "the negated variant found in some references has a different optimum"),
        BenchmarkEntry("whitley", F.whitley, -10.24, 10.24, 0.0, lambda n: [(1.0,) * n],
                       tags=_tags(D, NS, MM, SC, "table2"), hardness_rank=6),
        BenchmarkEntry("zimmerman", F.zimmerman, 0.0, 100.0, 0.0, [(7.0, 2.0)], dimension=2,
                       tags=_tags(N, NS, UM, "table2", "discontinuous"), hardness_rank=7,
                       note="sign factors make the formula jump across the constraint curves"),
        BenchmarkEntry("griewank", F.griewank, -600.0, 600.0, 0.0, lambda n: [(0.0,) * n],
                       tags=_tags(D, NS, MM, SC, "table2"), hardness_rank=8),
        BenchmarkEntry("trefethen", F.trefethen, -10.0, 10.0, -3.3068686474752407,
                       [(-0.024403079770565408, 0.21061242709566716)], dimension=2,
                       tags=_tags(D, NS, MM, "table2"), hardness_rank=9),
        BenchmarkEntry("bukin06", F.bukin06, (-15.0, -3.0), (-5.0, 3.0), 0.0, [(-10.0, 1.0)],
                       dimension=2, tags=_tags(N, NS, MM, "table2"), hardness_rank=10),
        # Common references.
        BenchmarkEntry("sphere", F.sphere, -5.12, 5.12, 0.0, lambda n: [(0.0,) * n],
                       tags=_tags(D, S, UM, SC)),
        BenchmarkEntry("rastrigin", F.rastrigin, -5.12, 5.12, 0.0, lambda n: [(0.0,) * n],
                       tags=_tags(D, S, MM, SC)),
        BenchmarkEntry("ackley", F.ackley, -32.0, 32.0, 0.0, lambda n: [(0.0,) * n],
                       tags=_tags(N, NS, MM, SC)),
        BenchmarkEntry("rosenbrock", F.rosenbrock, -5.0, 10.0, 0.0, lambda n: [(1.0,) * n],
                       tags=_tags(D, NS, UM, SC)),
        BenchmarkEntry("branin", F.branin, (-5.0, 0.0), (10.0, 15.0), 5 / (4 * np.pi),
                       [(-np.pi, 12.275), (np.pi, 2.275), (3 * np.pi, 2.475)], dimension=2,
                       tags=_tags(D, NS, MM)),
        BenchmarkEntry("goldsteinprice", F.goldstein_price, -2.0, 2.0, 3.0, [(0.0, -1.0)],
                       dimension=2, tags=_tags(D, NS, MM)),
        BenchmarkEntry("sixhumpcamel", F.six_hump_camel, -5.0, 5.0, -1.0316284534898774,
                       [(0.08984200893527233, -0.712656403019058),
                        (-0.08984201000528086, 0.7126564016433328)],
                       dimension=2, tags=_tags(D, NS, MM)),
        BenchmarkEntry("schwefel", F.schwefel, -500.0, 500.0, 0.0,
                       lambda n: [(420.96874657644923,) * n], tags=_tags(D, S, MM, SC)),
        BenchmarkEntry("levy", F.levy, -10.0, 10.0, 0.0, lambda n: [(1.0,) * n],
                       tags=_tags(D, NS, MM, SC)),
        BenchmarkEntry("easom", F.easom, -100.0, 100.0, -1.0, [(np.pi, np.pi)], dimension=2,
                       tags=_tags(D, S, MM)),
        BenchmarkEntry("shubert", F.shubert, -10.0, 10.0, -186.73090883102364, _SHUBERT_MIN,
                       dimension=2, tags=_tags(D, S, MM)),
        BenchmarkEntry("styblinskitang", F.styblinski_tang, -5.0, 5.0,
                       lambda n: _STYBLINSKI_F * n, lambda n: [(_STYBLINSKI_X,) * n],
                       tags=_tags(D, S, MM, SC)),
        BenchmarkEntry("matyas", F.matyas, -10.0, 10.0, 0.0, [(0.0, 0.0)], dimension=2,
                       tags=_tags(D, NS, UM)),
        BenchmarkEntry("booth", F.booth, -10.0, 10.0, 0.0, [(1.0, 3.0)], dimension=2,
                       tags=_tags(D, NS, UM)),
        BenchmarkEntry("beale", F.beale, -4.5, 4.5, 0.0, [(3.0, 0.5)], dimension=2,
                       tags=_tags(D, NS, UM)),
        BenchmarkEntry("dropwave", F.drop_wave, -5.12, 5.12, -1.0, [(0.0, 0.0)], dimension=2,
                       tags=_tags(D, NS, MM)),
        BenchmarkEntry("himmelblau", F.himmelblau, -5.0, 5.0, 0.0,
                       [(3.0, 2.0), (-2.8051180869527483, 3.1313125182505734),
                        (-3.779310253377745, -3.283185991286169),
                        (3.58442834033049, -1.8481265269644052)],
                       dimension=2, tags=_tags(D, NS, MM)),
        BenchmarkEntry("threehumpcamel", F.three_hump_camel, -5.0, 5.0, 0.0, [(0.0, 0.0)],
                       dimension=2, tags=_tags(D, NS, MM)),
        BenchmarkEntry("bohachevsky1", F.bohachevsky1, -100.0, 100.0, 0.0, [(0.0, 0.0)],
                       dimension=2, tags=_tags(D, S, MM)),
        BenchmarkEntry("zakharov", F.zakharov, -5.0, 10.0, 0.0, lambda n: [(0.0,) * n],
                       tags=_tags(D, NS, UM, SC)),
        BenchmarkEntry("mccormick", F.mccormick, (-1.5, -3.0), (4.0, 4.0), -1.9132229549810367,
                       [(-0.5471975595982156, -1.5471975491809622)], dimension=2,
                       tags=_tags(D, NS, MM)),
        BenchmarkEntry("eggholder", F.eggholder, -512.0, 512.0, -959.6406627208507,
                       [(512.0, 404.2318049938646)], dimension=2, tags=_tags(N, NS, MM)),
        BenchmarkEntry("holdertable", F.holder_table, -10.0, 10.0, -19.20850256788674, _HOLDER,
                       dimension=2, tags=_tags(N, NS, MM)),
        BenchmarkEntry("crossintray", F.cross_in_tray, -10.0, 10.0, -2.0626118708227397,
                       _CROSS_IN_TRAY, dimension=2, tags=_tags(N, NS, MM)),
        BenchmarkEntry("schaffer2", F.schaffer2, -100.0, 100.0, 0.0, [(0.0, 0.0)], dimension=2,
                       tags=_tags(D, NS, UM)),
        BenchmarkEntry("bartelsconn", F.bartels_conn, -500.0, 500.0, 1.0, [(0.0, 0.0)],
                       dimension=2, tags=_tags(N, NS, MM)),
        BenchmarkEntry("leon", F.leon, -1.2, 1.2, 0.0, [(1.0, 1.0)], dimension=2,
                       tags=_tags(D, NS, UM)),
        BenchmarkEntry("forrester", F.forrester, 0.0, 1.0, -6.0207400557670825,
                       [(0.7572487567877768,)], dimension=1, tags=_tags(D, MM)),
        BenchmarkEntry("gramacylee", F.gramacy_lee, 0.5, 2.5, -0.8690111349894999,
                       [(0.5485634445298725,)], dimension=1, tags=_tags(D, MM)),
    ]
    return {e.name: e for e in entries}


def normalize_name(name: str) -> str:
    return re.sub(r"[\s_\-]", "", name).lower()


class Registry:
    """Immutable name -> entry mapping, ground truths verified at construction."""

    def __init__(self, entries: Iterable[BenchmarkEntry], rtol: float = 1e-9):
        self._entries = {}
        for e in entries:
            key = normalize_name(e.name)
            e.spec().check_ground_truth(rtol)
            if e.scalable:
                e.spec(1).check_ground_truth(rtol)
            self._entries[key] = e

    def __contains__(self, name: str) -> bool:
        return normalize_name(name) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def names(self) -> list[str]:
        return sorted(self._entries)

    def get(self, name: str) -> BenchmarkEntry:
        try:
            return self._entries[normalize_name(name)]
        except KeyError:
            raise UnknownFunction(
                f"unknown function {name!r}; known: {', '.join(self.names())}") from None

    def lookup(self, name: str, n: Optional[int] = None) -> ObjectiveSpec:
        return self.get(name).spec(n)

    def list_corpus(self, tags: Iterable[str] = ()) -> list[BenchmarkEntry]:
        wanted = set(tags)
        return [self._entries[k] for k in self.names() if wanted <= self._entries[k].tags]

    def merged(self, entries: Iterable[BenchmarkEntry]) -> Registry:
        new = dict(self._entries)
        new.update({normalize_name(e.name): e for e in entries})
        return Registry(new.values())


REGISTRY = Registry(_build().values())


def lookup(name: str, n: Optional[int] = None) -> ObjectiveSpec:
    return REGISTRY.lookup(name, n)


def list_corpus(tags: Iterable[str] = ()) -> list[BenchmarkEntry]:
    return REGISTRY.list_corpus(tags)


def eval_benchmark(name: str, x, n: Optional[int] = None) -> float:
    """Evaluate a registered formula at one point inside its default domain."""
    entry = REGISTRY.get(name)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("expected a single point")
    dim = entry.resolve_dim(len(x) if entry.scalable else n)
    if len(x) != dim:
        raise DimensionError(f"{entry.name} expects {dim} coordinates, got {len(x)}")
    if not entry.domain(dim).contains(x):
        raise ValueError(f"{x.tolist()} lies outside the domain of {entry.name}")
    return float(entry.func(x))


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace("(", " ").replace(")", " ").replace(",", " ").split()]


def load_corpus_file(path: Union[str, Path], registry: Registry = REGISTRY,
                     delimiter: str = ",") -> list[BenchmarkEntry]:
    """Read user domains and ground truths for registered formulas.

    Columns: ``name, dimension, lower, upper, min, minimizers``.  ``lower``
    and ``upper`` hold one number (broadcast) or one per dimension,
    whitespace separated; ``minimizers`` holds ``;``-separated tuples of
    whitespace-separated coordinates.  Lines starting with ``#`` are skipped,
    as is a header row whose first cell is ``name``.
    """
    out = []
    with open(path, newline="") as fh:
        rows = csv.reader((line for line in fh if not line.lstrip().startswith("#")),
                          delimiter=delimiter)
        for lineno, row in enumerate(rows, 1):
            if not row or all(not c.strip() for c in row):
                continue
            if row[0].strip().lower() == "name":
                continue
            if len(row) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 columns, got {len(row)}")
            name, dim, lo, hi, vmin, mins = (c.strip() for c in row)
            base = registry.get(name)
            n = int(dim)
            lower, upper = _floats(lo), _floats(hi)
            for b in (lower, upper):
                if len(b) not in (1, n):
                    raise ValueError(f"{path}:{lineno}: need 1 or {n} bounds, got {len(b)}")
            pts = [tuple(_floats(p)) for p in mins.split(";") if p.strip()]
            if any(len(p) != n for p in pts):
                raise ValueError(f"{path}:{lineno}: minimizer of wrong dimension")
            entry = replace(
                base,
                lower=lower[0] if len(lower) == 1 else tuple(lower),
                upper=upper[0] if len(upper) == 1 else tuple(upper),
                minimum=float(vmin),
                minimizers=pts,
                dimension=n,
                default_dim=n,
                note=f"from {Path(path).name}",
            )
            entry.spec().check_ground_truth()
            out.append(entry)
    return out
