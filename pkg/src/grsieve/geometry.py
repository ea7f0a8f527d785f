"""Axis-aligned boxes and the uniform lattices used to partition them.

Every box the sieve touches lives on a lattice over the root domain: level
``k`` splits each non-degenerate side of the root into ``cells[i]`` equal
segments and a box is identified by its integer cell index.  Coordinates are
produced as ``lower + span * fl(q)`` where ``q`` is an exact rational
(``index / cells`` for faces, ``(2 * index + 1) / (2 * cells)`` for centers).
Because IEEE division is correctly rounded, two expressions of the same
rational always give the same float, so faces shared by neighbouring boxes,
and centers shared across levels, coincide bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Box:
    """A closed axis-aligned hyperrectangle.

    ``level`` is the partition generation the box belongs to: 0 for the
    root domain, one more for every subdivision.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    level: int = 0

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or len(lo) == 0:
            raise GeometryError(
                f"lower and upper must have equal non-zero length, got {len(lo)} and {len(hi)}"
            )
        if not all(math.isfinite(v) for v in lo + hi):
            raise GeometryError("box bounds must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise GeometryError(f"lower exceeds upper: {lo} > {hi}")
        if self.level < 0:
            raise GeometryError("level must be non-negative")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def sides(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    def contains(self, point, tol: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(
            np.all(p >= np.asarray(self.lower) - tol) and np.all(p <= np.asarray(self.upper) + tol)
        )


def diameter(box: Box) -> float:
    """Exact diameter of a hyperrectangle: the length of its main diagonal."""
    return float(np.linalg.norm(box.sides))


def center(box: Box) -> np.ndarray:
    return (np.asarray(box.lower) + np.asarray(box.upper)) / 2.0


def subdivide(box: Box, m: int) -> list[Box]:
    """Split every non-degenerate side of ``box`` into ``m`` equal segments.

    Children are returned in row-major index order (last dimension fastest).
    Zero-width sides stay a single segment, so a box with ``d`` non-degenerate
    sides yields ``m**d`` children.
    """
    if int(m) != m or m < 1:
        raise GeometryError(f"subdivision factor must be a positive integer, got {m!r}")
    lattice = Lattice.over(box, m)
    idx = lattice.all_indices()
    lo, hi = lattice.bounds(idx)
    return [Box(tuple(a), tuple(b), box.level + 1) for a, b in zip(lo, hi)]


def boxes_adjacent(a: Box, b: Box, tol: float = 0.0) -> bool:
    """True iff the closed boxes, each inflated by ``tol`` on every side, meet."""
    if a.dim != b.dim:
        raise GeometryError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if tol < 0:
        raise GeometryError("tol must be non-negative")
    for alo, ahi, blo, bhi in zip(a.lower, a.upper, b.lower, b.upper):
        if alo - tol > bhi + tol or blo - tol > ahi + tol:
            return False
    return True


@dataclass(frozen=True)
class Lattice:
    """Uniform grid of ``cells[i]`` segments along each side of ``root``."""

    root: Box
    cells: tuple[int, ...]

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        if len(cells) != self.root.dim or any(c < 1 for c in cells):
            raise GeometryError(f"invalid cell counts {self.cells} for a {self.root.dim}-d root")
        sides = self.root.sides
        if any(c != 1 for c, s in zip(cells, sides) if s == 0):
            raise GeometryError("degenerate sides must have exactly one cell")
        if max(cells) >= 2**52:
            raise GeometryError("lattice too fine for exact float index arithmetic")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def over(cls, root: Box, m: int) -> Lattice:
        """Lattice splitting every non-degenerate side of ``root`` into ``m``."""
        return cls(root, tuple(1 if s == 0 else int(m) for s in root.sides))

    def refine(self, m: int) -> Lattice:
        return Lattice(self.root, tuple(1 if s == 0 else c * int(m)
                                        for c, s in zip(self.cells, self.root.sides)))

    @property
    def dim(self) -> int:
        return self.root.dim

    @property
    def widths(self) -> np.ndarray:
        return self.root.sides / np.asarray(self.cells, dtype=float)

    @property
    def delta(self) -> float:
        """Common diameter of every cell."""
        return float(np.linalg.norm(self.widths))

    @property
    def size(self) -> int:
        return math.prod(self.cells)

    def _coords(self, num: np.ndarray, den: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.root.lower)
        hi = np.asarray(self.root.upper)
        span = self.root.sides
        out = lo + span * (num.astype(float) / den.astype(float))
        # lo + (hi - lo) need not round back to hi; pin the far face.
        return np.where(num == den, hi, out)

    def bounds(self, index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper corners of the cells at ``index`` (shape ``(N, n)``)."""
        index = np.asarray(index, dtype=np.int64)
        cells = np.asarray(self.cells, dtype=np.int64)
        lo = self._coords(index, cells)
        hi = self._coords(index + 1, cells)
        # Degenerate sides: the single cell is the point itself.
        flat = self.root.sides == 0
        if flat.any():
            hi[:, flat] = lo[:, flat]
        return lo, hi

    def centers(self, index: np.ndarray) -> np.ndarray:
        index = np.asarray(index, dtype=np.int64)
        cells = np.asarray(self.cells, dtype=np.int64)
        return self._coords(2 * index + 1, 2 * cells)

    def box(self, index: Sequence[int], level: int) -> Box:
        lo, hi = self.bounds(np.asarray([index]))
        return Box(tuple(lo[0]), tuple(hi[0]), level)

    def all_indices(self) -> np.ndarray:
        grids = np.meshgrid(*[np.arange(c, dtype=np.int64) for c in self.cells], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def child_offsets(self, m: int) -> np.ndarray:
        """Offsets of the children of one cell when refined by ``m``."""
        ranges = [range(1) if s == 0 else range(int(m)) for s in self.root.sides]
        return np.array(list(itertools.product(*ranges)), dtype=np.int64)

    def locate(self, box: Box) -> np.ndarray:
        """Integer index of ``box`` on this lattice; raises if it is not a cell."""
        lo = np.asarray(box.lower) - np.asarray(self.root.lower)
        w = self.widths
        idx = np.zeros(self.dim, dtype=np.int64)
        for i in range(self.dim):
            if w[i] > 0:
                idx[i] = int(round(lo[i] / w[i]))
        blo, bhi = self.bounds(idx[None, :])
        if not (np.allclose(blo[0], box.lower, rtol=1e-12, atol=1e-12 * (1 + np.abs(w).max()))
                and np.allclose(bhi[0], box.upper, rtol=1e-12, atol=1e-12 * (1 + np.abs(w).max()))):
            raise GeometryError(f"box {box} is not a cell of the lattice {self.cells}")
        return idx


def lattice_for(boxes: Sequence[Box], root: Box) -> Lattice:
    """Recover the uniform lattice over ``root`` that ``boxes`` are cells of."""
    if not boxes:
        raise GeometryError("no boxes given")
    sides = boxes[0].sides
    cells = []
    for s_root, s in zip(root.sides, sides):
        if s_root == 0:
            cells.append(1)
        elif s <= 0:
            raise GeometryError("box is degenerate along a side the root spans")
        else:
            c = s_root / s
            if abs(c - round(c)) > 1e-6 * max(1.0, c):
                raise GeometryError("box side does not divide the root side evenly")
            cells.append(int(round(c)))
    return Lattice(root, tuple(cells))
