from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GrsConfig:
    """Settings shared by single-bound sieve runs and the pseudo-M schedule.

    ``initial_split`` left as ``None`` resolves per dimension: 60 segments
    per side for n <= 3, 2 otherwise.  ``refine_split`` left as ``None``
    halves every side of a good box (2 segments), whatever the dimension.
    Splitting every good box 60 ways per side multiplies a 2-D level by
    3600 and exhausts any practical box cap within one or two levels.

    ``max_evals`` caps objective evaluations for one call of
    :func:`grsieve.pseudo_m.run_grs` (or one direct single-bound run);
    ``max_boxes`` caps the number of boxes in a single level.
    """

    initial_split: Optional[int] = None
    refine_split: Optional[int] = None
    tol: float = 1e-3
    m1_override: Optional[float] = None
    m1_safety: float = 2.0
    m_growth: float = 2.0
    max_m_runs: int = 12
    stabilization_tol: float = 1e-9
    max_boxes: int = 10_000_000
    max_evals: int = 50_000_000
    cluster_tol: float = 0.0
    time_limit: Optional[float] = None
    workers: int = 1
    chunk_size: int = 1 << 18

    def __post_init__(self):
        for name in ("initial_split", "refine_split"):
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < 1):
                raise ConfigError(f"{name} must be a positive integer")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.m1_override is not None and not self.m1_override > 0:
            raise ConfigError("m1_override must be positive")
        if not self.m1_safety > 0:
            raise ConfigError("m1_safety must be positive")
        if not self.m_growth > 1:
            raise ConfigError("m_growth must exceed 1")
        if self.max_m_runs < 3:
            raise ConfigError("max_m_runs must be at least 3")
        if self.stabilization_tol < 0 or self.cluster_tol < 0:
            raise ConfigError("tolerances must be non-negative")
        if self.max_boxes < 1 or self.max_evals < 1 or self.workers < 1 or self.chunk_size < 1:
            raise ConfigError("resource caps, workers and chunk_size must be positive")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ConfigError("time_limit must be positive when set")

    def splits(self, n: int) -> tuple[int, int]:
        """(initial, refine) segments per side for an n-dimensional domain."""
        initial = self.initial_split if self.initial_split is not None else (60 if n <= 3 else 2)
        refine = self.refine_split if self.refine_split is not None else 2
        return int(initial), int(refine)

    def with_(self, **changes) -> GrsConfig:
        return replace(self, **changes)
