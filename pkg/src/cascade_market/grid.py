"""Price grid shared by the reset policy and the mixed-strategy solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PriceGrid:
    """Ordered prices {0, step, 2*step, ..., p_max}."""

    p_max: float
    step: float
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.step <= 0.0:
            raise ValueError(f"grid step must be > 0, got {self.step}")
        if self.p_max <= 0.0:
            raise ValueError(f"grid upper bound must be > 0, got {self.p_max}")
        ratio = self.p_max / self.step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"p_max must be an integer multiple of step, got {self.p_max}/{self.step}"
            )
        pts = np.arange(round(ratio) + 1, dtype=float) * self.step
        pts[-1] = self.p_max
        object.__setattr__(self, "points", pts)

    @property
    def n_points(self) -> int:
        return len(self.points)
