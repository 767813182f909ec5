"""Model primitives shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ModelParams:
    """All primitives of the two-firm market.

    `first_visit_prob` is the probability the arriving consumer lands on
    firm A first; it doubles as the prominence lever.  `calvo_hazard` is the
    per-firm Poisson price-reset rate (0 keeps prices static).  The review
    channel (`review_mu`, `review_r`) is off at `review_mu = 0`.
    """

    q: float = 0.8
    kappa: float = 0.05
    lambda_rate: float = 1.0
    delta_gap: float = 1.0
    v_low: float = 0.0
    first_visit_prob: float = 0.5
    p_a: float = 0.3
    p_b: float = 0.3
    p_max: float = 1.0
    review_mu: float = 0.0
    review_r: float = 0.8
    calvo_hazard: float = 0.0
    eta0: float = 0.5

    def __post_init__(self) -> None:
        if not 0.5 < self.q < 1.0:
            raise ValueError(f"signal precision q must lie in (1/2, 1), got {self.q}")
        if self.kappa < 0.0:
            raise ValueError(f"search cost kappa must be >= 0, got {self.kappa}")
        if self.lambda_rate <= 0.0:
            raise ValueError(f"arrival rate must be > 0, got {self.lambda_rate}")
        if self.delta_gap <= 0.0:
            raise ValueError(f"quality gap must be > 0, got {self.delta_gap}")
        if not 0.0 <= self.first_visit_prob <= 1.0:
            raise ValueError(f"first-visit probability must lie in [0, 1], got {self.first_visit_prob}")
        if self.p_max <= 0.0:
            raise ValueError(f"price cap must be > 0, got {self.p_max}")
        for name, p in (("p_a", self.p_a), ("p_b", self.p_b)):
            if not 0.0 <= p <= self.p_max:
                raise ValueError(f"{name} must lie in [0, {self.p_max}], got {p}")
        if not 0.0 <= self.review_mu <= 1.0:
            raise ValueError(f"review incidence must lie in [0, 1], got {self.review_mu}")
        if self.review_mu > 0.0 and not 0.5 < self.review_r < 1.0:
            raise ValueError(f"review accuracy must lie in (1/2, 1) when reviews are on, got {self.review_r}")
        if self.calvo_hazard < 0.0:
            raise ValueError(f"reset hazard must be >= 0, got {self.calvo_hazard}")
        if not 0.0 < self.eta0 < 1.0:
            raise ValueError(f"initial belief must lie in (0, 1), got {self.eta0}")

    @property
    def price_diff(self) -> float:
        """Posted price difference p_a - p_b seen by a first-visit-A consumer."""
        return self.p_a - self.p_b

    def mirrored(self) -> "ModelParams":
        """Swap the firm labels: prices, visit probability, initial belief."""
        return replace(
            self,
            p_a=self.p_b,
            p_b=self.p_a,
            first_visit_prob=1.0 - self.first_visit_prob,
            eta0=1.0 - self.eta0,
        )

    def with_prices(self, p_a: float, p_b: float) -> "ModelParams":
        return replace(self, p_a=p_a, p_b=p_b)
