"""Policy pricing, exposure screening, and IBNR reserving.

Pricing is expected-loss-plus-loading, the simplest actuarially fair
rule: the insurer's expected payout is the fire probability times the
expected loss fraction times the insured credit value, and the premium
grosses that up by a loading for expenses and profit.

Exposure screening declines policies whose fire probability strictly
exceeds the threshold, so a published threshold is inclusive for
acceptance.

IBNR uses a development-factor gross-up against a cumulative reporting
pattern F(0..L) with F(L) = 1: ultimate = reported / F(elapsed). This is
the triangle-free special case; full chain-ladder on run-off triangles is
out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

RISK_TIERS = ("low", "medium", "high")


class UndefinedDevelopmentError(ValueError):
    """Reported losses cannot be grossed up from a zero reporting fraction."""


@dataclass(frozen=True)
class Policy:
    insured_credits_tCO2e: float
    credit_price: float
    p_wildfire: float
    expected_loss_fraction: float
    loading: float
    risk_tier: str = "medium"

    def __post_init__(self):
        if self.insured_credits_tCO2e < 0:
            raise ValueError(f"insured credits must be >= 0, got {self.insured_credits_tCO2e}")
        if self.credit_price < 0:
            raise ValueError(f"credit price must be >= 0, got {self.credit_price}")
        if not 0.0 <= self.p_wildfire <= 1.0:
            raise ValueError(f"p_wildfire must be in [0, 1], got {self.p_wildfire}")
        if not 0.0 <= self.expected_loss_fraction <= 1.0:
            raise ValueError(
                f"expected_loss_fraction must be in [0, 1], got {self.expected_loss_fraction}")
        if self.loading < 0:
            raise ValueError(f"loading must be >= 0, got {self.loading}")
        if self.risk_tier not in RISK_TIERS:
            raise ValueError(f"risk_tier must be one of {RISK_TIERS}, got {self.risk_tier!r}")


@dataclass(frozen=True)
class ReportingPattern:
    """Cumulative reported fraction by development period, ending at 1."""

    cumulative_reported_fraction: tuple[float, ...]

    def __post_init__(self):
        fractions = tuple(float(f) for f in self.cumulative_reported_fraction)
        if not fractions:
            raise ValueError("reporting pattern must have at least one period")
        for f in fractions:
            if not 0.0 <= f <= 1.0:
                raise ValueError(f"reported fractions must be in [0, 1], got {f}")
        for prev, cur in zip(fractions, fractions[1:]):
            if cur < prev:
                raise ValueError(
                    f"reported fractions must be non-decreasing, got {prev} then {cur}")
        if fractions[-1] != 1.0:
            raise ValueError(f"final reported fraction must be exactly 1, got {fractions[-1]}")
        object.__setattr__(self, "cumulative_reported_fraction", fractions)

    def __len__(self) -> int:
        return len(self.cumulative_reported_fraction)


def price_premium(policy: Policy) -> dict[str, float]:
    """Expected loss and loaded premium for one policy."""
    expected_loss = (policy.p_wildfire * policy.expected_loss_fraction
                     * policy.insured_credits_tCO2e * policy.credit_price)
    premium = expected_loss * (1.0 + policy.loading)
    return {"expected_loss": expected_loss, "premium": premium}


def screen_exposure(policies: Sequence[Policy],
                    p_threshold: float) -> dict[str, list[Policy]]:
    """Partition policies into accept/decline at the probability threshold.

    Decline is strict (p > threshold); input order is preserved within
    each partition.
    """
    if not 0.0 <= p_threshold <= 1.0:
        raise ValueError(f"p_threshold must be in [0, 1], got {p_threshold}")
    accept = [p for p in policies if p.p_wildfire <= p_threshold]
    decline = [p for p in policies if p.p_wildfire > p_threshold]
    return {"accept": accept, "decline": decline}


def estimate_ibnr(reported_to_date: float, elapsed_periods: int,
                  pattern: ReportingPattern) -> dict[str, float]:
    """Development-factor IBNR: ultimate = reported / F(elapsed).

    ``elapsed_periods`` indexes the pattern (0-based development period).
    """
    if reported_to_date < 0:
        raise ValueError(f"reported_to_date must be >= 0, got {reported_to_date}")
    if not 0 <= elapsed_periods < len(pattern):
        raise ValueError(
            f"elapsed_periods must be within the pattern (0..{len(pattern) - 1}), "
            f"got {elapsed_periods}")
    f = pattern.cumulative_reported_fraction[elapsed_periods]
    if f == 0.0:
        raise UndefinedDevelopmentError(
            f"reported fraction at period {elapsed_periods} is 0; "
            "cannot gross up from zero development")
    ultimate = reported_to_date / f
    return {"ultimate": ultimate, "ibnr": ultimate - reported_to_date}
