"""Wildfire probability, risk-adjusted crediting, and buffer-pool simulation.

The fire model is an annual Bernoulli: each year fires with rate r,
estimated from history as k/n (MLE) or (k+1)/(n+2) (Laplace), where k is
the number of years with at least one recorded fire and n the observation
window. Over a multi-year horizon the probability compounds as
1 - (1-r)^horizon.

Crediting follows the expected-reversal adjustment: expected emissions are
the product of fire probability and emissions given fire, and adjusted
sequestration subtracts that from the estimated total. A negative adjusted
value is reported, not clamped: it is decision-relevant (the project is a
net expected emitter over the horizon).

Buffer simulation draws one Bernoulli fire per year. The uniform and
loss draws are consumed every year whether or not a fire occurs, so runs
with the same seed are coupled across fire rates (common random numbers):
raising the rate can only add draw years, never change them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .seeding import derive_seed

logger = logging.getLogger(__name__)

SMOOTHING_MODES = ("mle", "laplace")


@dataclass(frozen=True)
class FireEvent:
    year: int
    emissions_tCO2e: float

    def __post_init__(self):
        if self.emissions_tCO2e < 0:
            raise ValueError(f"event emissions must be >= 0, got {self.emissions_tCO2e}")


@dataclass(frozen=True)
class FireHistory:
    """Recorded fires over an observation window of whole years."""

    observation_years: int
    events: tuple[FireEvent, ...]
    start_year: int | None = None

    def __post_init__(self):
        if self.observation_years < 1:
            raise ValueError(f"observation_years must be >= 1, got {self.observation_years}")
        events = tuple(self.events)
        object.__setattr__(self, "events", events)
        if self.start_year is not None:
            end = self.start_year + self.observation_years
            for ev in events:
                if not self.start_year <= ev.year < end:
                    raise ValueError(
                        f"event year {ev.year} outside observation window "
                        f"[{self.start_year}, {end})")
        if len(self.fire_years) > self.observation_years:
            raise ValueError("more distinct fire years than observation years")

    @property
    def fire_years(self) -> tuple[int, ...]:
        """Distinct years with at least one fire (multiple fires collapse)."""
        return tuple(sorted({ev.year for ev in self.events}))

    def mean_emissions_per_fire_year(self) -> float:
        """Mean of per-year total emissions over fire years; 0 if no fires."""
        if not self.events:
            return 0.0
        by_year: dict[int, float] = {}
        for ev in self.events:
            by_year[ev.year] = by_year.get(ev.year, 0.0) + ev.emissions_tCO2e
        return math.fsum(by_year.values()) / len(by_year)

    @classmethod
    def from_rows(cls, observation_years: int, rows: Iterable[Mapping],
                  start_year: int | None = None) -> "FireHistory":
        return cls(observation_years,
                   tuple(FireEvent(int(r["year"]), float(r["emissions_tCO2e"])) for r in rows),
                   start_year)


@dataclass(frozen=True)
class RiskAssessment:
    p_wildfire: float
    e_wildfire_tCO2e: float
    e_expected_tCO2e: float
    s_estimated_tCO2e: float
    s_adjusted_tCO2e: float

    @property
    def is_net_negative(self) -> bool:
        return self.s_adjusted_tCO2e < 0


@dataclass(frozen=True)
class BufferPool:
    """Retained share of issued credits, drawn down to cover reversals."""

    balance_tCO2e: float
    contribution_rate: float

    def __post_init__(self):
        if self.balance_tCO2e < 0:
            raise ValueError(f"buffer balance must be >= 0, got {self.balance_tCO2e}")
        if not 0.0 <= self.contribution_rate <= 1.0:
            raise ValueError(
                f"contribution_rate must be in [0, 1], got {self.contribution_rate}")


@dataclass(frozen=True)
class BufferYear:
    year: int
    balance: float
    drew: float
    insolvent: bool


def estimate_p_wildfire(history: FireHistory, horizon_years: int,
                        smoothing: str = "mle") -> float:
    """P(at least one fire within the horizon) under the annual Bernoulli model."""
    if horizon_years < 1:
        raise ValueError(f"horizon_years must be >= 1, got {horizon_years}")
    if smoothing not in SMOOTHING_MODES:
        raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}, got {smoothing!r}")
    k = len(history.fire_years)
    n = history.observation_years
    if smoothing == "mle":
        rate = k / n
    else:
        rate = (k + 1) / (n + 2)
    return 1.0 - (1.0 - rate) ** horizon_years


def assess(p: float, e_wildfire: float, s_estimated: float) -> RiskAssessment:
    """Expected reversal emissions p*E and adjusted sequestration S - p*E."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if e_wildfire < 0:
        raise ValueError(f"e_wildfire must be >= 0, got {e_wildfire}")
    if s_estimated < 0:
        raise ValueError(f"s_estimated must be >= 0, got {s_estimated}")
    e_expected = p * e_wildfire
    s_adjusted = s_estimated - e_expected
    if s_adjusted < 0:
        logger.warning(
            "adjusted sequestration is negative (%.6g tCO2e): expected reversal "
            "emissions exceed estimated sequestration", s_adjusted)
    return RiskAssessment(
        p_wildfire=p,
        e_wildfire_tCO2e=e_wildfire,
        e_expected_tCO2e=e_expected,
        s_estimated_tCO2e=s_estimated,
        s_adjusted_tCO2e=s_adjusted,
    )


def _sample_loss(loss_given_fire, rng: np.random.Generator) -> float:
    # Late import sidesteps a module cycle; DistributionSpec is the only
    # non-scalar loss type.
    if hasattr(loss_given_fire, "sample"):
        return float(loss_given_fire.sample(rng))
    return float(loss_given_fire)


def simulate_buffer(pool: BufferPool, annual_issuance_tCO2e: float,
                    fire_rate: float, loss_given_fire_tCO2e,
                    years: int, seed: int) -> list[BufferYear]:
    """One buffer trajectory.

    Each year adds issuance * contribution_rate, then with probability
    fire_rate draws the loss (balance floors at 0; a draw that exceeds the
    balance marks the year insolvent). Deterministic for a fixed seed.
    """
    if annual_issuance_tCO2e < 0:
        raise ValueError(f"annual issuance must be >= 0, got {annual_issuance_tCO2e}")
    if not 0.0 <= fire_rate <= 1.0:
        raise ValueError(f"fire_rate must be in [0, 1], got {fire_rate}")
    if years < 1:
        raise ValueError(f"years must be >= 1, got {years}")
    rng = np.random.Generator(np.random.PCG64(seed))
    balance = pool.balance_tCO2e
    trajectory = []
    for year in range(1, years + 1):
        balance += annual_issuance_tCO2e * pool.contribution_rate
        # Both draws happen every year so that matched seeds stay coupled
        # across different fire rates (common random numbers).
        u = rng.uniform()
        # Negative draws (possible under an unbounded loss distribution)
        # clamp to 0: a fire never tops the pool up.
        loss = max(_sample_loss(loss_given_fire_tCO2e, rng), 0.0)
        drew = 0.0
        insolvent = False
        if u < fire_rate:
            drew = min(loss, balance)
            insolvent = loss > balance
            balance -= drew
        trajectory.append(BufferYear(year=year, balance=balance, drew=drew,
                                     insolvent=insolvent))
    return trajectory


@dataclass(frozen=True)
class BufferSummary:
    replicates: int
    years: int
    terminal_balance_mean: float
    insolvency_probability: float
    mean_first_insolvency_year: float | None


def simulate_buffer_replicates(pool: BufferPool, annual_issuance_tCO2e: float,
                               fire_rate: float, loss_given_fire_tCO2e,
                               years: int, n_replicates: int,
                               seed: int) -> BufferSummary:
    """Replicated buffer simulation with per-replicate derived seeds."""
    if n_replicates < 1:
        raise ValueError(f"n_replicates must be >= 1, got {n_replicates}")
    terminals = []
    first_years = []
    for i in range(n_replicates):
        traj = simulate_buffer(pool, annual_issuance_tCO2e, fire_rate,
                               loss_given_fire_tCO2e, years, derive_seed(seed, i))
        terminals.append(traj[-1].balance)
        insolvent_years = [y.year for y in traj if y.insolvent]
        if insolvent_years:
            first_years.append(insolvent_years[0])
    return BufferSummary(
        replicates=n_replicates,
        years=years,
        terminal_balance_mean=math.fsum(terminals) / n_replicates,
        insolvency_probability=len(first_years) / n_replicates,
        mean_first_insolvency_year=(math.fsum(first_years) / len(first_years)
                                    if first_years else None),
    )
