"""Monte Carlo propagation, one-at-a-time sensitivity, and EVPI.

A model here is any callable taking a mapping of parameter values and
returning either a scalar or a mapping of named scalar outputs. The
pipeline wraps whole-scenario evaluation in such a callable; the unit
here stays generic so small closed-form models can be propagated too.

Replicate i draws every parameter from an independent generator seeded by
derive_seed(seed, i), so results are bit-reproducible for a fixed
(seed, n) and identical whether replicates run serially or fanned out.
Summary reductions use exact summation (math.fsum), which makes them
order-insensitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Mapping, Sequence

import numpy as np

from .seeding import replicate_rng

DIST_KINDS = ("point", "uniform", "normal", "triangular")


class ReplicateError(RuntimeError):
    """A scenario evaluation failed inside a Monte Carlo replicate."""

    def __init__(self, replicate: int, cause: BaseException):
        super().__init__(f"replicate {replicate} failed: {cause}")
        self.replicate = replicate
        self.cause = cause


@dataclass(frozen=True)
class DistributionSpec:
    """One uncertain parameter: point, uniform, normal, or triangular."""

    kind: str
    value: float | None = None          # point
    lo: float | None = None             # uniform / triangular
    hi: float | None = None
    mode: float | None = None           # triangular
    mean: float | None = None           # normal
    sd: float | None = None

    def __post_init__(self):
        if self.kind not in DIST_KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "point":
            if self.value is None:
                raise ValueError("point distribution needs 'value'")
        elif self.kind == "uniform":
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise ValueError(f"uniform needs lo < hi, got lo={self.lo}, hi={self.hi}")
        elif self.kind == "normal":
            if self.mean is None or self.sd is None or not self.sd > 0:
                raise ValueError(f"normal needs mean and sd > 0, got sd={self.sd}")
        else:  # triangular
            if self.lo is None or self.mode is None or self.hi is None:
                raise ValueError("triangular needs lo, mode, hi")
            if not self.lo <= self.mode <= self.hi:
                raise ValueError(
                    f"triangular needs lo <= mode <= hi, got {self.lo}, {self.mode}, {self.hi}")

    @classmethod
    def point(cls, value: float) -> "DistributionSpec":
        return cls(kind="point", value=float(value))

    @classmethod
    def from_config(cls, obj) -> "DistributionSpec":
        """Build from a config value: a bare number or a kind-keyed mapping."""
        if isinstance(obj, (int, float)) and not isinstance(obj, bool):
            return cls.point(float(obj))
        if not isinstance(obj, Mapping):
            raise ValueError(f"distribution must be a number or a mapping, got {obj!r}")
        kind = obj.get("kind")
        known = {"kind", "value", "lo", "hi", "mode", "mean", "sd"}
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown distribution field(s) {sorted(extra)}")
        fields = {k: float(v) for k, v in obj.items() if k != "kind"}
        return cls(kind=str(kind), **fields)

    @property
    def is_point(self) -> bool:
        return self.kind == "point"

    def base_value(self) -> float:
        """Deterministic center used when a single representative is needed."""
        if self.kind == "point":
            return self.value
        if self.kind == "uniform":
            return (self.lo + self.hi) / 2.0
        if self.kind == "normal":
            return self.mean
        return self.mode

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "point":
            return self.value
        if self.kind == "uniform":
            return float(rng.uniform(self.lo, self.hi))
        if self.kind == "normal":
            return float(rng.normal(self.mean, self.sd))
        if self.lo == self.hi:
            return self.lo
        return float(rng.triangular(self.lo, self.mode, self.hi))


@dataclass(frozen=True)
class MonteCarloSummary:
    n: int
    mean: float
    sd: float
    ci_low: float
    ci_high: float
    seed: int
    ci_level: float
    ci_method: str = "normal"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.sd < 0:
            raise ValueError(f"sd must be >= 0, got {self.sd}")
        if not self.ci_low <= self.mean <= self.ci_high:
            raise ValueError(
                f"CI [{self.ci_low}, {self.ci_high}] does not bracket mean {self.mean}")

    def as_dict(self) -> dict:
        return {
            "n": self.n, "mean": self.mean, "sd": self.sd,
            "ci_low": self.ci_low, "ci_high": self.ci_high,
            "seed": self.seed, "ci_level": self.ci_level, "ci_method": self.ci_method,
        }


def _as_output(result, output: str | None) -> float:
    if isinstance(result, Mapping):
        if output is None:
            raise ValueError("model returned a mapping; an output name is required")
        if output not in result:
            raise KeyError(f"model outputs {sorted(result)} have no entry {output!r}")
        return float(result[output])
    return float(result)


def _sample_params(distributions: Mapping[str, DistributionSpec],
                   rng: np.random.Generator) -> dict[str, float]:
    # Sorted parameter order pins the draw sequence regardless of dict order.
    return {name: distributions[name].sample(rng) for name in sorted(distributions)}


def summarize(samples: Sequence[float], seed: int, ci_level: float,
              ci_method: str = "normal") -> MonteCarloSummary:
    """Mean, sample sd, and CI of a sample set (exact-sum reductions)."""
    n = len(samples)
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if not 0.0 < ci_level < 1.0:
        raise ValueError(f"ci_level must be in (0, 1), got {ci_level}")
    mean = math.fsum(samples) / n
    var = math.fsum((x - mean) ** 2 for x in samples) / (n - 1)
    sd = math.sqrt(var)
    if ci_method == "normal":
        z = NormalDist().inv_cdf((1.0 + ci_level) / 2.0)
        half = z * sd / math.sqrt(n)
        ci_low, ci_high = mean - half, mean + half
    elif ci_method == "percentile":
        alpha = (1.0 - ci_level) / 2.0
        ci_low = float(np.quantile(samples, alpha))
        ci_high = float(np.quantile(samples, 1.0 - alpha))
    else:
        raise ValueError(f"unknown ci_method {ci_method!r}")
    return MonteCarloSummary(n=n, mean=mean, sd=sd, ci_low=ci_low, ci_high=ci_high,
                             seed=seed, ci_level=ci_level, ci_method=ci_method)


def propagate(model: Callable[[Mapping[str, float]], object],
              distributions: Mapping[str, DistributionSpec],
              output: str | None = None,
              n: int = 1000, seed: int = 0, ci_level: float = 0.95,
              ci_method: str = "normal") -> MonteCarloSummary:
    """Monte Carlo propagation of parameter uncertainty through a model."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    samples = []
    for i in range(n):
        rng = replicate_rng(seed, i)
        params = _sample_params(distributions, rng)
        try:
            samples.append(_as_output(model(params), output))
        except Exception as exc:
            raise ReplicateError(i, exc) from exc
    return summarize(samples, seed=seed, ci_level=ci_level, ci_method=ci_method)


@dataclass(frozen=True)
class SensitivityEntry:
    parameter: str
    output_low: float
    output_high: float
    range: float

    def as_dict(self) -> dict:
        return {"parameter": self.parameter, "output_low": self.output_low,
                "output_high": self.output_high, "range": self.range}


def sensitivity(model: Callable[[Mapping[str, float]], object],
                base: Mapping[str, float],
                swings: Mapping[str, tuple[float, float]],
                output: str | None = None) -> list[SensitivityEntry]:
    """One-at-a-time swings, sorted by descending |range| (tornado order)."""
    entries = []
    for name, (low, high) in swings.items():
        outs = []
        for value in (low, high):
            params = dict(base)
            params[name] = value
            try:
                outs.append(_as_output(model(params), output))
            except Exception as exc:
                raise RuntimeError(f"sensitivity evaluation failed for "
                                   f"parameter {name!r}: {exc}") from exc
        entries.append(SensitivityEntry(parameter=name, output_low=outs[0],
                                        output_high=outs[1], range=outs[1] - outs[0]))
    entries.sort(key=lambda e: -abs(e.range))
    return entries


def evpi(actions: Sequence[str],
         utility: Callable[[str, Mapping[str, float]], float],
         distributions: Mapping[str, DistributionSpec],
         n: int = 1000, seed: int = 0) -> float:
    """Expected value of perfect information over a finite action set.

    EVPI = mean_i max_a U(a, theta_i) - max_a mean_i U(a, theta_i),
    clamped at 0 (it is non-negative up to Monte Carlo noise).
    """
    if not actions:
        raise ValueError("need at least one action")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    per_action: dict[str, list[float]] = {a: [] for a in actions}
    best_per_sample = []
    for i in range(n):
        rng = replicate_rng(seed, i)
        params = _sample_params(distributions, rng)
        utilities = [float(utility(a, params)) for a in actions]
        for a, u in zip(actions, utilities):
            per_action[a].append(u)
        best_per_sample.append(max(utilities))
    value_with_information = math.fsum(best_per_sample) / n
    value_without = max(math.fsum(per_action[a]) / n for a in actions)
    return max(value_with_information - value_without, 0.0)
