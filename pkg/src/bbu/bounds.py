"""Concentration bounds for the disparity estimate.

The amortized disparities are bounded in ``[-C/gamma, C/gamma]``. Inverting
the Bernstein tail bound for that envelope gives a confidence-interval
half-width in closed form; inverting it for the sample size gives the
annotation budget needed to certify a given disparity.

All logarithms are natural.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

from .exceptions import (
    InvalidConfidenceError,
    InvalidParamsError,
    NonPositiveDeltaError,
    NonPositiveTError,
)


def check_confidence(rho: float) -> float:
    rho = float(rho)
    if not (0.0 <= rho < 1.0):
        raise InvalidConfidenceError(f"confidence must lie in [0, 1), got {rho!r}")
    return rho


@dataclass(frozen=True)
class BoundParams:
    """Inputs shared by the tail bound, half-width and planner.

    ``sample_size`` may be left as ``None`` for the planner, which solves for it.
    """

    max_cost: float
    gamma: float
    confidence: float
    variance: float
    sample_size: Optional[int] = None

    def __post_init__(self):
        if not (self.max_cost > 0 and math.isfinite(self.max_cost)):
            raise InvalidParamsError(f"max_cost must be positive and finite, got {self.max_cost!r}")
        if not (0.0 < self.gamma <= 0.5):
            raise InvalidParamsError(f"gamma must lie in (0, 0.5], got {self.gamma!r}")
        check_confidence(self.confidence)
        if not (self.variance >= 0):
            raise InvalidParamsError(f"variance must be >= 0, got {self.variance!r}")
        # tolerate rounding in callers that compute m**2 themselves
        if self.variance > self.envelope ** 2 * (1 + 1e-12):
            raise InvalidParamsError(
                f"variance {self.variance!r} exceeds the envelope bound (C/gamma)^2 = {self.envelope ** 2!r}"
            )
        if self.sample_size is not None:
            if int(self.sample_size) != self.sample_size or self.sample_size < 1:
                raise InvalidParamsError(f"sample_size must be a positive integer, got {self.sample_size!r}")
            object.__setattr__(self, "sample_size", int(self.sample_size))

    @property
    def envelope(self) -> float:
        """m = C / gamma, the bound on each amortized disparity."""
        return self.max_cost / self.gamma

    @classmethod
    def worst_case(cls, max_cost, gamma, confidence, sample_size=None) -> "BoundParams":
        """Params with the maximal variance ``(C/gamma)^2``."""
        return cls(max_cost, gamma, confidence, (max_cost / gamma) ** 2, sample_size)

    def with_n(self, n: int) -> "BoundParams":
        return replace(self, sample_size=n)

    def _n(self) -> int:
        if self.sample_size is None:
            raise InvalidParamsError("sample_size is required here")
        return self.sample_size


class BoundFamily(str, enum.Enum):
    BERNSTEIN = "bernstein"
    HOEFFDING = "hoeffding"


class BiasClaim(str, enum.Enum):
    BIASED_AGAINST_PROTECTED = "biased_against_protected"
    BIASED_AGAINST_UNPROTECTED = "biased_against_unprotected"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConfidenceInterval:
    center: float
    half_width: float
    confidence: float
    family: BoundFamily = BoundFamily.BERNSTEIN

    def __post_init__(self):
        check_confidence(self.confidence)
        if self.half_width < 0 or math.isnan(self.half_width):
            raise InvalidParamsError(f"half_width must be >= 0, got {self.half_width!r}")
        object.__setattr__(self, "family", BoundFamily(self.family))

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def __contains__(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _log_half_alpha(rho: float) -> float:
    # log[(1 - rho) / 2], always negative
    return math.log((1.0 - rho) / 2.0)


def raw_bernstein_tail_bound(params: BoundParams, t: float) -> float:
    """Unclipped ``2 exp(-n t^2 / (2 sigma^2 + (2C / 3 gamma) t))``; lies in (0, 2]."""
    if not t > 0:
        raise NonPositiveTError(f"deviation t must be > 0, got {t!r}")
    n = params._n()
    denom = 2.0 * params.variance + (2.0 * params.envelope / 3.0) * t
    return 2.0 * math.exp(-n * t * t / denom)


def bernstein_tail_bound(params: BoundParams, t: float) -> float:
    """Upper bound on ``Pr[|delta_bar - delta| > t]``, clipped to [0, 1]."""
    return min(1.0, raw_bernstein_tail_bound(params, t))


def interval_half_width(params: BoundParams) -> float:
    """Half-width ``t`` at which the Bernstein tail bound equals ``1 - rho``.

    Positive root of ``n t^2 + log[(1-rho)/2] (2C/3gamma) t + 2 sigma^2 log[(1-rho)/2] = 0``.
    """
    check_confidence(params.confidence)
    n = params._n()
    log_half_alpha = _log_half_alpha(params.confidence)
    b = -(2.0 * params.envelope / 3.0) * log_half_alpha
    disc = b * b - 8.0 * n * params.variance * log_half_alpha
    return (b + math.sqrt(disc)) / (2.0 * n)


def raw_hoeffding_tail_bound(params: BoundParams, t: float) -> float:
    """``2 exp(-n t^2 / (2 m^2))`` for variables in ``[-m, m]``."""
    if not t > 0:
        raise NonPositiveTError(f"deviation t must be > 0, got {t!r}")
    n = params._n()
    m = params.envelope
    return 2.0 * math.exp(-n * t * t / (2.0 * m * m))


def hoeffding_half_width(params: BoundParams) -> float:
    """Two-sided Hoeffding half-width over ``[-C/gamma, C/gamma]``; ignores the variance."""
    check_confidence(params.confidence)
    n = params._n()
    return params.envelope * math.sqrt(2.0 * math.log(2.0 / (1.0 - params.confidence)) / n)


def half_width(params: BoundParams, family=BoundFamily.BERNSTEIN) -> float:
    if BoundFamily(family) is BoundFamily.HOEFFDING:
        return hoeffding_half_width(params)
    return interval_half_width(params)


def confidence_interval(center: float, params: BoundParams, family=BoundFamily.BERNSTEIN) -> ConfidenceInterval:
    family = BoundFamily(family)
    return ConfidenceInterval(center, half_width(params, family), params.confidence, family)


def sample_size_threshold(delta_bar: float, params: BoundParams) -> float:
    """Real-valued right-hand side of the strict sample-size inequality."""
    if not delta_bar > 0:
        raise NonPositiveDeltaError("no finite sample size certifies bias when delta_bar <= 0")
    if delta_bar > params.max_cost:
        raise InvalidParamsError(f"delta_bar {delta_bar!r} exceeds max_cost {params.max_cost!r}")
    log_half_alpha = _log_half_alpha(params.confidence)
    numer = (2.0 * params.variance + (2.0 * params.envelope / 3.0) * delta_bar) * (-log_half_alpha)
    return numer / (delta_bar * delta_bar)


def required_sample_size(delta_bar: float, params: BoundParams) -> int:
    """Smallest ``n`` whose interval around ``delta_bar`` excludes zero.

    ``params.sample_size`` is ignored. The strict inequality is resolved by
    flooring and adding one, so an integral threshold is itself excluded.
    The result is then nudged by at most a step or two so that it agrees
    with :func:`interval_half_width` where rounding puts the two formulas on
    opposite sides of the boundary.
    """
    threshold = sample_size_threshold(delta_bar, params)
    n = max(1, math.floor(threshold) + 1)
    while interval_half_width(params.with_n(n)) >= delta_bar:
        n += 1
    while n > 1 and interval_half_width(params.with_n(n - 1)) < delta_bar:
        n -= 1
    return n


def bias_claim(interval: ConfidenceInterval) -> BiasClaim:
    """Directional verdict read off a two-sided interval.

    Costs are minimized, so a positive disparity means the protected group
    incurs more cost.
    """
    if interval.lower > 0:
        return BiasClaim.BIASED_AGAINST_PROTECTED
    if interval.upper < 0:
        return BiasClaim.BIASED_AGAINST_UNPROTECTED
    return BiasClaim.INCONCLUSIVE
