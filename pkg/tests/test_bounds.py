import math

import pytest

from bbu import (
    BiasClaim,
    BoundParams,
    ConfidenceInterval,
    bernstein_tail_bound,
    bias_claim,
    hoeffding_half_width,
    interval_half_width,
    raw_bernstein_tail_bound,
    required_sample_size,
)
from bbu.bounds import raw_hoeffding_tail_bound, sample_size_threshold
from bbu.exceptions import (
    InvalidConfidenceError,
    InvalidParamsError,
    NonPositiveDeltaError,
    NonPositiveTError,
)

WORST = BoundParams.worst_case(1.0, 0.5, 0.95)


def scan_required_n(delta, params, start=1):
    """Smallest n whose tail bound at t = delta drops below 1 - rho, by linear scan."""
    alpha = 1 - params.confidence
    n = start
    while 2 * math.exp(-n * delta ** 2 / (2 * params.variance + 2 * params.max_cost / (3 * params.gamma) * delta)) >= alpha:
        n += 1
    return n


class TestParams:
    def test_envelope(self):
        assert BoundParams(2.0, 0.25, 0.9, 1.0).envelope == 8.0

    @pytest.mark.parametrize("kwargs", [
        dict(max_cost=0, gamma=0.5, confidence=0.9, variance=0),
        dict(max_cost=1, gamma=0.6, confidence=0.9, variance=0),
        dict(max_cost=1, gamma=0.0, confidence=0.9, variance=0),
        dict(max_cost=1, gamma=0.5, confidence=1.0, variance=0),
        dict(max_cost=1, gamma=0.5, confidence=0.9, variance=4.1),
        dict(max_cost=1, gamma=0.5, confidence=0.9, variance=-1),
        dict(max_cost=1, gamma=0.5, confidence=0.9, variance=1, sample_size=0),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidParamsError):
            BoundParams(**kwargs)

    def test_invalid_confidence_type(self):
        with pytest.raises(InvalidConfidenceError):
            BoundParams(1, 0.5, 1.2, 0)


class TestTailBound:
    def test_vacuous_near_zero(self):
        p = WORST.with_n(100)
        assert raw_bernstein_tail_bound(p, 1e-300) == pytest.approx(2.0)
        assert bernstein_tail_bound(p, 1e-300) == 1.0

    def test_equality_point_at_11903(self):
        assert bernstein_tail_bound(WORST.with_n(11903), 0.05) == pytest.approx(0.05, abs=1e-3)

    def test_doubling_n_decreases(self):
        p = BoundParams(1.0, 0.5, 0.95, 1.0)
        assert bernstein_tail_bound(p.with_n(200), 0.1) < bernstein_tail_bound(p.with_n(100), 0.1)

    @pytest.mark.parametrize("t", [0.0, -0.1])
    def test_non_positive_t(self, t):
        with pytest.raises(NonPositiveTError):
            bernstein_tail_bound(WORST.with_n(10), t)

    def test_needs_sample_size(self):
        with pytest.raises(InvalidParamsError):
            bernstein_tail_bound(WORST, 0.1)


class TestHalfWidth:
    def test_zero_variance(self):
        p = BoundParams(1.0, 0.25, 0.9, 0.0, 50)
        b = -(2 * 1.0 / (3 * 0.25)) * math.log(0.05)
        assert interval_half_width(p) == pytest.approx(b / 50, rel=1e-15)

    def test_winobias_threshold(self):
        t = interval_half_width(WORST.with_n(3160))
        assert abs(t - 0.0975) <= 0.0005

    def test_round_trip(self):
        p = BoundParams(1.0, 0.2, 0.9, 3.0, 400)
        t = interval_half_width(p)
        assert raw_bernstein_tail_bound(p, t) == pytest.approx(0.1, rel=1e-9)

    def test_wider_at_small_gamma(self):
        narrow = interval_half_width(BoundParams.worst_case(1.0, 0.5, 0.95, 500))
        wide = interval_half_width(BoundParams.worst_case(1.0, 0.1, 0.95, 500))
        assert narrow < wide


class TestHoeffding:
    def test_hand_value(self):
        t = hoeffding_half_width(BoundParams(1.0, 0.5, 0.95, 0.0, 1))
        assert t == pytest.approx(2 * math.sqrt(2 * math.log(40)), rel=1e-12)
        assert t == pytest.approx(5.4324, abs=1e-4)

    def test_quadrupling_n_halves(self):
        p = BoundParams(1.0, 0.3, 0.9, 0.0)
        assert hoeffding_half_width(p.with_n(400)) == pytest.approx(hoeffding_half_width(p.with_n(100)) / 2, rel=1e-14)

    def test_bernstein_tighter_at_low_variance(self):
        m2 = (1.0 / 0.5) ** 2
        p = BoundParams(1.0, 0.5, 0.95, 0.01 * m2, 1000)
        assert interval_half_width(p) < hoeffding_half_width(p)

    def test_round_trip(self):
        p = BoundParams(1.0, 0.4, 0.99, 0.0, 77)
        assert raw_hoeffding_tail_bound(p, hoeffding_half_width(p)) == pytest.approx(0.01, rel=1e-9)

    def test_invalid_confidence(self):
        with pytest.raises(InvalidConfidenceError):
            hoeffding_half_width(BoundParams(1.0, 0.5, 1.0, 0.0, 10))


class TestPlanner:
    def test_headline(self):
        assert required_sample_size(0.05, WORST) == 11903

    def test_winobias_size(self):
        assert required_sample_size(0.0975, WORST) <= 3160
        assert required_sample_size(0.097, WORST) > 3160

    def test_scan_oracle(self):
        assert scan_required_n(0.1, WORST) == 3001
        assert required_sample_size(0.1, WORST) == 3001

    def test_delta_one(self):
        assert scan_required_n(1.0, WORST) == 35
        assert required_sample_size(1.0, WORST) == 35

    def test_matches_scan_over_grid(self):
        for delta in (0.2, 0.35, 0.5, 0.8):
            for params in (WORST, BoundParams(1.0, 0.3, 0.9, 0.5), BoundParams(2.0, 0.1, 0.99, 10.0)):
                assert required_sample_size(delta, params) == scan_required_n(delta, params)

    def test_consistent_with_half_width(self):
        n = required_sample_size(0.05, WORST)
        assert interval_half_width(WORST.with_n(n)) < 0.05
        assert interval_half_width(WORST.with_n(n - 1)) >= 0.05

    def test_ignores_sample_size(self):
        assert required_sample_size(0.05, WORST.with_n(5)) == 11903

    def test_close_to_threshold(self):
        threshold = sample_size_threshold(0.05, WORST)
        assert 11902 < threshold < 11903

    @pytest.mark.parametrize("delta", [0.0, -0.01])
    def test_non_positive_delta(self, delta):
        with pytest.raises(NonPositiveDeltaError):
            required_sample_size(delta, WORST)

    def test_delta_above_max_cost(self):
        with pytest.raises(InvalidParamsError):
            required_sample_size(1.5, WORST)


class TestBiasClaim:
    def test_below_winobias_threshold_is_inconclusive(self):
        assert bias_claim(ConfidenceInterval(0.06, 0.0974, 0.95)) is BiasClaim.INCONCLUSIVE

    def test_zero_center(self):
        assert bias_claim(ConfidenceInterval(0.0, 0.3, 0.95)) is BiasClaim.INCONCLUSIVE
        assert bias_claim(ConfidenceInterval(0.0, 1e-9, 0.95)) is BiasClaim.INCONCLUSIVE

    def test_excludes_zero(self):
        assert bias_claim(ConfidenceInterval(0.06, 0.059, 0.95)) is BiasClaim.BIASED_AGAINST_PROTECTED
        assert bias_claim(ConfidenceInterval(-0.06, 0.059, 0.95)) is BiasClaim.BIASED_AGAINST_UNPROTECTED

    def test_touching_zero_is_inconclusive(self):
        assert bias_claim(ConfidenceInterval(0.5, 0.5, 0.95)) is BiasClaim.INCONCLUSIVE

    def test_interval_endpoints(self):
        ci = ConfidenceInterval(0.1, 0.05, 0.9, "hoeffding")
        assert (ci.lower, ci.upper) == pytest.approx((0.05, 0.15))
        assert 0.12 in ci and 0.2 not in ci
        assert ci.family.value == "hoeffding"
