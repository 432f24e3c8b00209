"""scikit-learn compatible front end.

>>> from bbu import BernsteinBoundedUnfairness
>>> audit = BernsteinBoundedUnfairness(measure="eo", confidence=0.95)
>>> audit.fit(examples)                                  # doctest: +SKIP
>>> audit.interval_, audit.claim_                        # doctest: +SKIP

``transform`` maps examples to their amortized disparities using the group
frequencies learned in ``fit``.
"""
from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bounds import BoundFamily, BoundParams, bias_claim, confidence_interval
from .disparity import (
    DisparityEstimate,
    amortized_from_arrays,
    disparity_from_arrays,
    resolve_arrays,
    sample_frequencies,
)
from .measures import MeasureSpec
from .simulation import VarianceMode
from .validation import check_examples, check_frequencies


class GammaWarning(UserWarning):
    """The sample contradicts the assumed lower bound on group frequency."""


class BernsteinBoundedUnfairness(TransformerMixin, BaseEstimator):
    """Disparity estimate with a Bernstein confidence interval.

    Parameters
    ----------
    measure : {"dp", "eo", "eodds", "custom"} or MeasureKind
        Fairness measure; selects how cost and group are resolved.
    confidence : float
        Interval confidence rho in [0, 1).
    gamma : float or None
        Assumed lower bound on both group frequencies. ``None`` uses the
        smaller sample group frequency, capped at 0.5.
    max_cost : float
        Upper bound C on the per-example cost.
    variance : {"empirical", "worst-case"}
        Empirical variance of the amortized disparities, or ``(C/gamma)^2``.
    direction : {"cost_is_failure", "cost_is_success"}
    bound : {"bernstein", "hoeffding"}
    frequencies : dict or None
        Population group frequencies for amortization; sample frequencies
        when ``None``.

    Attributes
    ----------
    estimate_ : DisparityEstimate
    gamma_ : float
    variance_ : float
        The sigma^2 fed to the bound.
    interval_ : ConfidenceInterval
    claim_ : BiasClaim
    frequencies_ : dict
    """

    def __init__(self, measure="custom", confidence=0.95, gamma=None, max_cost=1.0,
                 variance="empirical", direction="cost_is_failure", bound="bernstein",
                 frequencies=None):
        self.measure = measure
        self.confidence = confidence
        self.gamma = gamma
        self.max_cost = max_cost
        self.variance = variance
        self.direction = direction
        self.bound = bound
        self.frequencies = frequencies

    def _spec(self):
        return MeasureSpec(self.measure, self.direction, self.max_cost)

    def _resolve(self, X):
        spec = self._spec()
        examples = check_examples(X, max_cost=self.max_cost)
        return resolve_arrays(examples, spec.cost_of, spec.group_of, self.max_cost)

    def fit(self, X, y=None):
        """Estimate the disparity of ``X`` and its confidence interval.

        ``y`` is ignored; labels and predictions travel inside ``X``.
        """
        costs, signs = self._resolve(X)
        mode = VarianceMode(self.variance)
        family = BoundFamily(self.bound)
        delta_bar = disparity_from_arrays(costs, signs)

        freqs = check_frequencies(self.frequencies)
        self.frequencies_ = freqs if freqs is not None else sample_frequencies(signs)
        values = amortized_from_arrays(costs, signs, self.frequencies_)
        empirical = float(np.mean((values - values.mean()) ** 2))
        self.estimate_ = DisparityEstimate(
            delta_bar=delta_bar,
            n_protected=int(np.count_nonzero(signs == 1)),
            n_unprotected=int(np.count_nonzero(signs == -1)),
            n_neither=int(np.count_nonzero(signs == 0)),
            empirical_variance=empirical,
        )

        sample_gamma = self.estimate_.minority_frequency
        if self.gamma is None:
            self.gamma_ = min(sample_gamma, 0.5)
        else:
            self.gamma_ = float(self.gamma)
            if sample_gamma < self.gamma_:
                warnings.warn(
                    f"sample minority frequency {sample_gamma:.4g} is below gamma={self.gamma_:.4g}",
                    GammaWarning,
                    stacklevel=2,
                )
        envelope_sq = (self.max_cost / self.gamma_) ** 2
        if mode is VarianceMode.WORST_CASE:
            self.variance_ = envelope_sq
        else:
            # gamma is an assumption; the sample spread may exceed its envelope
            self.variance_ = min(empirical, envelope_sq)
        params = BoundParams(self.max_cost, self.gamma_, self.confidence, self.variance_, len(signs))
        self.params_ = params
        self.interval_ = confidence_interval(delta_bar, params, family)
        self.claim_ = bias_claim(self.interval_)
        return self

    def transform(self, X):
        """Amortized disparity of each example, shape ``(n_samples,)``."""
        check_is_fitted(self, "frequencies_")
        costs, signs = self._resolve(X)
        return amortized_from_arrays(costs, signs, self.frequencies_)

    def report(self) -> dict:
        check_is_fitted(self, "interval_")
        est, ci = self.estimate_, self.interval_
        return {
            "measure": self._spec().kind.value,
            "delta_bar": est.delta_bar,
            "half_width": ci.half_width,
            "lower": ci.lower,
            "upper": ci.upper,
            "rho": ci.confidence,
            "family": ci.family.value,
            "gamma": self.gamma_,
            "max_cost": float(self.max_cost),
            "variance_mode": VarianceMode(self.variance).value,
            "variance": self.variance_,
            "empirical_variance": est.empirical_variance,
            "n": est.n,
            "n_protected": est.n_protected,
            "n_unprotected": est.n_unprotected,
            "n_neither": est.n_neither,
            "verdict": self.claim_.value,
        }

