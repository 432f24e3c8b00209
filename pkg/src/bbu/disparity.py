"""Groupwise disparity, amortized disparities and their spread.

A sample is a sequence of :class:`AnnotatedExample`. Each example belongs to
the protected group (+1), the unprotected group (-1) or neither (0), and
carries either a gold label / prediction pair or a precomputed cost.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .exceptions import (
    CostOutOfRangeError,
    EmptyGroupError,
    MissingFieldError,
    SchemaError,
    ZeroFrequencyError,
)


class GroupTag(enum.IntEnum):
    PROTECTED = 1
    UNPROTECTED = -1
    NEITHER = 0

    @classmethod
    def parse(cls, value) -> "GroupTag":
        """Coerce ``value`` to a tag, rejecting anything but -1, 0 and +1."""
        if isinstance(value, GroupTag):
            return value
        if isinstance(value, bool):
            raise SchemaError(f"invalid group tag {value!r}", field="group")
        if isinstance(value, str):
            text = value.strip()
            try:
                value = int(text)
            except ValueError:
                try:
                    value = float(text)
                except ValueError:
                    raise SchemaError(
                        f"invalid group tag {text!r}; expected -1, 0 or 1", field="group"
                    ) from None
        if isinstance(value, (float, np.floating)):
            if not float(value).is_integer():
                raise SchemaError(f"invalid group tag {value!r}", field="group")
            value = int(value)
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise SchemaError(
                f"invalid group tag {value!r}; expected -1, 0 or 1", field="group"
            ) from None


def _check_label(value, field):
    if value is None:
        return None
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (float, np.floating)) and float(value).is_integer():
        value = int(value)
    if isinstance(value, (int, np.integer)) and int(value) in (0, 1):
        return int(value)
    raise SchemaError(f"{field} must be 0 or 1, got {value!r}", field=field)


@dataclass(frozen=True)
class AnnotatedExample:
    """One audited observation.

    ``raw_cost`` is only range-checked against zero here; the upper bound
    ``C`` is enforced wherever the maximum cost is known.
    """

    id: str
    group: GroupTag
    gold_label: Optional[int] = None
    prediction: Optional[int] = None
    raw_cost: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "group", GroupTag.parse(self.group))
        object.__setattr__(self, "gold_label", _check_label(self.gold_label, "gold_label"))
        object.__setattr__(self, "prediction", _check_label(self.prediction, "prediction"))
        if self.raw_cost is not None:
            cost = float(self.raw_cost)
            if not math.isfinite(cost) or cost < 0:
                raise SchemaError(f"raw_cost must be a finite value >= 0, got {cost!r}",
                                  field="raw_cost")
            object.__setattr__(self, "raw_cost", cost)
        has_pair = self.gold_label is not None and self.prediction is not None
        if not has_pair and self.raw_cost is None:
            raise MissingFieldError(
                "example needs raw_cost or both gold_label and prediction",
                field="raw_cost",
            )


@dataclass(frozen=True)
class DisparityEstimate:
    delta_bar: float
    n_protected: int
    n_unprotected: int
    n_neither: int
    empirical_variance: float

    @property
    def n(self) -> int:
        return self.n_protected + self.n_unprotected + self.n_neither

    @property
    def minority_frequency(self) -> float:
        """Smaller of the two sample group frequencies, the sample analog of gamma."""
        return min(self.n_protected, self.n_unprotected) / self.n


CostResolver = Callable[[AnnotatedExample], float]
GroupResolver = Callable[[AnnotatedExample], GroupTag]


def raw_cost_of(example: AnnotatedExample) -> float:
    if example.raw_cost is None:
        raise MissingFieldError(f"example {example.id!r} has no raw_cost", field="raw_cost")
    return example.raw_cost


def example_group(example: AnnotatedExample) -> GroupTag:
    return example.group


def resolve_arrays(
    examples: Sequence[AnnotatedExample],
    cost_of: Optional[CostResolver] = None,
    group_of: Optional[GroupResolver] = None,
    max_cost: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Resolve every example to a ``(costs, signs)`` pair of arrays.

    Costs are validated eagerly against ``[0, max_cost]``.
    """
    cost_of = cost_of or raw_cost_of
    group_of = group_of or example_group
    n = len(examples)
    costs = np.empty(n, dtype=float)
    signs = np.empty(n, dtype=np.int8)
    for i, ex in enumerate(examples):
        c = float(cost_of(ex))
        if not (0.0 <= c <= max_cost):
            raise CostOutOfRangeError(
                f"cost {c!r} of example {ex.id!r} outside [0, {max_cost}]"
            )
        costs[i] = c
        signs[i] = int(GroupTag.parse(group_of(ex)))
    return costs, signs


def disparity_from_arrays(costs: np.ndarray, signs: np.ndarray) -> float:
    """Mean cost over ``signs == 1`` minus mean cost over ``signs == -1``."""
    protected = signs == 1
    unprotected = signs == -1
    if not protected.any() or not unprotected.any():
        raise EmptyGroupError(
            f"need both groups; got {int(protected.sum())} protected and "
            f"{int(unprotected.sum())} unprotected examples"
        )
    return float(np.mean(costs[protected]) - np.mean(costs[unprotected]))


def sample_frequencies(signs: np.ndarray) -> dict[GroupTag, float]:
    n = len(signs)
    return {tag: float(np.count_nonzero(signs == int(tag))) / n for tag in GroupTag}


def amortized_disparity(cost: float, group, group_frequency: float) -> float:
    """Single-example estimate of the disparity: ``cost * sign / frequency``.

    ``group_frequency`` is the probability that a random example shares this
    example's group. Examples in neither group contribute zero regardless of
    the frequency passed.
    """
    tag = GroupTag.parse(group)
    if tag is GroupTag.NEITHER:
        return 0.0
    if group_frequency <= 0:
        raise ZeroFrequencyError(f"group frequency must be > 0 for {tag.name.lower()} examples")
    if group_frequency > 1:
        raise ValueError(f"group frequency must be <= 1, got {group_frequency}")
    return cost * int(tag) / group_frequency


def amortized_from_arrays(
    costs: np.ndarray, signs: np.ndarray, frequencies: Mapping[GroupTag, float]
) -> np.ndarray:
    out = np.zeros(len(costs), dtype=float)
    for tag in (GroupTag.PROTECTED, GroupTag.UNPROTECTED):
        mask = signs == int(tag)
        if not mask.any():
            continue
        freq = frequencies[tag]
        if freq <= 0:
            raise ZeroFrequencyError(f"group frequency must be > 0 for {tag.name.lower()} examples")
        out[mask] = costs[mask] * int(tag) / freq
    return out


def _variance_from_arrays(costs, signs, frequencies=None) -> float:
    if frequencies is None:
        frequencies = sample_frequencies(signs)
    values = amortized_from_arrays(costs, signs, frequencies)
    return float(np.mean((values - values.mean()) ** 2))


def empirical_variance_of_amortized(
    examples: Sequence[AnnotatedExample],
    cost_of: Optional[CostResolver] = None,
    frequencies: Optional[Mapping] = None,
    *,
    group_of: Optional[GroupResolver] = None,
    max_cost: float = 1.0,
) -> float:
    """Population-style variance (divide by n) of the amortized disparities.

    ``frequencies`` maps group tags to population frequencies; when omitted
    the sample frequencies are used.
    """
    costs, signs = resolve_arrays(examples, cost_of, group_of, max_cost)
    disparity_from_arrays(costs, signs)  # raises EmptyGroupError
    if frequencies is not None:
        frequencies = {GroupTag.parse(k): float(v) for k, v in frequencies.items()}
    return _variance_from_arrays(costs, signs, frequencies)


def estimate_groupwise_disparity(
    examples: Sequence[AnnotatedExample],
    cost_of: Optional[CostResolver] = None,
    *,
    group_of: Optional[GroupResolver] = None,
    max_cost: float = 1.0,
    frequencies: Optional[Mapping] = None,
) -> DisparityEstimate:
    """Estimate the disparity as the difference in mean cost between groups.

    Examples in neither group are left out of both means but counted in
    ``n_neither``. ``frequencies`` only affects ``empirical_variance``.
    """
    costs, signs = resolve_arrays(examples, cost_of, group_of, max_cost)
    delta_bar = disparity_from_arrays(costs, signs)
    if frequencies is not None:
        frequencies = {GroupTag.parse(k): float(v) for k, v in frequencies.items()}
    return DisparityEstimate(
        delta_bar=delta_bar,
        n_protected=int(np.count_nonzero(signs == 1)),
        n_unprotected=int(np.count_nonzero(signs == -1)),
        n_neither=int(np.count_nonzero(signs == 0)),
        empirical_variance=_variance_from_arrays(costs, signs, frequencies),
    )
