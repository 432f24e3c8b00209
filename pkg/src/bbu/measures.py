"""Standard fairness measures as (cost, annotation) resolver pairs.

=====================  ====================  ==========================
measure                cost                  group
=====================  ====================  ==========================
demographic parity     1 - y_hat             f(x)
equal opportunity      1 - y_hat             f(x) * y(x)
equalized odds         1[y != y_hat]         f(x) * y(x)
custom                 raw_cost              f(x)
=====================  ====================  ==========================

Under ``cost_is_success`` the two prediction-based costs become ``y_hat``,
and the zero-one loss becomes ``1[y == y_hat]``; for a raw cost ``c`` it is
``C - c``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .disparity import AnnotatedExample, GroupTag
from .exceptions import MissingFieldError


class MeasureKind(str, enum.Enum):
    DEMOGRAPHIC_PARITY = "demographic_parity"
    EQUAL_OPPORTUNITY = "equal_opportunity"
    EQUALIZED_ODDS = "equalized_odds"
    CUSTOM_COST = "custom_cost"


class Direction(str, enum.Enum):
    COST_IS_FAILURE = "cost_is_failure"
    COST_IS_SUCCESS = "cost_is_success"


MEASURE_ALIASES = {
    "dp": MeasureKind.DEMOGRAPHIC_PARITY,
    "eo": MeasureKind.EQUAL_OPPORTUNITY,
    "eodds": MeasureKind.EQUALIZED_ODDS,
    "custom": MeasureKind.CUSTOM_COST,
}


@dataclass(frozen=True)
class MeasureSpec:
    kind: MeasureKind = MeasureKind.CUSTOM_COST
    direction: Direction = Direction.COST_IS_FAILURE
    max_cost: float = 1.0

    def __post_init__(self):
        kind = self.kind
        if isinstance(kind, str) and kind in MEASURE_ALIASES:
            kind = MEASURE_ALIASES[kind]
        object.__setattr__(self, "kind", MeasureKind(kind))
        object.__setattr__(self, "direction", Direction(self.direction))

    def cost_of(self, example: AnnotatedExample) -> float:
        return resolve_cost(example, self)

    def group_of(self, example: AnnotatedExample) -> GroupTag:
        return resolve_group(example, self)


def _require(example, field):
    value = getattr(example, field)
    if value is None:
        raise MissingFieldError(f"example {example.id!r} is missing {field}", field=field)
    return value


def resolve_cost(example: AnnotatedExample, spec: MeasureSpec) -> float:
    success = spec.direction is Direction.COST_IS_SUCCESS
    kind = spec.kind
    if kind is MeasureKind.CUSTOM_COST:
        cost = _require(example, "raw_cost")
        return spec.max_cost - cost if success else cost
    y_hat = _require(example, "prediction")
    if kind is MeasureKind.EQUALIZED_ODDS:
        y = _require(example, "gold_label")
        wrong = float(y != y_hat)
        return 1.0 - wrong if success else wrong
    return float(y_hat) if success else 1.0 - y_hat


def resolve_group(example: AnnotatedExample, spec: MeasureSpec) -> GroupTag:
    if spec.kind in (MeasureKind.EQUAL_OPPORTUNITY, MeasureKind.EQUALIZED_ODDS):
        y = _require(example, "gold_label")
        # unqualified examples (y = 0) drop out of both groups
        return GroupTag(int(example.group) * y)
    return example.group
