"""Input validation helpers shared by the estimator and the CLI."""
from __future__ import annotations

from typing import Mapping, Optional

import numpy as np

from .data import FIELDS, parse_record
from .disparity import AnnotatedExample
from .exceptions import EmptyDatasetError, SchemaError


def _columns_to_records(columns: Mapping) -> list[dict]:
    keys = [k for k in FIELDS if k in columns]
    if "group" not in keys:
        raise SchemaError("input lacks a 'group' column", field="group")
    arrays = {k: list(columns[k]) for k in keys}
    lengths = {len(v) for v in arrays.values()}
    if len(lengths) > 1:
        raise SchemaError(f"columns differ in length: {sorted(lengths)}")
    n = lengths.pop() if lengths else 0
    ids = arrays.get("id", [str(i) for i in range(n)])
    records = []
    for i in range(n):
        rec = {k: _none_if_missing(arrays[k][i]) for k in keys}
        rec["id"] = ids[i]
        records.append(rec)
    return records


def _none_if_missing(value):
    if value is None:
        return None
    if isinstance(value, (float, np.floating)) and np.isnan(value):
        return None
    if isinstance(value, np.generic):
        return value.item()
    return value


def check_examples(X, max_cost: float = 1.0) -> list[AnnotatedExample]:
    """Coerce ``X`` to a validated list of :class:`AnnotatedExample`.

    Accepted forms: a sequence of examples, a sequence of dicts, a mapping
    of column name to values, or a DataFrame (anything with ``to_dict``).
    NaN cells count as absent, which is how pandas reads empty CSV cells.
    """
    if hasattr(X, "to_dict") and hasattr(X, "columns"):
        X = {col: X[col].tolist() for col in X.columns}
    if isinstance(X, Mapping):
        records = _columns_to_records(X)
    else:
        records = list(X)
    examples = []
    for i, rec in enumerate(records):
        if isinstance(rec, AnnotatedExample):
            if rec.raw_cost is not None and rec.raw_cost > max_cost:
                raise SchemaError(f"raw_cost {rec.raw_cost!r} outside [0, {max_cost}]", field="raw_cost")
            examples.append(rec)
        elif isinstance(rec, Mapping):
            rec = {k: _none_if_missing(v) for k, v in rec.items()}
            rec.setdefault("id", str(i))
            examples.append(parse_record(rec, max_cost=max_cost))
        else:
            raise TypeError(f"cannot interpret {type(rec).__name__} as an annotated example")
    if not examples:
        raise EmptyDatasetError("no examples given")
    return examples


def examples_from_arrays(
    groups,
    y_true=None,
    y_pred=None,
    raw_cost=None,
    max_cost: float = 1.0,
) -> list[AnnotatedExample]:
    """Build examples from parallel 1-d arrays, sklearn-metric style."""
    groups = np.asarray(groups).ravel()
    columns: dict = {"group": groups}
    for name, arr in (("gold_label", y_true), ("prediction", y_pred), ("raw_cost", raw_cost)):
        if arr is not None:
            arr = np.asarray(arr).ravel()
            if arr.shape != groups.shape:
                raise SchemaError(f"{name} has {arr.shape[0]} entries, groups has {groups.shape[0]}", field=name)
            columns[name] = arr
    return check_examples(columns, max_cost=max_cost)


def check_frequencies(frequencies: Optional[Mapping]):
    if frequencies is None:
        return None
    from .disparity import GroupTag

    out = {GroupTag.parse(k): float(v) for k, v in frequencies.items()}
    for tag, f in out.items():
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"frequency of {tag.name.lower()} must lie in [0, 1], got {f}")
    return out
