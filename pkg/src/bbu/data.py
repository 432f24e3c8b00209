"""Reading and writing annotated examples; synthetic populations.

Example files use the columns ``id,group,gold_label,prediction,raw_cost``
either as CSV (empty cell = absent) or as JSONL (absent keys omitted or
``null``). Population files carry an arbitrary number of named groups in
the columns ``id,group_id,raw_cost``.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .disparity import AnnotatedExample, GroupTag, disparity_from_arrays
from .exceptions import (
    EmptyDatasetError,
    EmptyGroupError,
    InvalidConfigError,
    ParseError,
    SchemaError,
)

FIELDS = ("id", "group", "gold_label", "prediction", "raw_cost")
POPULATION_FIELDS = ("id", "group_id", "raw_cost")

# Per-genre (in-genre cost, out-genre cost, delta) of annotator disagreement
# on the MNLI dev set.
MNLI_GENRE_COSTS = {
    "facetoface": (0.116, 0.128, -0.012),
    "fiction": (0.122, 0.128, -0.006),
    "government": (0.154, 0.124, 0.029),
    "letters": (0.105, 0.130, -0.024),
    "nineeleven": (0.115, 0.129, -0.014),
    "oup": (0.132, 0.127, 0.005),
    "slate": (0.147, 0.125, 0.022),
    "telephone": (0.125, 0.127, -0.002),
    "travel": (0.111, 0.129, -0.018),
    "verbatim": (0.146, 0.125, 0.021),
}

PathLike = Union[str, Path]


def _infer_format(path: Path, fmt: Optional[str]) -> str:
    if fmt is None:
        fmt = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson", ".json") else "csv"
    fmt = fmt.lower()
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}; expected csv or jsonl")
    return fmt


def _blank(value) -> bool:
    return value is None or (isinstance(value, str) and value.strip() == "")


def _parse_label(value, name, line):
    if _blank(value):
        return None
    if isinstance(value, str):
        value = value.strip()
        if value not in ("0", "1"):
            raise SchemaError(f"{name} must be 0, 1 or empty, got {value!r}", field=name, line=line)
        return int(value)
    if isinstance(value, bool) or value not in (0, 1):
        raise SchemaError(f"{name} must be 0, 1 or empty, got {value!r}", field=name, line=line)
    return int(value)


def _parse_cost(value, max_cost, line):
    if _blank(value):
        return None
    try:
        cost = float(value)
    except (TypeError, ValueError):
        raise SchemaError(f"raw_cost is not a number: {value!r}", field="raw_cost", line=line) from None
    if not (math.isfinite(cost) and 0.0 <= cost <= max_cost):
        raise SchemaError(f"raw_cost {cost!r} outside [0, {max_cost}]", field="raw_cost", line=line)
    return cost


def parse_record(record: dict, line: Optional[int] = None, max_cost: float = 1.0) -> AnnotatedExample:
    """Validate one raw record (CSV row or JSON object) into an example."""
    if "group" not in record or _blank(record["group"]):
        raise SchemaError("missing required field 'group'", field="group", line=line)
    if "id" not in record or _blank(record["id"]):
        raise SchemaError("missing required field 'id'", field="id", line=line)
    try:
        return AnnotatedExample(
            id=str(record["id"]),
            group=GroupTag.parse(record["group"]),
            gold_label=_parse_label(record.get("gold_label"), "gold_label", line),
            prediction=_parse_label(record.get("prediction"), "prediction", line),
            raw_cost=_parse_cost(record.get("raw_cost"), max_cost, line),
        )
    except SchemaError as exc:
        if exc.line is None:
            raise type(exc)(str(exc), field=exc.field, line=line) from None
        raise


def _read_csv_records(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise ParseError(str(exc), line=1) from None
        header = [h.strip() for h in header]
        if "group" not in header:
            raise SchemaError("header lacks required field 'group'", field="group", line=1)
        if "id" not in header:
            raise SchemaError("header lacks required field 'id'", field="id", line=1)
        while True:
            try:
                row = next(reader)
            except StopIteration:
                return
            except csv.Error as exc:
                raise ParseError(str(exc), line=reader.line_num) from None
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=line)
            yield line, dict(zip(header, row))


def _read_jsonl_records(path: Path):
    with open(path, encoding="utf-8") as fh:
        for line, text in enumerate(fh, 1):
            if not text.strip():
                continue
            try:
                record = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=line) from None
            if not isinstance(record, dict):
                raise ParseError("each line must be a JSON object", line=line)
            yield line, record


def load_examples(path: PathLike, format: Optional[str] = None, max_cost: float = 1.0) -> list[AnnotatedExample]:
    """Read and validate every row of an example file, preserving order.

    Raises
    ------
    ParseError
        A line is malformed; the error carries the line number.
    SchemaError
        A field is missing or out of range; the error names the field.
    EmptyDatasetError
        The file holds no examples.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    records = _read_csv_records(path) if fmt == "csv" else _read_jsonl_records(path)
    examples = [parse_record(rec, line, max_cost) for line, rec in records]
    if not examples:
        raise EmptyDatasetError(f"{path} contains no examples")
    return examples


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_examples(examples: Iterable[AnnotatedExample], path: PathLike, format: Optional[str] = None) -> None:
    path = Path(path)
    fmt = _infer_format(path, format)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(FIELDS)
            for ex in examples:
                writer.writerow([ex.id, int(ex.group), _fmt(ex.gold_label), _fmt(ex.prediction), _fmt(ex.raw_cost)])
        else:
            for ex in examples:
                rec = {"id": ex.id, "group": int(ex.group)}
                for name in ("gold_label", "prediction", "raw_cost"):
                    value = getattr(ex, name)
                    if value is not None:
                        rec[name] = value
                fh.write(json.dumps(rec) + "\n")


@dataclass(frozen=True)
class SyntheticPopulationConfig:
    """Recipe for a population of named groups with planted mean costs.

    Each group's costs are drawn uniformly from ``mean +/- spread`` and
    clamped to [0, 1]. Clamping pulls the realized mean toward the interior,
    so configs whose support crosses a boundary trigger a warning.
    """

    group_means: Sequence[float]
    population_size: int = 20_000
    group_frequencies: Optional[Sequence[float]] = None
    spread: Union[float, Sequence[float]] = 0.05
    seed: int = 0
    group_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        means = tuple(float(m) for m in self.group_means)
        k = len(means)
        if k < 1:
            raise InvalidConfigError("need at least one group")
        if any(not 0.0 <= m <= 1.0 for m in means):
            raise InvalidConfigError(f"group means must lie in [0, 1], got {means}")
        object.__setattr__(self, "group_means", means)

        freqs = self.group_frequencies
        freqs = (1.0 / k,) * k if freqs is None else tuple(float(f) for f in freqs)
        if len(freqs) != k:
            raise InvalidConfigError("group_frequencies and group_means differ in length")
        if any(f < 0 for f in freqs) or not math.isclose(sum(freqs), 1.0, abs_tol=1e-9):
            raise InvalidConfigError(f"group frequencies must be a probability vector, got {freqs}")
        object.__setattr__(self, "group_frequencies", freqs)

        spread = self.spread
        spread = (float(spread),) * k if np.isscalar(spread) else tuple(float(s) for s in spread)
        if len(spread) != k or any(s < 0 for s in spread):
            raise InvalidConfigError("spread must be nonnegative, one value or one per group")
        object.__setattr__(self, "spread", spread)

        names = self.group_names
        names = tuple(f"group{i}" for i in range(k)) if names is None else tuple(str(n) for n in names)
        if len(names) != k or len(set(names)) != k:
            raise InvalidConfigError("group_names must be unique, one per group")
        object.__setattr__(self, "group_names", names)

        if int(self.population_size) != self.population_size or self.population_size < 1:
            raise InvalidConfigError("population_size must be a positive integer")
        object.__setattr__(self, "seed", int(self.seed))

        for name, m, s in zip(names, means, spread):
            if m - s < 0 or m + s > 1:
                warnings.warn(
                    f"group {name!r}: mean {m} +/- {s} leaves [0, 1]; clamping biases its realized mean",
                    stacklevel=3,
                )

    @property
    def n_groups(self) -> int:
        return len(self.group_means)

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticPopulationConfig":
        known = {"group_means", "population_size", "group_frequencies", "spread", "seed", "group_names"}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")
        if "group_means" not in data:
            raise InvalidConfigError("config needs group_means")
        return cls(**data)


def mnli_analog_config(population_size: int = 20_000, spread: float = 0.05, seed: int = 0) -> SyntheticPopulationConfig:
    """Ten equally frequent groups planted at the MNLI in-genre mean costs.

    With equal group sizes each group's out-group mean is the average of the
    other nine planted means, which reproduces the published out-genre costs
    and deltas to within rounding.
    """
    names = tuple(MNLI_GENRE_COSTS)
    means = tuple(MNLI_GENRE_COSTS[g][0] for g in names)
    return SyntheticPopulationConfig(means, population_size=population_size, spread=spread,
                                     seed=seed, group_names=names)


@dataclass(frozen=True, eq=False)
class SyntheticPopulation:
    """A fully enumerated population: group index and cost per member."""

    group_names: tuple
    group_index: np.ndarray
    costs: np.ndarray
    ids: Optional[tuple] = field(default=None)

    def __post_init__(self):
        gi = np.asarray(self.group_index, dtype=np.int64)
        costs = np.asarray(self.costs, dtype=float)
        if gi.shape != costs.shape or gi.ndim != 1:
            raise InvalidConfigError("group_index and costs must be 1-d and equally long")
        if gi.size and (gi.min() < 0 or gi.max() >= len(self.group_names)):
            raise InvalidConfigError("group_index refers to an unknown group")
        gi.setflags(write=False)
        costs.setflags(write=False)
        object.__setattr__(self, "group_index", gi)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "group_names", tuple(self.group_names))
        if self.ids is None:
            object.__setattr__(self, "ids", tuple(f"p{i:06d}" for i in range(len(costs))))

    def __len__(self) -> int:
        return len(self.costs)

    def group_code(self, group) -> int:
        """Index of ``group``, given either by name or by index."""
        if isinstance(group, (int, np.integer)) and not isinstance(group, bool):
            if 0 <= group < len(self.group_names):
                return int(group)
        elif group in self.group_names:
            return self.group_names.index(group)
        raise KeyError(f"unknown group {group!r}")

    def membership(self, group) -> np.ndarray:
        return self.group_index == self.group_code(group)

    def signs(self, group) -> np.ndarray:
        """+1 for members of ``group``, -1 for everyone else."""
        return np.where(self.membership(group), 1, -1).astype(np.int8)

    def to_examples(self, group) -> list[AnnotatedExample]:
        """The population as examples, with ``group`` protected and the rest unprotected."""
        signs = self.signs(group)
        return [AnnotatedExample(i, int(s), raw_cost=float(c)) for i, s, c in zip(self.ids, signs, self.costs)]

    def __eq__(self, other):
        if not isinstance(other, SyntheticPopulation):
            return NotImplemented
        return (self.group_names == other.group_names and self.ids == other.ids
                and np.array_equal(self.group_index, other.group_index)
                and np.array_equal(self.costs, other.costs))


def _allocate(frequencies: Sequence[float], total: int) -> np.ndarray:
    # largest-remainder rounding; ties go to the lower index
    raw = np.asarray(frequencies) * total
    counts = np.floor(raw).astype(np.int64)
    short = total - int(counts.sum())
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def generate_population(config: SyntheticPopulationConfig) -> SyntheticPopulation:
    """Realize ``config``; the output is a pure function of the config and its seed."""
    if not isinstance(config, SyntheticPopulationConfig):
        raise InvalidConfigError("expected a SyntheticPopulationConfig")
    rng = np.random.default_rng(config.seed)
    counts = _allocate(config.group_frequencies, config.population_size)
    group_index = np.repeat(np.arange(config.n_groups), counts)
    costs = np.empty(config.population_size, dtype=float)
    start = 0
    for count, mean, spread in zip(counts, config.group_means, config.spread):
        draws = rng.uniform(mean - spread, mean + spread, size=count)
        costs[start:start + count] = np.clip(draws, 0.0, 1.0)
        start += count
    return SyntheticPopulation(config.group_names, group_index, costs)


def true_disparity(population: SyntheticPopulation, group) -> float:
    """Exact in-group minus out-of-group mean cost over the whole population."""
    signs = population.signs(group)
    try:
        return disparity_from_arrays(population.costs, signs)
    except EmptyGroupError:
        raise EmptyGroupError(f"group {group!r} or its complement is empty") from None


@dataclass(frozen=True)
class CostRow:
    group: str
    in_group_mean_cost: float
    out_group_mean_cost: float
    delta: float


def cost_table(population: SyntheticPopulation) -> list[CostRow]:
    """One row per group: mean cost inside and outside, and their difference."""
    rows = []
    for code, name in enumerate(population.group_names):
        inside = population.group_index == code
        if not inside.any() or inside.all():
            raise EmptyGroupError(f"group {name!r} or its complement is empty")
        mean_in = float(np.mean(population.costs[inside]))
        mean_out = float(np.mean(population.costs[~inside]))
        rows.append(CostRow(name, mean_in, mean_out, mean_in - mean_out))
    return rows


def write_population(population: SyntheticPopulation, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(POPULATION_FIELDS)
        for pid, code, cost in zip(population.ids, population.group_index, population.costs):
            writer.writerow([pid, population.group_names[code], repr(float(cost))])


def load_population(path: PathLike) -> SyntheticPopulation:
    """Read a population file.

    Files with a ``group_id`` column are read as named groups. Plain example
    files are accepted too: their ``group`` tags become the group names and
    every example must carry ``raw_cost``.
    """
    path = Path(path)
    names: list = []
    codes, costs, ids = [], [], []
    if _infer_format(path, None) == "csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise EmptyDatasetError(f"{path} contains no examples")
            group_col = "group_id" if "group_id" in reader.fieldnames else "group"
            for col in ("id", group_col, "raw_cost"):
                if col not in reader.fieldnames:
                    raise SchemaError(f"header lacks required field {col!r}", field=col, line=1)
            rows = [(reader.line_num, r) for r in reader]
    else:
        rows = list(_read_jsonl_records(path))
        group_col = "group_id" if rows and "group_id" in rows[0][1] else "group"
    for line, rec in rows:
        if None in rec.values() and group_col == "group_id":
            raise ParseError("row has too few fields", line=line)
        name = rec.get(group_col)
        if _blank(name):
            raise SchemaError(f"missing {group_col}", field=group_col, line=line)
        name = str(name).strip()
        if group_col == "group":
            name = str(int(GroupTag.parse(name)))
        cost = _parse_cost(rec.get("raw_cost"), 1.0, line)
        if cost is None:
            raise SchemaError("missing raw_cost", field="raw_cost", line=line)
        if name not in names:
            names.append(name)
        codes.append(names.index(name))
        costs.append(cost)
        ids.append(str(rec.get("id", f"p{len(ids):06d}")))
    if not costs:
        raise EmptyDatasetError(f"{path} contains no examples")
    return SyntheticPopulation(tuple(names), np.array(codes), np.array(costs), tuple(ids))

