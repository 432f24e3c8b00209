"""Coverage experiments and sample-size sweeps on enumerated populations.

A coverage trial draws a sample from a population, builds the confidence
interval around the sample disparity and records whether the population's
exact disparity falls inside. Trial ``i`` seeds its own generator from
``(seed, i)``, so results do not depend on scheduling or on ``n_jobs``.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from .bounds import BoundParams, interval_half_width, required_sample_size
from .data import SyntheticPopulation, true_disparity
from .disparity import GroupTag, amortized_from_arrays
from .exceptions import InfeasibleMixError, InvalidConfigError, InvalidParamsError, SampleTooLargeError

PLOT_HEADER = "# bbu coverage v1"
INTERVAL_HEADER = "# bbu intervals v1"
COVERAGE_COLUMNS = ("n", "gamma", "rho", "trials", "hits", "coverage", "mean_half_width")
CURVE_COLUMNS = ("delta_bar", "required_n")
INTERVAL_COLUMNS = ("group", "n", "gamma", "trial", "delta_bar", "half_width", "true_delta", "covered")


class VarianceMode(str, enum.Enum):
    EMPIRICAL = "empirical"
    WORST_CASE = "worst-case"


class Sampling(str, enum.Enum):
    STRATIFIED = "stratified"
    IID = "iid"


@dataclass(frozen=True)
class TrialResult:
    group: str
    trial: int
    delta_bar: float
    half_width: float
    true_delta: float

    @property
    def covered(self) -> bool:
        return self.delta_bar - self.half_width <= self.true_delta <= self.delta_bar + self.half_width


@dataclass(frozen=True)
class CoverageCell:
    n: int
    gamma: float
    rho: float
    trials: int
    hits: int
    mean_half_width: float
    results: tuple = ()

    @property
    def coverage(self) -> float:
        return self.hits / self.trials if self.trials else float("nan")

    @classmethod
    def from_results(cls, n, gamma, rho, results: Sequence[TrialResult]) -> "CoverageCell":
        results = tuple(results)
        hits = sum(r.covered for r in results)
        mean_t = math.fsum(r.half_width for r in results) / len(results) if results else float("nan")
        return cls(n, gamma, rho, len(results), hits, mean_t, results)


@dataclass(frozen=True)
class CoverageReport:
    cells: tuple = ()

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    @property
    def min_coverage(self) -> float:
        return min(c.coverage for c in self.cells) if self.cells else float("nan")

    def cell(self, n, gamma) -> CoverageCell:
        for c in self.cells:
            if c.n == n and math.isclose(c.gamma, gamma):
                return c
        raise KeyError((n, gamma))


@dataclass(frozen=True)
class SampleSizePoint:
    delta_bar: float
    required_n: int


def protected_count(n: int, gamma: float) -> int:
    """``ceil(gamma * n)``, immune to products like 0.3 * 1000 = 300.00000000000006."""
    return math.ceil(round(gamma * n, 9))


def _check_gamma(gamma):
    if not 0.0 < gamma <= 0.5:
        raise InvalidParamsError(f"gamma must lie in (0, 0.5], got {gamma!r}")


def _sample_variance(costs, signs, mode, max_cost, gamma):
    if mode is VarianceMode.WORST_CASE:
        return (max_cost / gamma) ** 2
    n = len(signs)
    freqs = {tag: np.count_nonzero(signs == int(tag)) / n for tag in GroupTag}
    values = amortized_from_arrays(costs, signs, freqs)
    var = float(np.mean((values - values.mean()) ** 2))
    # odd n at gamma = 0.5 leaves the unprotected share just under gamma
    return min(var, (max_cost / gamma) ** 2)


def run_trial(
    population: SyntheticPopulation,
    group,
    n: int,
    gamma: float,
    rho: float,
    trial: int,
    seed: int = 0,
    *,
    variance: Union[str, VarianceMode] = VarianceMode.WORST_CASE,
    sampling: Union[str, Sampling] = Sampling.STRATIFIED,
    max_cost: float = 1.0,
    true_delta: Optional[float] = None,
) -> TrialResult:
    """One draw, one interval.

    Stratified sampling takes exactly ``ceil(gamma * n)`` in-group members
    without replacement. IID sampling draws the in-group count from
    Binomial(n, gamma), held inside [1, n - 1], and samples each side with
    replacement.
    """
    variance = VarianceMode(variance)
    sampling = Sampling(sampling)
    inside = population.membership(group)
    in_idx = np.flatnonzero(inside)
    out_idx = np.flatnonzero(~inside)
    if true_delta is None:
        true_delta = true_disparity(population, group)
    rng = np.random.default_rng([int(seed), int(trial)])
    if sampling is Sampling.STRATIFIED:
        k = protected_count(n, gamma)
        chosen_in = rng.choice(in_idx, size=k, replace=False)
        chosen_out = rng.choice(out_idx, size=n - k, replace=False)
    else:
        k = int(np.clip(rng.binomial(n, gamma), 1, n - 1))
        chosen_in = rng.choice(in_idx, size=k, replace=True)
        chosen_out = rng.choice(out_idx, size=n - k, replace=True)
    costs = np.concatenate([population.costs[chosen_in], population.costs[chosen_out]])
    signs = np.concatenate([np.ones(k, dtype=np.int8), -np.ones(n - k, dtype=np.int8)])
    delta_bar = float(np.mean(costs[:k]) - np.mean(costs[k:]))
    sigma2 = _sample_variance(costs, signs, variance, max_cost, gamma)
    t = interval_half_width(BoundParams(max_cost, gamma, rho, sigma2, n))
    name = population.group_names[population.group_code(group)]
    return TrialResult(name, int(trial), delta_bar, t, float(true_delta))


def _validate_cell(population, group, n, gamma, trials, sampling):
    _check_gamma(gamma)
    if int(trials) != trials or trials < 1:
        raise InvalidConfigError(f"trials must be a positive integer, got {trials!r}")
    if int(n) != n or n < 2:
        raise InvalidConfigError(f"sample size must be an integer >= 2, got {n!r}")
    if n > len(population):
        raise SampleTooLargeError(f"sample size {n} exceeds population size {len(population)}")
    size_in = int(population.membership(group).sum())
    size_out = len(population) - size_in
    if size_in == 0 or size_out == 0:
        raise InfeasibleMixError(f"group {group!r} or its complement is empty")
    if Sampling(sampling) is Sampling.STRATIFIED:
        k = protected_count(n, gamma)
        if k > size_in or n - k > size_out or k == n:
            raise InfeasibleMixError(
                f"cannot draw {k} in-group and {n - k} out-group members "
                f"from {size_in} and {size_out}"
            )


def run_coverage_experiment(
    population: SyntheticPopulation,
    group,
    n: int,
    gamma: float,
    rho: float = 0.95,
    trials: int = 20,
    seed: int = 0,
    *,
    variance: Union[str, VarianceMode] = VarianceMode.WORST_CASE,
    sampling: Union[str, Sampling] = Sampling.STRATIFIED,
    max_cost: float = 1.0,
    n_jobs: Optional[int] = 1,
) -> CoverageCell:
    """Repeat :func:`run_trial` ``trials`` times and tally coverage."""
    _validate_cell(population, group, n, gamma, trials, sampling)
    true_delta = true_disparity(population, group)
    kwargs = dict(variance=variance, sampling=sampling, max_cost=max_cost, true_delta=true_delta)
    if n_jobs == 1:
        results = [run_trial(population, group, n, gamma, rho, i, seed, **kwargs) for i in range(trials)]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(run_trial)(population, group, n, gamma, rho, i, seed, **kwargs) for i in range(trials)
        )
    return CoverageCell.from_results(n, gamma, rho, results)


def run_coverage_grid(
    population: SyntheticPopulation,
    n_grid: Iterable[int],
    gamma_grid: Iterable[float],
    groups: Optional[Sequence] = None,
    rho: float = 0.95,
    trials: int = 20,
    seed: int = 0,
    **kwargs,
) -> CoverageReport:
    """Coverage for every ``(n, gamma)`` cell, pooling trials over ``groups``.

    ``groups`` defaults to every group in the population, each taking a turn
    as the protected group.
    """
    groups = list(population.group_names if groups is None else groups)
    cells = []
    for n in n_grid:
        for gamma in gamma_grid:
            results = []
            for g in groups:
                cell = run_coverage_experiment(population, g, n, gamma, rho, trials, seed, **kwargs)
                results.extend(cell.results)
            cells.append(CoverageCell.from_results(n, gamma, rho, results))
    return CoverageReport(tuple(cells))


def sweep_sample_size(
    deltas: Iterable[float],
    rho: float = 0.95,
    max_cost: float = 1.0,
    gamma: float = 0.5,
    variance: Union[str, float, VarianceMode] = VarianceMode.WORST_CASE,
) -> list[SampleSizePoint]:
    """Required sample size at each disparity in ``deltas``."""
    if isinstance(variance, (int, float)) and not isinstance(variance, bool):
        params = BoundParams(max_cost, gamma, rho, float(variance))
    elif VarianceMode(variance) is VarianceMode.WORST_CASE:
        params = BoundParams.worst_case(max_cost, gamma, rho)
    else:
        raise InvalidConfigError("the planner needs worst-case or a numeric variance")
    return [SampleSizePoint(float(d), required_sample_size(float(d), params)) for d in deltas]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_plot_data(data, path) -> Path:
    """Write a coverage report or sample-size curve as plot-ready CSV.

    Line one is a comment naming the format version, line two the column
    names. Values are written at full precision, so re-emitting the same
    data yields a byte-identical file.
    """
    path = Path(path)
    if isinstance(data, CoverageReport):
        columns, rows = COVERAGE_COLUMNS, [
            (c.n, c.gamma, c.rho, c.trials, c.hits, c.coverage, c.mean_half_width) for c in data.cells
        ]
    else:
        points = list(data)
        columns, rows = CURVE_COLUMNS, [(p.delta_bar, p.required_n) for p in points]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(PLOT_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([[_fmt(v) for v in row] for row in rows])
    return path


def emit_interval_data(report: CoverageReport, path) -> Path:
    """Per-trial estimates and half-widths, the error-bar data behind each cell."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(INTERVAL_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(INTERVAL_COLUMNS)
        for cell in report.cells:
            for r in cell.results:
                writer.writerow([r.group, cell.n, _fmt(cell.gamma), r.trial, _fmt(r.delta_bar),
                                 _fmt(r.half_width), _fmt(r.true_delta), int(r.covered)])
    return path


def read_plot_data(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("# bbu"):
            raise ValueError(f"{path} lacks the bbu header line")
        return list(csv.DictReader(fh))
