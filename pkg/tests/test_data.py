import hashlib
import json
import warnings

import numpy as np
import pytest

from bbu import (
    AnnotatedExample,
    MNLI_GENRE_COSTS,
    SyntheticPopulation,
    SyntheticPopulationConfig,
    cost_table,
    estimate_groupwise_disparity,
    generate_population,
    load_examples,
    load_population,
    true_disparity,
    write_examples,
    write_population,
)
from bbu.exceptions import EmptyDatasetError, EmptyGroupError, InvalidConfigError, ParseError, SchemaError

HEADER = "id,group,gold_label,prediction,raw_cost\n"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoad:
    def test_three_rows(self, tmp_path):
        path = write(tmp_path, "a.csv", HEADER + "a,1,,,0.2\nb,-1,,,0.1\nc,0,,,0.9\n")
        examples = load_examples(path)
        assert [e.id for e in examples] == ["a", "b", "c"]
        assert [int(e.group) for e in examples] == [1, -1, 0]
        assert sum(1 for e in examples if e.group == 0) == 1

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyDatasetError):
            load_examples(write(tmp_path, "e.csv", ""))
        with pytest.raises(EmptyDatasetError):
            load_examples(write(tmp_path, "h.csv", HEADER))
        with pytest.raises(EmptyDatasetError):
            load_examples(write(tmp_path, "e.jsonl", "\n"))

    def test_bad_group_names_field_and_line(self, tmp_path):
        path = write(tmp_path, "a.csv", HEADER + "a,1,,,0.2\nb,2,,,0.1\n")
        with pytest.raises(SchemaError) as info:
            load_examples(path)
        assert info.value.field == "group" and info.value.line == 3

    def test_cost_out_of_range(self, tmp_path):
        path = write(tmp_path, "a.csv", HEADER + "a,1,,,1.2\n")
        with pytest.raises(SchemaError) as info:
            load_examples(path)
        assert info.value.field == "raw_cost"

    def test_multiclass_label_rejected(self, tmp_path):
        path = write(tmp_path, "a.csv", HEADER + "a,1,2,1,\n")
        with pytest.raises(SchemaError) as info:
            load_examples(path)
        assert info.value.field == "gold_label"

    def test_field_count(self, tmp_path):
        path = write(tmp_path, "a.csv", HEADER + "a,1,,,0.2\nb,1,0\n")
        with pytest.raises(ParseError) as info:
            load_examples(path)
        assert info.value.line == 3

    def test_missing_group_column(self, tmp_path):
        with pytest.raises(SchemaError) as info:
            load_examples(write(tmp_path, "a.csv", "id,raw_cost\na,0.1\n"))
        assert info.value.field == "group"

    def test_missing_cost_and_labels(self, tmp_path):
        with pytest.raises(SchemaError):
            load_examples(write(tmp_path, "a.csv", HEADER + "a,1,1,,\n"))

    def test_jsonl(self, tmp_path):
        text = '{"id": "a", "group": 1, "gold_label": 1, "prediction": 0}\n{"id": "b", "group": -1, "raw_cost": 0.5}\n'
        examples = load_examples(write(tmp_path, "a.jsonl", text))
        assert examples[0].prediction == 0 and examples[1].raw_cost == 0.5

    def test_jsonl_parse_error_line(self, tmp_path):
        with pytest.raises(ParseError) as info:
            load_examples(write(tmp_path, "a.jsonl", '{"id": "a", "group": 1, "raw_cost": 0}\n{oops\n'))
        assert info.value.line == 2

    def test_means_match_line_scan(self, tmp_path):
        rng = np.random.default_rng(2)
        lines = [HEADER.strip()]
        for i in range(300):
            lines.append(f"r{i},{rng.choice([-1, 0, 1])},,,{rng.uniform():.6f}")
        path = write(tmp_path, "scan.csv", "\n".join(lines) + "\n")
        sums, counts = {}, {}
        for line in path.read_text().splitlines()[1:]:
            fields = line.split(",")
            sums[fields[1]] = sums.get(fields[1], 0.0) + float(fields[4])
            counts[fields[1]] = counts.get(fields[1], 0) + 1
        est = estimate_groupwise_disparity(load_examples(path))
        oracle = sums["1"] / counts["1"] - sums["-1"] / counts["-1"]
        assert est.delta_bar == pytest.approx(oracle, abs=1e-12)
        assert est.n_neither == counts["0"]


@pytest.mark.parametrize("suffix", ["csv", "jsonl"])
def test_write_load_round_trip(tmp_path, suffix):
    rng = np.random.default_rng(1)
    examples = []
    for i in range(50):
        kind = i % 3
        if kind == 0:
            examples.append(AnnotatedExample(f"x{i}", int(rng.choice([-1, 0, 1])), raw_cost=float(rng.uniform())))
        elif kind == 1:
            examples.append(AnnotatedExample(f"x{i}", int(rng.choice([-1, 0, 1])), int(rng.integers(2)), int(rng.integers(2))))
        else:
            examples.append(AnnotatedExample(f"x{i}", 1, 0, 1, float(rng.uniform())))
    path = tmp_path / f"rt.{suffix}"
    write_examples(examples, path)
    assert load_examples(path) == examples


class TestGenerate:
    def test_symmetric_groups(self):
        pop = generate_population(SyntheticPopulationConfig([0.3, 0.3], population_size=20_000, spread=0.2, seed=4))
        delta = true_disparity(pop, 0)
        # exactly computable, and near zero: 3 standard errors of a uniform(0.1, 0.5) mean gap
        se = (0.4 / np.sqrt(12)) * np.sqrt(2 / 10_000)
        assert abs(delta) < 3 * se
        assert delta == pytest.approx(pop.costs[:10_000].mean() - pop.costs[10_000:].mean(), abs=1e-15)

    def test_planted_government_pair(self):
        pop = generate_population(SyntheticPopulationConfig([0.154, 0.124], population_size=20_000,
                                                            group_names=["government", "rest"], seed=3))
        assert true_disparity(pop, "government") == pytest.approx(0.029, abs=0.003)

    def test_deterministic(self):
        cfg = SyntheticPopulationConfig([0.2, 0.5, 0.7], population_size=999, seed=42)
        a, b = generate_population(cfg), generate_population(cfg)
        assert a == b
        assert a.costs.tobytes() == b.costs.tobytes()

    def test_other_seed_differs(self):
        a = generate_population(SyntheticPopulationConfig([0.2, 0.5], population_size=100, seed=1))
        b = generate_population(SyntheticPopulationConfig([0.2, 0.5], population_size=100, seed=2))
        assert a != b

    def test_counts_follow_frequencies(self):
        pop = generate_population(SyntheticPopulationConfig([0.1, 0.2, 0.3], population_size=1001,
                                                            group_frequencies=[0.2, 0.3, 0.5]))
        counts = np.bincount(pop.group_index)
        assert counts.sum() == 1001
        assert np.all(np.abs(counts - np.array([0.2, 0.3, 0.5]) * 1001) < 1)

    def test_costs_in_unit_interval(self):
        with pytest.warns(UserWarning, match="clamping"):
            cfg = SyntheticPopulationConfig([0.02, 0.98], population_size=2000, spread=0.1)
        pop = generate_population(cfg)
        assert pop.costs.min() >= 0 and pop.costs.max() <= 1

    def test_no_warning_inside(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            SyntheticPopulationConfig([0.5, 0.5], spread=0.1)

    @pytest.mark.parametrize("kwargs", [
        dict(group_means=[0.2, 0.3], group_frequencies=[0.5, 0.6]),
        dict(group_means=[1.2]),
        dict(group_means=[]),
        dict(group_means=[0.2, 0.3], spread=-0.1),
        dict(group_means=[0.2, 0.3], population_size=0),
        dict(group_means=[0.2, 0.3], group_names=["a", "a"]),
    ])
    def test_invalid_config(self, kwargs):
        with pytest.raises(InvalidConfigError):
            SyntheticPopulationConfig(**kwargs)

    @pytest.mark.parametrize("planted", [0.02, -0.015])
    def test_planted_fidelity(self, planted):
        base = 0.3
        pop = generate_population(SyntheticPopulationConfig([base + planted, base], population_size=10_000,
                                                            spread=0.1, seed=8))
        se = (0.2 / np.sqrt(12)) * np.sqrt(2 / 5_000)
        assert abs(true_disparity(pop, 0) - planted) < 3 * se


class TestTrueDisparity:
    def test_all_equal(self):
        pop = SyntheticPopulation(("a", "b"), np.array([0, 0, 1, 1]), np.full(4, 0.25))
        assert true_disparity(pop, "a") == 0.0

    def test_hand_built(self):
        pop = SyntheticPopulation(("in", "out"), np.array([0, 0, 1, 1]), np.array([0.4, 0.2, 0.1, 0.1]))
        assert true_disparity(pop, "in") == pytest.approx(0.2, abs=1e-15)

    def test_matches_estimate(self, mnli_population):
        for g in ("fiction", "slate"):
            est = estimate_groupwise_disparity(mnli_population.to_examples(g))
            assert est.delta_bar == true_disparity(mnli_population, g)

    def test_empty_complement(self):
        pop = SyntheticPopulation(("only",), np.zeros(3, dtype=int), np.full(3, 0.1))
        with pytest.raises(EmptyGroupError):
            true_disparity(pop, "only")

    def test_unknown_group(self, mnli_population):
        with pytest.raises(KeyError):
            true_disparity(mnli_population, "sports")


class TestCostTable:
    def test_two_groups_antisymmetric(self):
        pop = generate_population(SyntheticPopulationConfig([0.3, 0.3], population_size=500, seed=1))
        a, b = cost_table(pop)
        assert a.delta == pytest.approx(-b.delta, abs=1e-15)

    def test_delta_column_is_true_disparity(self, mnli_population):
        for row in cost_table(mnli_population):
            assert row.delta == true_disparity(mnli_population, row.group)
            assert row.delta == row.in_group_mean_cost - row.out_group_mean_cost

    def test_reproduces_mnli_deltas(self, mnli_population):
        rows = {r.group: r for r in cost_table(mnli_population)}
        for genre, (_, _, delta) in MNLI_GENRE_COSTS.items():
            assert rows[genre].delta == pytest.approx(delta, abs=0.005)
            assert rows[genre].in_group_mean_cost == pytest.approx(MNLI_GENRE_COSTS[genre][0], abs=0.005)
            assert rows[genre].out_group_mean_cost == pytest.approx(MNLI_GENRE_COSTS[genre][1], abs=0.005)

    def test_single_group(self):
        pop = SyntheticPopulation(("only",), np.zeros(3, dtype=int), np.full(3, 0.1))
        with pytest.raises(EmptyGroupError):
            cost_table(pop)


class TestPopulationFiles:
    def test_round_trip(self, tmp_path):
        pop = generate_population(SyntheticPopulationConfig([0.1, 0.4, 0.6], population_size=300,
                                                            group_names=["x", "y", "z"], seed=5))
        write_population(pop, tmp_path / "pop.csv")
        assert load_population(tmp_path / "pop.csv") == pop

    def test_example_file_as_population(self, tmp_path):
        path = write(tmp_path, "a.csv", HEADER + "a,1,,,0.2\nb,-1,,,0.1\nc,1,,,0.4\n")
        pop = load_population(path)
        assert set(pop.group_names) == {"1", "-1"}
        assert true_disparity(pop, "1") == pytest.approx(0.2)

    def test_idempotent_write(self, tmp_path):
        pop = generate_population(SyntheticPopulationConfig([0.1, 0.4], population_size=100))
        write_population(pop, tmp_path / "a.csv")
        first = hashlib.sha256((tmp_path / "a.csv").read_bytes()).hexdigest()
        write_population(pop, tmp_path / "a.csv")
        assert hashlib.sha256((tmp_path / "a.csv").read_bytes()).hexdigest() == first

    def test_config_from_dict(self):
        cfg = SyntheticPopulationConfig.from_dict(json.loads('{"group_means": [0.1, 0.2], "seed": 3}'))
        assert cfg.seed == 3 and cfg.n_groups == 2
        with pytest.raises(InvalidConfigError):
            SyntheticPopulationConfig.from_dict({"group_means": [0.1], "colour": 1})
