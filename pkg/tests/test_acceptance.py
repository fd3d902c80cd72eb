"""Acceptance suite: one printed pass/fail line per criterion.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete.  Every tolerance and runtime budget is pinned here.
"""

import json
import math
import time
from contextlib import contextmanager
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest

from accessopt.accessibility import (
    DecayParams,
    accessibility_scores,
    conservation_check,
    decay_weights,
    gaussian_decay,
)
from accessopt.cli import main
from accessopt.geodata import load_scenario
from accessopt.optimizer import (
    Layout,
    ObjectiveParams,
    exhaustive_oracle,
    objective_value,
    optimize,
)
from accessopt.routing import build_travel_time_matrices, shortest_path_distances

from conftest import (
    ACCEPTANCE_SEED,
    GENERAL,
    random_network,
    random_scenario,
    table_scenario,
)
from test_routing import floyd_warshall

GOLDEN = Path(__file__).parent / "golden"
A_SIGMA = 0.135


@contextmanager
def criterion(num, label, budget_s):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        elapsed = time.perf_counter() - start
        print(f"\ncriterion {num} ({label}): FAIL [{elapsed:.2f}s]")
        raise
    elapsed = time.perf_counter() - start
    if elapsed >= budget_s:
        print(f"\ncriterion {num} ({label}): FAIL "
              f"[runtime {elapsed:.2f}s over the {budget_s}s budget]")
        raise AssertionError(f"criterion {num} exceeded its runtime budget")
    print(f"\ncriterion {num} ({label}): PASS [{elapsed:.2f}s]")


@pytest.fixture(scope="module")
def acceptance_bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    code = main(["synth", "--seed", str(ACCEPTANCE_SEED), "--out", str(out)])
    assert code == 0
    return out


def test_criterion_1_decay_kernel_exactness():
    with criterion(1, "decay kernel exactness", 1.0):
        params = DecayParams(10.0)
        assert abs(gaussian_decay(0.0, params) - 1.0) < 1e-12
        assert abs(gaussian_decay(10.0, params)) < 1e-12

        mp.mp.dps = 50
        ratio_sq = (mp.mpf(5) / 10) ** 2
        floor = mp.e ** mp.mpf("-0.5")
        reference = float((mp.e ** (-ratio_sq / 2) - floor) / (1 - floor))
        got = gaussian_decay(5.0, params)
        assert abs(got - reference) / reference < 1e-12

        grid = np.linspace(0.0, 10.0, 1000)
        weights = decay_weights(grid, 10.0)
        assert np.all(np.diff(weights) < 0.0)


def test_criterion_2_conservation():
    with criterion(2, "population-supply conservation", 5.0):
        for seed in range(100):
            sc = random_scenario(
                seed, max_nodes=32, max_demands=30, max_sites=10,
                two_groups=(seed % 3 == 0),
            )
            mats = build_travel_time_matrices(sc)
            rng = np.random.default_rng(987_000 + seed)
            open_ids = {s for s in sc.site_ids if rng.random() < 0.8}
            field = accessibility_scores(sc, mats["general"], open_ids, gamma=1.0)
            residual = conservation_check(field, sc, open_ids, mats["general"])
            assert residual < 1e-9, f"seed {seed}: residual {residual}"


def test_criterion_3_gamma_linearity_and_homogeneity():
    with criterion(3, "gamma linearity and homogeneity", 5.0):
        for seed in range(50):
            sc = random_scenario(seed, max_nodes=24, max_demands=16, max_sites=8)
            mats = build_travel_time_matrices(sc)
            open_ids = set(sc.site_ids)

            base = accessibility_scores(sc, mats["general"], open_ids, gamma=1.0)
            twice = accessibility_scores(sc, mats["general"], open_ids, gamma=2.0)
            for did in sc.demand_ids:
                assert twice.scores[did] == pytest.approx(
                    2 * base.scores[did], rel=1e-12, abs=1e-300
                )

            doubled_caps = tuple(
                type(s)(s.site_id, s.location, s.status, 2 * s.capacity)
                for s in sc.sites
            )
            sc2 = type(sc)(sc.network, sc.demands, doubled_caps, sc.groups)
            big = accessibility_scores(
                sc2, build_travel_time_matrices(sc2)["general"], open_ids
            )
            doubled_pop = tuple(
                type(d)(d.demand_id, d.location,
                        {g: 2 * v for g, v in d.population.items()})
                for d in sc.demands
            )
            sc3 = type(sc)(sc.network, doubled_pop, sc.sites, sc.groups)
            crowded = accessibility_scores(
                sc3, build_travel_time_matrices(sc3)["general"], open_ids
            )
            for did in sc.demand_ids:
                assert big.scores[did] == pytest.approx(
                    2 * base.scores[did], rel=1e-12, abs=1e-300
                )
                assert crowded.scores[did] == pytest.approx(
                    base.scores[did] / 2, rel=1e-12, abs=1e-300
                )


def test_criterion_4_routing_oracle():
    with criterion(4, "shortest paths match an independent oracle", 10.0):
        for seed in range(100):
            rng = np.random.default_rng(55_000 + seed)
            net = random_network(rng, int(rng.integers(4, 51)), p_oneway=0.25)
            ids, oracle = floyd_warshall(net)
            for i, source in enumerate(ids):
                reach = shortest_path_distances(net, source)
                got = np.array([reach.get(nid, math.inf) for nid in ids])
                assert np.array_equal(got, oracle[i]), f"seed {seed} from {source}"


def _oracle_instance(seed):
    """Instance whose full candidate pool always meets its target."""
    probe = seed
    while True:
        rng = np.random.default_rng(probe)
        sc = random_scenario(
            probe, max_nodes=22, max_demands=14,
            n_existing=int(rng.integers(0, 3)),
            n_candidates=int(rng.integers(5, 13)),
        )
        mats = build_travel_time_matrices(sc)
        field = accessibility_scores(sc, mats["general"], set(sc.site_ids))
        floor = min(
            field.scores[d.demand_id]
            for d in sc.demands if d.pop_of("general") > 0
        )
        if floor > 0:
            return sc, mats, ObjectiveParams(a_sigma=0.8 * floor)
        probe += 10_000


def test_criterion_5_optimizer_oracle_equivalence():
    with criterion(5, "heuristic vs exhaustive oracle", 60.0):
        within_ratio = 0
        for seed in range(50):
            sc, mats, params = _oracle_instance(seed)
            oracle = exhaustive_oracle(sc, mats, params)
            heuristic = optimize(sc, mats, params)
            assert oracle.feasible, f"seed {seed}: family broke its guarantee"
            assert heuristic.feasible, f"seed {seed}: heuristic missed feasibility"
            assert heuristic.objective >= oracle.objective - 1e-12, f"seed {seed}"
            if oracle.objective > 0:
                ratio = heuristic.objective / oracle.objective
            else:
                ratio = 1.0 if heuristic.objective == 0 else math.inf
            if ratio <= 1.10:
                within_ratio += 1
        assert within_ratio >= 45, f"only {within_ratio}/50 within 1.10x of the oracle"


def _medium_plus(coverage_payload):
    return sum(b["population"] for b in coverage_payload
               if b["lower_bound"] >= A_SIGMA)


def test_criterion_6_synthetic_regression(acceptance_bundle, tmp_path):
    with criterion(6, "bundled scenario regression", 30.0):
        scenario = load_scenario(
            acceptance_bundle / "nodes.csv", acceptance_bundle / "edges.csv",
            acceptance_bundle / "demand.csv", acceptance_bundle / "sites.csv",
        )
        assert len(scenario.existing_site_ids) == 16
        assert scenario.candidate_site_ids

        out = tmp_path / "run"
        code = main(["solve", "--config", str(acceptance_bundle / "run.cfg"),
                     "--out", str(out)])
        assert code == 0

        result = json.loads((out / "result.json").read_text())
        assert result["feasible"]

        before = {
            g: json.loads((out / f"coverage_{g}_before.json").read_text())
            for g in ("general", "elderly")
        }
        after = {g: result["coverage"][g] for g in ("general", "elderly")}

        total_general = sum(b["population"] for b in before["general"])
        baseline_share = _medium_plus(before["general"]) / total_general
        assert baseline_share < 0.20, f"baseline coverage {baseline_share:.3f}"

        for group in ("general", "elderly"):
            total = sum(b["population"] for b in after[group])
            reached = _medium_plus(after[group])
            assert reached / total >= 0.95, f"{group}: {reached / total:.3f}"
            assert reached >= 3 * _medium_plus(before[group]), group

        golden = (GOLDEN / "acceptance_result.json").read_bytes()
        assert (out / "result.json").read_bytes() == golden


def test_criterion_7_objective_spot_values():
    with criterion(7, "objective spot values", 1.0):
        inf = math.inf
        sc, mats = table_scenario(
            [("d1", {"general": 1000}), ("d2", {"general": 1000})],
            [("s1", "candidate", 135.0), ("s2", "candidate", 235.0)],
            (GENERAL,),
            {"general": [[0.0, inf], [inf, 0.0]]},
        )
        layout = Layout(frozenset({"s1", "s2"}))
        got = objective_value(layout, sc, mats, ObjectiveParams())
        assert abs(got - 2.01) < 1e-12

        sc2, mats2 = table_scenario(
            [("d1", {"general": 1000}), ("d2", {"general": 1000})],
            [("s1", "candidate", 135.0), ("s2", "candidate", 135.0)],
            (GENERAL,),
            {"general": [[0.0, inf], [inf, 0.0]]},
        )
        exact = objective_value(layout, sc2, mats2, ObjectiveParams())
        assert exact == 2.0  # alpha * k with the deviation term exactly zero


def test_criterion_8_solve_determinism(acceptance_bundle, tmp_path):
    with criterion(8, "byte-identical repeated solve", 60.0):
        outs = []
        for name in ("first", "second"):
            out = tmp_path / name
            code = main(["solve", "--config", str(acceptance_bundle / "run.cfg"),
                         "--out", str(out)])
            assert code == 0
            outs.append((out / "result.json").read_bytes())
        assert outs[0] == outs[1]
