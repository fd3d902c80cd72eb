#!/usr/bin/env python3
"""Regenerate the frozen regression artifacts under tests/golden/.

Run after any intentional change to the generator, scoring or search code,
then review the diff before committing.
"""

from __future__ import annotations

import json
import shutil
import tempfile
from pathlib import Path

from accessopt.cli import main
from accessopt.geodata import generate_synthetic_scenario
from accessopt.optimizer import ObjectiveParams, greedy_construct, is_feasible
from accessopt.routing import build_travel_time_matrices

ACCEPTANCE_SEED = 7
GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def regen_greedy_layout() -> None:
    scenario = generate_synthetic_scenario(ACCEPTANCE_SEED)
    matrices = build_travel_time_matrices(scenario)
    params = ObjectiveParams()
    layout = greedy_construct(scenario, matrices, params)
    feasible, _ = is_feasible(layout, scenario, matrices, params)
    payload = {
        "seed": ACCEPTANCE_SEED,
        "open_candidates": list(layout.sorted_ids()),
        "feasible": feasible,
    }
    path = GOLDEN / "greedy_layout_seed7.json"
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path} (k={layout.k}, feasible={feasible})")


def regen_solve_result() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        bundle = Path(tmp) / "bundle"
        run = Path(tmp) / "run"
        code = main(["synth", "--seed", str(ACCEPTANCE_SEED), "--out", str(bundle)])
        assert code == 0, f"synth exited {code}"
        code = main(["solve", "--config", str(bundle / "run.cfg"), "--out", str(run)])
        assert code == 0, f"solve exited {code}"
        target = GOLDEN / "acceptance_result.json"
        shutil.copyfile(run / "result.json", target)
        print(f"wrote {target}")


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    regen_greedy_layout()
    regen_solve_result()
