"""Generate the bundled synthetic district and look around it.

The generator lays out a jittered street grid, drops population blobs on
it, clusters the existing facilities where population is thin, and spreads
candidate sites so a full build-out can serve everyone.  The same seed
always reproduces the same scenario, byte for byte.
"""

from pathlib import Path

import numpy as np

from accessopt import generate_synthetic_scenario, write_scenario_bundle

SEED = 7
OUT = Path("demo_out/bundle")

scenario = generate_synthetic_scenario(SEED)

print(f"seed {SEED}:")
print(f"  {len(scenario.network.nodes)} road nodes, "
      f"{len(scenario.network.edges)} segments")
print(f"  {len(scenario.demands)} demand points")
print(f"  {len(scenario.existing_site_ids)} existing sites, "
      f"{len(scenario.candidate_site_ids)} candidate sites")
for g in scenario.groups:
    print(f"  {g.name}: {scenario.total_population(g.name)} people, "
          f"walk {g.walk_speed_m_per_min:.0f} m/min up to {g.max_walk_m:.0f} m "
          f"(threshold {g.t_sigma_min} min)")

# population density and site positions on the grid
side = int(np.sqrt(len(scenario.demands)))
pop = np.array([d.pop_of("general") for d in scenario.demands]).reshape(side, side)
coord_to_cell = {d.location: i for i, d in enumerate(scenario.demands)}
marks = {}
for s in scenario.sites:
    marks[coord_to_cell[s.location]] = "E" if s.existing else "c"

print()
print("population density quartiles (. + : #), E existing site, c candidate:")
q1, q2, q3 = np.quantile(pop, [0.25, 0.5, 0.75])
for r in range(side):
    row = ""
    for c in range(side):
        cell = r * side + c
        if cell in marks:
            row += marks[cell]
        else:
            v = pop[r, c]
            row += "." if v <= q1 else ("+" if v <= q2 else (":" if v <= q3 else "#"))
    print("  " + row)

paths = write_scenario_bundle(scenario, OUT)
print()
print(f"wrote CSV bundle to {OUT}/: " + ", ".join(sorted(p.name for p in paths.values())))
print("the accessopt CLI does the same thing:  accessopt synth --seed 7 --out <dir>")
