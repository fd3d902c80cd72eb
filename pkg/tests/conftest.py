"""Shared builders for deterministic random test instances."""

from __future__ import annotations

import numpy as np

from accessopt.geodata import (
    CANDIDATE,
    EXISTING,
    Coordinate,
    DemandPoint,
    Edge,
    FacilitySite,
    PopulationGroup,
    RoadNetwork,
    Scenario,
)
from accessopt.routing import TravelTimeMatrix

BASE = Coordinate(118.75, 32.05)

GENERAL = PopulationGroup("general", 80.0, 700.0)
ELDERLY = PopulationGroup("elderly", 70.0, 700.0)

ACCEPTANCE_SEED = 7


def table_scenario(demand_rows, site_rows, groups, times):
    """Scenario plus matrices from explicit travel times, bypassing routing.

    demand_rows: (demand_id, {group: pop}); site_rows: (site_id, status,
    capacity); times: {group_name: (m, s) minutes array}.
    """
    network = RoadNetwork({"n0": BASE}, ())
    demands = tuple(DemandPoint(did, BASE, pops) for did, pops in demand_rows)
    sites = tuple(FacilitySite(sid, BASE, status, cap)
                  for sid, status, cap in site_rows)
    scenario = Scenario(network, demands, sites, tuple(groups))
    matrices = {
        g.name: TravelTimeMatrix(g, np.asarray(times[g.name], dtype=float),
                                 scenario.demand_ids, scenario.site_ids)
        for g in groups
    }
    return scenario, matrices


def random_network(rng, n_nodes, *, int_lengths=True, p_oneway=0.0):
    """Connected random graph: spanning tree plus a few extra edges."""
    side = int(np.ceil(np.sqrt(n_nodes)))
    ids = [f"n{i:03d}" for i in range(n_nodes)]
    nodes = {}
    for i, nid in enumerate(ids):
        r, c = divmod(i, side)
        lon = BASE.lon + c * 5e-4 + float(rng.uniform(-1e-4, 1e-4))
        lat = BASE.lat + r * 5e-4 + float(rng.uniform(-1e-4, 1e-4))
        nodes[nid] = Coordinate(lon, lat)

    def length():
        if int_lengths:
            return float(rng.integers(40, 400))
        return float(rng.uniform(40.0, 400.0))

    edges = []
    occupied = set()

    def add(a, b):
        bidi = bool(rng.random() >= p_oneway)
        pairs = {(a, b)} | ({(b, a)} if bidi else set())
        if pairs & occupied:
            return
        occupied.update(pairs)
        edges.append(Edge(ids[a], ids[b], length(), bidi))

    for i in range(1, n_nodes):
        add(int(rng.integers(0, i)), i)
    for _ in range(int(rng.integers(0, n_nodes))):
        a, b = rng.integers(0, n_nodes, size=2)
        if a != b:
            add(int(a), int(b))
    return RoadNetwork(nodes, tuple(edges))


def random_scenario(
    seed,
    *,
    max_nodes=24,
    max_demands=12,
    max_sites=8,
    n_existing=None,
    n_candidates=None,
    two_groups=False,
    int_lengths=True,
    p_oneway=0.0,
    capacity=1500.0,
):
    """Small seeded instance with demands and sites pinned on network nodes."""
    rng = np.random.default_rng(seed)
    n_nodes = int(rng.integers(4, max_nodes + 1))
    network = random_network(rng, n_nodes, int_lengths=int_lengths,
                             p_oneway=p_oneway)
    ids = sorted(network.nodes)

    n_demands = int(rng.integers(2, min(max_demands, n_nodes) + 1))
    demand_nodes = sorted(rng.choice(n_nodes, size=n_demands, replace=False))
    groups = (GENERAL, ELDERLY) if two_groups else (GENERAL,)
    demands = []
    for k, i in enumerate(demand_nodes):
        pop = {"general": int(rng.integers(50, 2000))}
        if two_groups:
            pop["elderly"] = int(round(pop["general"] * rng.uniform(0.1, 0.3)))
        demands.append(DemandPoint(f"d{k:03d}", network.nodes[ids[i]], pop))

    if n_candidates is None:
        n_sites = int(rng.integers(1, max_sites + 1))
        n_candidates = int(rng.integers(0, n_sites + 1))
        n_existing = n_sites - n_candidates
    elif n_existing is None:
        n_existing = 0
    n_sites = max(1, min(n_existing + n_candidates, n_nodes))
    site_nodes = rng.choice(n_nodes, size=n_sites, replace=False)
    sites = []
    for k, i in enumerate(site_nodes):
        status = EXISTING if k < n_existing else CANDIDATE
        sites.append(FacilitySite(f"s{k:03d}", network.nodes[ids[int(i)]],
                                  status, capacity))
    return Scenario(network, tuple(demands), tuple(sites), groups)
