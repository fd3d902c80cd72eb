"""Snap points onto the road network and derive per-group travel-time matrices.

Distances are exact shortest paths over edge lengths in meters; they are
converted to minutes per population group only afterwards, so one round of
pathfinding serves every group.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geodata import (
    Coordinate,
    PopulationGroup,
    RoadNetwork,
    Scenario,
    ValidationError,
    format_number,
)

EARTH_RADIUS_M = 6_371_000.0
UNREACHABLE = float("inf")
DEFAULT_SNAP_WARN_M = 500.0


class SnapDistanceWarning(UserWarning):
    """A point snapped to a node farther away than the configured threshold."""


def great_circle_m(a: Coordinate, b: Coordinate) -> float:
    """Haversine distance in meters on a spherical Earth."""
    lon1, lat1, lon2, lat2 = map(math.radians, (a.lon, a.lat, b.lon, b.lat))
    h = (
        math.sin((lat2 - lat1) / 2) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    )
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(h))


def _node_arrays(network: RoadNetwork):
    ids = sorted(network.nodes)
    rlon = np.radians([network.nodes[i].lon for i in ids])
    rlat = np.radians([network.nodes[i].lat for i in ids])
    return ids, rlon, rlat


def _nearest_node(point: Coordinate, ids, rlon, rlat) -> tuple[str, float]:
    plon, plat = math.radians(point.lon), math.radians(point.lat)
    h = (
        np.sin((rlat - plat) / 2) ** 2
        + math.cos(plat) * np.cos(rlat) * np.sin((rlon - plon) / 2) ** 2
    )
    d = 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(h))
    # ids are sorted, so the first minimum breaks ties toward the smallest id
    k = int(np.argmin(d))
    return ids[k], float(d[k])


def snap_to_network(
    point: Coordinate,
    network: RoadNetwork,
    warn_threshold_m: float = DEFAULT_SNAP_WARN_M,
) -> str:
    """Nearest network node by great-circle distance (ties: smallest node id)."""
    if not network.nodes:
        raise ValidationError("cannot snap to an empty network")
    nid, dist = _nearest_node(point, *_node_arrays(network))
    if dist > warn_threshold_m:
        warnings.warn(
            f"point ({point.lon}, {point.lat}) snapped to node '{nid}' "
            f"{dist:.0f} m away (threshold {warn_threshold_m:.0f} m)",
            SnapDistanceWarning,
            stacklevel=2,
        )
    return nid


def _adjacency(network: RoadNetwork) -> dict[str, list[tuple[str, float]]]:
    adj: dict[str, list[tuple[str, float]]] = {nid: [] for nid in network.nodes}
    for e in network.edges:
        adj[e.from_id].append((e.to_id, e.length_m))
        if e.bidirectional:
            adj[e.to_id].append((e.from_id, e.length_m))
    return adj


def _dijkstra(adj, source: str) -> dict[str, float]:
    dist = {source: 0.0}
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, UNREACHABLE):
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist.get(v, UNREACHABLE):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def shortest_path_distances(network: RoadNetwork, source: str) -> dict[str, float]:
    """Exact single-source shortest-path distances in meters.

    Nodes with no path from ``source`` are absent from the result.
    """
    if source not in network.nodes:
        raise ValidationError(f"unknown source node '{source}'")
    return _dijkstra(_adjacency(network), source)


@dataclass(frozen=True, eq=False)
class TravelTimeMatrix:
    """Walk minutes from each site (column) to each demand point (row).

    Entries are ``UNREACHABLE`` (inf) beyond the group's maximum walk
    distance or where no path exists.
    """

    group: PopulationGroup
    times_min: np.ndarray
    demand_order: tuple[str, ...]
    site_order: tuple[str, ...]

    def __post_init__(self):
        t = np.asarray(self.times_min, dtype=float)
        object.__setattr__(self, "times_min", t)
        object.__setattr__(self, "demand_order", tuple(self.demand_order))
        object.__setattr__(self, "site_order", tuple(self.site_order))
        expected = (len(self.demand_order), len(self.site_order))
        if t.shape != expected:
            raise ValidationError(
                f"travel-time matrix shape {t.shape} does not match "
                f"{expected[0]} demands x {expected[1]} sites"
            )
        if np.any(np.isnan(t)) or np.any(t < 0):
            raise ValidationError("travel times must be >= 0 or unreachable")

    @cached_property
    def demand_index(self) -> dict[str, int]:
        return {did: i for i, did in enumerate(self.demand_order)}

    @cached_property
    def site_index(self) -> dict[str, int]:
        return {sid: j for j, sid in enumerate(self.site_order)}

    def minutes(self, demand_id: str, site_id: str) -> float:
        return float(self.times_min[self.demand_index[demand_id],
                                    self.site_index[site_id]])


def distance_matrix_m(
    scenario: Scenario,
    *,
    include_snap_distance: bool = False,
    snap_warn_m: float = DEFAULT_SNAP_WARN_M,
) -> np.ndarray:
    """Network walk distance in meters between every demand point and site.

    One shortest-path run per site, from its snapped node.  By default the
    snap legs (point to nearest node) are not counted; with
    ``include_snap_distance`` both legs are added to every pair.
    """
    if not scenario.network.nodes:
        raise ValidationError("scenario network has no nodes")
    arrays = _node_arrays(scenario.network)
    adj = _adjacency(scenario.network)

    def snap(point: Coordinate) -> tuple[str, float]:
        nid, dist = _nearest_node(point, *arrays)
        if dist > snap_warn_m:
            warnings.warn(
                f"point ({point.lon}, {point.lat}) snapped to node '{nid}' "
                f"{dist:.0f} m away (threshold {snap_warn_m:.0f} m)",
                SnapDistanceWarning,
                stacklevel=3,
            )
        return nid, dist

    demand_snaps = [snap(d.location) for d in scenario.demands]
    site_snaps = [snap(s.location) for s in scenario.sites]

    dist = np.full((len(scenario.demands), len(scenario.sites)), UNREACHABLE)
    for j, (site_node, site_leg) in enumerate(site_snaps):
        reach = _dijkstra(adj, site_node)
        for i, (demand_node, demand_leg) in enumerate(demand_snaps):
            base = reach.get(demand_node)
            if base is None:
                continue
            if include_snap_distance:
                base = base + demand_leg + site_leg
            dist[i, j] = base
    return dist


def build_travel_time_matrix(
    scenario: Scenario,
    group: PopulationGroup,
    *,
    dist_m: np.ndarray | None = None,
    include_snap_distance: bool = False,
    snap_warn_m: float = DEFAULT_SNAP_WARN_M,
) -> TravelTimeMatrix:
    """Travel-time matrix for one group: distance over walk speed, capped.

    Pairs farther apart than the group's maximum walk distance are
    ``UNREACHABLE``.  Pass ``dist_m`` to reuse one distance computation
    across groups.
    """
    if dist_m is None:
        dist_m = distance_matrix_m(
            scenario,
            include_snap_distance=include_snap_distance,
            snap_warn_m=snap_warn_m,
        )
    times = np.where(
        dist_m <= group.max_walk_m,
        dist_m / group.walk_speed_m_per_min,
        UNREACHABLE,
    )
    return TravelTimeMatrix(group, times, scenario.demand_ids, scenario.site_ids)


def build_travel_time_matrices(
    scenario: Scenario,
    *,
    include_snap_distance: bool = False,
    snap_warn_m: float = DEFAULT_SNAP_WARN_M,
) -> dict[str, TravelTimeMatrix]:
    """One matrix per scenario group, sharing a single distance computation."""
    dist = distance_matrix_m(
        scenario,
        include_snap_distance=include_snap_distance,
        snap_warn_m=snap_warn_m,
    )
    return {
        g.name: build_travel_time_matrix(scenario, g, dist_m=dist)
        for g in scenario.groups
    }


def write_matrix_csv(matrix: TravelTimeMatrix, path) -> None:
    """Dump as ``demand_id,site_id,minutes`` rows; unreachable pairs say ``inf``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("demand_id,site_id,minutes\n")
        for i, did in enumerate(matrix.demand_order):
            for j, sid in enumerate(matrix.site_order):
                t = matrix.times_min[i, j]
                cell = "inf" if math.isinf(t) else format_number(t)
                fh.write(f"{did},{sid},{cell}\n")
