"""Facility placement search: which candidate sites to open.

Cost of a layout: ``alpha * k + beta * sum_i |A_i - a_sigma|^2`` where k is
the number of newly opened candidate sites and A_i the primary group's
accessibility score at demand point i, subject to every constrained group
reaching the target ``a_sigma`` everywhere it has population.  The search is
greedy construction (open whichever candidate cuts the remaining shortfall
most) followed by best-improvement drop/swap local search; an exhaustive
subset enumeration doubles as ground truth on small candidate pools.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .accessibility import (
    AccessibilityField,
    CoverageReport,
    accessibility_scores,
    coverage_report,
    decay_weights,
    default_bins,
    population_vector,
    supply_demand_ratios,
)
from .geodata import Scenario, ValidationError

FEASIBILITY_TOL = 1e-9
IMPROVEMENT_TOL = 1e-12
DEFAULT_MAX_POOL = 15
DEFAULT_BUDGET = 1000


class CandidatePoolError(RuntimeError):
    """Exhaustive enumeration refused: candidate pool exceeds the cap."""


@dataclass(frozen=True)
class ObjectiveParams:
    alpha: float = 1.0
    beta: float = 1.0
    a_sigma: float = 0.135
    gamma: float = 1.0
    primary_group: str = "general"
    constraint_groups: tuple[str, ...] = ("general",)

    def __post_init__(self):
        object.__setattr__(self, "constraint_groups", tuple(self.constraint_groups))
        if self.alpha < 0 or self.beta < 0 or self.a_sigma < 0:
            raise ValidationError("alpha, beta and a_sigma must be non-negative")
        if not self.gamma > 0:
            raise ValidationError("gamma must be > 0")
        if not self.constraint_groups:
            raise ValidationError("at least one constraint group required")


@dataclass(frozen=True)
class Layout:
    """The chosen set of candidate sites to open; existing sites are always open."""

    open_candidates: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "open_candidates", frozenset(self.open_candidates))

    @property
    def k(self) -> int:
        return len(self.open_candidates)

    def sorted_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.open_candidates))


@dataclass(frozen=True)
class Shortfall:
    demand_id: str
    group: str
    score: float


@dataclass(frozen=True)
class OptimizationResult:
    layout: Layout
    objective: float
    feasible: bool
    per_group_fields: Mapping[str, AccessibilityField]
    coverage: Mapping[str, CoverageReport]
    shortfalls: tuple[Shortfall, ...]
    trace: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "per_group_fields", dict(self.per_group_fields))
        object.__setattr__(self, "coverage", dict(self.coverage))
        object.__setattr__(self, "shortfalls", tuple(self.shortfalls))
        object.__setattr__(self, "trace", tuple(self.trace))
        if self.feasible != (not self.shortfalls):
            raise ValidationError("feasible flag contradicts the shortfall list")


def _check_layout(layout: Layout, scenario: Scenario) -> None:
    bad = sorted(layout.open_candidates - set(scenario.candidate_site_ids))
    if bad:
        raise ValidationError(
            f"layout members must be candidate sites of the scenario: {', '.join(bad)}"
        )


class _Evaluator:
    """Caches per-group decay-weighted ratio columns for fast layout scoring.

    The score of demand i under an open set S is the (gamma-scaled) sum of
    column i-entries of W over the open columns, with W = weights * ratios;
    ratios depend only on the site itself, so W never changes during the
    search.  Columns are always summed in ascending site-index order, which
    keeps every evaluation bit-reproducible.
    """

    def __init__(self, scenario: Scenario, matrices, params: ObjectiveParams):
        self.scenario = scenario
        self.params = params
        needed = dict.fromkeys((params.primary_group, *params.constraint_groups))
        self.contrib: dict[str, np.ndarray] = {}
        self.pos_mask: dict[str, np.ndarray] = {}
        for name in needed:
            scenario.group_named(name)
            matrix = matrices.get(name)
            if matrix is None:
                raise ValidationError(f"missing travel-time matrix for group '{name}'")
            if matrix.demand_order != scenario.demand_ids or (
                matrix.site_order != scenario.site_ids
            ):
                raise ValidationError("matrix order does not match the scenario")
            weights = decay_weights(matrix.times_min, matrix.group.t_sigma_min)
            ratios = supply_demand_ratios(matrix, scenario.demands, scenario.sites)
            self.contrib[name] = weights * ratios[None, :]
            self.pos_mask[name] = population_vector(scenario.demands, name) > 0
        self.site_index = {sid: j for j, sid in enumerate(scenario.site_ids)}
        self.existing_idx = [
            j for j, s in enumerate(scenario.sites) if s.existing
        ]
        self.candidate_ids = tuple(sorted(scenario.candidate_site_ids))
        self.n_demands = len(scenario.demands)

    def open_indices(self, open_candidates) -> list[int]:
        idx = list(self.existing_idx)
        idx.extend(self.site_index[c] for c in open_candidates)
        idx.sort()
        return idx

    def field_vector(self, group: str, open_idx) -> np.ndarray:
        if not open_idx:
            return np.zeros(self.n_demands)
        return self.params.gamma * self.contrib[group][:, open_idx].sum(axis=1)

    def evaluate(self, open_candidates) -> tuple[float, bool, float]:
        """(objective, feasible, total squared shortfall) for one layout."""
        p = self.params
        open_idx = self.open_indices(open_candidates)
        fields = {g: self.field_vector(g, open_idx) for g in self.contrib}
        deviation = np.abs(fields[p.primary_group] - p.a_sigma)
        objective = p.alpha * len(open_candidates) + p.beta * float(
            np.sum(deviation**2)
        )
        feasible = True
        shortfall = 0.0
        for g in p.constraint_groups:
            scores = fields[g][self.pos_mask[g]]
            if np.any(scores < p.a_sigma - FEASIBILITY_TOL):
                feasible = False
            shortfall += float(np.sum(np.maximum(0.0, p.a_sigma - scores) ** 2))
        return objective, feasible, shortfall

    def objective(self, open_candidates) -> float:
        return self.evaluate(open_candidates)[0]

    def feasible(self, open_candidates) -> bool:
        return self.evaluate(open_candidates)[1]

    def shortfalls(self, open_candidates) -> tuple[Shortfall, ...]:
        p = self.params
        open_idx = self.open_indices(open_candidates)
        out = []
        for g in p.constraint_groups:
            scores = self.field_vector(g, open_idx)
            for i, did in enumerate(self.scenario.demand_ids):
                if self.pos_mask[g][i] and scores[i] < p.a_sigma - FEASIBILITY_TOL:
                    out.append(Shortfall(did, g, float(scores[i])))
        return tuple(out)


def objective_value(
    layout: Layout,
    scenario: Scenario,
    matrices,
    params: ObjectiveParams,
) -> float:
    """Cost of a layout: facility count plus squared deviations from target."""
    _check_layout(layout, scenario)
    return _Evaluator(scenario, matrices, params).objective(layout.open_candidates)


def is_feasible(
    layout: Layout,
    scenario: Scenario,
    matrices,
    params: ObjectiveParams,
) -> tuple[bool, tuple[Shortfall, ...]]:
    """Whether every constrained group reaches the target everywhere it lives."""
    _check_layout(layout, scenario)
    shortfalls = _Evaluator(scenario, matrices, params).shortfalls(layout.open_candidates)
    return (not shortfalls), shortfalls


def _greedy(ev: _Evaluator) -> tuple[set[str], list[tuple[str, ...]]]:
    open_ids: set[str] = set()
    trace: list[tuple[str, ...]] = []
    remaining = list(ev.candidate_ids)
    while remaining and not ev.feasible(open_ids):
        best_key = None
        best_cid = None
        for cid in remaining:
            objective, _, shortfall = ev.evaluate(open_ids | {cid})
            key = (shortfall, objective, cid)
            if best_key is None or key < best_key:
                best_key, best_cid = key, cid
        open_ids.add(best_cid)
        remaining.remove(best_cid)
        trace.append(("open", best_cid))
    return open_ids, trace


def greedy_construct(
    scenario: Scenario,
    matrices,
    params: ObjectiveParams,
) -> Layout:
    """Open candidates one at a time, always the one cutting shortfall most.

    Ties fall to the lower objective, then the smaller site id.  Stops as
    soon as the layout is feasible, or with everything open when it never
    becomes feasible.
    """
    open_ids, _ = _greedy(_Evaluator(scenario, matrices, params))
    return Layout(frozenset(open_ids))


def _local_search(
    ev: _Evaluator, start: set[str], budget: int
) -> tuple[set[str], list[tuple[str, ...]]]:
    current = set(start)
    if not ev.feasible(current):
        warnings.warn(
            "local search start layout is infeasible; returning it unchanged",
            stacklevel=3,
        )
        return current, []
    trace: list[tuple[str, ...]] = []
    current_obj = ev.objective(current)
    for _ in range(budget):
        best_obj = None
        best_move = None
        best_set = None
        closed = [c for c in ev.candidate_ids if c not in current]
        moves = [(("drop", sid), current - {sid}) for sid in sorted(current)]
        moves.extend(
            (("swap", out, inn), (current - {out}) | {inn})
            for out in sorted(current)
            for inn in closed
        )
        for move, trial in moves:
            objective, feasible, _ = ev.evaluate(trial)
            if not feasible or objective >= current_obj - IMPROVEMENT_TOL:
                continue
            if best_obj is None or objective < best_obj:
                best_obj, best_move, best_set = objective, move, trial
        if best_move is None:
            break
        current, current_obj = set(best_set), best_obj
        trace.append(best_move)
    return current, trace


def local_search(
    start: Layout,
    scenario: Scenario,
    matrices,
    params: ObjectiveParams,
    budget: int = DEFAULT_BUDGET,
) -> Layout:
    """Best-improvement drop/swap descent from a feasible start layout.

    Only feasibility-preserving moves that strictly lower the objective are
    taken; moves are enumerated in ascending site-id order so the outcome is
    deterministic.  An infeasible start is returned unchanged with a warning.
    """
    _check_layout(start, scenario)
    ev = _Evaluator(scenario, matrices, params)
    final, _ = _local_search(ev, set(start.open_candidates), budget)
    return Layout(frozenset(final))


def _assemble_result(
    scenario: Scenario,
    matrices,
    params: ObjectiveParams,
    open_ids,
    trace,
    bins=None,
) -> OptimizationResult:
    layout = Layout(frozenset(open_ids))
    objective = objective_value(layout, scenario, matrices, params)
    feasible, shortfalls = is_feasible(layout, scenario, matrices, params)
    open_full = set(scenario.existing_site_ids) | set(layout.open_candidates)
    bin_spec = default_bins(params.a_sigma) if bins is None else bins
    fields: dict[str, AccessibilityField] = {}
    coverage: dict[str, CoverageReport] = {}
    for g in scenario.groups:
        if g.name not in matrices:
            raise ValidationError(f"missing travel-time matrix for group '{g.name}'")
        field = accessibility_scores(scenario, matrices[g.name], open_full, params.gamma)
        fields[g.name] = field
        coverage[g.name] = coverage_report(field, scenario.demands, bin_spec)
    return OptimizationResult(
        layout=layout,
        objective=objective,
        feasible=feasible,
        per_group_fields=fields,
        coverage=coverage,
        shortfalls=shortfalls,
        trace=tuple(trace),
    )


def optimize(
    scenario: Scenario,
    matrices,
    params: ObjectiveParams,
    budget: int = DEFAULT_BUDGET,
    bins=None,
) -> OptimizationResult:
    """Greedy construction plus local search, with full reporting.

    The result carries accessibility fields and coverage reports for every
    scenario group.  When even the full candidate pool cannot reach the
    target everywhere, the all-open layout is returned marked infeasible
    with its shortfall list.
    """
    ev = _Evaluator(scenario, matrices, params)
    open_ids, trace = _greedy(ev)
    if ev.feasible(open_ids):
        open_ids, ls_trace = _local_search(ev, open_ids, budget)
        trace.extend(ls_trace)
    return _assemble_result(scenario, matrices, params, open_ids, trace, bins)


def exhaustive_oracle(
    scenario: Scenario,
    matrices,
    params: ObjectiveParams,
    max_pool: int = DEFAULT_MAX_POOL,
    bins=None,
) -> OptimizationResult:
    """Ground truth by enumerating every candidate subset.

    Returns the minimum-objective feasible layout (ties: fewer sites, then
    lexicographically smallest id set).  If no subset is feasible, returns
    the subset with the smallest total shortfall, marked infeasible.
    """
    ev = _Evaluator(scenario, matrices, params)
    pool = len(ev.candidate_ids)
    if pool > max_pool:
        raise CandidatePoolError(
            f"{pool} candidate sites exceed the enumeration cap of {max_pool}"
        )
    best_feasible = None
    best_any = None
    for mask in range(1 << pool):
        subset = tuple(
            cid for b, cid in enumerate(ev.candidate_ids) if (mask >> b) & 1
        )
        objective, feasible, shortfall = ev.evaluate(subset)
        if feasible:
            key = (objective, len(subset), subset)
            if best_feasible is None or key < best_feasible:
                best_feasible = key
        key_any = (shortfall, objective, len(subset), subset)
        if best_any is None or key_any < best_any:
            best_any = key_any
    chosen = best_feasible[2] if best_feasible is not None else best_any[3]
    return _assemble_result(scenario, matrices, params, chosen, (), bins)
