"""Catchment-based accessibility scoring with a truncated Gaussian decay.

The score of a demand point is assembled in two steps.  Each open site first
gets a supply-to-demand ratio: its capacity divided by the decay-weighted
population within its travel-time catchment.  Each demand point then sums
the decay-weighted ratios of the open sites it can reach.  Both steps share
the same kernel

    w(t) = (exp(-(t / t_sigma)^2 / 2) - exp(-1/2)) / (1 - exp(-1/2))

which falls from 1 at t = 0 to exactly 0 at the threshold t_sigma and is 0
beyond it.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .geodata import DemandPoint, FacilitySite, Scenario, ValidationError
from .routing import TravelTimeMatrix

_KERNEL_FLOOR = math.exp(-0.5)

DEFAULT_A_SIGMA = 0.135


@dataclass(frozen=True)
class DecayParams:
    """Travel-time threshold (minutes) of the decay kernel."""

    t_sigma_min: float

    def __post_init__(self):
        if not self.t_sigma_min > 0:
            raise ValidationError(f"t_sigma_min must be > 0, got {self.t_sigma_min!r}")


def decay_weights(times_min, t_sigma: float) -> np.ndarray:
    """Kernel weight for each travel time; vectorized over arrays.

    Times beyond ``t_sigma`` (including unreachable ones) weigh 0.  Negative
    finite times are rejected.
    """
    t = np.asarray(times_min, dtype=float)
    if np.any(np.isnan(t)) or np.any(t < 0):
        raise ValidationError("travel times must be >= 0 or unreachable")
    ratio = t / t_sigma
    raw = (np.exp(-0.5 * ratio**2) - _KERNEL_FLOOR) / (1.0 - _KERNEL_FLOOR)
    # the clamp only absorbs sub-ulp excursions right at the threshold
    return np.where(t <= t_sigma, np.maximum(raw, 0.0), 0.0)


def gaussian_decay(t: float, params: DecayParams) -> float:
    """Kernel weight in [0, 1] for a single travel time in minutes."""
    return float(decay_weights(np.array([t], dtype=float), params.t_sigma_min)[0])


def population_vector(demands: Sequence[DemandPoint], group: str) -> np.ndarray:
    return np.array([d.pop_of(group) for d in demands], dtype=float)


def _check_alignment(matrix: TravelTimeMatrix, scenario: Scenario) -> None:
    if matrix.demand_order != scenario.demand_ids:
        raise ValidationError("matrix demand order does not match the scenario")
    if matrix.site_order != scenario.site_ids:
        raise ValidationError("matrix site order does not match the scenario")


class SupplyDemandRatio(NamedTuple):
    ratio: float
    idle: bool


def supply_demand_ratio(
    site: FacilitySite,
    matrix: TravelTimeMatrix,
    demands: Sequence[DemandPoint],
    params: DecayParams | None = None,
) -> SupplyDemandRatio:
    """Capacity per decay-weighted person within one site's catchment.

    A site with no weighted demand in reach is idle and gets ratio 0 instead
    of a division by zero.
    """
    j = matrix.site_index.get(site.site_id)
    if j is None:
        raise ValidationError(f"matrix does not cover site '{site.site_id}'")
    t_sigma = params.t_sigma_min if params is not None else matrix.group.t_sigma_min
    weights = decay_weights(matrix.times_min[:, j], t_sigma)
    denom = float((weights * population_vector(demands, matrix.group.name)).sum())
    if denom > 0.0:
        return SupplyDemandRatio(site.capacity / denom, False)
    return SupplyDemandRatio(0.0, True)


def supply_demand_ratios(
    matrix: TravelTimeMatrix,
    demands: Sequence[DemandPoint],
    sites: Sequence[FacilitySite],
) -> np.ndarray:
    """Ratio for every site in matrix column order; idle sites get 0."""
    if tuple(d.demand_id for d in demands) != matrix.demand_order:
        raise ValidationError("demand order does not match the matrix")
    if tuple(s.site_id for s in sites) != matrix.site_order:
        raise ValidationError("site order does not match the matrix")
    weights = decay_weights(matrix.times_min, matrix.group.t_sigma_min)
    pop = population_vector(demands, matrix.group.name)
    denom = (weights * pop[:, None]).sum(axis=0)
    supply = np.array([s.capacity for s in sites], dtype=float)
    ratios = np.zeros_like(denom)
    np.divide(supply, denom, out=ratios, where=denom > 0.0)
    return ratios


@dataclass(frozen=True)
class AccessibilityField:
    """Accessibility score of every demand point for one group."""

    group: str
    scores: Mapping[str, float]
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scores", dict(self.scores))
        if any(v < 0 for v in self.scores.values()):
            raise ValidationError("accessibility scores must be non-negative")

    def vector(self) -> np.ndarray:
        return np.array(list(self.scores.values()), dtype=float)


def accessibility_scores(
    scenario: Scenario,
    matrix: TravelTimeMatrix,
    open_sites,
    gamma: float = 1.0,
) -> AccessibilityField:
    """Score each demand point against the currently open sites.

    Per demand point: gamma times the sum, over reachable open sites, of the
    kernel weight times that site's supply-to-demand ratio.  Demand with no
    reachable open site scores 0.
    """
    _check_alignment(matrix, scenario)
    if not gamma > 0:
        raise ValidationError(f"gamma must be > 0, got {gamma!r}")
    open_set = set(open_sites)
    unknown = sorted(open_set - set(scenario.site_ids))
    if unknown:
        raise ValidationError(f"unknown site id(s) in open set: {', '.join(unknown)}")

    weights = decay_weights(matrix.times_min, matrix.group.t_sigma_min)
    ratios = supply_demand_ratios(matrix, scenario.demands, scenario.sites)
    contributions = weights * ratios[None, :]
    open_idx = [j for j, sid in enumerate(matrix.site_order) if sid in open_set]
    if open_idx:
        totals = gamma * contributions[:, open_idx].sum(axis=1)
    else:
        totals = np.zeros(len(matrix.demand_order))
    scores = {did: float(totals[i]) for i, did in enumerate(matrix.demand_order)}
    return AccessibilityField(matrix.group.name, scores, gamma)


# ---------------------------------------------------------------------------
# Coverage reporting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverageBin:
    label: str
    lower_bound: float
    population: int
    share: float


@dataclass(frozen=True)
class CoverageReport:
    group: str
    bins: tuple[CoverageBin, ...]

    @property
    def total_population(self) -> int:
        return sum(b.population for b in self.bins)

    def population_at_least(self, lower_bound: float) -> int:
        """Population binned at or above the bin with this lower bound."""
        return sum(b.population for b in self.bins if b.lower_bound >= lower_bound)


def default_bins(a_sigma: float = DEFAULT_A_SIGMA) -> tuple[tuple[str, float], ...]:
    """Five coverage bands anchored on the target accessibility."""
    return (
        ("very-low", 0.0),
        ("low", 0.5 * a_sigma),
        ("medium", a_sigma),
        ("high", 1.5 * a_sigma),
        ("very-high", 2.0 * a_sigma),
    )


def _check_bins(bins) -> tuple[tuple[str, ...], tuple[float, ...]]:
    spec = tuple((str(label), float(lower)) for label, lower in bins)
    if not spec:
        raise ValidationError("bin spec must not be empty")
    bounds = tuple(lower for _, lower in spec)
    if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise ValidationError("bin lower bounds must be strictly increasing")
    if bounds[0] > 0:
        raise ValidationError(
            "first bin lower bound must be <= 0 so every score falls in a bin"
        )
    return tuple(label for label, _ in spec), bounds


def assign_bin(bounds: Sequence[float], score: float) -> int:
    """Index of the highest bin whose lower bound does not exceed the score."""
    return bisect_right(bounds, score) - 1


def coverage_report(
    field: AccessibilityField,
    demands: Sequence[DemandPoint],
    bins,
) -> CoverageReport:
    """Distribute each demand point's group population over the score bins."""
    labels, bounds = _check_bins(bins)
    if set(field.scores) != {d.demand_id for d in demands}:
        raise ValidationError("field scores do not cover exactly these demand points")
    counts = [0] * len(bounds)
    for d in demands:
        counts[assign_bin(bounds, field.scores[d.demand_id])] += d.pop_of(field.group)
    total = sum(counts)
    return CoverageReport(
        group=field.group,
        bins=tuple(
            CoverageBin(labels[k], bounds[k], counts[k],
                        counts[k] / total if total else 0.0)
            for k in range(len(bounds))
        ),
    )


def conservation_check(
    field: AccessibilityField,
    scenario: Scenario,
    open_sites,
    matrix: TravelTimeMatrix,
) -> float:
    """Relative gap between served population-weighted score and open supply.

    With gamma = 1 the population-weighted sum of scores redistributes
    exactly the capacity of the open non-idle sites, so the result is 0 up
    to rounding.  Defined as 0 when nothing is open (both sums empty).
    """
    if field.gamma != 1.0:
        raise ValidationError("conservation identity requires gamma = 1")
    _check_alignment(matrix, scenario)
    open_set = set(open_sites)
    ratios = supply_demand_ratios(matrix, scenario.demands, scenario.sites)
    supply = sum(
        s.capacity
        for j, s in enumerate(scenario.sites)
        if s.site_id in open_set and ratios[j] > 0.0
    )
    if supply <= 0.0:
        return 0.0
    pop = population_vector(scenario.demands, field.group)
    served = float(np.sum(pop * field.vector()))
    return abs(served - supply) / supply
