"""Performance-based resilience metrics.

Each metric follows its published closed form.  Values that leave the
metric's nominal range are reported raw with a warning attached; nothing
is clamped, because estimator artifacts (for example a recovery rate above
one on a short state sequence) are information, not noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .errors import (
    BaselineInfeasibleError,
    InfeasibleDesignError,
    UndefinedInputError,
    ValidationError,
)
from .hydraulics import FAILURE, SATISFACTORY, BinaryStateSeries, HydraulicSeries
from .network import Network, Pipe

# specific weight of water, N/m3
GAMMA_W = 9810.0


@dataclass(frozen=True)
class MetricValue:
    """A computed metric with its nominal range and provenance digest."""

    name: str
    value: float
    nominal_range: tuple[float, float] | None
    warnings: tuple[str, ...] = ()
    inputs_digest: str = ""

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValidationError(f"metric {self.name!r} produced a non-finite value")
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def in_range(self) -> bool:
        if self.nominal_range is None:
            return True
        lo, hi = self.nominal_range
        return lo <= self.value <= hi

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "nominal_range": list(self.nominal_range) if self.nominal_range else None,
            "warnings": list(self.warnings),
            "inputs_digest": self.inputs_digest,
        }


def _range_warnings(value: float, lo: float, hi: float) -> list[str]:
    if value < lo or value > hi:
        return [f"value {value!r} outside nominal range [{lo}, {hi}]"]
    return []


def hashimoto_recovery(states: BinaryStateSeries) -> MetricValue:
    """Average recovery rate of a satisfactory/failure state sequence.

    Estimated from a single trajectory of T states: the share of
    satisfactory states and the share of S-to-F transition pairs (T-1 pairs)
    form the ratio rho / (1 - alpha).  Note the numerator is the joint
    S-then-F probability, not a conditional one, so short sequences can
    push the estimate above 1; such values are flagged, not clamped.
    """
    seq = states.states
    if len(seq) < 2:
        raise ValidationError("recovery rate needs at least two states")
    t = len(seq)
    n_s = sum(1 for s in seq if s == SATISFACTORY)
    warnings = []
    if n_s == t:
        # never failed: no recovery evidence, reported as perfect by convention
        value = 1.0
        warnings.append("no failure observed; value 1.0 by convention")
    else:
        alpha = n_s / t
        rho = sum(
            1 for a, b in zip(seq, seq[1:]) if a == SATISFACTORY and b == FAILURE
        ) / (t - 1)
        value = rho / (1.0 - alpha)
        warnings.extend(_range_warnings(value, 0.0, 1.0))
    return MetricValue(
        "hashimoto_recovery", value, (0.0, 1.0), tuple(warnings), states.digest()
    )


def zhuang_availability(series: HydraulicSeries) -> MetricValue:
    """Delivered over demanded volume, summed over nodes and the window."""
    sl = series.window_slice()
    total_demand = float(series.demand[sl].sum())
    if total_demand <= 0:
        raise UndefinedInputError("availability is undefined at zero total demand")
    value = float(series.delivered[sl].sum()) / total_demand
    return MetricValue(
        "zhuang_availability",
        value,
        (0.0, 1.0),
        tuple(_range_warnings(value, 0.0, 1.0)),
        series.digest(),
    )


def pipe_fragility(pipe: Pipe) -> float:
    """Failure probability 1 - exp(-repair_rate * length), in [0, 1)."""
    return -math.expm1(-pipe.repair_rate * pipe.length)


def flow_based_resilience(net: Network, series: HydraulicSeries) -> MetricValue:
    """Fragility-weighted surplus-head metric over a demand pattern.

    Per node and timestep the head surplus ``q*(h - h*)`` is weighted by the
    summed reliability ``(1 - Pf)`` of the incident pipes; the denominator
    carries a fixed factor of 4 on the demand-head product.
    """
    _check_series_nodes(net, series)
    reliability = {
        j.id: sum(1.0 - pipe_fragility(net.pipe(pid)) for pid in net.incident_pipes(j.id))
        for j in net.junctions
    }
    rel = np.array([reliability[nid] for nid in series.node_ids])
    sl = series.window_slice()
    demand = series.demand[sl]
    surplus = series.head[sl] - series.required_head[sl]
    numerator = float((rel * demand * surplus).sum())
    denominator = 4.0 * float((demand * series.required_head[sl]).sum())
    if denominator <= 0:
        raise UndefinedInputError("flow-based resilience needs a positive demand-head product")
    value = numerator / denominator
    return MetricValue(
        "flow_based_resilience",
        value,
        (0.0, 1.0),
        tuple(_range_warnings(value, 0.0, 1.0)),
        f"{net.digest()}+{series.digest()}",
    )


def user_functionality(supply: float, demand: float) -> float:
    """Supply over demand, uncapped; oversupply is reported as-is."""
    if demand <= 0:
        raise UndefinedInputError("user functionality is undefined at zero demand")
    return supply / demand


def user_severity(series: HydraulicSeries, node_id: str) -> MetricValue:
    """Minimum supply/demand ratio of one node over the analysis window."""
    i = series.node_index(node_id)
    t0, t1 = series.window
    ratios = []
    for t in range(t0, t1 + 1):
        demand = float(series.demand[t, i])
        if demand <= 0:
            raise UndefinedInputError(
                f"node {node_id!r} has zero demand at t={t}; severity undefined"
            )
        ratios.append(float(series.delivered[t, i]) / demand)
    value = min(ratios)
    return MetricValue(
        "user_severity",
        value,
        (0.0, 1.0),
        tuple(_range_warnings(value, 0.0, 1.0)),
        f"{series.digest()}:{node_id}",
    )


def todini_index(net: Network, state: HydraulicSeries) -> MetricValue:
    """Surplus power over the maximum dissipable power for one snapshot.

    Numerator: sum of ``q*(h - h*)`` over junctions.  Denominator: source
    flow-head products plus pump power over the specific weight of water,
    minus the demand-head requirement.  Head deficits contribute
    negatively; they are kept, not floored.
    """
    _check_series_nodes(net, state)
    if state.n_steps != 1:
        raise ValidationError("the resilience index expects a single-timestep series")
    demand = state.demand[0]
    surplus = state.head[0] - state.required_head[0]
    numerator = float((demand * surplus).sum())
    source_power = sum(s.outflow * s.total_head for s in net.sources)
    pump_power = sum(p.power / GAMMA_W for p in net.pumps)
    required = float((demand * state.required_head[0]).sum())
    denominator = source_power + pump_power - required
    if denominator <= 0:
        raise InfeasibleDesignError(
            "available power does not exceed the required power; index undefined"
        )
    value = numerator / denominator
    return MetricValue(
        "todini_index",
        value,
        (0.0, 1.0),
        tuple(_range_warnings(value, 0.0, 1.0)),
        f"{net.digest()}+{state.digest()}",
    )


def buffering_capacity(
    net: Network,
    feasibility: Callable[[frozenset[str]], bool],
    max_k: int = 2,
    components: Iterable[str] | None = None,
) -> int:
    """Largest k such that every failure set of at most k components passes.

    ``feasibility`` receives a frozenset of failed component ids (pipes and
    pumps by default) and must be a pure predicate.  All subsets are
    enumerated exactly, which is exponential in ``max_k``; keep ``max_k``
    small on anything beyond desk-scale networks.
    """
    pool = tuple(sorted(components)) if components is not None else tuple(
        sorted((*net.pipe_ids, *net.pump_ids))
    )
    if max_k < 0:
        raise ValidationError("max_k must be >= 0")
    if max_k > len(pool):
        raise ValidationError(
            f"max_k={max_k} exceeds the {len(pool)} failable components"
        )
    if not feasibility(frozenset()):
        raise BaselineInfeasibleError("the intact system already fails the feasibility check")
    for k in range(1, max_k + 1):
        for failed in combinations(pool, k):
            if not feasibility(frozenset(failed)):
                return k - 1
    return max_k


def connectivity_feasibility(net: Network) -> Callable[[frozenset[str]], bool]:
    """Feasibility oracle: every junction keeps a path to some source.

    Failed pump ids in the set are accepted and ignored, since pumps do not
    carry connectivity.
    """
    pump_ids = set(net.pump_ids)

    def feasible(failed: frozenset[str]) -> bool:
        reachable = net.reachable_from_sources(failed - pump_ids)
        return all(j.id in reachable for j in net.junctions)

    return feasible


def supply_feasibility(net: Network, threshold: float) -> Callable[[frozenset[str]], bool]:
    """Feasibility oracle: allocated supply covers ``threshold`` of demand."""
    if not 0 < threshold <= 1:
        raise ValidationError("threshold must lie in (0, 1]")
    from .hydraulics import allocate_flows

    pump_ids = set(net.pump_ids)

    def feasible(failed: frozenset[str]) -> bool:
        alloc = allocate_flows(
            net, failed_pipes=failed - pump_ids, failed_pumps=failed & pump_ids
        )
        if alloc.total_demand == 0:
            return True
        return alloc.total_delivered >= threshold * alloc.total_demand - 1e-12

    return feasible


def _check_series_nodes(net: Network, series: HydraulicSeries) -> None:
    junction_ids = set(net.junction_ids)
    series_ids = set(series.node_ids)
    if junction_ids != series_ids:
        missing = sorted(junction_ids - series_ids)
        extra = sorted(series_ids - junction_ids)
        raise ValidationError(
            f"series nodes do not match network junctions (missing {missing}, extra {extra})"
        )
