"""Estimate shortest- and fastest-route costs for one PHEV and pick the cheaper."""
from __future__ import annotations

from dataclasses import dataclass, field

from .drcm import CostBreakdown, DrcmCoefficients, PriceTable, route_cost
from .ecms import EcmsConfig, SocState
from .roadnet import Path, RoadNetwork, fastest_path, shortest_path, validate_path
from .traffic import TrafficConfig, TrafficStore, free_flow_trajectory, interpolate
from .vehicle_model import VehicleParams

SHORTEST = "shortest"
FASTEST = "fastest"


@dataclass
class PathEstimate:
    cost: CostBreakdown
    final_state: SocState
    per_edge: list[dict] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def edge_trajectory(edge, t0, store: TrafficStore | None, traffic_cfg: TrafficConfig | None):
    """Representative trajectory resampled to 1 s, or the free-flow stand-in.

    Returns ``(trajectory, used_fallback)``.
    """
    rep = None
    if store is not None and t0 is not None:
        rep = store.representative_trajectory(edge, t0, traffic_cfg)
    if rep is None or len(rep) < 2:
        return free_flow_trajectory(edge), True
    return interpolate(rep, 1.0), False


def estimate_path_cost(
    phev: VehicleParams,
    coeffs: DrcmCoefficients,
    path: Path,
    t0: float | None,
    store: TrafficStore | None,
    cfg: EcmsConfig,
    prices: PriceTable,
    soc0: float | SocState,
    net: RoadNetwork,
    traffic_cfg: TrafficConfig | None = None,
) -> PathEstimate:
    """Sum of per-edge costs along ``path`` with the SOC carried edge to edge."""
    validate_path(net, path)
    state = soc0 if isinstance(soc0, SocState) else SocState.initial(float(soc0), cfg)
    total = CostBreakdown.zero()
    per_edge = []
    diag = {"fallback_edges": [], "n_clipped": 0, "unmet_kj": 0.0}
    for eid in path.edges:
        edge = net.edges[eid]
        traj, fallback = edge_trajectory(edge, t0, store, traffic_cfg)
        if fallback:
            diag["fallback_edges"].append(eid)
        cost, state = route_cost(traj, coeffs, phev, cfg, prices, state, edge.features, diagnostics=diag)
        total = total + cost
        per_edge.append({
            "edge_id": eid,
            "cost": cost.total,
            "duration_s": traj.duration,
            "soc_after": state.soc,
            "fallback": fallback,
        })
    return PathEstimate(total, state, per_edge, diag)


def saving_eq23(shortest_total: float, fastest_total: float) -> float:
    """Signed gap between the two candidates, percent of the cheaper one."""
    denom = min(shortest_total, fastest_total)
    if denom == 0:
        return 0.0
    return (shortest_total - fastest_total) / denom * 100.0


def saving_vs_actual(actual_total: float, eco_total: float) -> float:
    """Percent saved by the eco route relative to the route actually driven."""
    if actual_total <= 0:
        raise ValueError("actual cost must be positive")
    return (actual_total - eco_total) / actual_total * 100.0


def choose(shortest_total: float, fastest_total: float) -> str:
    """Cheaper candidate; equal money goes to the faster route."""
    return FASTEST if fastest_total <= shortest_total else SHORTEST


@dataclass
class Recommendation:
    chosen: str
    shortest_path: Path
    fastest_path: Path
    shortest_cost: CostBreakdown
    fastest_cost: CostBreakdown
    saving_eq23: float
    saving_vs_actual: float | None
    per_edge_costs: dict[str, list[dict]]
    diagnostics: dict

    @property
    def chosen_path(self) -> Path:
        return self.shortest_path if self.chosen == SHORTEST else self.fastest_path

    @property
    def chosen_cost(self) -> CostBreakdown:
        return self.shortest_cost if self.chosen == SHORTEST else self.fastest_cost

    def to_dict(self) -> dict:
        def path_dict(p: Path) -> dict:
            return {"edges": list(p.edges), "length_km": p.total_length, "time_s": p.total_time}

        return {
            "chosen": self.chosen,
            "chosen_edges": list(self.chosen_path.edges),
            "shortest": {"path": path_dict(self.shortest_path), "cost": self.shortest_cost.to_dict()},
            "fastest": {"path": path_dict(self.fastest_path), "cost": self.fastest_cost.to_dict()},
            "saving_eq23": self.saving_eq23,
            "saving_vs_actual": self.saving_vs_actual,
            "per_edge_costs": self.per_edge_costs,
            "diagnostics": self.diagnostics,
        }


def recommend(
    net: RoadNetwork,
    S: str,
    D: str,
    phev: VehicleParams,
    coeffs: DrcmCoefficients,
    t0: float | None,
    soc0: float,
    store: TrafficStore | None = None,
    cfg: EcmsConfig | None = None,
    prices: PriceTable | None = None,
    traffic_cfg: TrafficConfig | None = None,
    actual_cost: float | None = None,
) -> Recommendation:
    """Compare the shortest and fastest routes from ``S`` to ``D`` by estimated cost."""
    cfg = cfg or EcmsConfig().for_vehicle(phev)
    prices = prices or PriceTable()
    sp = shortest_path(net, S, D)
    fp = fastest_path(net, S, D, t0, store, traffic_cfg)
    est_s = estimate_path_cost(phev, coeffs, sp, t0, store, cfg, prices, soc0, net, traffic_cfg)
    est_f = estimate_path_cost(phev, coeffs, fp, t0, store, cfg, prices, soc0, net, traffic_cfg)
    chosen = choose(est_s.cost.total, est_f.cost.total)
    eco = min(est_s.cost.total, est_f.cost.total)
    return Recommendation(
        chosen=chosen,
        shortest_path=sp,
        fastest_path=fp,
        shortest_cost=est_s.cost,
        fastest_cost=est_f.cost,
        saving_eq23=saving_eq23(est_s.cost.total, est_f.cost.total),
        saving_vs_actual=None if actual_cost is None else saving_vs_actual(actual_cost, eco),
        per_edge_costs={SHORTEST: est_s.per_edge, FASTEST: est_f.per_edge},
        diagnostics={SHORTEST: est_s.diagnostics, FASTEST: est_f.diagnostics},
    )
