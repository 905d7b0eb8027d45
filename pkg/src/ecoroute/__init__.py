"""Route cost estimation and eco-route recommendation for plug-in hybrid vehicles."""
from ._backend import BACKEND
from .drcm import CalibrationError, CostBreakdown, DrcmCoefficients, PriceTable, calibrate, route_cost
from .ecms import EcmsConfig, InfeasibleDemand, PowerSplit, SocState, Stage, split_power, step_soc
from .phev_sim import ConsumptionReadings, generate_synthetic_trajectory, simulate
from .recommend import Recommendation, estimate_path_cost, recommend
from .roadnet import Edge, NetworkError, NoPathError, Path, RoadNetwork, fastest_path, load_network, shortest_path
from .traffic import TrafficConfig, TrafficObservation, TrafficStore, interpolate
from .trajectory import Trajectory
from .vehicle_model import PathFeatures, VehicleParams, load_vehicles

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CalibrationError", "ConsumptionReadings", "CostBreakdown", "DrcmCoefficients",
    "EcmsConfig", "Edge", "InfeasibleDemand", "NetworkError", "NoPathError", "Path", "PathFeatures",
    "PowerSplit", "PriceTable", "Recommendation", "RoadNetwork", "SocState", "Stage", "TrafficConfig",
    "TrafficObservation", "TrafficStore", "Trajectory", "VehicleParams", "calibrate", "estimate_path_cost",
    "fastest_path", "generate_synthetic_trajectory", "interpolate", "load_network", "load_vehicles",
    "recommend", "route_cost", "shortest_path", "simulate", "split_power", "step_soc",
]
