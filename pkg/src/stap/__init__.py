"""Static traffic assignment with link interactions."""
from .costs import BPRCost, CostModel, LinearCost
from .io import DemandMatrix, Network, load_network, load_trips, load_weights
from .metrics import ConvergenceLog, relative_gap
from .solvers import SolverConfig, solve
from .weights import WeightMatrix

__all__ = ["BPRCost", "ConvergenceLog", "CostModel", "DemandMatrix", "LinearCost",
           "Network", "SolverConfig", "WeightMatrix", "load_network", "load_trips",
           "load_weights", "relative_gap", "solve"]
