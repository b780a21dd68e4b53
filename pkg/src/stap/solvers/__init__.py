"""Equilibrium solvers driven to a target relative gap."""
from .algb import algb_solve
from .base import ALGORITHMS, FlowState, SolverConfig
from .convex import fw_solve, fw_step, msa_solve, msa_step
from .gp import gp_solve
from .shift import newton_shift, newton_step, shift_direction, symmetric_curvature

_DISPATCH = {"msa": msa_solve, "fw": fw_solve, "gp": gp_solve, "algb": algb_solve}


def solve(model, demand, config: SolverConfig, log=None):
    """Run the algorithm named by ``config.algorithm``."""
    try:
        fn = _DISPATCH[config.algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {config.algorithm!r}") from None
    return fn(model, demand, config, log)


__all__ = ["ALGORITHMS", "FlowState", "SolverConfig", "algb_solve", "fw_solve",
           "fw_step", "gp_solve", "msa_solve", "msa_step", "newton_shift",
           "newton_step", "shift_direction", "solve", "symmetric_curvature"]
