"""Bundled test instances: the four-link toy, a three-equilibrium demo, Sioux Falls."""
from __future__ import annotations

import os
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .costs import BPRCost, LinearCost
from .io import DemandMatrix, Link, Network, load_network, load_trips, validate_network

TOY_SCENARIOS = ("separable", "symmetric-full", "symmetric-partial",
                 "asymmetric-full", "asymmetric-partial")
TOY_DEMAND = 60.0
TOY_CONSTANTS = (15.0, 10.0, 10.0, 15.0)

# Coefficients as printed, with 0.167 / 0.183 / 0.15 standing for 1/6, 11/60, 9/60.
_S, _H, _F = "0.167", "0.183", "0.15"
_TOY_ROWS = {
    "separable": [["1", 0, 0, 0], [0, "1", 0, 0], [0, 0, "1", 0], [0, 0, 0, "1"]],
    "symmetric-full": [["0.5", _S, _S, _S], [_S, "0.5", _S, _S],
                       [_S, _S, "0.5", _S], [_S, _S, _S, "0.5"]],
    "symmetric-partial": [["0.75", "0.25", 0, 0], ["0.25", "0.75", 0, 0],
                          [0, 0, "0.75", "0.25"], [0, 0, "0.25", "0.75"]],
    "asymmetric-full": [["0.5", _F, _S, _H], [_S, "0.5", _H, _F],
                        [_H, _S, "0.5", _F], [_F, _H, _S, "0.5"]],
    "asymmetric-partial": [["0.75", "0.25", 0, 0], ["0.3", "0.75", 0, 0],
                           [0, 0, "0.75", "0.3"], [0, 0, "0.25", "0.75"]],
}
_EXACT = {_S: Fraction(1, 6), _H: Fraction(11, 60), _F: Fraction(9, 60)}

NETWORK_DIR_ENV = "STAP_NETWORK_DIR"


def toy_coefficients(scenario: str, exact: bool = False) -> np.ndarray:
    """4x4 interaction coefficients; ``exact`` swaps rounded decimals for sixtieths."""
    if scenario not in _TOY_ROWS:
        raise ValueError(f"unknown toy scenario {scenario!r}; "
                         f"expected one of {', '.join(TOY_SCENARIOS)}")
    rows = _TOY_ROWS[scenario]
    if exact:
        return np.array([[float(_EXACT.get(v, Fraction(v))) for v in r] for r in rows])
    return np.array([[float(v) for v in r] for r in rows])


def toy_network() -> Network:
    """Two nodes joined by four parallel links; ``t = fft + f`` when read as BPR."""
    links = tuple(Link(0, 1, capacity=1.0, length=1.0, free_flow_time=c,
                       bpr_b=1.0 / c, bpr_power=1.0) for c in TOY_CONSTANTS)
    net = Network(nodes=2, zones=2, first_thru_node=1, links=links, name="toy")
    validate_network(net, allow_parallel=True)
    return net


def toy_demand() -> DemandMatrix:
    return DemandMatrix({(0, 1): TOY_DEMAND}, zones=2)


def toy(scenario: str, exact: bool = False):
    """(network, demand, linear cost model) for one toy scenario."""
    net = toy_network()
    model = LinearCost(net, np.array(TOY_CONSTANTS), toy_coefficients(scenario, exact))
    return net, toy_demand(), model


def nonmonotone_demo():
    """Two parallel links, demand 10, ``t1 = 10 + x1 + 2 x2`` and ``t2 = 10 + 2 x1 + x2``.

    The cost Jacobian has eigenvalues 3 and -1, so the map is not
    monotone; (0, 10), (5, 5) and (10, 0) are all equilibria.
    """
    links = tuple(Link(0, 1, 1.0, 1.0, 10.0, 0.1, 1.0) for _ in range(2))
    net = Network(nodes=2, zones=2, first_thru_node=1, links=links, name="nonmonotone")
    validate_network(net, allow_parallel=True)
    model = LinearCost(net, np.array([10.0, 10.0]), np.array([[1.0, 2.0], [2.0, 1.0]]))
    return net, DemandMatrix({(0, 1): 10.0}, zones=2), model


def data_path(name: str) -> Path:
    return Path(str(resources.files("stap") / "data" / name))


def sioux_falls(weights=None):
    """(network, demand, BPR model); ``weights`` defaults to separable."""
    net = load_network(data_path("SiouxFalls_net.tntp"))
    validate_network(net)
    dm = load_trips(data_path("SiouxFalls_trips.tntp"), zones=net.zones)
    return net, dm, BPRCost(net, weights)


def external_network(name: str, root=None):
    """Load ``<name>_net.tntp`` / ``<name>_trips.tntp`` from a local network directory.

    The directory is ``root``, else ``$STAP_NETWORK_DIR``, else
    ``~/.cache/stap/networks``.  Returns None when the files are missing.
    """
    base = Path(root or os.environ.get(NETWORK_DIR_ENV)
                or Path.home() / ".cache" / "stap" / "networks")
    net_file, trips_file = base / f"{name}_net.tntp", base / f"{name}_trips.tntp"
    if not (net_file.exists() and trips_file.exists()):
        return None
    net = load_network(net_file)
    return net, load_trips(trips_file, zones=net.zones)


# scenarios whose exact-fraction coefficient rows sum to one and so double as weight files
TOY_WEIGHT_SCENARIOS = ("separable", "symmetric-full", "symmetric-partial", "asymmetric-full")


def export_toy(directory) -> list[Path]:
    """Write the toy network, trips and weight files into ``directory``."""
    from .io import write_network, write_trips
    from .weights import WeightMatrix, write_weights

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = [d / "toy_net.tntp", d / "toy_trips.tntp"]
    written[0].write_text(write_network(toy_network()))
    written[1].write_text(write_trips(toy_demand()))
    for sc in TOY_WEIGHT_SCENARIOS:
        p = d / f"toy_{sc}.tapw"
        p.write_text(write_weights(WeightMatrix(toy_coefficients(sc, exact=True))))
        written.append(p)
    # rounded coefficients as printed; rows miss one by 1e-3, so read these unchecked
    p = d / "toy_symmetric-full_printed.tapw"
    p.write_text(write_weights(WeightMatrix(toy_coefficients("symmetric-full"),
                                            validate=False)))
    written.append(p)
    return written
