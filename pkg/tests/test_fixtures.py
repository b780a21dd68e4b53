import filecmp

import numpy as np
import pytest

from oracles import grid_equilibria
from stap.fixtures import (TOY_SCENARIOS, data_path, export_toy, external_network,
                           nonmonotone_demo, toy, toy_coefficients)
from stap.io import load_network, load_trips, validate_network
from stap.metrics import relative_gap
from stap.solvers import SolverConfig, gp_solve


def test_toy_examples():
    net, dm, sep = toy("separable")
    assert sep.link_time(np.array([5.0, 0, 0, 0]), 0) == 20.0
    _, _, part = toy("symmetric-partial")
    assert part.link_time(np.array([4.0, 0, 0, 0]), 1) == 11.0
    assert dm.total == 60.0
    assert net.n_links == 4


def test_unknown_scenario():
    with pytest.raises(ValueError, match="unknown toy scenario"):
        toy("triangular")


def test_printed_coefficients_are_verbatim():
    a = toy_coefficients("asymmetric-full")
    assert a[0].tolist() == [0.5, 0.15, 0.167, 0.183]
    assert toy_coefficients("asymmetric-partial")[1].tolist() == [0.3, 0.75, 0, 0]
    assert toy_coefficients("symmetric-full", exact=True)[0, 1] == 1 / 6


@pytest.mark.parametrize("scenario", TOY_SCENARIOS)
def test_toy_validates(scenario):
    net, _, _ = toy(scenario)
    validate_network(net, allow_parallel=True)


def test_bundled_toy_tntp_round_trips():
    net, dm, _ = toy("separable")
    loaded = load_network(data_path("toy_net.tntp"))
    assert loaded.links == net.links
    assert load_trips(data_path("toy_trips.tntp")).trips == dm.trips


def test_export_toy_matches_bundled_files(tmp_path):
    for p in export_toy(tmp_path):
        assert filecmp.cmp(p, data_path(p.name), shallow=False), p.name


def test_nonmonotone_equilibria():
    net, dm, m = nonmonotone_demo()
    t = m.link_times(np.array([5.0, 5.0]))
    assert t[0] == t[1]
    for x in ([0.0, 10.0], [5.0, 5.0], [10.0, 0.0]):
        assert relative_gap(m, np.array(x), dm) == 0.0
    assert relative_gap(m, np.array([3.0, 7.0]), dm) > 0


def test_grid_oracle_finds_three_equilibria():
    _, dm, m = nonmonotone_demo()
    found = grid_equilibria(m, dm.total)
    assert [tuple(round(v, 9) for v in p) for p in found] == [(0, 10), (5, 5), (10, 0)]


def test_gp_from_link_one_start():
    _, dm, m = nonmonotone_demo()
    state, log = gp_solve(m, dm, SolverConfig(rg_target=1e-8,
                                              initial_times=np.array([0.0, 1.0])))
    assert log.gaps[-1] < 1e-8
    assert state.x.tolist() == [10.0, 0.0]


def test_sioux_falls_bundle(sf):
    net, dm, _ = sf
    assert (net.zones, net.n_links, net.nodes) == (24, 76, 24)
    assert dm.total == 360600


def test_external_network_missing_returns_none(tmp_path):
    assert external_network("Nowhere", root=tmp_path) is None


def test_external_network_loads_from_directory(tmp_path, caplog):
    (tmp_path / "Toy_net.tntp").write_text(data_path("toy_net.tntp").read_text())
    (tmp_path / "Toy_trips.tntp").write_text(data_path("toy_trips.tntp").read_text())
    net, dm = external_network("Toy", root=tmp_path)
    assert "parallel" in caplog.text
    assert net.n_links == 4 and dm.total == 60
