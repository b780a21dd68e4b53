"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""
import time

import numpy as np
import pytest

from acceptance_report import verdict
from oracles import grid_equilibria
from stap.costs import BPRCost, LinearCost, MergeNode, jin_zhang_jacobian
from stap.experiments import ExperimentSpec, run_experiment
from stap.fixtures import nonmonotone_demo, sioux_falls, toy, toy_coefficients
from stap.graph import shortest_paths, trace_path
from stap.interactions import (GenSpec, condition_number, generate_weights,
                               interpolate_symmetry)
from stap.metrics import read_snapshot_csv
from stap.solvers import SolverConfig, solve
from stap.solvers.shift import shift_direction, symmetric_curvature

SEED = 0


@pytest.fixture(scope="module")
def sioux():
    return sioux_falls()


def test_criterion_1_toy_iteration_one():
    start = time.perf_counter()
    gaps, flows = {}, {}
    for sc in ("separable", "symmetric-full"):
        _, dm, m = toy(sc)
        state, log = solve(m, dm, SolverConfig("gp", rg_target=1e-12, max_iterations=1))
        gaps[sc], flows[sc] = log.gaps[0], state.x.tolist()
    elapsed = time.perf_counter() - start
    ok = (f"{gaps['separable']:.4f}" == "6.0000"
          and abs(gaps["symmetric-full"] - 1.0) <= 0.005
          and all(f == [0.0, 60.0, 0.0, 0.0] for f in flows.values())
          and elapsed < 1.0)
    verdict("1 toy iteration-1 gap and flows", ok,
            f"separable {gaps['separable']:.4f}, symmetric-full "
            f"{gaps['symmetric-full']:.4f}, flows {flows['separable']}, {elapsed:.3f} s")


def test_criterion_2_condition_numbers():
    sym = condition_number(toy_coefficients("symmetric-full")).value
    sym_exact = condition_number(toy_coefficients("symmetric-full", exact=True)).value
    asym = condition_number(toy_coefficients("asymmetric-full"))
    ok = abs(sym - 3.0) <= 0.01 and abs(asym.value - 3.154) <= 0.02
    verdict("2 toy condition numbers", ok,
            f"symmetric {sym:.5f} (exact sixths {sym_exact:.5f}), asymmetric "
            f"{asym.value:.5f} [{asym.convention}; singular-value ratio "
            f"{asym.singular_ratio:.5f}]")


def test_criterion_3_algorithms_agree(sioux):
    # the budget keeps the whole criterion under five minutes
    net, dm, sep = sioux
    sym = BPRCost(net, generate_weights(net, GenSpec(2, True, 0.55, SEED)))
    start = time.perf_counter()
    notes, ok = [], True
    for name, model in (("separable", sep), ("symmetric N=2", sym)):
        flows, reached = {}, {}
        for alg in ("gp", "algb", "fw", "msa"):
            budget = 60.0 if alg in ("fw", "msa") else None
            state, log = solve(model, dm, SolverConfig(alg, rg_target=1e-8,
                                                       max_iterations=10 ** 7,
                                                       time_limit=budget,
                                                       track_objective=False))
            flows[alg], reached[alg] = state.x, min(log.gaps)
        scale = flows["gp"].mean()
        spread = max(np.abs(flows[a] - flows[b]).max()
                     for a in flows for b in flows) / scale
        hit = all(g <= 1e-8 for g in reached.values())
        ok &= hit and spread <= 1e-3
        notes.append(f"{name}: best gaps "
                     + ", ".join(f"{a} {g:.1e}" for a, g in reached.items())
                     + f"; flow spread {spread:.1e} x mean")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    verdict("3 cross-algorithm agreement at RG 1e-8", ok,
            "; ".join(notes) + f"; {elapsed:.0f} s")


def _iterations_to(model, dm, alg, level=1e-4, budget=60.0):
    _, log = solve(model, dm, SolverConfig(alg, rg_target=level, max_iterations=10 ** 6,
                                           time_limit=budget, track_objective=False))
    hit = log.iterations_to(level)
    return float("inf") if hit is None else hit


def _inversions(seq):
    return sum(1 for a, b in zip(seq, seq[1:]) if b > a)


def test_criterion_4_convergence_ordering(sioux):
    net, dm, sep = sioux
    start = time.perf_counter()
    # (a) gradient projection against the convex-combination methods
    models = {"separable": sep}
    for kind in ("symmetric", "asymmetric"):
        models[kind] = BPRCost(net, generate_weights(
            net, GenSpec(2, kind == "symmetric", 0.55, SEED)))
    a_ok, a_notes = True, []
    for name, model in models.items():
        its = {alg: _iterations_to(model, dm, alg) for alg in ("gp", "fw", "msa")}
        a_ok &= its["gp"] < min(its["fw"], its["msa"])
        a_notes.append(f"{name} gp/fw/msa {its['gp']}/{its['fw']}/{its['msa']}")
    # (b) more dependency degrees converge sooner
    b_ok, b_notes = True, []
    for kind in ("symmetric", "asymmetric"):
        seq = [_iterations_to(sep if n == 0 else BPRCost(net, generate_weights(
            net, GenSpec(n, kind == "symmetric", 0.55, SEED))), dm, "gp")
            for n in (0, 2, 4, 6)]
        b_ok &= _inversions(seq) <= 1
        b_notes.append(f"{kind} N=0,2,4,6 -> {seq}")
    # (c) symmetric end of the lambda sweep is no slower
    base = generate_weights(net, GenSpec(2, False, 0.55, SEED))
    sweep = [_iterations_to(BPRCost(net, interpolate_symmetry(base, lam)), dm, "gp")
             for lam in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)]
    c_ok = sweep[0] <= sweep[-1]
    elapsed = time.perf_counter() - start
    ok = a_ok and b_ok and c_ok and elapsed < 600
    verdict("4 convergence ordering (seed 0)", ok,
            f"(a) {'ok' if a_ok else 'FAIL'}: " + ", ".join(a_notes)
            + f"; (b) {'ok' if b_ok else 'FAIL'}: " + ", ".join(b_notes)
            + f"; (c) {'ok' if c_ok else 'FAIL'}: lambda 0..1 -> {sweep}"
            + f"; {elapsed:.0f} s")


@pytest.fixture(scope="module")
def stabilization(tmp_path_factory):
    out = tmp_path_factory.mktemp("stabilization")
    run_experiment(ExperimentSpec("metric-stabilization", seeds=(SEED,), out_dir=str(out)),
                   jobs=2)
    rows = read_snapshot_csv((out / "snapshots.csv").read_text())
    table = {}
    for r in rows:
        table[(r["algorithm"], r["gap_level"])] = (100 * abs(r["delta_tstt"]),
                                                   100 * abs(r["delta_vmt"]),
                                                   100 * r["pul"])
    return table


def test_criterion_5_metric_stabilization(stabilization):
    t = stabilization
    tstt4, _, _ = t[("gp", 1e-4)]
    pul5 = t[("gp", 1e-5)][2]
    vmt_ok = all(t[("gp", lv)][1] <= t[("gp", lv)][0] + 0.5 for lv in (1e-3, 1e-4))
    ok = tstt4 <= 2.5 and pul5 <= 2.5 and vmt_ok
    verdict("5 GP metric stabilization (two-way weights)", ok,
            f"dTSTT@1e-4 {tstt4:.3f}%, PUL@1e-5 {pul5:.2f}%, dVMT vs dTSTT @1e-3 "
            f"{t[('gp', 1e-3)][1]:.3f}/{t[('gp', 1e-3)][0]:.3f}%, @1e-4 "
            f"{t[('gp', 1e-4)][1]:.3f}/{tstt4:.3f}%")


def _close(a, b):
    return abs(a - b) <= 0.5 or max(a, b) <= 2 * min(a, b)


def test_criterion_6_gp_vs_algb(stabilization):
    t = stabilization
    bad = []
    for level in (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
        for k, name in enumerate(("dTSTT", "dVMT", "PUL")):
            g, b = t[("gp", level)][k], t[("algb", level)][k]
            if not _close(g, b):
                bad.append(f"{name}@{level:.0e} gp {g:.3f}% vs algb {b:.3f}%")
    verdict("6 GP vs AlgB snapshot agreement", not bad,
            "all 18 metric/level pairs agree" if not bad else "; ".join(bad))


def test_criterion_7_numerical_identities(sioux):
    rng = np.random.default_rng(2024)
    # (a) line-integral gradient
    worst_a = 0.0
    models = [toy(sc, exact=True)[2] for sc in ("separable", "symmetric-full",
                                                 "symmetric-partial")]
    for m in models:
        for _ in range(20):
            x = rng.uniform(1, 60, 4)
            t = m.link_times(x)
            for a in range(4):
                e = np.zeros(4)
                e[a] = 1e-3
                fd = (m.line_integral_objective(x + e).value
                      - m.line_integral_objective(x - e).value) / 2e-3
                worst_a = max(worst_a, abs(fd - t[a]) / abs(t[a]))
    # (b) block form against direction form for 1000 path pairs
    net, dm, _ = sioux
    w = generate_weights(net, GenSpec(2, True, 0.55, SEED)).toarray()
    lin = LinearCost(net, net.free_flow_time, w)
    x = rng.uniform(0, 2, net.n_links) * net.capacity
    jac = lin.jacobian(x).toarray()
    dg = lin.derivatives(x)
    worst_b, pairs = 0.0, 0
    while pairs < 1000:
        o, d = rng.choice(net.zones, 2, replace=False).tolist()
        p = [trace_path(net, shortest_paths(net, o, rng.uniform(1, 10, net.n_links))[1], o, d)
             for _ in range(2)]
        links, signs = shift_direction(*p)
        eq6 = lin.direction_curvature(dg, links, signs)
        eq7 = symmetric_curvature(jac, links[signs > 0], links[signs < 0])
        worst_b = max(worst_b, abs(eq6 - eq7))
        pairs += 1
    # (c) merge Jacobian over a demand grid
    node = MergeNode(1.0, 2.0, 6.0)
    worst_c, asym = np.inf, 0.0
    for x1 in np.linspace(0, 12, 100):
        for x2 in np.linspace(0, 12, 100):
            j = jin_zhang_jacobian(node, x1, x2)
            asym = max(asym, np.abs(j - j.T).max())
            worst_c = min(worst_c, np.linalg.eigvalsh(j).min())
    ok = worst_a <= 1e-6 and worst_b <= 1e-12 and asym == 0 and worst_c >= -1e-12
    verdict("7 numerical identities", ok,
            f"(a) max rel FD error {worst_a:.1e}; (b) max |block - direction| "
            f"{worst_b:.1e} over {pairs} pairs; (c) asymmetry {asym:.1e}, "
            f"min eigenvalue {worst_c:.1e}")


def test_criterion_8_multiple_equilibria():
    _, dm, m = nonmonotone_demo()
    found = grid_equilibria(m, dm.total)
    finals = []
    for start in (np.array([0.0, 1.0]), np.array([1.0, 0.0])):
        state, log = solve(m, dm, SolverConfig("gp", rg_target=1e-8, initial_times=start))
        finals.append((state.x.tolist(), log.gaps[-1]))
    ok = len(found) == 3 and all(g < 1e-8 for _, g in finals)
    verdict("8 non-monotone demonstrator", ok,
            f"grid finds {[tuple(round(v, 6) for v in p) for p in found]}; GP from each "
            f"all-or-nothing start ends at " + ", ".join(f"{x} (RG {g:.1e})"
                                                         for x, g in finals))
