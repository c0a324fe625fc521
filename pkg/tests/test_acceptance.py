"""Acceptance suite.

Every criterion records one line per check; the terminal summary prints a
PASS/FAIL verdict per criterion.  Reference values are frozen here and
nowhere in the package.
"""

import json
import math
import time
from functools import lru_cache

import numpy as np
import pytest

from rsa_kinetics import constants, ldf, solver
from rsa_kinetics.cli import main
from rsa_kinetics.compare import default_h
from rsa_kinetics.presets import PRESETS
from rsa_kinetics.sim import SimulationSpec, monte_carlo_all

pytestmark = pytest.mark.slow


def _rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------- 1


def test_criterion_1_renyi_constant(record):
    t0 = time.perf_counter()
    est = constants.renyi_constant()
    dt = time.perf_counter() - t0
    ok_v = record(1, "alpha", abs(est.value - 0.747598) <= 1e-5, f"{est.value:.12f} vs 0.747598 (tol 1e-5)")
    ok_t = record(1, "runtime", dt < 1.0, f"{dt:.3f} s (limit 1 s)")
    assert ok_v and ok_t


# ---------------------------------------------------------------- 2


def test_criterion_2_multidisperse_example(record):
    d = PRESETS["example3"].distribution
    t0 = time.perf_counter()
    est = constants.multidisperse_alphas(d.lengths, d.weights)
    dt = time.perf_counter() - t0
    ok = True
    for k, (e, want) in enumerate(zip(est, [0.4204, 0.1655, 0.0949]), start=1):
        ok &= record(2, f"alpha_{k}", abs(e.value - want) <= 5e-4, f"{e.value:.6f} vs {want} (tol 5e-4)")
    cover = sum(float(l) * e.value for l, e in zip(d.lengths, est))
    ok &= record(2, "coverage", abs(cover - 0.7778) <= 1e-3, f"{cover:.6f} vs 0.7778 (tol 1e-3)")
    ok &= record(2, "runtime", dt < 30.0, f"{dt:.2f} s (limit 30 s)")
    assert ok


# ---------------------------------------------------------------- 3

FIGURE_POINTS = [
    # preset, L, reference, tolerance, relative?
    ("fig2a", 20.0, 3.16301, 5e-3, True),
    ("fig2a", 1980.0, 259.606, 5e-3, True),
    ("fig2b", 20.0, 2.35927, 5e-3, True),
    ("fig2b", 1980.0, 31.1323, 5e-3, True),
    ("fig4", 1.4, 0.869565, 1e-4, False),
    ("fig4", 10.0, 4.17195, 3e-3, True),
    ("fig5a", 99.5, 15.9952, 5e-3, True),
    ("fig5b", 99.5, 9.81419, 5e-3, True),
    ("fig6a", 99.5, 6.21745, 5e-3, True),
    ("fig6b", 50.0, 0.889568, 3e-3, True),
]

_SOLVE_SECONDS: dict[str, float] = {}


def _solve_preset(name: str, h: float) -> solver.GridSolution:
    p = PRESETS[name]
    d = p.distribution
    if p.k is not None:
        return solver.solve_multidisperse_counts(list(d.lengths), list(d.weights), p.k, p.L_max, h)
    return solver.solve_empty_space(d, p.L_max, h)


@lru_cache(maxsize=None)
def _figure(name: str):
    p = PRESETS[name]
    h = default_h(p.distribution, p.L_max)
    t0 = time.perf_counter()
    fine = _solve_preset(name, h)
    _SOLVE_SECONDS[name] = time.perf_counter() - t0
    coarse = _solve_preset(name, 2 * h)
    return fine, coarse


@pytest.mark.parametrize("name, L, ref, tol, rel", FIGURE_POINTS, ids=lambda v: str(v))
def test_criterion_3_figure_point(record, name, L, ref, tol, rel):
    fine, coarse = _figure(name)
    val = fine.at(L)
    grid = abs(val - coarse.at(L)) / max(abs(val), 1e-300)
    err = _rel(val, ref) if rel else abs(val - ref)
    kind = "rel" if rel else "abs"
    ok_grid = record(3, f"{name} grid L={L:g}", grid <= 5e-3, f"|u_h - u_2h| / u = {grid:.2e} (limit 5e-3)")
    ok = record(3, f"{name} L={L:g}", err <= tol, f"{val:.6g} vs {ref:g} ({kind} err {err:.2e}, tol {tol:g})")
    assert ok_grid and ok


def test_criterion_3_runtime(record):
    for name in {p[0] for p in FIGURE_POINTS}:
        _figure(name)
    total = sum(_SOLVE_SECONDS.values())
    assert record(3, "runtime", total < 300.0, f"{total:.1f} s of solves (limit 300 s)")


# ---------------------------------------------------------------- 4


@pytest.mark.parametrize("name", ["renyi", "example3", "uniform-ldf"])
def test_criterion_4_tri_engine(record, tmp_path, name):
    out = tmp_path / "report.json"
    t0 = time.perf_counter()
    code = main(["compare", "--dist", name, "--L", "200", "--reps", "100000", "--format", "json", "--out", str(out)])
    dt = time.perf_counter() - t0
    body = json.loads(out.read_text())
    worst = max(body["rows"], key=lambda r: abs(r["difference"]) / r["tolerance"])
    detail = (
        f"exit {code}, {len(body['rows'])} rows, worst {worst['quantity']} "
        f"|diff|/tol = {abs(worst['difference']) / worst['tolerance']:.2f}, {dt:.1f} s"
    )
    assert record(4, name, code == 0 and body["passed"] and dt < 600.0, detail)


# ---------------------------------------------------------------- 5

GHOST_CONFIGS = [
    [(1.0, 1.0)],
    [(1.0, 0.5), (2.0, 0.5)],
    [(1.0, 0.5), (1.3, 0.3), (1.5, 0.2)],
]


def test_criterion_5_ghost(record):
    t0 = time.perf_counter()
    ok = True
    for i, atoms in enumerate(GHOST_CONFIGS):
        d = ldf.discrete(atoms)
        res = monte_carlo_all(SimulationSpec("ghost", d, 1000.0), 10_000, seed=100 + i)
        for k in range(1, d.n_types + 1):
            exact = constants.ghost_expected_count(list(d.lengths), list(d.weights), k, 1000.0)
            est = res[f"N{k}"]
            z = abs(est.mean - exact) / est.stderr
            ok &= record(5, f"config {i} N_{k}", z <= 4.0, f"{est.mean:.3f} vs {exact:.3f} ({z:.2f} stderr)")
    rng = np.random.default_rng(2024)
    inside = 0
    for _ in range(50):
        n = int(rng.integers(1, 6))
        lengths = np.sort(np.concatenate(([1.0], rng.uniform(1.0, 20.0, n - 1))))
        w = rng.uniform(0.01, 1.0, n)
        probs = w / w.sum()
        val = constants.ghost_density_limit(list(lengths), list(probs))
        lo, hi = constants.ghost_density_bounds(list(lengths))
        inside += lo - 1e-12 <= val <= hi + 1e-12
    ok &= record(5, "density bounds", inside == 50, f"{inside}/50 random configs inside the bounds")
    dt = time.perf_counter() - t0
    ok &= record(5, "runtime", dt < 120.0, f"{dt:.1f} s (limit 120 s)")
    assert ok


# ---------------------------------------------------------------- 6


def test_criterion_6_power_law(record):
    t0 = time.perf_counter()
    ok = True
    xi1 = constants.xi_exponent(1.0)
    closed = (math.sqrt(17.0) - 3.0) / 2.0
    ok &= record(6, "xi(1)", abs(xi1 - closed) <= 1e-10, f"{xi1!r} vs {closed!r}")
    gaps = [abs(constants.xi_exponent(b) - constants.xi_exponent_integer(b)) for b in range(1, 11)]
    ok &= record(6, "xi routes", max(gaps) <= 2e-10, f"max gap {max(gaps):.1e} over beta 1..10")
    g = solver.solve_empty_space(ldf.power_law(1.0), 2000.0, 2.0**-5)
    fit = solver.estimate_power_exponent(g)
    ok &= record(6, "tail exponent", 0.50 <= fit.value <= 0.562, f"{fit.value:.4f} in [0.50, 0.562]")
    excess = np.max(g.values - 1.005 * g.L**xi1)
    ok &= record(6, "upper bound", excess <= 0.0, f"max(E[S_L] - 1.005 L^xi) = {excess:.3g}")
    dt = time.perf_counter() - t0
    ok &= record(6, "runtime", dt < 180.0, f"{dt:.1f} s (limit 180 s)")
    assert ok


# ---------------------------------------------------------------- 7

SAMPLER_CONFIGS = [
    ("uniform", ldf.power_law(1.0), 5.0),
    ("example3", ldf.discrete([(1.0, 0.5), (1.3, 0.3), (1.5, 0.2)]), 6.0),
    ("l^-2", ldf.inverse_power(2.0), 8.0),
    ("e^-l", ldf.exponential(-1.0), 4.0),
    ("unit", ldf.discrete([(1.0, 1.0)]), 7.5),
]


def test_criterion_7_sampler_equivalence(record):
    t0 = time.perf_counter()
    ok = True
    for i, (name, d, L) in enumerate(SAMPLER_CONFIGS):
        a = monte_carlo_all(SimulationSpec("rsa", d, L), 1_000_000, seed=700 + i)
        b = monte_carlo_all(SimulationSpec("rejection", d, L), 1_000_000, seed=800 + i)
        for q in ("N", "S"):
            z = abs(a[q].mean - b[q].mean) / math.hypot(a[q].stderr, b[q].stderr)
            ok &= record(7, f"{name} E[{q}]", z <= 4.0, f"{a[q].mean:.5f} vs {b[q].mean:.5f} ({z:.2f} stderr)")
    dt = time.perf_counter() - t0
    ok &= record(7, "runtime", dt < 300.0, f"{dt:.1f} s (limit 300 s)")
    assert ok


# ---------------------------------------------------------------- 8

COMMANDS = [
    ["simulate", "--dist", "example3", "--L", "50", "--reps", "5000", "--seed", "7"],
    ["simulate", "--dist", "fig6a", "--process", "rejection", "--L", "20", "--reps", "2000", "--format", "json"],
    ["simulate", "--dist", "renyi", "--process", "ghost", "--L", "100", "--reps", "2000"],
    ["solve", "--dist", "fig5a"],
    ["solve", "--dist", "fig4", "--format", "json"],
    ["constants", "renyi"],
    ["constants", "multi", "--preset", "example3"],
    ["constants", "xi", "--beta", "2"],
    ["constants", "ghost", "--preset", "example3"],
    ["compare", "--dist", "renyi", "--L", "50", "--reps", "5000"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: " ".join(a[:3]))
def test_criterion_8_determinism(record, tmp_path, monkeypatch, argv):
    outs = []
    for i, threads in enumerate(("1", "4")):
        monkeypatch.setenv("RSA_KINETICS_THREADS", threads)
        path = tmp_path / f"run{i}"
        code = main(argv + ["--out", str(path)])
        outs.append((code, path.read_bytes()))
    same = outs[0] == outs[1] and outs[0][0] in (0, 1)
    assert record(8, " ".join(argv[:3]), same, f"{len(outs[0][1])} bytes, exit {outs[0][0]}, identical={same}")
