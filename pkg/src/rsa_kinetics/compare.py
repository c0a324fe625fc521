"""Cross-checks between the simulation, recurrence and constants engines."""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import constants, solver
from .ldf import Kind, LengthDistribution
from .sim.montecarlo import DEFAULT_BATCH, SimulationSpec, monte_carlo_all

SIGMAS = 4.0
SLOPE_TOL = 2e-3
_FLOOR = 1e-12


@dataclass(frozen=True)
class ComparisonRow:
    quantity: str
    sim_mean: float | None
    sim_stderr: float | None
    solver_value: float | None
    solver_bound: float | None
    const_value: float | None
    const_tol: float | None
    tolerance: float
    difference: float
    passed: bool


@dataclass(frozen=True)
class ComparisonReport:
    label: str
    process: str
    L: float
    replicates: int
    seed: int
    rows: list[ComparisonRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json(self) -> str:
        body = asdict(self)
        body["passed"] = self.passed
        return json.dumps(body, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(ComparisonRow.__dataclass_fields__)
        buf.write(",".join(names) + "\n")
        for r in self.rows:
            cells = []
            for name in names:
                v = getattr(r, name)
                if v is None:
                    cells.append("NA")
                elif isinstance(v, bool):
                    cells.append("pass" if v else "fail")
                elif isinstance(v, float):
                    cells.append(f"{v:.17g}")
                else:
                    cells.append(str(v))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def _row(quantity, tol, diff, **kw) -> ComparisonRow:
    base = dict(
        sim_mean=None, sim_stderr=None, solver_value=None, solver_bound=None,
        const_value=None, const_tol=None,
    )
    base.update(kw)
    return ComparisonRow(quantity=quantity, tolerance=float(tol), difference=float(diff),
                         passed=bool(abs(diff) <= tol), **base)


def default_h(d: LengthDistribution, L_max: float) -> float:
    """Step used when none is given: dyadic for continuous ldfs, otherwise
    the largest ``1 / (D 2**m) <= 2**-6`` putting every length on the grid."""
    if d.kind is not Kind.DISCRETE:
        return 2.0**-6 if L_max <= 500 else 2.0**-5
    h = constants.workspace_step(d.lengths) if len(d.lengths) else 2.0**-6
    while h * 2 <= 2.0**-6:
        h *= 2
    return h


def _counts(d: LengthDistribution, L: float, h: float) -> np.ndarray:
    ls = list(d.lengths)
    qs = list(d.weights)
    return np.array(
        [solver.solve_multidisperse_counts(ls, qs, k, L, h).values for k in range(1, d.n_types + 1)]
    )


def discrete_empty_space(d: LengthDistribution, L_max: float, h: float) -> solver.GridSolution:
    """``E[S_L] = L - sum_k l_k E[N_k,L]`` from the count recurrences."""
    N = _counts(d, L_max, h)
    Lg = np.arange(N.shape[1]) * h
    vals = Lg - np.asarray(d.lengths) @ N
    return solver.GridSolution(h, vals, "E[S_L]", d.fingerprint())


def compare(
    d: LengthDistribution,
    L: float,
    replicates: int,
    seed: int,
    h: float | None = None,
    process: str = "rsa",
    tol_scale: float = 1.0,
    label: str = "",
    batch_size: int = DEFAULT_BATCH,
) -> ComparisonReport:
    """Run every applicable engine on one configuration.

    Simulation against recurrence: ``4 stderr + |u_h - u_2h|``.  Constants
    against the recurrence tail slope: ``2e-3 + |drift| + abs_err``.  Ghost
    simulation against its closed form: ``4 stderr``.  Every tolerance is
    multiplied by ``tol_scale``.
    """
    mc = monte_carlo_all(SimulationSpec(process, d, float(L)), replicates, seed, batch_size)
    rows: list[ComparisonRow] = []
    s = tol_scale

    if process == "ghost":
        for k in range(1, d.n_types + 1):
            est = mc[f"N{k}"]
            exact = constants.ghost_expected_count(list(d.lengths), list(d.weights), k, L)
            tol = s * SIGMAS * est.stderr
            rows.append(_row(f"E[N_{k},L]", tol, est.mean - exact, sim_mean=est.mean,
                             sim_stderr=est.stderr, const_value=exact, const_tol=0.0))
        return ComparisonReport(label, process, float(L), replicates, int(seed), rows)

    if h is None:
        h = default_h(d, L)
    if d.kind is Kind.DISCRETE:
        fine = _counts(d, L, h)
        coarse = _counts(d, L, 2 * h)
        j = int(round(L / h))
        jc = int(round(L / (2 * h)))
        ws = constants.build_workspace(d.lengths, d.weights)
        for k in range(1, d.n_types + 1):
            est = mc[f"N{k}"]
            val = float(fine[k - 1, j])
            bound = max(abs(val - float(coarse[k - 1, jc])), _FLOOR)
            tol = s * (SIGMAS * est.stderr + bound)
            rows.append(_row(f"E[N_{k},L]", tol, est.mean - val, sim_mean=est.mean,
                             sim_stderr=est.stderr, solver_value=val, solver_bound=bound))
        for k in range(1, d.n_types + 1):
            g = solver.GridSolution(h, fine[k - 1], f"E[N_{k},L]", d.fingerprint())
            fit = solver.estimate_linear_density(g)
            alpha = constants.multidisperse_alpha(d.lengths, d.weights, k, workspace=ws)
            tol = s * (SLOPE_TOL + abs(fit.drift) + alpha.abs_err)
            rows.append(_row(f"alpha_{k}", tol, alpha.value - fit.value, solver_value=fit.value,
                             solver_bound=abs(fit.drift), const_value=alpha.value,
                             const_tol=alpha.abs_err))
        fine_s = discrete_empty_space(d, L, h)
        coarse_s = discrete_empty_space(d, L, 2 * h)
    else:
        fine_s = solver.solve_empty_space(d, L, h)
        coarse_s = solver.solve_empty_space(d, L, 2 * h)
    est = mc["S"]
    val = fine_s.at(L)
    bound = max(abs(val - coarse_s.at(L)), _FLOOR)
    tol = s * (SIGMAS * est.stderr + bound)
    rows.append(_row("E[S_L]", tol, est.mean - val, sim_mean=est.mean, sim_stderr=est.stderr,
                     solver_value=val, solver_bound=bound))
    if not all(math.isfinite(r.tolerance) for r in rows):
        rows = [r if math.isfinite(r.tolerance) else ComparisonRow(**{**asdict(r), "passed": False})
                for r in rows]
    return ComparisonReport(label, process, float(L), replicates, int(seed), rows)
