"""Limiting constants.

Multidisperse densities use the Laplace-transform formula::

    lim E[N_k,L] / L = int_0^inf G_k(t) exp(-2 sum_i q_i Ein(l_i t)) dt

    G_k(s) = e^{-rho s} (q_k + s rho E[N_k,l_n])
             + 2 s sum_i q_i int_{rho_i}^{l_n} E[N_k,L] e^{-s (L + l_i - lbar)} dL

with ``rho = l_n - lbar`` and ``rho_i = l_n - l_i``.  The exponent
``L + l_i - lbar`` is at least ``rho >= 0`` on the range of integration, so
the growing factor ``e^{lbar s}`` never has to be formed on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Any

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError
from .ldf import Convergence, Kind, LengthDistribution, classify, discrete
from .solver import estimate_linear_density, grid_offset, simpson_weights, solve_empty_space
from .specfun import EULER_GAMMA, ein, find_root, integrate_semi_infinite, log_beta

WORKSPACE_MAX_STEP = 2.5e-4
_MAX_DENOMINATOR = 10**6


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    abs_err: float
    method: str
    inputs: dict[str, Any] = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value

    def report(self, quantity: str) -> dict[str, Any]:
        return {
            "quantity": quantity,
            "value": self.value,
            "abs_err": self.abs_err,
            "method": self.method,
            "inputs": self.inputs,
        }


# ---------------------------------------------------------------- Renyi


def renyi_constant(tol: float = 1e-10) -> ConstantEstimate:
    """``int_0^inf exp(-2 Ein(t)) dt``.

    ``Ein(t) > gamma + ln t`` gives the tail bound ``e^{-2 gamma} / T``.
    """
    if not tol >= 1e-12:
        raise DomainError(f"tol must be at least 1e-12, got {tol!r}")
    c = math.exp(-2.0 * EULER_GAMMA)
    res = integrate_semi_infinite(lambda t: math.exp(-2.0 * ein(t)), tol, lambda T: c / T)
    return ConstantEstimate(
        float(res.value), float(res.error_estimate), "adaptive Simpson on [0,T] + certified tail", {"tol": tol}
    )


# ---------------------------------------------------------------- multidisperse


@dataclass(frozen=True, eq=False)
class MultiConstantWorkspace:
    """Small-L solution on ``[0, l_n]`` and the derived constants.

    ``grid[k]`` holds ``E[N_{k+1},L]`` at nodes ``j h``; the value stored at
    ``L = 1`` is the right limit.
    """

    lengths: np.ndarray
    probs: np.ndarray
    lbar: float
    rho: float
    rho_i: np.ndarray
    h: float
    grid: np.ndarray
    boundary: np.ndarray
    starts: np.ndarray  # first node of each P-integral

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.grid.shape[1]) * self.h


def workspace_step(lengths) -> float:
    """Largest ``1 / (D 2**m) <= WORKSPACE_MAX_STEP`` with every length on the grid."""
    dens = []
    for x in lengths:
        fr = Fraction(float(x)).limit_denominator(_MAX_DENOMINATOR)
        if abs(float(fr) - float(x)) > 1e-12 * max(1.0, float(x)):
            raise ConfigurationError(f"length {x!r} is not a rational with denominator <= 1e6")
        dens.append(fr.denominator)
    D = reduce(math.lcm, dens, 1)
    m = 0
    while 1.0 / (D * 2**m) > WORKSPACE_MAX_STEP:
        m += 1
    return 1.0 / (D * 2**m)


def build_workspace(lengths, probs, h: float | None = None) -> MultiConstantWorkspace:
    d = discrete(list(zip(lengths, probs)))
    ls = np.array(d.lengths, dtype=float)
    qs = np.array(d.weights, dtype=float)
    if h is None:
        h = workspace_step(ls)
    m1 = grid_offset(1.0, h, "1")
    offs = np.array([grid_offset(x, h, "length") for x in ls], dtype=np.int64)
    n = int(offs[-1])
    grid = np.empty((len(ls), n + 1))
    for k in range(len(ls)):
        grid[k], _ = _kernels.march_counts(ls, qs, offs, m1, n, float(h), k)
    lbar = float(np.dot(ls, qs))
    rho_i = ls[-1] - ls
    starts = np.maximum(n - offs, m1)
    return MultiConstantWorkspace(
        ls, qs, lbar, float(ls[-1] - lbar), rho_i, float(h), grid, grid[:, -1].copy(), starts
    )


def _check_type(ws: MultiConstantWorkspace, k: int) -> int:
    if not 1 <= k <= len(ws.lengths):
        raise ConfigurationError(f"type index must be in 1..{len(ws.lengths)}, got {k!r}")
    return k - 1


def _weighted(ws: MultiConstantWorkspace, i: int, k: int, shift: float, s: float) -> float:
    """``int_{rho_i}^{l_n} E[N_k,L] e^{-s (L + shift)} dL`` by Simpson on the grid."""
    start = int(ws.starts[i])
    n = ws.grid.shape[1] - 1
    if start >= n:
        return 0.0
    L = np.arange(start, n + 1) * ws.h
    w = simpson_weights(n - start) * ws.h
    return float(np.dot(w, ws.grid[k, start:] * np.exp(-s * (L + shift))))


def p_ik(ws: MultiConstantWorkspace, i: int, k: int, s: float) -> float:
    """``P_{i;k}(s) = int_{l_n - l_i}^{l_n} E[N_k,L] e^{-s L} dL`` (1-based i, k)."""
    ii = _check_type(ws, i)
    kk = _check_type(ws, k)
    return _weighted(ws, ii, kk, 0.0, s)


def g_k(ws: MultiConstantWorkspace, k: int, s: float) -> float:
    """``G_k(s)`` with the exponential factors paired inside each integral."""
    kk = _check_type(ws, k)
    head = math.exp(-ws.rho * s) * (ws.probs[kk] + s * ws.rho * ws.boundary[kk])
    if s == 0.0:
        return float(head)
    tail = 0.0
    for i in range(len(ws.lengths)):
        tail += ws.probs[i] * _weighted(ws, i, kk, ws.lengths[i] - ws.lbar, s)
    return float(head + 2.0 * s * tail)


def _tail_bound(ws: MultiConstantWorkspace, kk: int):
    ls, qs = ws.lengths, ws.probs
    K0 = math.exp(-2.0 * EULER_GAMMA - 2.0 * float(np.dot(qs, np.log(ls))))
    A = float(qs[kk])
    B = ws.rho * float(ws.boundary[kk])
    for i in range(len(ls)):
        B += 2.0 * qs[i] * _weighted(ws, i, kk, 0.0, 0.0)
    rho = ws.rho

    def bound(T: float) -> float:
        # integrand <= K0 t^-2 e^{-rho t} (A + B t)
        if rho > 0.0:
            e = math.exp(-rho * T)
            return K0 * (A * min(1.0 / T, e / (rho * T * T)) + B * e / (rho * T))
        if B > 0.0:
            return math.inf
        return K0 * A / T

    return bound


def multidisperse_alpha(
    lengths,
    probs,
    k: int,
    tol: float = 1e-8,
    workspace: MultiConstantWorkspace | None = None,
    grid_check: bool = True,
) -> ConstantEstimate:
    """``lim E[N_k,L] / L`` for the multidisperse process (1-based ``k``).

    ``abs_err`` adds the quadrature error estimate and, with ``grid_check``,
    the change seen when the small-L grid step is doubled.
    """
    if not tol >= 1e-12:
        raise DomainError(f"tol must be at least 1e-12, got {tol!r}")
    ws = workspace if workspace is not None else build_workspace(lengths, probs)
    _check_type(ws, k)
    res = _alpha_integral(ws, k, tol)
    err = float(res.error_estimate)
    if grid_check:
        coarse = build_workspace(ws.lengths, ws.probs, 2.0 * ws.h)
        err += abs(float(_alpha_integral(coarse, k, tol).value) - float(res.value))
    return ConstantEstimate(
        float(res.value),
        err,
        "Laplace formula, adaptive Simpson + certified tail",
        {
            "lengths": [float(x) for x in ws.lengths],
            "probs": [float(x) for x in ws.probs],
            "k": int(k),
            "tol": tol,
            "workspace_h": ws.h,
        },
    )


def _alpha_integral(ws: MultiConstantWorkspace, k: int, tol: float):
    ls, qs = ws.lengths, ws.probs

    def f(t: float) -> float:
        expo = 0.0
        for i in range(len(ls)):
            expo += qs[i] * ein(ls[i] * t)
        return g_k(ws, k, t) * math.exp(-2.0 * expo)

    return integrate_semi_infinite(f, tol, _tail_bound(ws, k - 1))


def multidisperse_alphas(lengths, probs, tol: float = 1e-8) -> list[ConstantEstimate]:
    ws = build_workspace(lengths, probs)
    return [multidisperse_alpha(lengths, probs, k, tol, ws) for k in range(1, len(ws.lengths) + 1)]


# ---------------------------------------------------------------- ghost process


def _ghost_config(lengths, probs) -> LengthDistribution:
    return discrete(list(zip(lengths, probs)))


def ghost_expected_count(lengths, probs, k: int, L: float) -> float:
    """``q_k (L - l_k) / (lbar + l_k)`` (1-based ``k``)."""
    d = _ghost_config(lengths, probs)
    if not 1 <= k <= d.n_types:
        raise ConfigurationError(f"type index must be in 1..{d.n_types}, got {k!r}")
    lk = float(d.lengths[k - 1])
    if L < lk:
        raise DomainError(f"L={L!r} is below l_k={lk!r}")
    lbar = float(np.dot(d.lengths, d.weights))
    return float(d.weights[k - 1] * (L - lk) / (lbar + lk))


def ghost_density_limit(lengths, probs) -> float:
    """Limiting covered fraction ``sum_k q_k l_k / (lbar + l_k)``."""
    d = _ghost_config(lengths, probs)
    ls, qs = np.asarray(d.lengths), np.asarray(d.weights)
    lbar = float(np.dot(ls, qs))
    return float(np.sum(qs * ls / (lbar + ls)))


def ghost_density_bounds(lengths) -> tuple[float, float]:
    """``(2 sqrt(l_1 l_n) / (sqrt l_1 + sqrt l_n)^2, 1/2)``."""
    a, b = float(lengths[0]), float(lengths[-1])
    return 2.0 * math.sqrt(a * b) / (math.sqrt(a) + math.sqrt(b)) ** 2, 0.5


# ---------------------------------------------------------------- power-law exponent


def xi_exponent(beta: float, tol: float = 1e-12) -> float:
    """Root in ``[0, 1]`` of ``B(beta + 1, theta + 1) = 1 / (2 (beta + 1))``."""
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive, got {beta!r}")
    target = -math.log(2.0 * (beta + 1.0))
    return find_root(lambda th: log_beta(beta + 1.0, th + 1.0) - target, 0.0, 1.0, tol)


def xi_exponent_integer(beta: int, tol: float = 1e-12) -> float:
    """Positive root of ``prod_{i=1}^{beta+1} (theta + i) = 2 (beta + 1)!``."""
    if int(beta) != beta or beta < 1:
        raise DomainError(f"beta must be an integer >= 1, got {beta!r}")
    b = int(beta)
    target = math.log(2.0) + math.lgamma(b + 2)

    def f(th: float) -> float:
        return math.fsum(math.log(th + i) for i in range(1, b + 2)) - target

    return find_root(f, 0.0, 1.0, tol)


# ---------------------------------------------------------------- convergent ldfs


def _tail_hypothesis(d: LengthDistribution) -> str:
    if d.kind is Kind.TABULATED:
        return "assumed"
    return "holds"


def alpha_nu_estimate(
    d: LengthDistribution, L_max: float = 2000.0, h: float = 2.0**-5, window: float = 0.25
) -> ConstantEstimate:
    """Numerical ``lim E[S_L] / L`` for a convergent ldf.

    A tail slope of the marched solution, not a closed form; ``abs_err`` is
    the half-window slope drift.
    """
    if classify(d) is not Convergence.CONVERGENT:
        raise DomainError("alpha_nu_estimate needs a convergent ldf")
    g = solve_empty_space(d, L_max, h)
    fit = estimate_linear_density(g, window)
    return ConstantEstimate(
        float(fit.value),
        float(abs(fit.drift)),
        "numerical estimate: tail slope of marched E[S_L]",
        {
            "distribution": d.to_json(),
            "L_max": L_max,
            "h": h,
            "window": window,
            "integrability_hypothesis": _tail_hypothesis(d),
        },
    )
