"""Special functions and numerical primitives.

Contents
--------
ein
    Entire exponential integral ``Ein(z) = int_0^z (1 - exp(-t)) / t dt``.
log_beta
    Logarithm of the Euler Beta function.
integrate, integrate_semi_infinite
    Adaptive Simpson quadrature on finite and half-infinite ranges.
find_root
    Bracketed root finding (Brent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.optimize import brentq

from .errors import BracketError, DomainError, QuadratureError

EULER_GAMMA = 0.57721566490153286061
EIN_SWITCH = 4.0

_FPMIN = 1e-300
_EPS = 1e-16


@dataclass(frozen=True)
class QuadratureResult:
    """Outcome of a quadrature call.

    Attributes
    ----------
    value : float
        Integral estimate.
    error_estimate : float
        Non-negative estimate of the absolute error.
    evaluations : int
        Number of integrand evaluations.
    converged : bool
        False when the maximum subdivision depth was hit somewhere.
    """

    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True


def _ein_series(z: float) -> float:
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= z / k
        contrib = term / k
        total += contrib if k % 2 else -contrib
        if contrib < _EPS * abs(total) * 1e-1 or k > 200:
            return total
        k += 1


def _e1_continued_fraction(z: float) -> float:
    # modified Lentz on the even form of the E1 continued fraction
    b = z + 1.0
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-z)


def e1(z: float) -> float:
    """Exponential integral E1 for z > 0."""
    if z <= 0.0:
        raise DomainError(f"e1 requires z > 0, got {z!r}")
    if z <= EIN_SWITCH:
        return ein(z) - EULER_GAMMA - math.log(z)
    return _e1_continued_fraction(z)


def ein(z: float) -> float:
    """Entire exponential integral.

    Uses the power series up to ``z = 4`` and ``gamma + ln z + E1(z)``
    beyond, with E1 from a continued fraction.

    Parameters
    ----------
    z : float
        Non-negative argument.

    Returns
    -------
    float
        ``Ein(z)`` to about 1e-13 absolute accuracy.
    """
    z = float(z)
    if not z >= 0.0:
        raise DomainError(f"ein requires z >= 0, got {z!r}")
    if z == 0.0:
        return 0.0
    if z <= EIN_SWITCH:
        return _ein_series(z)
    if math.isinf(z):
        return math.inf
    return EULER_GAMMA + math.log(z) + _e1_continued_fraction(z)


def log_beta(z1: float, z2: float) -> float:
    """``ln B(z1, z2)`` through ``math.lgamma``."""
    if not (z1 > 0.0 and z2 > 0.0):
        raise DomainError(f"log_beta requires positive arguments, got ({z1!r}, {z2!r})")
    return math.lgamma(z1) + math.lgamma(z2) - math.lgamma(z1 + z2)


def _safe_eval(f: Callable[[float], float], x: float, a: float, b: float) -> float:
    """Evaluate f, allowing an integrable endpoint singularity to be stepped over."""
    endpoint = x == a or x == b
    try:
        fx = float(f(x))
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        if not endpoint:
            raise QuadratureError(f"integrand failed at x={x!r}: {exc}", x) from exc
        fx = math.nan
    if math.isfinite(fx):
        return fx
    if endpoint and b > a:
        step = 1e-12 * (b - a)
        inner = x + step if x == a else x - step
        try:
            fx = float(f(inner))
        except (ZeroDivisionError, OverflowError, ValueError):
            fx = math.nan
        if math.isfinite(fx):
            return fx
    raise QuadratureError(f"non-finite integrand value {fx!r} at x={x!r}", x)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
    min_depth: int = 4,
) -> QuadratureResult:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    Intervals are bisected until the Simpson and two-panel Simpson estimates
    differ by at most ``15 * tol_local``; the accepted value carries the
    Richardson correction.  ``tol`` is absolute.
    """
    if not b >= a:
        raise DomainError(f"integrate requires a <= b, got [{a!r}, {b!r}]")
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if a == b:
        return QuadratureResult(0.0, 0.0, 1)

    fa = _safe_eval(f, a, a, b)
    fb = _safe_eval(f, b, a, b)
    m = 0.5 * (a + b)
    fm = _safe_eval(f, m, a, b)
    evals = 3
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    err = 0.0
    converged = True
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = _safe_eval(f, lm, a, b)
        frm = _safe_eval(f, rm, a, b)
        evals += 2
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if depth >= min_depth and (abs(delta) <= 15.0 * eps or depth >= max_depth):
            if abs(delta) > 15.0 * eps:
                converged = False
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return QuadratureResult(total, err, evals, converged)


def integrate_semi_infinite(
    f: Callable[[float], float],
    tol: float,
    tail_bound: Callable[[float], float],
    start: float = 1.0,
    max_doublings: int = 200,
) -> QuadratureResult:
    """Integrate ``f`` over ``[0, inf)`` by truncation at a certified point.

    The cut ``T`` is the first of ``start * 2**k`` with
    ``tail_bound(T) <= tol / 2``.  ``[0, T]`` is split at the powers of two
    and integrated to a combined ``tol / 2``.  The tail bound is added to
    the returned error estimate.
    """
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    cut = start
    k = 0
    while not tail_bound(cut) <= 0.5 * tol:
        k += 1
        if k > max_doublings:
            raise QuadratureError(
                f"tail bound stayed above {0.5 * tol:g} up to T={cut:g}", cut
            )
        cut *= 2.0
    edges = [0.0, start]
    while edges[-1] < cut:
        edges.append(edges[-1] * 2.0)
    panel_tol = 0.5 * tol / (len(edges) - 1)
    value = 0.0
    err = 0.0
    evals = 0
    converged = True
    for lo, hi in zip(edges[:-1], edges[1:]):
        part = integrate(f, lo, hi, panel_tol)
        value += part.value
        err += part.error_estimate
        evals += part.evaluations
        converged = converged and part.converged
    return QuadratureResult(value, err + tail_bound(cut), evals, converged)


def find_root(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12
) -> float:
    """Root of ``f`` in ``[lo, hi]`` by Brent's method.

    Raises
    ------
    BracketError
        If ``f(lo)`` and ``f(hi)`` do not have opposite signs.
    """
    flo = float(f(lo))
    fhi = float(f(hi))
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if not (math.isfinite(flo) and math.isfinite(fhi)) or flo * fhi > 0.0:
        raise BracketError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}"
        )
    return float(brentq(f, lo, hi, xtol=tol, rtol=4.0 * 2.220446049250313e-16, maxiter=500))
