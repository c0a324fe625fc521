"""Forward marching of the saturation recurrences on uniform grids.

Empty space, continuous ldf::

    C(L) E[S_L] = 2 int_0^{L-1} E[S_t] Z(L - t) dt,   C(L) = int_0^L Z

Type-k counts, discrete ldf with feasible types F(L) = {i : l_i < L}::

    E[N_k,L] = (q_k (L - l_k)+ + 2 sum_F q_i int_0^{L-l_i} E[N_k]) / sum_F q_i (L - l_i)

Both are explicit: node j only reads nodes below j.  E[S_L] = L up to L = 1
and drops to 0 just above 1; the integrals treat that jump by splitting at
t = 1 and using the right limit.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError, NumericError
from .ldf import Kind, LengthDistribution, c_values, discrete, z_values

DEFAULT_WINDOW = 0.25
_GRID_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GridSolution:
    """Values on nodes ``L_j = j h``, ``j = 0 .. n``."""

    h: float
    values: np.ndarray
    quantity: str
    fingerprint: str
    variance: np.ndarray | None = None

    @property
    def L(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) * self.h

    @property
    def L_max(self) -> float:
        return (self.values.shape[0] - 1) * self.h

    def index(self, L: float) -> int:
        j = int(round(L / self.h))
        if abs(j * self.h - L) > _GRID_TOL * max(1.0, abs(L)) or not 0 <= j < self.values.shape[0]:
            raise DomainError(f"L={L!r} is not a node of this grid")
        return j

    def at(self, L: float) -> float:
        return float(self.values[self.index(L)])

    def write_csv(self, out: TextIO) -> None:
        """``L,value`` rows (``L,value,variance`` for moment pairs), 17 digits."""
        Ls = self.L
        if self.variance is None:
            out.write("L,value\n")
            for x, v in zip(Ls, self.values):
                out.write(f"{x:.17g},{v:.17g}\n")
        else:
            out.write("L,value,variance\n")
            for x, v, s in zip(Ls, self.values, self.variance):
                out.write(f"{x:.17g},{v:.17g},{s:.17g}\n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def to_json(self) -> str:
        body = {
            "quantity": self.quantity,
            "h": self.h,
            "fingerprint": self.fingerprint,
            "L": [float(f"{x:.17g}") for x in self.L],
            "value": [float(f"{v:.17g}") for v in self.values],
        }
        if self.variance is not None:
            body["variance"] = [float(f"{v:.17g}") for v in self.variance]
        return json.dumps(body)


@dataclass(frozen=True)
class TailFit:
    """Least-squares slope over the top window of a grid.

    ``drift`` is the upper half-window slope minus the lower one.
    """

    value: float
    drift: float
    nodes: int

    def __float__(self) -> float:
        return self.value


# ---------------------------------------------------------------- grids


def check_dyadic(h: float) -> int:
    """Return ``1 / h`` for ``h = 2**-m``, ``m >= 0``."""
    if not (h > 0 and math.isfinite(h)):
        raise ConfigurationError(f"h must be positive, got {h!r}")
    mant, _ = math.frexp(h)
    if mant != 0.5 or h > 1.0:
        raise ConfigurationError(f"h must be 2**-m with m >= 0, got {h!r}")
    return int(round(1.0 / h))


def grid_offset(x: float, h: float, what: str) -> int:
    k = int(round(x / h))
    if abs(k * h - x) > _GRID_TOL * max(1.0, x):
        raise ConfigurationError(f"{what}={x!r} is not a multiple of h={h!r}")
    return k


def node_count(L_max: float, h: float) -> int:
    if not (L_max >= 0 and math.isfinite(L_max)):
        raise ConfigurationError(f"L_max must be finite and non-negative, got {L_max!r}")
    return int(math.ceil(L_max / h - _GRID_TOL))


def simpson_weights(panels: int) -> np.ndarray:
    """Composite Simpson weights in units of h; a trapezoid closes odd counts."""
    if panels == 0:
        return np.zeros(1)
    if panels == 1:
        return np.array([0.5, 0.5])
    even = panels - (panels % 2)
    w = np.zeros(panels + 1)
    w[: even + 1 : 2] = 2.0 / 3.0
    w[1:even:2] = 4.0 / 3.0
    w[0] = w[even] = 1.0 / 3.0
    if panels % 2:
        w[even] += 0.5
        w[panels] += 0.5
    return w


# ---------------------------------------------------------------- empty space


def _exp_guard(d: LengthDistribution, L_max: float) -> None:
    if d.kind is Kind.EXPONENTIAL and d.param * L_max > 700.0:
        raise NumericError(
            f"exp({d.param} * L) overflows double precision for L_max={L_max!r}"
        )


def solve_empty_space(d: LengthDistribution, L_max: float, h: float) -> GridSolution:
    """March ``E[S_L]`` on ``[0, L_max]`` with dyadic step ``h``."""
    m1 = check_dyadic(h)
    n = node_count(L_max, h)
    _exp_guard(d, n * h)
    if d.kind is Kind.DISCRETE:
        vals = _empty_space_discrete(d, n, m1, h)
    else:
        vals = _empty_space_continuous(d, n, m1, h)
    return GridSolution(h, vals, "E[S_L]", d.fingerprint())


def _empty_space_continuous(d: LengthDistribution, n: int, m1: int, h: float) -> np.ndarray:
    Lg = np.arange(n + 1) * h
    S = Lg.copy()
    if n <= m1:
        return S
    Zr = np.ascontiguousarray(z_values(d, Lg)[::-1])
    Cg = c_values(d, Lg)
    Sr = S.copy()
    Sr[m1] = 0.0  # right limit at L = 1
    cS = np.zeros(n + 1)  # Simpson interior weight times Sr, parity anchored at m1
    left_full = simpson_weights(m1) * np.arange(m1 + 1) * h * h
    for j in range(m1 + 1, n + 1):
        M = j - m1
        base = n - j
        if M >= m1:
            left = float(np.dot(left_full, Zr[base : base + m1 + 1]))
        else:
            w = simpson_weights(M) * np.arange(M + 1) * h * h
            left = float(np.dot(w, Zr[base : base + M + 1]))
        right = 0.0
        r = M - m1
        if r == 1:
            right = 0.5 * h * (Sr[m1] * Zr[base + m1] + Sr[M] * Zr[base + M])
        elif r >= 2:
            end = M if r % 2 == 0 else M - 1
            inner = float(np.dot(cS[m1 + 1 : end], Zr[base + m1 + 1 : base + end]))
            right = h / 3.0 * (Sr[m1] * Zr[base + m1] + inner + Sr[end] * Zr[base + end])
            if end != M:
                right += 0.5 * h * (Sr[M - 1] * Zr[base + M - 1] + Sr[M] * Zr[base + M])
        c = Cg[j]
        if not c > 0.0:
            raise NumericError(f"int_0^L Z vanished at L={j * h!r}")
        S[j] = 2.0 * (left + right) / c
        if not math.isfinite(S[j]):
            raise NumericError(f"non-finite empty space at L={j * h!r}")
        Sr[j] = S[j]
        cS[j] = (4.0 if (j - m1) % 2 else 2.0) * S[j]
    return S


def _empty_space_discrete(d: LengthDistribution, n: int, m1: int, h: float) -> np.ndarray:
    offs = [grid_offset(float(x), h, "length") for x in d.lengths]
    Lg = np.arange(n + 1) * h
    S = Lg.copy()
    Sr = S.copy()
    if n > m1:
        Sr[m1] = 0.0
    # int_0^x E[S] = x^2 / 2 up to x = 1, then 1/2 + J with J marched from node m1
    I = 0.5 * np.minimum(Lg, 1.0) ** 2
    q = d.weights
    for j in range(m1 + 1, n + 1):
        L = j * h
        num = 0.0
        den = 0.0
        for i, o in enumerate(offs):
            if j > o:
                den += q[i] * (L - d.lengths[i])
                num += q[i] * I[j - o]
        S[j] = Sr[j] = 2.0 * num / den
        if (j - m1) % 2 == 0:
            I[j] = I[j - 2] + h / 3.0 * (Sr[j - 2] + 4.0 * Sr[j - 1] + Sr[j])
        else:
            I[j] = I[j - 1] + 0.5 * h * (Sr[j - 1] + Sr[j])
    return S


# ---------------------------------------------------------------- counts


def _multi_setup(lengths, probs, h: float):
    d = discrete(list(zip(lengths, probs)))
    m1 = grid_offset(1.0, h, "1")
    if m1 < 1:
        raise ConfigurationError(f"h={h!r} must not exceed 1")
    offs = np.array([grid_offset(float(x), h, "length") for x in d.lengths], dtype=np.int64)
    return d, m1, offs


def _check_k(d: LengthDistribution, k: int) -> int:
    if not 1 <= k <= d.n_types:
        raise ConfigurationError(f"type index k must be in 1..{d.n_types}, got {k!r}")
    return k - 1


def solve_multidisperse_counts(lengths, probs, k: int, L_max: float, h: float) -> GridSolution:
    """March ``E[N_k,L]`` (``k`` is 1-based).

    ``1 / h`` and every ``l_i / h`` must be integers so that all shifts land
    on nodes.  At ``L = 1`` the right limit ``E[N_1] = 1`` is stored.
    """
    d, m1, offs = _multi_setup(lengths, probs, h)
    kk = _check_k(d, k)
    n = node_count(L_max, h)
    lens = np.array(d.lengths, dtype=float)
    qs = np.array(d.weights, dtype=float)
    vals, _ = _kernels.march_counts(lens, qs, offs, m1, n, float(h), kk)
    return GridSolution(h, vals, f"E[N_{k},L]", d.fingerprint())


def solve_renyi_counts(L_max: float, h: float) -> GridSolution:
    """Unit segments only: ``E[N_L] = 1 + (2 / (L - 1)) int_0^{L-1} E[N]``."""
    return solve_multidisperse_counts([1.0], [1.0], 1, L_max, h)


def solve_second_moment(
    lengths, probs, k: int, L_max: float, h: float, first: GridSolution | None = None
) -> GridSolution:
    """March ``E[N_k,L^2]``; ``variance`` holds ``E[N^2] - E[N]^2``.

    Splitting at the first parked segment (type i, left gap t) gives::

        D(L) E[N_k^2] = q_k (L - l_k) + 4 q_k int_0^{L-l_k} E[N_k]
                        + sum_i 2 q_i int_0^{L-l_i} (E[N_k,t] E[N_k,L-l_i-t] + E[N_k,t^2]) dt

    with ``D(L) = sum_F q_i (L - l_i)``.
    """
    d, m1, offs = _multi_setup(lengths, probs, h)
    kk = _check_k(d, k)
    n = node_count(L_max, h)
    lens = np.array(d.lengths, dtype=float)
    qs = np.array(d.weights, dtype=float)
    if first is None:
        N, cumN = _kernels.march_counts(lens, qs, offs, m1, n, float(h), kk)
    else:
        if first.h != h or first.values.shape[0] < n + 1:
            raise ConfigurationError("first-moment grid does not cover the requested range")
        N = np.ascontiguousarray(first.values[: n + 1], dtype=float)
        cumN = _cumulative_from(N, m1, h)
    conv = _kernels.self_convolution(N, m1 if kk == 0 else -1, float(h))
    M = _kernels.march_second_moment(lens, qs, offs, m1, n, float(h), kk, cumN, conv)
    return GridSolution(h, M, f"E[N_{k},L^2]", d.fingerprint(), variance=M - N * N)


def _cumulative_from(v: np.ndarray, m1: int, h: float) -> np.ndarray:
    cum = np.zeros_like(v)
    for j in range(m1 + 1, v.shape[0]):
        r = j - m1
        if r % 2 == 0:
            cum[j] = cum[j - 2] + h / 3.0 * (v[j - 2] + 4.0 * v[j - 1] + v[j])
        else:
            cum[j] = cum[j - 1] + 0.5 * h * (v[j - 1] + v[j])
    return cum


# ---------------------------------------------------------------- tail fits


def _tail(g: GridSolution, window: float):
    if not 0.0 < window < 1.0:
        raise DomainError(f"window must lie in (0, 1), got {window!r}")
    n = g.values.shape[0]
    start = int(math.floor((n - 1) * (1.0 - window)))
    idx = np.arange(start, n)
    if idx.size < 4:
        raise DomainError(f"only {idx.size} nodes in the tail window")
    return idx


def _fit(x: np.ndarray, y: np.ndarray) -> TailFit:
    half = x.size // 2
    slope = float(np.polyfit(x, y, 1)[0])
    lo = float(np.polyfit(x[:half], y[:half], 1)[0])
    hi = float(np.polyfit(x[half:], y[half:], 1)[0])
    return TailFit(slope, hi - lo, int(x.size))


def estimate_linear_density(g: GridSolution, window: float = DEFAULT_WINDOW) -> TailFit:
    """Slope of value against L over the top ``window`` of the grid."""
    idx = _tail(g, window)
    return _fit(g.L[idx], g.values[idx])


def estimate_power_exponent(g: GridSolution, window: float = DEFAULT_WINDOW) -> TailFit:
    """Slope of ln(value) against ln(L) over the top ``window`` of the grid."""
    idx = _tail(g, window)
    x = g.L[idx]
    y = g.values[idx]
    if np.any(y <= 0) or np.any(x <= 0):
        raise DomainError("log-log fit needs positive values in the window")
    return _fit(np.log(x), np.log(y))


def refinement_gap(fine: GridSolution, coarse: GridSolution) -> np.ndarray:
    """``|fine - coarse|`` on the coarse nodes; an a-posteriori grid error bound."""
    ratio = int(round(coarse.h / fine.h))
    n = min(coarse.values.shape[0], (fine.values.shape[0] - 1) // ratio + 1)
    return np.abs(fine.values[: ratio * (n - 1) + 1 : ratio] - coarse.values[:n])
