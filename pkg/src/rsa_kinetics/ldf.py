"""Length distribution functions.

A length distribution function (ldf) is a non-negative weight ``nu`` on
``[1, inf)``.  Lengths are drawn from ``nu`` truncated to the room that is
left, so only ratios of ``nu`` matter and every kind may carry an arbitrary
positive ``scale``.

Kinds
-----
discrete       atoms ``(l_i, q_i)`` with ``l_1 = 1`` and ``sum q_i = 1``
power          ``nu(l) = (l - 1)**(beta - 1)``
inverse_power  ``nu(l) = l**(-p)``
exponential    ``nu(l) = exp(rate * l)``
tabulated      piecewise-linear ``nu`` through user points, zero past the table
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import ClassificationUnavailable, ConfigurationError, DomainError
from .specfun import integrate

WEIGHT_SUM_TOL = 1e-9


class Kind(str, enum.Enum):
    DISCRETE = "discrete"
    POWER = "power"
    INVERSE_POWER = "inverse_power"
    EXPONENTIAL = "exponential"
    TABULATED = "tabulated"


class Convergence(str, enum.Enum):
    CONVERGENT = "convergent"
    DIVERGENT = "divergent"


# kernel codes, kept in sync with _kernels
KIND_CODES = {
    Kind.DISCRETE: 0,
    Kind.POWER: 1,
    Kind.INVERSE_POWER: 2,
    Kind.EXPONENTIAL: 3,
    Kind.TABULATED: 4,
}


@dataclass(frozen=True, eq=False)
class LengthDistribution:
    """Immutable ldf description.  Build through the factory functions."""

    kind: Kind
    param: float = 0.0
    lengths: np.ndarray | None = None
    weights: np.ndarray | None = None
    tail: Convergence | None = None
    scale: float = 1.0
    _cum: np.ndarray | None = None
    _cum2: np.ndarray | None = None

    @property
    def n_types(self) -> int:
        return len(self.lengths) if self.kind is Kind.DISCRETE else 1

    def packed(self) -> tuple[int, float, np.ndarray, np.ndarray, np.ndarray]:
        """Flat representation consumed by the compiled kernels."""
        code = KIND_CODES[self.kind]
        if self.kind in (Kind.DISCRETE, Kind.TABULATED):
            zs = self._cum if self._cum is not None else np.zeros(1)
            return code, float(self.param), self.lengths, self.weights, zs
        empty = np.zeros(1)
        return code, float(self.param), empty, empty, empty

    def to_json(self) -> dict[str, Any]:
        if self.kind is Kind.DISCRETE:
            return {
                "kind": "discrete",
                "atoms": [[float(a), float(q)] for a, q in zip(self.lengths, self.weights)],
            }
        if self.kind is Kind.TABULATED:
            out: dict[str, Any] = {
                "kind": "tabulated",
                "points": [[float(a), float(v)] for a, v in zip(self.lengths, self.weights)],
            }
            if self.tail is not None:
                out["tail"] = self.tail.value
            return out
        key = {Kind.POWER: "beta", Kind.INVERSE_POWER: "p", Kind.EXPONENTIAL: "rate"}[self.kind]
        out = {"kind": self.kind.value, key: float(self.param)}
        if self.scale != 1.0:
            out["scale"] = float(self.scale)
        return out

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def __repr__(self) -> str:
        return f"LengthDistribution({json.dumps(self.to_json())})"


def discrete(atoms: Sequence[tuple[float, float]]) -> LengthDistribution:
    """Multidisperse ldf from ``(length, weight)`` pairs."""
    if len(atoms) == 0:
        raise ConfigurationError("discrete ldf needs at least one atom")
    arr = np.asarray(atoms, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigurationError("atoms must be (length, weight) pairs")
    ls, qs = arr[:, 0].copy(), arr[:, 1].copy()
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError("atoms must be finite")
    if ls[0] != 1.0:
        raise ConfigurationError(f"smallest length must be 1, got {ls[0]!r}")
    if np.any(np.diff(ls) <= 0):
        raise ConfigurationError("lengths must be strictly increasing")
    if np.any(qs <= 0):
        raise ConfigurationError("weights must be positive")
    total = float(qs.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ConfigurationError(f"weights sum to {total!r}, expected 1")
    qs = qs / total
    ls.setflags(write=False)
    qs.setflags(write=False)
    return LengthDistribution(Kind.DISCRETE, lengths=ls, weights=qs, _cum=np.cumsum(qs))


def power_law(beta: float, scale: float = 1.0) -> LengthDistribution:
    """``nu(l) = scale * (l - 1)**(beta - 1)``; ``beta = 1`` is the uniform ldf."""
    if not (beta > 0 and math.isfinite(beta)):
        raise ConfigurationError(f"beta must be positive, got {beta!r}")
    _check_scale(scale)
    return LengthDistribution(Kind.POWER, param=float(beta), scale=float(scale))


def inverse_power(p: float, scale: float = 1.0) -> LengthDistribution:
    """``nu(l) = scale * l**(-p)``; convergent iff ``p > 1``."""
    if not math.isfinite(p):
        raise ConfigurationError(f"p must be finite, got {p!r}")
    _check_scale(scale)
    return LengthDistribution(Kind.INVERSE_POWER, param=float(p), scale=float(scale))


def exponential(rate: float, scale: float = 1.0) -> LengthDistribution:
    """``nu(l) = scale * exp(rate * l)``; convergent iff ``rate < 0``."""
    if rate == 0 or not math.isfinite(rate):
        raise ConfigurationError(f"rate must be finite and nonzero, got {rate!r}")
    _check_scale(scale)
    return LengthDistribution(Kind.EXPONENTIAL, param=float(rate), scale=float(scale))


def tabulated(
    points: Sequence[tuple[float, float]], tail: str | Convergence | None = None
) -> LengthDistribution:
    """Piecewise-linear ldf through ``points``; zero outside the table.

    The first abscissa must be 1.  ``tail`` declares the convergence class
    of the distribution the table stands for.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ConfigurationError("tabulated ldf needs at least two (l, nu) points")
    xs, ys = arr[:, 0].copy(), arr[:, 1].copy()
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError("table must be finite")
    if xs[0] != 1.0:
        raise ConfigurationError(f"table must start at l = 1, got {xs[0]!r}")
    if np.any(np.diff(xs) <= 0):
        raise ConfigurationError("table abscissae must be strictly increasing")
    if np.any(ys < 0):
        raise ConfigurationError("table values must be non-negative")
    if ys[0] == 0 and ys[1] == 0:
        raise ConfigurationError("nu must not vanish on the first table interval")
    dx = np.diff(xs)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (ys[:-1] + ys[1:]) * dx)))
    # each panel integrates a quadratic exactly
    cum2 = np.concatenate(
        ([0.0], np.cumsum(cum[:-1] * dx + ys[:-1] * dx**2 / 2 + (ys[1:] - ys[:-1]) * dx**2 / 6))
    )
    if tail is not None:
        try:
            tail = Convergence(tail)
        except ValueError as exc:
            raise ConfigurationError(f"tail must be convergent or divergent, got {tail!r}") from exc
    for a in (xs, ys, cum, cum2):
        a.setflags(write=False)
    return LengthDistribution(Kind.TABULATED, lengths=xs, weights=ys, tail=tail, _cum=cum, _cum2=cum2)


def scaled(d: LengthDistribution, c: float) -> LengthDistribution:
    """Copy of ``d`` with ``nu`` replaced by ``c * nu``.

    Discrete atoms are always renormalized, so a discrete ldf is returned
    unchanged.
    """
    _check_scale(c)
    if d.kind is Kind.DISCRETE:
        return d
    if d.kind is Kind.TABULATED:
        pts = np.column_stack([d.lengths, c * d.weights])
        return tabulated(pts, d.tail)
    return LengthDistribution(d.kind, param=d.param, scale=d.scale * c)


def _check_scale(scale: float) -> None:
    if not (scale > 0 and math.isfinite(scale)):
        raise ConfigurationError(f"scale must be positive, got {scale!r}")


def from_json(obj: dict[str, Any]) -> LengthDistribution:
    """Build an ldf from its JSON description."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigurationError("distribution JSON must be an object with a 'kind'")
    kind = obj["kind"]
    scale = float(obj.get("scale", 1.0))
    try:
        if kind == "discrete":
            return discrete([tuple(a) for a in obj["atoms"]])
        if kind == "power":
            return power_law(float(obj["beta"]), scale)
        if kind == "inverse_power":
            return inverse_power(float(obj["p"]), scale)
        if kind == "exponential":
            return exponential(float(obj["rate"]), scale)
        if kind == "tabulated":
            return tabulated([tuple(p) for p in obj["points"]], obj.get("tail"))
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed {kind!r} distribution: {exc}") from exc
    raise ConfigurationError(f"unknown distribution kind {kind!r}")


# ---------------------------------------------------------------- Z and C


def _tab_z(d: LengthDistribution, L: np.ndarray) -> np.ndarray:
    xs, ys, cum = d.lengths, d.weights, d._cum
    x = np.clip(L, xs[0], xs[-1])
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
    t = x - xs[i]
    slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
    return cum[i] + ys[i] * t + 0.5 * slope * t * t


def _tab_c(d: LengthDistribution, L: np.ndarray) -> np.ndarray:
    xs, ys, cum, cum2 = d.lengths, d.weights, d._cum, d._cum2
    x = np.clip(L, xs[0], xs[-1])
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
    t = x - xs[i]
    slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
    inside = cum2[i] + cum[i] * t + ys[i] * t**2 / 2 + slope * t**3 / 6
    beyond = np.maximum(L - xs[-1], 0.0) * cum[-1]
    return inside + beyond


def z_values(d: LengthDistribution, L: np.ndarray | float) -> np.ndarray:
    """Vectorized ``Z(L) = int_0^L nu``."""
    L = np.asarray(L, dtype=float)
    x = np.maximum(L, 1.0)
    k, a = d.kind, d.param
    if k is Kind.DISCRETE:
        cum = np.concatenate(([0.0], d._cum))
        return cum[np.searchsorted(d.lengths, L, side="right")]
    if k is Kind.TABULATED:
        return np.where(L > 1.0, _tab_z(d, L), 0.0)
    if k is Kind.POWER:
        out = (x - 1.0) ** a / a
    elif k is Kind.INVERSE_POWER:
        out = np.log(x) if a == 1.0 else -np.expm1((1.0 - a) * np.log(x)) / (a - 1.0)
    else:
        out = np.exp(a) * np.expm1(a * (x - 1.0)) / a
    return d.scale * out


def c_values(d: LengthDistribution, L: np.ndarray | float) -> np.ndarray:
    """Vectorized ``C(L) = int_0^L Z``."""
    L = np.asarray(L, dtype=float)
    x = np.maximum(L, 1.0)
    u = x - 1.0
    k, a = d.kind, d.param
    if k is Kind.DISCRETE:
        return np.sum(d.weights * np.maximum(L[..., None] - d.lengths, 0.0), axis=-1)
    if k is Kind.TABULATED:
        return np.where(L > 1.0, _tab_c(d, L), 0.0)
    if k is Kind.POWER:
        out = u ** (a + 1.0) / (a * (a + 1.0))
    elif k is Kind.INVERSE_POWER:
        lx = np.log(x)
        if a == 1.0:
            out = x * lx - u
        elif a == 2.0:
            out = u - lx
        else:
            # ((x - 1) - (x**(2-a) - 1)/(2-a)) / (a - 1)
            out = (u - np.expm1((2.0 - a) * lx) / (2.0 - a)) / (a - 1.0)
    else:
        # (Z(x) - u * e^a) / a with Z(x) = e^a expm1(a u) / a
        out = np.exp(a) * (np.expm1(a * u) - a * u) / (a * a)
    return d.scale * out


def normalizing_constant(d: LengthDistribution, L: float) -> float:
    """``Z(L) = int_0^L nu(l) dl``; zero for ``L <= 1``."""
    if not (L >= 0 and math.isfinite(L)):
        raise DomainError(f"L must be finite and non-negative, got {L!r}")
    return float(z_values(d, L))


def cumulative_Z(d: LengthDistribution, L: float) -> float:
    """``int_0^L Z(t) dt``, in closed form for every kind."""
    if not (L >= 0 and math.isfinite(L)):
        raise DomainError(f"L must be finite and non-negative, got {L!r}")
    return float(c_values(d, L))


def mean_length(d: LengthDistribution) -> float:
    """Mean length ``sum q_i l_i`` of a discrete ldf."""
    if d.kind is not Kind.DISCRETE:
        raise DomainError("mean length is defined for discrete ldfs only")
    return float(np.dot(d.lengths, d.weights))


def classify(d: LengthDistribution) -> Convergence:
    """Convergent iff ``Z(L)`` has a finite limit."""
    k, a = d.kind, d.param
    if k is Kind.DISCRETE:
        return Convergence.CONVERGENT
    if k is Kind.POWER:
        return Convergence.DIVERGENT
    if k is Kind.INVERSE_POWER:
        return Convergence.CONVERGENT if a > 1.0 else Convergence.DIVERGENT
    if k is Kind.EXPONENTIAL:
        return Convergence.CONVERGENT if a < 0.0 else Convergence.DIVERGENT
    if d.tail is None:
        raise ClassificationUnavailable("tabulated ldf has no declared tail class")
    return d.tail


def divergence_condition_margin(d: LengthDistribution, L: float) -> float:
    """``2 int_0^L t Z / (L int_0^L Z) - 1`` for a divergent ldf."""
    if classify(d) is not Convergence.DIVERGENT:
        raise DomainError("divergence margin requires a divergent ldf")
    if not L > 1.0:
        raise DomainError(f"L must exceed 1, got {L!r}")
    c = cumulative_Z(d, L)
    tz = integrate(lambda t: t * float(z_values(d, t)), 1.0, L, tol=1e-12 * L * L * c).value
    return 2.0 * tz / (L * c) - 1.0


# ---------------------------------------------------------------- sampling


def _check_sampling_L(L: float) -> None:
    if not (L > 1.0 and math.isfinite(L)):
        raise DomainError(f"sampling requires finite L > 1, got {L!r}")


def sample_length_truncated(
    d: LengthDistribution, L: float, rng: np.random.Generator, size: int | None = None
):
    """Draw from ``nu / Z(L)`` on ``[1, L]`` by inverse CDF."""
    from . import _kernels

    _check_sampling_L(L)
    out = _kernels.sample_truncated_many(*d.packed(), float(L), rng, 1 if size is None else int(size))
    return float(out[0]) if size is None else out


def sample_first_parked_length(
    d: LengthDistribution, L: float, rng: np.random.Generator, size: int | None = None
):
    """Draw the first-parked length, density proportional to ``(L - l) nu(l)``.

    Continuous kinds use rejection from the truncated law with acceptance
    ``(L - l) / (L - 1)``; discrete kinds use the weights ``q_i (L - l_i)``.
    """
    from . import _kernels

    _check_sampling_L(L)
    out = _kernels.sample_first_many(*d.packed(), float(L), rng, 1 if size is None else int(size))
    return float(out[0]) if size is None else out
