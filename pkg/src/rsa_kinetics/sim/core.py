"""Single-realization simulators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import ConfigurationError, DomainError, SimulationError
from ..ldf import Kind, LengthDistribution, discrete

GAP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SaturationState:
    """One realized configuration.

    Segment ``s`` occupies ``[lefts[s], lefts[s] + lengths[s]]`` and has type
    ``types[s]`` (always 0 for continuous ldfs).  Segments are sorted by
    left end.  ``saturated`` is False only when a rejection run hit its
    attempt cap.
    """

    L: float
    lefts: np.ndarray
    lengths: np.ndarray
    types: np.ndarray
    empty_space: float
    counts: np.ndarray
    saturated: bool = True
    attempts: int | None = None

    @property
    def segments(self) -> list[tuple[float, float, int]]:
        return [(float(a), float(b), int(t)) for a, b, t in zip(self.lefts, self.lengths, self.types)]

    @property
    def n_segments(self) -> int:
        return int(self.lefts.shape[0])

    def gaps(self) -> np.ndarray:
        """Lengths of the maximal uncovered intervals, left to right."""
        ends = self.lefts + self.lengths
        starts = np.concatenate(([0.0], ends))
        stops = np.concatenate((self.lefts, [self.L]))
        return stops - starts

    def check(self, tol: float = GAP_TOL) -> None:
        """Raise ``SimulationError`` if any state invariant fails."""
        g = self.gaps()
        if np.any(g < -tol):
            raise SimulationError("segments overlap or leave [0, L]")
        if self.saturated and self.L >= 1.0 and np.any(g > 1.0 + tol):
            raise SimulationError(f"gap of length {g.max()!r} left at saturation")
        if abs(self.empty_space - (self.L - float(self.lengths.sum()))) > tol * max(1.0, self.L):
            raise SimulationError("empty space disagrees with the segment list")
        if np.any(np.bincount(self.types, minlength=len(self.counts)) != self.counts):
            raise SimulationError("per-type counts disagree with the segment list")


def _state(L, nseg, empty, lefts, lens, types, counts, saturated=True, attempts=None):
    order = np.argsort(lefts[:nseg], kind="stable")
    return SaturationState(
        L=float(L),
        lefts=lefts[:nseg][order],
        lengths=lens[:nseg][order],
        types=types[:nseg][order],
        empty_space=float(empty),
        counts=counts,
        saturated=bool(saturated),
        attempts=attempts,
    )


def _check_L(L: float) -> float:
    L = float(L)
    if not (L >= 0 and math.isfinite(L)):
        raise DomainError(f"L must be finite and non-negative, got {L!r}")
    return L


def _buffers(d_types: int, L: float):
    size = int(L) + 1
    return (
        np.empty(size),
        np.empty(size),
        np.empty(size, dtype=np.int64),
        np.zeros(d_types, dtype=np.int64),
    )


def simulate_exact(d: LengthDistribution, L: float, rng: np.random.Generator) -> SaturationState:
    """Exact saturation sample by gap recursion.

    The first segment ever parked on a gap of length ``g`` has the
    first-parked length law and a uniform left end on ``[0, g - l]``; the two
    leftover gaps then evolve independently.
    """
    L = _check_L(L)
    lefts, lens, types, counts = _buffers(d.n_types, L)
    nseg, empty = _kernels.exact_run(*d.packed(), L, rng, True, lefts, lens, types, counts)
    return _state(L, nseg, empty, lefts, lens, types, counts)


def simulate_rejection(
    d: LengthDistribution,
    L: float,
    rng: np.random.Generator,
    attempt_cap: int = 10_000_000,
    literal: bool = False,
) -> SaturationState:
    """Attempt-by-attempt reference simulator.

    With ``literal=True`` every attempt draws ``b`` on ``[0, L]`` and ``l``
    from the truncated law on ``[1, L]``.  The default skips attempts that
    cannot succeed, which leaves the law of the parking sequence unchanged.
    A run that hits ``attempt_cap`` returns ``saturated=False``.
    """
    L = _check_L(L)
    if attempt_cap < 1:
        raise ConfigurationError("attempt_cap must be at least 1")
    lefts, lens, types, counts = _buffers(d.n_types, L)
    nseg, empty, att, sat = _kernels.rejection_run(
        *d.packed(), L, rng, int(attempt_cap), bool(literal), True, lefts, lens, types, counts
    )
    return _state(L, nseg, empty, lefts, lens, types, counts, sat, int(att))


def multidisperse(lengths, probs) -> LengthDistribution:
    """Validated discrete ldf from parallel length and probability lists."""
    if len(lengths) != len(probs):
        raise ConfigurationError("lengths and probs differ in size")
    return discrete(list(zip(lengths, probs)))


def simulate_ghost(lengths, probs, L: float, rng: np.random.Generator) -> np.ndarray:
    """Per-type counts at the end of the multidisperse ghost process.

    Candidates arrive with centres uniform on ``[-l_n/2, L + l_n/2]``.  A
    candidate inside the free set parks; parked or not, its span leaves the
    free set.  The run stops once no free component is longer than 1.
    """
    L = _check_L(L)
    d = lengths if isinstance(lengths, LengthDistribution) else multidisperse(lengths, probs)
    if d.kind is not Kind.DISCRETE:
        raise ConfigurationError("the ghost process needs a discrete ldf")
    counts = np.zeros(d.n_types, dtype=np.int64)
    _kernels.ghost_run(d.lengths, d.weights, L, rng, counts)
    return counts
