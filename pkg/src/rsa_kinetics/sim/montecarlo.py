"""Replicated simulation with reproducible, order-independent streams.

Replicates are cut into batches of ``batch_size``.  Batch ``b`` draws from
``PCG64(SeedSequence(seed, spawn_key=(b,)))``, so results depend only on
``(seed, replicates, batch_size)`` and never on the number of worker
threads.  The compiled kernels release the GIL, so batches run in a thread
pool whose size is capped by ``RSA_KINETICS_THREADS``.
"""

from __future__ import annotations

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import ConfigurationError, SimulationError
from ..ldf import Kind, LengthDistribution

PROCESSES = ("rsa", "rejection", "ghost")
DEFAULT_BATCH = 1000
DEFAULT_SEED = 20240601
THREADS_ENV = "RSA_KINETICS_THREADS"

_COUNT_RE = re.compile(r"^N(\d+)$")


@dataclass(frozen=True)
class SimulationSpec:
    process: str
    distribution: LengthDistribution
    L: float
    estimand: str = "N"
    attempt_cap: int = 10_000_000
    literal: bool = False


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float  # nan when only one replicate ran
    replicates: int
    seed: int
    estimand: str
    batch_size: int = DEFAULT_BATCH


def worker_count() -> int:
    n = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            cap = int(raw)
        except ValueError as exc:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        if cap < 1:
            raise ConfigurationError(f"{THREADS_ENV} must be at least 1")
        n = min(n, cap)
    return n


def batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(batch,))))


def estimands(d: LengthDistribution) -> list[str]:
    names = ["S", "N", "S/L", "N/L", "coverage"]
    if d.kind is Kind.DISCRETE:
        names += [f"N{k + 1}" for k in range(d.n_types)]
    return names


def _column(rows: np.ndarray, name: str, L: float) -> np.ndarray:
    if name == "S":
        return rows[:, 0]
    if name == "N":
        return rows[:, 1]
    if name in ("S/L", "N/L", "coverage"):
        if L <= 0:
            raise ConfigurationError(f"{name} needs L > 0")
        if name == "S/L":
            return rows[:, 0] / L
        if name == "N/L":
            return rows[:, 1] / L
        return (L - rows[:, 0]) / L
    m = _COUNT_RE.match(name)
    if m:
        k = int(m.group(1))
        if 1 <= k <= rows.shape[1] - 2:
            return rows[:, 1 + k]
    raise ConfigurationError(f"unknown estimand {name!r}")


def _validate(spec: SimulationSpec) -> None:
    if spec.process not in PROCESSES:
        raise ConfigurationError(f"process must be one of {PROCESSES}, got {spec.process!r}")
    if not (spec.L >= 0 and math.isfinite(spec.L)):
        raise ConfigurationError(f"L must be finite and non-negative, got {spec.L!r}")
    if spec.process == "ghost" and spec.distribution.kind is not Kind.DISCRETE:
        raise ConfigurationError("the ghost process needs a discrete ldf")


def simulate_replicates(
    spec: SimulationSpec,
    replicates: int,
    seed: int = DEFAULT_SEED,
    batch_size: int = DEFAULT_BATCH,
    threads: int | None = None,
) -> np.ndarray:
    """Per-replicate rows ``[S, N, N_1, ..., N_n]`` in replicate order."""
    _validate(spec)
    if replicates < 1:
        raise ConfigurationError("replicates must be at least 1")
    if batch_size < 1:
        raise ConfigurationError("batch_size must be at least 1")
    if not (0 <= int(seed) < 2**64):
        raise ConfigurationError("seed must fit in 64 unsigned bits")
    d = spec.distribution
    ncol = 2 + d.n_types
    extra = 1 if spec.process == "rejection" else 0
    out = np.zeros((replicates, ncol + extra))
    bounds = [(s, min(s + batch_size, replicates)) for s in range(0, replicates, batch_size)]
    packed = d.packed()
    L = float(spec.L)

    def run(b: int) -> None:
        lo, hi = bounds[b]
        rng = batch_rng(int(seed), b)
        block = out[lo:hi]
        if spec.process == "rsa":
            _kernels.exact_batch(*packed, L, rng, block)
        elif spec.process == "rejection":
            _kernels.rejection_batch(*packed, L, rng, int(spec.attempt_cap), bool(spec.literal), block)
        else:
            _kernels.ghost_batch(d.lengths, d.weights, L, rng, block)

    workers = threads if threads is not None else worker_count()
    if workers <= 1 or len(bounds) == 1:
        for b in range(len(bounds)):
            run(b)
    else:
        run(0)  # compile before fanning out
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(1, len(bounds))))

    if extra:
        bad = np.nonzero(out[:, -1] < 0)[0]
        if bad.size:
            raise SimulationError(
                f"attempt cap {spec.attempt_cap} reached before saturation", int(bad[0])
            )
        out = out[:, :-1]
    return out


def summarize(values: np.ndarray, seed: int, estimand: str, batch_size: int) -> MonteCarloEstimate:
    n = int(values.shape[0])
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return MonteCarloEstimate(mean, stderr, n, int(seed), estimand, int(batch_size))


def monte_carlo(
    spec: SimulationSpec,
    replicates: int,
    seed: int = DEFAULT_SEED,
    batch_size: int = DEFAULT_BATCH,
    threads: int | None = None,
) -> MonteCarloEstimate:
    """Mean and standard error of ``spec.estimand`` over independent replicates.

    Estimands: ``S`` empty space, ``N`` segment count, ``S/L``, ``N/L``,
    ``coverage`` and, for discrete ldfs, ``N1 .. Nn`` per-type counts.
    """
    rows = simulate_replicates(spec, replicates, seed, batch_size, threads)
    return summarize(_column(rows, spec.estimand, spec.L), seed, spec.estimand, batch_size)


def monte_carlo_all(
    spec: SimulationSpec,
    replicates: int,
    seed: int = DEFAULT_SEED,
    batch_size: int = DEFAULT_BATCH,
    threads: int | None = None,
) -> dict[str, MonteCarloEstimate]:
    """Every estimand from one set of replicates."""
    rows = simulate_replicates(spec, replicates, seed, batch_size, threads)
    out = {}
    for name in estimands(spec.distribution):
        if spec.L <= 0 and ("/" in name or name == "coverage"):
            continue
        out[name] = summarize(_column(rows, name, spec.L), seed, name, batch_size)
    return out
