from .core import (
    SaturationState,
    multidisperse,
    simulate_exact,
    simulate_ghost,
    simulate_rejection,
)
from .montecarlo import (
    DEFAULT_BATCH,
    DEFAULT_SEED,
    MonteCarloEstimate,
    SimulationSpec,
    monte_carlo,
    monte_carlo_all,
    simulate_replicates,
)

__all__ = [
    "DEFAULT_BATCH",
    "DEFAULT_SEED",
    "MonteCarloEstimate",
    "SaturationState",
    "SimulationSpec",
    "monte_carlo",
    "monte_carlo_all",
    "multidisperse",
    "simulate_exact",
    "simulate_ghost",
    "simulate_rejection",
    "simulate_replicates",
]
