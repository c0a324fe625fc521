"""Named configurations used by the command line."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import ConfigurationError
from .ldf import LengthDistribution, discrete, exponential, from_json, inverse_power, power_law

EXAMPLE3_ATOMS = [(1.0, 0.5), (1.3, 0.3), (1.5, 0.2)]


@dataclass(frozen=True)
class Preset:
    name: str
    distribution: LengthDistribution
    L_max: float
    k: int | None = None  # type whose count is solved; None means empty space
    note: str = ""


def _table() -> dict[str, Preset]:
    ex3 = discrete(EXAMPLE3_ATOMS)
    uniform = power_law(1.0)
    return {
        p.name: p
        for p in [
            Preset("fig2a", inverse_power(2.0), 2000.0, note="nu = l^-2, empty space"),
            Preset("fig2b", uniform, 2000.0, note="nu = 1, empty space"),
            Preset("fig4", ex3, 10.0, k=1, note="three lengths, type-1 count"),
            Preset("fig5a", exponential(-1.0), 100.0, note="nu = e^-l, empty space"),
            Preset("fig5b", inverse_power(1.1), 100.0, note="nu = l^-1.1, empty space"),
            Preset("fig6a", uniform, 100.0, note="nu = 1, empty space"),
            Preset("fig6b", exponential(1.0), 100.0, note="nu = e^l, empty space"),
            Preset("renyi", discrete([(1.0, 1.0)]), 200.0, k=1, note="unit segments"),
            Preset("example3", ex3, 200.0, note="three lengths"),
            Preset("uniform-ldf", uniform, 200.0, note="nu = 1"),
        ]
    }


PRESETS = _table()


def resolve(spec: str) -> Preset:
    """Preset by name, or an ad-hoc preset from a JSON distribution file."""
    if spec in PRESETS:
        return PRESETS[spec]
    if os.path.isfile(spec):
        try:
            with open(spec, encoding="utf-8") as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read distribution file {spec!r}: {exc}") from exc
        return Preset(os.path.basename(spec), from_json(obj), 100.0)
    raise ConfigurationError(
        f"{spec!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a file"
    )
