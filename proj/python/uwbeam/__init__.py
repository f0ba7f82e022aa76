"""Angle-based transmit beamforming simulator for underwater acoustic downlinks.

Configs are plain dicts using the same schema as the JSON config files.
Missing fields take the profile defaults.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Sequence

from . import _uwbeam
from ._uwbeam import UwbeamError, compute_frame_mse, mseq_symbols

__version__ = _uwbeam.__version__

__all__ = [
    "UwbeamError",
    "angle_map",
    "beam_pattern",
    "beam_weights",
    "compute_frame_mse",
    "default_config",
    "mseq_symbols",
    "resolve_config",
    "run_monte_carlo",
    "run_single_link",
    "run_two_user",
]


def _text(config: Mapping[str, Any] | str | None) -> str:
    if config is None:
        return "{}"
    if isinstance(config, str):
        return config
    return json.dumps(config)


def default_config(profile: str = "space") -> dict:
    return json.loads(_uwbeam.default_config_json(profile))


def resolve_config(config: Mapping[str, Any] | str | None = None) -> dict:
    """Validated config with every default filled in."""
    return json.loads(_uwbeam.resolve_config_json(_text(config)))


def beam_weights(config=None, angle_deg: float = 0.0, nulls_deg: Sequence[float] = ()):
    """Returns (weights[L, M], bin_frequencies_hz[L])."""
    return _uwbeam.beam_weights(_text(config), angle_deg, list(nulls_deg))


def beam_pattern(config=None, angle_deg: float = 0.0, nulls_deg: Sequence[float] = (),
                 angles_deg: Sequence[float] = (), freq_hz: float | None = None):
    cfg = resolve_config(config)
    f = cfg["fc"] if freq_hz is None else freq_hz
    return _uwbeam.beam_pattern(_text(cfg), angle_deg, list(nulls_deg), list(angles_deg), f)


def angle_map(config=None, seed: int | None = None, randomize: bool = False) -> dict:
    return _uwbeam.angle_map(_text(config), seed, randomize)


def run_single_link(config=None, seed: int | None = None, randomize: bool = False) -> dict:
    return _uwbeam.run_single_link(_text(config), seed, randomize)


def run_monte_carlo(config=None) -> dict:
    return _uwbeam.run_monte_carlo(_text(config))


def run_two_user(config=None, seed: int | None = None) -> list:
    if config is None:
        config = {"profile": "mace"}
    return _uwbeam.run_two_user(_text(config), seed)
