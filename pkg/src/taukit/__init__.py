"""taukit: numerical tau functions for uncoupled BPS structures and the
deformed cubic oscillator / Painleve I isomonodromic family."""

from . import bps, cli, elliptic, errors, forms, oscillator, painleve1, specfun, verify

__all__ = [
    "bps",
    "cli",
    "elliptic",
    "errors",
    "forms",
    "oscillator",
    "painleve1",
    "specfun",
    "verify",
]

__version__ = "0.1.0"
