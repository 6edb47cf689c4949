"""Physical constants and unit systems.

Two unit systems are supported: SI (defined 2019 values of hbar and k_B)
and natural units with hbar = k_B = 1, which make the scale-free relations
of the noise budget convenient to verify on desk-sized numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class Units:
    """A choice of hbar and Boltzmann constant."""

    name: str
    hbar: float
    k_B: float


SI = Units("si", hbar=1.054571817e-34, k_B=1.380649e-23)
NATURAL = Units("natural", hbar=1.0, k_B=1.0)

_BY_NAME = {u.name: u for u in (SI, NATURAL)}


def get_units(name: str) -> Units:
    """Look a unit system up by name ("si" or "natural")."""
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValidationError(f"unknown unit system {name!r}; expected one of {sorted(_BY_NAME)}") from None
