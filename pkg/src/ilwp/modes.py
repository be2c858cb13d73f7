"""Prediction modes understood by the codec."""

from __future__ import annotations

from enum import Enum

from .errors import ConfigError


class Mode(str, Enum):
    """How the reference kernel for each coded kernel is chosen.

    BASELINE quantizes raw weights with no prediction.  FSS searches every
    kernel in all earlier layers, LSS searches only the immediately
    previous layer, and ILL uses the collocated kernel of the previous
    layer with no search and no side information.
    """

    BASELINE = "baseline"
    FSS = "fss"
    LSS = "lss"
    ILL = "ill"

    @classmethod
    def from_name(cls, name: str) -> "Mode":
        try:
            return cls(name.lower())
        except ValueError:
            raise ConfigError(f"unknown mode {name!r}") from None


# Wire codes used by the .ilw container.
MODE_CODES = {Mode.BASELINE: 0, Mode.FSS: 1, Mode.LSS: 2, Mode.ILL: 3}
MODE_FROM_CODE = {code: mode for mode, code in MODE_CODES.items()}
