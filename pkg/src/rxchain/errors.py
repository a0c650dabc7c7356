"""Exception types raised by rxchain.

All domain failures derive from RxChainError so callers (and the CLI) can
separate "your inputs violate a modeling rule" from programming errors.
"""

from __future__ import annotations


class RxChainError(ValueError):
    """Base class for all domain errors raised by this package."""


class StageDefinitionError(RxChainError):
    """A stage violates a construction rule (bad kind, positive passive gain, ...)."""


class ChainDefinitionError(RxChainError):
    """A chain document is invalid. Carries the full violation list."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class OperatingPointError(RxChainError):
    """Operating point outside the model validity range or the plan band."""


class EmptyChainError(RxChainError):
    """Operation requires at least one stage."""


class FrequencyRangeError(RxChainError):
    """Frequency falls outside tabulated data; extrapolation is not performed."""


class NonlinearityAbsentError(RxChainError):
    """Operation requires at least one stage with a finite intercept."""


class DriveLevelError(RxChainError):
    """Simulation drive outside the validated small-signal region."""


class CoherenceError(RxChainError):
    """Requested tone or bin is not coherent with the sampling grid."""


class AliasingError(RxChainError):
    """A generated product would alias onto a requested measurement bin."""


class SlopeError(RxChainError):
    """Measured intermod slope is outside the region where extraction is valid."""


class InterfererBandError(RxChainError):
    """Interferer products fall outside the passband; margin is undefined."""


class CalibrationError(RxChainError):
    """Attenuator calibration target is unreachable at some frequency."""


class TouchstoneFormatError(RxChainError):
    """Touchstone file is malformed or uses an unsupported version/parameter."""


class TableFormatError(RxChainError):
    """CSV parameter table is malformed (ragged rows, duplicate axis values, ...)."""
