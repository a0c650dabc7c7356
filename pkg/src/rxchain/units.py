"""Decibel/linear conversions and physical constants shared across the package.

Conventions: gains and losses are power ratios in dB, absolute powers are dBm
into the reference impedance, temperatures are degrees Celsius at the API
surface and kelvin inside noise math.
"""

from __future__ import annotations

import math

BOLTZMANN_J_PER_K = 1.380649e-23
REF_NOISE_TEMP_K = 290.0
REF_IMPEDANCE_OHM = 50.0
ZERO_CELSIUS_K = 273.15


def db_to_lin(db: float) -> float:
    """Power ratio for a dB value."""
    return 10.0 ** (db / 10.0)


def lin_to_db(ratio: float) -> float:
    """dB value for a power ratio (ratio must be > 0)."""
    return 10.0 * math.log10(ratio)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


def celsius_to_kelvin(deg_c: float) -> float:
    return deg_c + ZERO_CELSIUS_K


def dbm_to_peak_volts(dbm: float, impedance_ohm: float = REF_IMPEDANCE_OHM) -> float:
    """Peak amplitude of a sine carrying the given average power."""
    watts = dbm_to_mw(dbm) * 1e-3
    return math.sqrt(2.0 * impedance_ohm * watts)


def peak_volts_to_dbm(v_peak: float, impedance_ohm: float = REF_IMPEDANCE_OHM) -> float:
    """Average power in dBm of a sine with the given peak amplitude."""
    watts = v_peak * v_peak / (2.0 * impedance_ohm)
    return mw_to_dbm(watts * 1e3)
