"""Intermodulation and frequency-plan bookkeeping.

Pure arithmetic on tone and LO frequencies: which mixing products exist, where
they land, whether they fall inside the passband, and the small-signal IM3
levels implied by an intercept point. Levels here are input-referred dBm; the
time-domain simulator provides the independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from .errors import NonlinearityAbsentError, OperatingPointError, RxChainError
from .model import FrequencyPlan


@dataclass(frozen=True)
class ImProduct:
    """One intermodulation product m*f1 + n*f2 (coefficients signed)."""

    m: int
    n: int
    freq_hz: float
    order: int
    in_band: Optional[bool] = None


@dataclass(frozen=True)
class SpurEntry:
    """One mixer product m*f_sig +/- n*f_lo (m, n >= 1; sign shown by freq)."""

    m: int
    n: int
    freq_hz: float
    order: int
    in_band: bool
    desired: bool


@dataclass(frozen=True)
class PlanTable:
    """Conversion frequencies for one RF tune point."""

    rf_hz: float
    lo1_hz: float
    if1_hz: float
    lo2_hz: float
    if2_hz: float
    image1_hz: float
    image2_hz: float


def two_tone_products(f1_hz: float, f2_hz: float, max_order: int) -> List[ImProduct]:
    """All products |m*f1 + n*f2| with 2 <= |m|+|n| <= max_order.

    Includes harmonics (n or m zero with the other coefficient >= 2).
    Deduplicated by frequency keeping the lowest-order representative,
    returned ascending in frequency. in_band is left unset. Tone order does
    not matter; the product set is symmetric under exchange.
    """
    if f1_hz <= 0.0 or f2_hz <= 0.0 or f1_hz == f2_hz:
        raise RxChainError(f"need two distinct positive tones, got f1={f1_hz}, f2={f2_hz}")
    if f1_hz > f2_hz:
        f1_hz, f2_hz = f2_hz, f1_hz
    if max_order < 2:
        raise RxChainError(f"max_order must be >= 2, got {max_order}")

    candidates: List[Tuple[float, int, int, int]] = []
    for m in range(-max_order, max_order + 1):
        for n in range(-max_order, max_order + 1):
            order = abs(m) + abs(n)
            if order < 2 or order > max_order:
                continue
            value = m * f1_hz + n * f2_hz
            if value < 0:
                m_c, n_c, value = -m, -n, -value
            else:
                m_c, n_c = m, n
            candidates.append((value, order, m_c, n_c))

    candidates.sort()
    products: List[ImProduct] = []
    for freq, order, m, n in candidates:
        if products and products[-1].freq_hz == freq:
            continue  # lowest order sorts first at equal frequency
        products.append(ImProduct(m=m, n=n, freq_hz=freq, order=order))
    return products


def in_band(
    products: Sequence[ImProduct], center_hz: float, passband_hz: float
) -> List[ImProduct]:
    """Annotate each product with |freq - center| <= passband/2 (closed interval)."""
    if passband_hz <= 0.0:
        raise RxChainError(f"passband_hz must be > 0, got {passband_hz}")
    half = passband_hz / 2.0
    return [replace(p, in_band=abs(p.freq_hz - center_hz) <= half) for p in products]


def im3_level(p1_dbm: float, p2_dbm: float, iip3_dbm: float) -> Tuple[float, float]:
    """Input-referred IM3 levels in dBm for tones at (f1, f2).

    Returns (level at 2f1 - f2, level at 2f2 - f1):

        low  = 2*p1 + p2 - 2*iip3
        high = p1 + 2*p2 - 2*iip3

    Equal tones collapse to 3p - 2*iip3 on both products.
    """
    if not math.isfinite(iip3_dbm):
        raise NonlinearityAbsentError("im3_level needs a finite iip3_dbm (nonlinear cascade)")
    low = 2.0 * p1_dbm + p2_dbm - 2.0 * iip3_dbm
    high = p1_dbm + 2.0 * p2_dbm - 2.0 * iip3_dbm
    return low, high


def frequency_plan_table(plan: FrequencyPlan, rf_hz: float) -> PlanTable:
    """Conversion and image frequencies for one tune point.

    lo1 tracks the tune: rf + if1 (high-side) or rf - if1 (low-side). The
    first image is on the LO's far side, rf +/- 2*if1; the second-conversion
    image is |2*lo2 - if1|.
    """
    if not plan.contains_rf(rf_hz):
        lo, hi = plan.rf_band_hz
        raise OperatingPointError(f"rf {rf_hz} Hz outside plan band [{lo}, {hi}] Hz")
    if1 = plan.if1_hz
    if plan.lo1_mode == "high-side":
        lo1 = rf_hz + if1
        image1 = rf_hz + 2.0 * if1
    else:
        lo1 = rf_hz - if1
        image1 = abs(rf_hz - 2.0 * if1)
        if lo1 <= 0.0:
            raise OperatingPointError(
                f"low-side lo1 = rf - if1 = {lo1} Hz not positive at rf {rf_hz} Hz"
            )
    return PlanTable(
        rf_hz=rf_hz,
        lo1_hz=lo1,
        if1_hz=if1,
        lo2_hz=plan.lo2_hz,
        if2_hz=plan.if2_hz,
        image1_hz=image1,
        image2_hz=abs(2.0 * plan.lo2_hz - if1),
    )


def mixer_spur_table(
    f_sig_hz: float,
    f_lo_hz: float,
    m_max: int,
    n_max: int,
    if_center_hz: float,
    if_passband_hz: float,
) -> List[SpurEntry]:
    """Mixer products |m*f_sig - n*f_lo| and m*f_sig + n*f_lo, m in 1..m_max, n in 1..n_max.

    2*m_max*n_max raw products, deduplicated by frequency (lowest order wins),
    ascending. The m = n = 1 difference product is flagged desired; in_band is
    judged against if_center +/- if_passband/2.
    """
    if f_sig_hz <= 0.0 or f_lo_hz <= 0.0:
        raise RxChainError("f_sig_hz and f_lo_hz must be > 0")
    if m_max < 1 or n_max < 1:
        raise RxChainError(f"m_max and n_max must be >= 1, got {m_max}, {n_max}")
    if if_passband_hz <= 0.0:
        raise RxChainError(f"if_passband_hz must be > 0, got {if_passband_hz}")

    half = if_passband_hz / 2.0
    candidates: List[Tuple[float, int, int, int, bool]] = []
    for m in range(1, m_max + 1):
        for n in range(1, n_max + 1):
            diff = abs(m * f_sig_hz - n * f_lo_hz)
            candidates.append((diff, m + n, m, n, m == 1 and n == 1))
            candidates.append((m * f_sig_hz + n * f_lo_hz, m + n, m, n, False))

    # at equal frequency: lowest order first, desired product ahead of spurs
    candidates.sort(key=lambda c: (c[0], c[1], not c[4], c[2], c[3]))
    entries: List[SpurEntry] = []
    for freq, order, m, n, desired in candidates:
        if entries and entries[-1].freq_hz == freq:
            continue
        entries.append(
            SpurEntry(
                m=m,
                n=n,
                freq_hz=freq,
                order=order,
                in_band=abs(freq - if_center_hz) <= half,
                desired=desired,
            )
        )
    return entries


def spur_table_csv(entries: Sequence[SpurEntry]) -> str:
    lines = ["m,n,freq_hz,order,in_band,desired"]
    for e in entries:
        lines.append(
            f"{e.m},{e.n},{e.freq_hz:.12g},{e.order},"
            f"{str(e.in_band).lower()},{str(e.desired).lower()}"
        )
    return "\n".join(lines) + "\n"
