"""Two-tone time-domain simulation of memoryless cubic nonlinearities.

This is the measurement route that cross-checks the closed-form intercept
math. A device is y = a1*x + a3*x^3 (voltages across the reference
impedance). Two tones are synthesized coherently on the sampling grid (every
frequency an exact integer number of cycles in the record), so bin powers
are read directly off the DFT with no window and no leakage.

Validity is enforced, not assumed: tones must sit on bins, the drive must
stay in the small-signal region (fundamental compression < 0.1 dB), and any
cubic product that would alias onto a measured bin is an error. The model is
frequency-independent, so simulations may run at scaled-down test frequencies
without loss of generality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import (
    AliasingError,
    CoherenceError,
    DriveLevelError,
    RxChainError,
    SlopeError,
)
from ..units import REF_IMPEDANCE_OHM, dbm_to_peak_volts, peak_volts_to_dbm
from . import kernel

DEFAULT_SAMPLE_RATE_HZ = 1.024e9
DEFAULT_NUM_SAMPLES = 2**20

# extraction rejects data whose IM3 slope strays further than this from 3
IM3_SLOPE_TOLERANCE_DB_PER_DB = 0.05
# simulation rejects drives compressing the fundamental more than this
MAX_COMPRESSION_DB = 0.1


@dataclass(frozen=True)
class PolyNonlinearity:
    """Memoryless cubic device: y = a1*x + a3*x^3.

    a1 is the voltage gain (> 0); a3 < 0 is compressive, 0 is ideally linear.
    Intercept amplitudes follow from equating the extrapolated fundamental
    a1*A and IM3 (3/4)*|a3|*A^3 responses: A_iip3 = sqrt(4*a1 / (3*|a3|)).
    """

    a1: float
    a3: float
    impedance_ohm: float = REF_IMPEDANCE_OHM

    def __post_init__(self):
        if self.a1 <= 0.0 or not math.isfinite(self.a1):
            raise RxChainError(f"a1 must be finite and > 0, got {self.a1}")
        if not math.isfinite(self.a3):
            raise RxChainError(f"a3 must be finite, got {self.a3}")
        if self.impedance_ohm <= 0.0:
            raise RxChainError(f"impedance_ohm must be > 0, got {self.impedance_ohm}")

    @property
    def gain_db(self) -> float:
        return 20.0 * math.log10(self.a1)

    @property
    def iip3_amplitude_v(self) -> float:
        if self.a3 == 0.0:
            return math.inf
        return math.sqrt(4.0 * self.a1 / (3.0 * abs(self.a3)))

    @property
    def iip3_dbm(self) -> float:
        a = self.iip3_amplitude_v
        return math.inf if math.isinf(a) else peak_volts_to_dbm(a, self.impedance_ohm)

    @property
    def oip3_dbm(self) -> float:
        return self.iip3_dbm + self.gain_db


def design_nonlinearity(
    gain_db: float,
    oip3_dbm: float,
    impedance_ohm: float = REF_IMPEDANCE_OHM,
) -> PolyNonlinearity:
    """Cubic device with the given small-signal gain and output intercept.

    a1 = 10^(gain/20); the output intercept amplitude A_o (peak volts of
    oip3_dbm) fixes a3 = -4*a1^3 / (3*A_o^2). An infinite oip3 gives a3 = 0.
    """
    a1 = 10.0 ** (gain_db / 20.0)
    if math.isinf(oip3_dbm):
        return PolyNonlinearity(a1=a1, a3=0.0, impedance_ohm=impedance_ohm)
    a_out = dbm_to_peak_volts(oip3_dbm, impedance_ohm)
    a3 = -4.0 * a1**3 / (3.0 * a_out**2)
    return PolyNonlinearity(a1=a1, a3=a3, impedance_ohm=impedance_ohm)


def compose(first: PolyNonlinearity, second: PolyNonlinearity) -> PolyNonlinearity:
    """Cubic truncation of second(first(x)).

    c1 = a1*b1 and c3 = b1*a3 + b3*a1^3; fifth- and higher-order terms of the
    exact composition are dropped, consistent with the small-signal region the
    simulator enforces.
    """
    if first.impedance_ohm != second.impedance_ohm:
        raise RxChainError("composed stages must share a reference impedance")
    a1, a3 = first.a1, first.a3
    b1, b3 = second.a1, second.a3
    return PolyNonlinearity(
        a1=a1 * b1,
        a3=b1 * a3 + b3 * a1**3,
        impedance_ohm=first.impedance_ohm,
    )


@dataclass(frozen=True)
class ToneMeasurement:
    """Output bin powers from one two-tone run.

    powers_dbm maps each measured frequency to output power in dBm; input
    drives are recorded so extraction can recover gain without touching the
    device model. total_power_dbm integrates the whole output waveform
    (Parseval check: the measured bins can never exceed it).
    """

    f1_hz: float
    f2_hz: float
    p1_dbm: float
    p2_dbm: float
    powers_dbm: Dict[float, float]
    sample_rate_hz: float
    num_samples: int
    total_power_dbm: float
    backend: str = "numpy"

    def power_at(self, freq_hz: float) -> float:
        if freq_hz in self.powers_dbm:
            return self.powers_dbm[freq_hz]
        half_bin = 0.5 * self.sample_rate_hz / self.num_samples
        for f, p in self.powers_dbm.items():
            if abs(f - freq_hz) <= half_bin:
                return p
        raise RxChainError(f"no measured bin at {freq_hz} Hz")

    @property
    def im3_low_hz(self) -> float:
        return 2.0 * self.f1_hz - self.f2_hz

    @property
    def im3_high_hz(self) -> float:
        return 2.0 * self.f2_hz - self.f1_hz

    @property
    def fundamental_dbm(self) -> float:
        """Mean of the two fundamental output powers."""
        return 0.5 * (self.power_at(self.f1_hz) + self.power_at(self.f2_hz))

    @property
    def im3_dbm(self) -> float:
        """Mean of the two third-order product output powers."""
        return 0.5 * (self.power_at(self.im3_low_hz) + self.power_at(self.im3_high_hz))


def _bin_index(freq_hz: float, sample_rate_hz: float, num_samples: int, what: str) -> int:
    cycles = freq_hz * num_samples / sample_rate_hz
    k = round(cycles)
    if abs(cycles - k) > 1e-6:
        raise CoherenceError(
            f"{what} {freq_hz} Hz is not coherent: {cycles} cycles in the record "
            f"(bin spacing {sample_rate_hz / num_samples} Hz)"
        )
    return int(k)


def _check_compression(model: PolyNonlinearity, a_self: float, a_other: float) -> None:
    # fundamental amplitude scales by 1 + (a3/a1)*(3/4*A^2 + 3/2*B^2)
    factor = 1.0 + (model.a3 / model.a1) * (0.75 * a_self**2 + 1.5 * a_other**2)
    if factor <= 0.0:
        raise DriveLevelError("drive far beyond the cubic model's validity (gain sign flip)")
    compression_db = abs(20.0 * math.log10(factor))
    if compression_db >= MAX_COMPRESSION_DB:
        raise DriveLevelError(
            f"fundamental compression {compression_db:.3f} dB exceeds the "
            f"{MAX_COMPRESSION_DB} dB small-signal limit; reduce drive"
        )


def simulate_two_tone(
    model: PolyNonlinearity,
    f1_hz: float,
    f2_hz: float,
    p1_dbm: float,
    p2_dbm: Optional[float] = None,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
    num_samples: int = DEFAULT_NUM_SAMPLES,
    extra_freqs_hz: Sequence[float] = (),
    backend: str = "auto",
) -> ToneMeasurement:
    """Drive the device with two coherent tones and measure the output bins.

    Measured bins: both fundamentals and both near IM3 products (2f1-f2,
    2f2-f1), plus any extra_freqs_hz. p2_dbm defaults to p1_dbm. Raises if a
    tone or requested bin is off-grid, if the drive leaves the small-signal
    region, or if any cubic product would alias onto a measured bin.
    """
    if p2_dbm is None:
        p2_dbm = p1_dbm
    if not (0.0 < f1_hz < f2_hz):
        raise RxChainError(f"need 0 < f1 < f2, got {f1_hz}, {f2_hz}")
    if 2.0 * f1_hz - f2_hz <= 0.0:
        raise RxChainError(
            f"tones too widely spaced: 2*f1 - f2 = {2.0 * f1_hz - f2_hz} Hz is not positive"
        )
    n = int(num_samples)
    if n < 16:
        raise RxChainError(f"num_samples must be >= 16, got {num_samples}")

    k1 = _bin_index(f1_hz, sample_rate_hz, n, "tone f1")
    k2 = _bin_index(f2_hz, sample_rate_hz, n, "tone f2")

    measured: Dict[float, int] = {}
    for what, freq in (
        ("tone f1", f1_hz),
        ("tone f2", f2_hz),
        ("IM3 product 2f1-f2", 2.0 * f1_hz - f2_hz),
        ("IM3 product 2f2-f1", 2.0 * f2_hz - f1_hz),
        *(("requested bin", f) for f in extra_freqs_hz),
    ):
        k = _bin_index(freq, sample_rate_hz, n, what)
        if k > n // 2:
            raise AliasingError(
                f"{what} {freq} Hz is above Nyquist ({sample_rate_hz / 2} Hz)"
            )
        measured[freq] = k

    # every product of the cubic; any that folds onto a measured bin corrupts it
    produced = {
        f1_hz,
        f2_hz,
        2.0 * f1_hz - f2_hz,
        2.0 * f2_hz - f1_hz,
        3.0 * f1_hz,
        3.0 * f2_hz,
        2.0 * f1_hz + f2_hz,
        2.0 * f2_hz + f1_hz,
    }
    measured_bins = set(measured.values())
    for freq in produced:
        kp = _bin_index(freq, sample_rate_hz, n, "cubic product")
        folded = kp % n
        if folded > n // 2:
            folded = n - folded
        if folded in measured_bins and kp != folded:
            raise AliasingError(
                f"cubic product at {freq} Hz aliases onto measured bin {folded} "
                f"(sample rate {sample_rate_hz} Hz too low)"
            )

    a1v = dbm_to_peak_volts(p1_dbm, model.impedance_ohm)
    a2v = dbm_to_peak_volts(p2_dbm, model.impedance_ohm)
    _check_compression(model, a1v, a2v)
    _check_compression(model, a2v, a1v)

    backend_mod = kernel.get_backend(backend)
    bins = np.array([measured[f] for f in measured], dtype=np.int64)
    amps, mean_square = backend_mod.measure_bins(
        model.a1, model.a3, a1v, a2v, k1, k2, bins, n
    )

    powers: Dict[float, float] = {}
    for (freq, _), amp in zip(measured.items(), amps):
        mag = abs(amp)
        powers[freq] = (
            -math.inf if mag == 0.0 else peak_volts_to_dbm(mag, model.impedance_ohm)
        )
    total_mw = mean_square / model.impedance_ohm * 1e3
    return ToneMeasurement(
        f1_hz=f1_hz,
        f2_hz=f2_hz,
        p1_dbm=p1_dbm,
        p2_dbm=p2_dbm,
        powers_dbm=powers,
        sample_rate_hz=sample_rate_hz,
        num_samples=n,
        total_power_dbm=-math.inf if total_mw == 0.0 else 10.0 * math.log10(total_mw),
        backend=getattr(backend_mod, "NAME", "compiled"),
    )


@dataclass(frozen=True)
class Ip3Extraction:
    """Intercept recovered from two equal-tone measurements.

    Unpacks as ``iip3_dbm, oip3_dbm = extract_ip3(...)``.
    """

    iip3_dbm: float
    oip3_dbm: float
    gain_db: float
    fund_slope_db_per_db: float
    im3_slope_db_per_db: float

    def __iter__(self):
        return iter((self.iip3_dbm, self.oip3_dbm))


def extract_ip3(
    meas_low: ToneMeasurement,
    meas_high: ToneMeasurement,
    p_low_dbm: Optional[float] = None,
    p_high_dbm: Optional[float] = None,
    gain_db: Optional[float] = None,
) -> Ip3Extraction:
    """Recover IIP3/OIP3 from measurements at two drive levels.

    Per point, the slope-1 fundamental and slope-3 IM3 lines intersect at
    iip3 = p_in + (P_fund - P_im3) / 2; the two points are averaged. The
    measured IM3 slope must sit within 0.05 dB/dB of 3, otherwise the drive
    was outside the validated region and extraction refuses.

    Drive levels default to the ones recorded in the measurements; a known
    device gain may be passed so the output intercept is exactly
    iip3 + gain_db instead of using the measured gain.
    """
    for m in (meas_low, meas_high):
        if m.p1_dbm != m.p2_dbm:
            raise RxChainError("extraction expects equal-level tones in each measurement")
    if (meas_low.f1_hz, meas_low.f2_hz) != (meas_high.f1_hz, meas_high.f2_hz):
        raise RxChainError("measurements must share tone frequencies")
    p_a = meas_low.p1_dbm if p_low_dbm is None else float(p_low_dbm)
    p_b = meas_high.p1_dbm if p_high_dbm is None else float(p_high_dbm)
    if p_b <= p_a:
        raise SlopeError(f"drive levels must ascend, got {p_a} then {p_b} dBm")

    dp = p_b - p_a
    fund_slope = (meas_high.fundamental_dbm - meas_low.fundamental_dbm) / dp
    im3_slope = (meas_high.im3_dbm - meas_low.im3_dbm) / dp
    if abs(im3_slope - 3.0) > IM3_SLOPE_TOLERANCE_DB_PER_DB:
        raise SlopeError(
            f"IM3 slope {im3_slope:.4f} dB/dB outside 3 +/- "
            f"{IM3_SLOPE_TOLERANCE_DB_PER_DB}; drive outside the valid region"
        )

    iip3_a = p_a + (meas_low.fundamental_dbm - meas_low.im3_dbm) / 2.0
    iip3_b = p_b + (meas_high.fundamental_dbm - meas_high.im3_dbm) / 2.0
    iip3 = 0.5 * (iip3_a + iip3_b)
    gain = (
        0.5 * ((meas_low.fundamental_dbm - p_a) + (meas_high.fundamental_dbm - p_b))
        if gain_db is None
        else float(gain_db)
    )
    return Ip3Extraction(
        iip3_dbm=iip3,
        oip3_dbm=iip3 + gain,
        gain_db=gain,
        fund_slope_db_per_db=fund_slope,
        im3_slope_db_per_db=im3_slope,
    )


@dataclass(frozen=True)
class SlopeScan:
    """Fundamental and IM3 output power versus drive, with local slopes."""

    drives_dbm: Tuple[float, ...]
    fund_dbm: Tuple[float, ...]
    im3_dbm: Tuple[float, ...]
    fund_slopes_db_per_db: Tuple[float, ...]
    im3_slopes_db_per_db: Tuple[float, ...]


def slope_scan(
    model: PolyNonlinearity,
    f1_hz: float,
    f2_hz: float,
    drives_dbm: Sequence[float],
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
    num_samples: int = DEFAULT_NUM_SAMPLES,
    backend: str = "auto",
) -> SlopeScan:
    """Sweep equal-tone drive and report response slopes.

    Needs >= 3 strictly ascending drive levels; slope i is the finite
    difference between drives i and i+1. In the small-signal region the
    fundamental slope is 1 and the IM3 slope is 3.
    """
    drives = [float(d) for d in drives_dbm]
    if len(drives) < 3:
        raise SlopeError(f"need at least 3 drive levels, got {len(drives)}")
    for a, b in zip(drives, drives[1:]):
        if b <= a:
            raise SlopeError(f"drive levels must strictly ascend, got {a} then {b} dBm")

    fund: list[float] = []
    im3: list[float] = []
    for p in drives:
        meas = simulate_two_tone(
            model,
            f1_hz,
            f2_hz,
            p,
            sample_rate_hz=sample_rate_hz,
            num_samples=num_samples,
            backend=backend,
        )
        fund.append(meas.fundamental_dbm)
        im3.append(meas.im3_dbm)

    fund_slopes = tuple(
        (fund[i + 1] - fund[i]) / (drives[i + 1] - drives[i]) for i in range(len(drives) - 1)
    )
    im3_slopes = tuple(
        (im3[i + 1] - im3[i]) / (drives[i + 1] - drives[i]) for i in range(len(drives) - 1)
    )
    return SlopeScan(
        drives_dbm=tuple(drives),
        fund_dbm=tuple(fund),
        im3_dbm=tuple(im3),
        fund_slopes_db_per_db=fund_slopes,
        im3_slopes_db_per_db=im3_slopes,
    )
