"""Grid sweeps, tolerance analysis, and attenuator calibration.

Everything here drives the cascade engine across operating points: frequency/
temperature/power grids with an optional in-band interferer, worst-case gain
corners, Monte Carlo over stage tolerances, and the flatness calibration that
picks adjustable-attenuator settings per frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import intermod
from .cascade import (
    CascadeResult,
    NoiseModel,
    analyze,
    cascade_from_resolved,
    cascade_gain,
    cascade_iip3,
    cascade_noise_figure,
    noise_floor,
    resolve_chain,
    sfdr,
)
from .errors import CalibrationError, InterfererBandError, RxChainError
from .model import (
    ATTEN_MAX_DB,
    ATTEN_MIN_DB,
    ATTEN_STEP_DB,
    Chain,
    OperatingPoint,
    StageKind,
)
from .units import celsius_to_kelvin

DEFAULT_FREQS_HZ = (3.1e9, 3.3e9, 3.5e9)
DEFAULT_TEMPS_DEGC = (-40.0, 25.0, 85.0)
DEFAULT_POWERS_DBM = tuple(float(p) for p in range(-122, -31, 10))
DEFAULT_INTERFERER_OFFSET_HZ = 1e6
DEFAULT_INTERFERER_LEVELS_DBM = (-92.0, -82.0, -32.0)


@dataclass(frozen=True)
class Interferer:
    """A single tone offset from the main signal, swept over levels."""

    offset_hz: float = DEFAULT_INTERFERER_OFFSET_HZ
    levels_dbm: Tuple[float, ...] = DEFAULT_INTERFERER_LEVELS_DBM

    def __post_init__(self):
        if self.offset_hz == 0.0:
            raise RxChainError("interferer offset_hz must be nonzero")
        if not self.levels_dbm:
            raise RxChainError("interferer needs at least one level")
        object.__setattr__(self, "levels_dbm", tuple(float(p) for p in self.levels_dbm))


@dataclass(frozen=True)
class SweepGrid:
    """Operating-point grid; iteration is frequency-major, then temperature,
    then power, then interferer level.

    The default grid covers the full reference envelope, interferer included;
    pass ``interferer=None`` for a clean-signal sweep.
    """

    freqs_hz: Tuple[float, ...] = DEFAULT_FREQS_HZ
    temps_degc: Tuple[float, ...] = DEFAULT_TEMPS_DEGC
    powers_dbm: Tuple[float, ...] = DEFAULT_POWERS_DBM
    interferer: Optional[Interferer] = Interferer()

    def __post_init__(self):
        for name in ("freqs_hz", "temps_degc", "powers_dbm"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise RxChainError(f"sweep grid {name} must be non-empty")
            object.__setattr__(self, name, values)


@dataclass(frozen=True)
class SweepRow:
    """Cascade totals at one grid point (margin only when an interferer is set)."""

    rf_hz: float
    temp_degc: float
    p_in_dbm: float
    interferer_dbm: Optional[float]
    total_gain_db: float
    total_nf_db: float
    total_iip3_dbm: float
    noise_floor_dbm: float
    sfdr_db: float
    interferer_margin_db: Optional[float]


def _concrete_model(chain: Chain, point: OperatingPoint, model: Optional[NoiseModel]) -> NoiseModel:
    m = model if model is not None else NoiseModel(bandwidth_hz=chain.plan.passband_hz)
    if m.ambient_temp_k is None:
        m = m.at_ambient(celsius_to_kelvin(point.temp_degc))
    return m


def interferer_margin(
    result: CascadeResult,
    main_p_dbm: float,
    interferer_p_dbm: float,
    offset_hz: float,
    model: NoiseModel,
) -> float:
    """Main-signal-to-worst-IM3 margin in dB for a main tone at the tune
    frequency and an interferer offset_hz away.

    Both near IM3 products (at rf - offset and rf + 2*offset for a positive
    offset) must fall inside the passband, checked through the intermod
    annotations; otherwise the margin is undefined and this raises. The margin
    is main level minus the worse (stronger) IM3 product from im3_level, so it
    strictly decreases as the interferer level rises.
    """
    center = result.rf_hz
    f_int = center + offset_hz
    f1, f2 = (center, f_int) if offset_hz > 0 else (f_int, center)
    products = intermod.in_band(
        intermod.two_tone_products(f1, f2, 3), center, model.bandwidth_hz
    )
    im3_freqs = (2.0 * f1 - f2, 2.0 * f2 - f1)
    for freq in im3_freqs:
        hits = [p for p in products if p.freq_hz == freq]
        if not hits or not hits[0].in_band:
            raise InterfererBandError(
                f"IM3 product at {freq} Hz falls outside the passband "
                f"({model.bandwidth_hz} Hz around {center} Hz); margin undefined"
            )
    if math.isinf(result.total_iip3_dbm):
        return math.inf
    if offset_hz > 0:
        p_main_side, p_int_side = main_p_dbm, interferer_p_dbm
    else:
        p_main_side, p_int_side = interferer_p_dbm, main_p_dbm
    low, high = intermod.im3_level(p_main_side, p_int_side, result.total_iip3_dbm)
    return main_p_dbm - max(low, high)


def run_sweep(
    chain: Chain,
    grid: Optional[SweepGrid] = None,
    model: Optional[NoiseModel] = None,
) -> List[SweepRow]:
    """Analyze the chain at every grid point.

    Any point that fails to resolve aborts the sweep with the offending point
    named in the error.
    """
    grid = grid if grid is not None else SweepGrid()
    rows: List[SweepRow] = []
    for f in grid.freqs_hz:
        for t in grid.temps_degc:
            for p in grid.powers_dbm:
                point = OperatingPoint(rf_hz=f, temp_degc=t, p_in_dbm=p)
                try:
                    result = analyze(chain, point, model)
                    levels: Tuple[Optional[float], ...] = (None,)
                    if grid.interferer is not None:
                        levels = grid.interferer.levels_dbm
                    for level in levels:
                        margin = None
                        if level is not None:
                            margin = interferer_margin(
                                result,
                                p,
                                level,
                                grid.interferer.offset_hz,
                                _concrete_model(chain, point, model),
                            )
                        rows.append(
                            SweepRow(
                                rf_hz=f,
                                temp_degc=t,
                                p_in_dbm=p,
                                interferer_dbm=level,
                                total_gain_db=result.total_gain_db,
                                total_nf_db=result.total_nf_db,
                                total_iip3_dbm=result.total_iip3_dbm,
                                noise_floor_dbm=result.noise_floor_dbm,
                                sfdr_db=result.sfdr_db,
                                interferer_margin_db=margin,
                            )
                        )
                except RxChainError as exc:
                    raise RxChainError(
                        f"sweep point rf={f} Hz temp={t} degC pin={p} dBm failed: {exc}"
                    ) from exc
    return rows


def _cell(x: Optional[float]) -> str:
    if x is None:
        return ""
    return "inf" if math.isinf(x) else f"{x:.12g}"


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    lines = [
        "rf_hz,temp_degc,p_in_dbm,interferer_dbm,total_gain_db,total_nf_db,"
        "total_iip3_dbm,noise_floor_dbm,sfdr_db,interferer_margin_db"
    ]
    for r in rows:
        lines.append(
            f"{_cell(r.rf_hz)},{_cell(r.temp_degc)},{_cell(r.p_in_dbm)},"
            f"{_cell(r.interferer_dbm)},{_cell(r.total_gain_db)},{_cell(r.total_nf_db)},"
            f"{_cell(r.total_iip3_dbm)},{_cell(r.noise_floor_dbm)},{_cell(r.sfdr_db)},"
            f"{_cell(r.interferer_margin_db)}"
        )
    return "\n".join(lines) + "\n"


def sweep_plot_csv(rows: Sequence[SweepRow]) -> str:
    """Long-format plot data: series,rf_hz,metric,value.

    Chain metrics are emitted once per (frequency, temperature) at the sweep's
    first power level with the temperature as the series key; margin curves
    are emitted per interferer level (series key = level) at the first power.
    """
    if not rows:
        return "series,rf_hz,metric,value\n"
    first_power = rows[0].p_in_dbm
    lines = ["series,rf_hz,metric,value"]
    seen = set()
    for r in rows:
        if r.p_in_dbm != first_power:
            continue
        key = (r.rf_hz, r.temp_degc)
        if key not in seen:
            seen.add(key)
            series = f"temp={r.temp_degc:g}C"
            for metric, value in (
                ("total_gain_db", r.total_gain_db),
                ("total_nf_db", r.total_nf_db),
                ("total_iip3_dbm", r.total_iip3_dbm),
                ("noise_floor_dbm", r.noise_floor_dbm),
                ("sfdr_db", r.sfdr_db),
            ):
                lines.append(f"{series},{_cell(r.rf_hz)},{metric},{_cell(value)}")
        if r.interferer_dbm is not None:
            series = f"interferer={r.interferer_dbm:g}dBm,temp={r.temp_degc:g}C"
            lines.append(f"{series},{_cell(r.rf_hz)},interferer_margin_db,{_cell(r.interferer_margin_db)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class WorstCase:
    """Cascade at nominal and at the all-stages gain-tolerance corners."""

    nominal: CascadeResult
    min_gain: CascadeResult
    max_gain: CascadeResult
    tol_sum_db: float


def worst_case(
    chain: Chain,
    point: OperatingPoint,
    model: Optional[NoiseModel] = None,
) -> WorstCase:
    """Evaluate the corners where every stage sits at +tol or -tol.

    Gain is additive in dB, so these corners bound the gain exactly:
    max corner total = nominal + sum of tolerances.
    """
    m = _concrete_model(chain, point, model)
    tols = [s.gain_tol_db for s in chain.stages]
    nominal = cascade_from_resolved(
        resolve_chain(chain, point), m, chain_name=chain.name, point=point
    )
    lo = cascade_from_resolved(
        resolve_chain(chain, point, [-t for t in tols]), m, chain_name=chain.name, point=point
    )
    hi = cascade_from_resolved(
        resolve_chain(chain, point, tols), m, chain_name=chain.name, point=point
    )
    return WorstCase(nominal=nominal, min_gain=lo, max_gain=hi, tol_sum_db=float(sum(tols)))


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float
    min: float
    max: float


@dataclass(frozen=True)
class MonteCarloSummary:
    """Distribution of cascade totals under uniform gain-tolerance draws."""

    n_trials: int
    seed: int
    gain_db: MetricSummary
    nf_db: MetricSummary
    iip3_dbm: MetricSummary
    noise_floor_dbm: MetricSummary
    sfdr_db: MetricSummary


def _summary(values: np.ndarray) -> MetricSummary:
    return MetricSummary(
        mean=float(np.mean(values)),
        std=float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
        min=float(np.min(values)),
        max=float(np.max(values)),
    )


def monte_carlo(
    chain: Chain,
    point: OperatingPoint,
    model: Optional[NoiseModel] = None,
    n_trials: int = 10000,
    seed: Optional[int] = None,
) -> MonteCarloSummary:
    """Uniform gain draws within each stage's +/- tolerance.

    Trial i draws from a counter-based substream keyed (seed, i), so results
    are reproducible and independent of execution order or any partitioning
    of the trial range. The seed is mandatory; there is no implicit
    entropy source.
    """
    if n_trials < 1:
        raise RxChainError(f"n_trials must be >= 1, got {n_trials}")
    if seed is None:
        raise RxChainError("monte_carlo requires an explicit seed")
    m = _concrete_model(chain, point, model)
    tols = np.array([s.gain_tol_db for s in chain.stages], dtype=float)

    gains = np.empty(n_trials)
    nfs = np.empty(n_trials)
    iip3s = np.empty(n_trials)
    floors = np.empty(n_trials)
    sfdrs = np.empty(n_trials)
    for trial in range(n_trials):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))
        shifts = rng.uniform(-tols, tols)
        resolved = resolve_chain(chain, point, shifts)
        g = cascade_gain(resolved)
        _, nf_db = cascade_noise_figure(resolved)
        iip3 = cascade_iip3(resolved)
        floor = noise_floor(m, nf_db)
        gains[trial] = g
        nfs[trial] = nf_db
        iip3s[trial] = iip3
        floors[trial] = floor
        sfdrs[trial] = sfdr(iip3, floor)
    return MonteCarloSummary(
        n_trials=n_trials,
        seed=seed,
        gain_db=_summary(gains),
        nf_db=_summary(nfs),
        iip3_dbm=_summary(iip3s),
        noise_floor_dbm=_summary(floors),
        sfdr_db=_summary(sfdrs),
    )


@dataclass(frozen=True)
class CalibrationRow:
    rf_hz: float
    setting_db: float
    achieved_gain_db: float
    error_db: float


@dataclass(frozen=True)
class CalibrationResult:
    target_gain_db: float
    rows: Tuple[CalibrationRow, ...]

    def to_csv(self) -> str:
        lines = ["rf_hz,setting_db,achieved_gain_db,error_db"]
        for r in self.rows:
            lines.append(
                f"{_cell(r.rf_hz)},{_cell(r.setting_db)},"
                f"{_cell(r.achieved_gain_db)},{_cell(r.error_db)}"
            )
        return "\n".join(lines) + "\n"


def calibrate_attenuator(
    chain: Chain,
    freqs_hz: Sequence[float],
    target_gain_db: Optional[float] = None,
    model: Optional[NoiseModel] = None,
    temp_degc: float = 25.0,
) -> CalibrationResult:
    """Choose per-frequency attenuator settings that flatten the chain gain.

    The target defaults to the chain gain at the lowest requested frequency
    (with the attenuator at 0). Settings are quantized to the attenuator step
    with ties rounding toward more attenuation; after quantization the
    achieved gain is re-analyzed and must sit within step/2 (+1e-9) of the
    target, else the target is declared unreachable at that frequency.
    """
    if chain.attenuator_index is None:
        raise CalibrationError(f"chain {chain.name!r} has no adjustable-attenuator stage")
    freqs = sorted(float(f) for f in freqs_hz)
    if not freqs:
        raise CalibrationError("calibration needs at least one frequency")

    zeroed = chain.with_attenuator_setting(0.0)

    def gain_at(c: Chain, f: float) -> float:
        point = OperatingPoint(rf_hz=f, temp_degc=temp_degc)
        return analyze(c, point, model).total_gain_db

    if target_gain_db is None:
        target_gain_db = gain_at(zeroed, freqs[0])

    half_step = ATTEN_STEP_DB / 2.0 + 1e-9
    rows: List[CalibrationRow] = []
    for f in freqs:
        g0 = gain_at(zeroed, f)
        ideal = g0 - target_gain_db
        setting = math.floor(ideal / ATTEN_STEP_DB + 0.5) * ATTEN_STEP_DB
        if setting < ATTEN_MIN_DB:
            raise CalibrationError(
                f"target {target_gain_db} dB above achievable gain {g0} dB at {f} Hz"
            )
        if setting > ATTEN_MAX_DB:
            raise CalibrationError(
                f"target {target_gain_db} dB needs {setting} dB attenuation at {f} Hz, "
                f"beyond the {ATTEN_MAX_DB} dB range"
            )
        achieved = gain_at(chain.with_attenuator_setting(setting), f)
        error = achieved - target_gain_db
        if abs(error) > half_step:
            raise CalibrationError(
                f"post-calibration error {error} dB at {f} Hz exceeds the "
                f"{half_step} dB quantization bound"
            )
        rows.append(
            CalibrationRow(
                rf_hz=f, setting_db=setting, achieved_gain_db=achieved, error_db=error
            )
        )
    return CalibrationResult(target_gain_db=target_gain_db, rows=tuple(rows))
