"""Cascaded budget math: gain, noise figure, third-order intercept, SFDR.

Noise figure uses the standard cascade form with the excess-noise correction,

    F = F1 + (F2 - 1)/G1 + (F3 - 1)/(G1*G2) + ...

(the variant sometimes seen in quick references that omits the "- 1" on later
terms is wrong in the single-stage limit and is deliberately not implemented).
The intercept cascade runs in linear power units,

    1/P_cas = sum_k ( prod_{j<k} Gj ) / P_k      [P in mW, G power ratios]

which is the power-unit rendering of the amplitude-squared combination rule for
memoryless cubic stages whose compressive coefficients share a sign. Stages
without a specified intercept contribute exactly zero. A cascade with no
nonlinear stage at all has unbounded intercept: the result is math.inf, a
distinguished sentinel, never a large finite float.

SFDR follows from the intercept and the integrated noise floor:

    floor_dbm = 10*log10(k*T_ambient*B / 1 mW) + NF_db
    sfdr_db   = (2/3) * (iip3_dbm - floor_dbm)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import (
    EmptyChainError,
    NonlinearityAbsentError,
    OperatingPointError,
    RxChainError,
)
from .model import Chain, OperatingPoint, ResolvedStage, resolve_stage
from .units import BOLTZMANN_J_PER_K, celsius_to_kelvin, dbm_to_mw, lin_to_db


@dataclass(frozen=True)
class NoiseModel:
    """Integration bandwidth and temperatures for noise-floor math.

    ambient_temp_k None means "derive from the operating point" wherever a
    point is available (analyze, sweeps); noise_floor() itself requires an
    explicit value. ref_temp_k is the noise-figure reference and only
    documents the NF convention; it does not enter the floor formula.
    """

    bandwidth_hz: float
    ambient_temp_k: Optional[float] = None
    ref_temp_k: float = 290.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0.0:
            raise RxChainError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        for name in ("ambient_temp_k", "ref_temp_k"):
            value = getattr(self, name)
            if value is not None and value <= 0.0:
                raise RxChainError(f"{name} must be > 0, got {value}")

    def at_ambient(self, temp_k: float) -> "NoiseModel":
        return NoiseModel(self.bandwidth_hz, temp_k, self.ref_temp_k)


@dataclass(frozen=True)
class CascadeRow:
    """Cumulative budget after one stage (prefix of the chain)."""

    label: str
    cum_gain_db: float
    cum_nf_db: float
    cum_iip3_dbm: float
    cum_sfdr_db: float


@dataclass(frozen=True)
class CascadeResult:
    """Chain totals plus the per-stage cumulative table."""

    chain_name: str
    rf_hz: float
    temp_degc: float
    p_in_dbm: float
    bandwidth_hz: float
    total_gain_db: float
    total_nf_db: float
    total_noise_factor_lin: float
    total_iip3_dbm: float
    total_oip3_dbm: float
    noise_floor_dbm: float
    sfdr_db: float
    rows: Tuple[CascadeRow, ...] = field(default_factory=tuple)

    def to_csv(self) -> str:
        lines = ["label,cum_gain_db,cum_nf_db,cum_iip3_dbm,cum_sfdr_db"]
        for r in self.rows:
            lines.append(
                f"{r.label},{_fmt(r.cum_gain_db)},{_fmt(r.cum_nf_db)},"
                f"{_fmt(r.cum_iip3_dbm)},{_fmt(r.cum_sfdr_db)}"
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "chain_name": self.chain_name,
            "rf_hz": self.rf_hz,
            "temp_degc": self.temp_degc,
            "p_in_dbm": self.p_in_dbm,
            "bandwidth_hz": self.bandwidth_hz,
            "total_gain_db": self.total_gain_db,
            "total_nf_db": self.total_nf_db,
            "total_noise_factor_lin": self.total_noise_factor_lin,
            "total_iip3_dbm": _json_num(self.total_iip3_dbm),
            "total_oip3_dbm": _json_num(self.total_oip3_dbm),
            "noise_floor_dbm": self.noise_floor_dbm,
            "sfdr_db": _json_num(self.sfdr_db),
            "rows": [
                {
                    "label": r.label,
                    "cum_gain_db": r.cum_gain_db,
                    "cum_nf_db": r.cum_nf_db,
                    "cum_iip3_dbm": _json_num(r.cum_iip3_dbm),
                    "cum_sfdr_db": _json_num(r.cum_sfdr_db),
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.12g}"


def _json_num(x: float):
    # JSON has no Infinity literal; unbounded serializes as null
    return None if math.isinf(x) else x


def cascade_gain(stages: Sequence[ResolvedStage]) -> float:
    """Total gain in dB; the empty cascade is the identity, 0 dB."""
    return float(sum(s.gain_db for s in stages))


def cascade_noise_figure(stages: Sequence[ResolvedStage]) -> Tuple[float, float]:
    """(noise factor, noise figure dB) of the cascade. Requires >= 1 stage."""
    if not stages:
        raise EmptyChainError("cascade_noise_figure needs at least one stage")
    factor = stages[0].noise_factor_lin
    gain_product = stages[0].gain_lin
    for s in stages[1:]:
        factor += (s.noise_factor_lin - 1.0) / gain_product
        gain_product *= s.gain_lin
    return factor, lin_to_db(factor)


def cascade_iip3(stages: Sequence[ResolvedStage]) -> float:
    """Input-referred intercept of the cascade in dBm.

    Returns math.inf when no stage has a finite intercept (ideally linear
    cascade; spur-free range is unbounded in this model).
    """
    if not stages:
        raise EmptyChainError("cascaded intercept needs at least one stage")
    inv_sum_per_mw = 0.0
    gain_product = 1.0
    for s in stages:
        if math.isfinite(s.iip3_dbm):
            inv_sum_per_mw += gain_product / s.iip3_mw
        gain_product *= s.gain_lin
    if inv_sum_per_mw == 0.0:
        return math.inf
    return lin_to_db(1.0 / inv_sum_per_mw)


def noise_floor(model: NoiseModel, total_nf_db: float) -> float:
    """Integrated noise floor in dBm: kTB in the model bandwidth plus the NF."""
    if model.ambient_temp_k is None:
        raise EmptyChainError("noise_floor needs an explicit ambient_temp_k on the model")
    ktb_mw = BOLTZMANN_J_PER_K * model.ambient_temp_k * model.bandwidth_hz * 1e3
    return lin_to_db(ktb_mw) + total_nf_db


def sfdr(iip3_dbm: float, noise_floor_dbm: float) -> float:
    """Two-tone spur-free dynamic range in dB: (2/3) * (IIP3 - floor)."""
    if math.isinf(iip3_dbm):
        return math.inf
    return (2.0 / 3.0) * (iip3_dbm - noise_floor_dbm)


def resolve_chain(
    chain: Chain,
    point: OperatingPoint,
    gain_shifts_db: Optional[Sequence[float]] = None,
) -> List[ResolvedStage]:
    """Resolve every stage at the point, optionally with per-stage gain shifts."""
    if gain_shifts_db is None:
        gain_shifts_db = [0.0] * len(chain.stages)
    if len(gain_shifts_db) != len(chain.stages):
        raise EmptyChainError(
            f"got {len(gain_shifts_db)} gain shifts for {len(chain.stages)} stages"
        )
    return [
        resolve_stage(s, point, gain_shift_db=d)
        for s, d in zip(chain.stages, gain_shifts_db)
    ]


def cascade_from_resolved(
    resolved: Sequence[ResolvedStage],
    model: NoiseModel,
    chain_name: str = "",
    point: Optional[OperatingPoint] = None,
) -> CascadeResult:
    """Build the full CascadeResult from already-resolved stages.

    The cumulative table is the cascade run on each prefix; totals equal the
    last row. model.ambient_temp_k must already be concrete here.
    """
    rf = point.rf_hz if point is not None else float("nan")
    temp = point.temp_degc if point is not None else float("nan")
    pin = point.p_in_dbm if point is not None else float("nan")

    rows: List[CascadeRow] = []
    cum_gain = 0.0
    gain_product = 1.0
    noise_factor = 0.0
    inv_ip3_per_mw = 0.0
    for i, s in enumerate(resolved):
        if math.isfinite(s.iip3_dbm):
            inv_ip3_per_mw += gain_product / s.iip3_mw
        if i == 0:
            noise_factor = s.noise_factor_lin
        else:
            noise_factor += (s.noise_factor_lin - 1.0) / gain_product
        cum_gain += s.gain_db
        gain_product *= s.gain_lin

        nf_db = lin_to_db(noise_factor)
        iip3 = math.inf if inv_ip3_per_mw == 0.0 else lin_to_db(1.0 / inv_ip3_per_mw)
        floor = noise_floor(model, nf_db)
        rows.append(
            CascadeRow(
                label=s.label,
                cum_gain_db=cum_gain,
                cum_nf_db=nf_db,
                cum_iip3_dbm=iip3,
                cum_sfdr_db=sfdr(iip3, floor),
            )
        )

    if rows:
        total_gain, total_nf = rows[-1].cum_gain_db, rows[-1].cum_nf_db
        total_iip3 = rows[-1].cum_iip3_dbm
        total_factor = noise_factor
    else:
        # identity cascade: unity gain, no added noise, no distortion
        total_gain, total_nf, total_iip3 = 0.0, 0.0, math.inf
        total_factor = 1.0
    floor = noise_floor(model, total_nf)
    return CascadeResult(
        chain_name=chain_name,
        rf_hz=rf,
        temp_degc=temp,
        p_in_dbm=pin,
        bandwidth_hz=model.bandwidth_hz,
        total_gain_db=total_gain,
        total_nf_db=total_nf,
        total_noise_factor_lin=total_factor,
        total_iip3_dbm=total_iip3,
        total_oip3_dbm=total_iip3 + total_gain if math.isfinite(total_iip3) else math.inf,
        noise_floor_dbm=floor,
        sfdr_db=sfdr(total_iip3, floor),
        rows=tuple(rows),
    )


def analyze(
    chain: Chain,
    point: OperatingPoint,
    model: Optional[NoiseModel] = None,
) -> CascadeResult:
    """Resolve the chain at the point and run the full cascade.

    The noise model defaults to the plan passband; its ambient, when not set
    explicitly, is the operating-point temperature.
    """
    if not chain.plan.contains_rf(point.rf_hz):
        lo, hi = chain.plan.rf_band_hz
        raise OperatingPointError(
            f"rf {point.rf_hz} Hz outside plan band [{lo}, {hi}] Hz"
        )
    if model is None:
        model = NoiseModel(bandwidth_hz=chain.plan.passband_hz)
    if model.ambient_temp_k is None:
        model = model.at_ambient(celsius_to_kelvin(point.temp_degc))
    resolved = resolve_chain(chain, point)
    return cascade_from_resolved(resolved, model, chain_name=chain.name, point=point)


def bottleneck_report(
    result: CascadeResult, resolved: Sequence[ResolvedStage]
) -> List[Tuple[str, float]]:
    """Per-stage share of the cascade intercept budget, largest first.

    share_k = (G_before_k / P_k) / (1 / P_cas), with 1/P_cas taken from the
    analyzed result; shares sum to 1. Raises when the cascade has no
    nonlinear stage.
    """
    if math.isinf(result.total_iip3_dbm):
        raise NonlinearityAbsentError("no stage has a finite intercept")
    terms: List[Tuple[str, float]] = []
    gain_product = 1.0
    for s in resolved:
        if math.isfinite(s.iip3_dbm):
            terms.append((s.label, gain_product / s.iip3_mw))
        gain_product *= s.gain_lin
    if not terms:
        raise NonlinearityAbsentError("no stage has a finite intercept")
    inv_total = 1.0 / dbm_to_mw(result.total_iip3_dbm)
    shares = [(label, t / inv_total) for label, t in terms]
    shares.sort(key=lambda item: item[1], reverse=True)
    return shares
