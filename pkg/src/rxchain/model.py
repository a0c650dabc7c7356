"""Chain description model: stages, frequency plan, operating point, resolution.

A chain is an ordered list of StageSpec entries plus a two-stage downconversion
FrequencyPlan. Specs hold datasheet-style reference values (gain at 25 degC,
noise figure at 290 K, one of OIP3/IIP3); resolve_stage() turns a spec into the
numbers that apply at a concrete operating point:

    gain_db  = base(rf) + tempco * (temp - 25) [- setting for the adjustable pad]
    nf_db    = datasheet value, held across temperature
    iip3_dbm = given directly, or oip3_dbm - gain_db re-derived at the point

base(rf) comes from the stage's gain table when it has one, else the scalar
gain_db field. Ideally linear stages (no intercept given) resolve with
iip3 = oip3 = +inf so their cascade contribution is exactly zero.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import touchstone
from .errors import (
    ChainDefinitionError,
    FrequencyRangeError,
    OperatingPointError,
    RxChainError,
    StageDefinitionError,
)

ATTEN_MIN_DB = 0.0
ATTEN_MAX_DB = 31.5
ATTEN_STEP_DB = 0.5

REFERENCE_TEMP_DEGC = 25.0
DEFAULT_TEMP_RANGE_DEGC = (-55.0, 125.0)


class StageKind(str, enum.Enum):
    AMPLIFIER = "amplifier"
    MIXER = "mixer"
    FILTER = "filter"
    ATTENUATOR = "attenuator"
    ADJUSTABLE_ATTENUATOR = "adjustable-attenuator"
    CABLE = "cable"
    THERMOPAD = "thermopad"


# kinds whose loss is thermal: gain <= 0 and nf = -gain at reference conditions
PASSIVE_KINDS = frozenset(
    {
        StageKind.FILTER,
        StageKind.ATTENUATOR,
        StageKind.ADJUSTABLE_ATTENUATOR,
        StageKind.CABLE,
        StageKind.THERMOPAD,
    }
)


@dataclass(frozen=True, eq=False)
class GainTable:
    """Frequency-dependent gain in dB, linearly interpolated, never extrapolated."""

    freqs_hz: np.ndarray
    gains_db: np.ndarray
    source: str = ""

    def __post_init__(self):
        f = np.asarray(self.freqs_hz, dtype=float)
        g = np.asarray(self.gains_db, dtype=float)
        if f.ndim != 1 or f.shape != g.shape or len(f) < 2:
            raise StageDefinitionError("gain table needs matching 1-D arrays, >= 2 points")
        if np.any(np.diff(f) <= 0):
            raise StageDefinitionError("gain table frequencies must be strictly ascending")
        object.__setattr__(self, "freqs_hz", f)
        object.__setattr__(self, "gains_db", g)

    def gain_at(self, freq_hz: float) -> float:
        if freq_hz < self.freqs_hz[0] or freq_hz > self.freqs_hz[-1]:
            raise FrequencyRangeError(
                f"{freq_hz} Hz outside gain table range "
                f"[{self.freqs_hz[0]}, {self.freqs_hz[-1]}] Hz ({self.source or 'inline'})"
            )
        return float(np.interp(freq_hz, self.freqs_hz, self.gains_db))

    @classmethod
    def from_network(cls, net: touchstone.TwoPortNetwork, source: str = "") -> "GainTable":
        return cls(freqs_hz=net.freqs_hz, gains_db=net.s21_db, source=source)


@dataclass(frozen=True)
class StageSpec:
    """One chain element at datasheet reference conditions.

    Exactly one of oip3_dbm/iip3_dbm may be given; both absent means the stage
    is treated as ideally linear (passive filters, pads). Passive kinds default
    nf_db to -gain_db; an explicit different value requires nf_override=True.
    setting_db applies only to the adjustable attenuator: commanded attenuation
    on top of the (<= 0) insertion gain, 0 to 31.5 dB in 0.5 dB steps.
    """

    label: str
    kind: StageKind
    gain_db: float
    nf_db: Optional[float] = None
    oip3_dbm: Optional[float] = None
    iip3_dbm: Optional[float] = None
    gain_tempco_db_per_degc: float = 0.0
    gain_tol_db: float = 0.0
    setting_db: float = 0.0
    gain_table: Optional[GainTable] = None
    nf_override: bool = False

    def __post_init__(self):
        problems: List[str] = []
        if not self.label:
            problems.append("label must be non-empty")
        try:
            kind = StageKind(self.kind)
            object.__setattr__(self, "kind", kind)
        except ValueError:
            problems.append(
                f"unknown kind {self.kind!r}; expected one of "
                f"{sorted(k.value for k in StageKind)}"
            )
            kind = None
        if not math.isfinite(self.gain_db):
            problems.append("gain_db must be finite")
        if kind in PASSIVE_KINDS and self.gain_db > 0.0:
            problems.append(f"passive kind {kind.value} must have gain_db <= 0, got {self.gain_db}")

        if self.nf_db is None:
            if kind in PASSIVE_KINDS:
                object.__setattr__(self, "nf_db", -self.gain_db)
            elif kind is not None:
                problems.append(f"{kind.value} requires nf_db")
        else:
            if self.nf_db < 0.0:
                problems.append(f"nf_db must be >= 0, got {self.nf_db}")
            elif (
                kind in PASSIVE_KINDS
                and not self.nf_override
                and self.nf_db != -self.gain_db
            ):
                problems.append(
                    f"passive stage nf_db {self.nf_db} != loss {-self.gain_db}; "
                    "set nf_override to keep a differing value"
                )

        if self.oip3_dbm is not None and self.iip3_dbm is not None:
            problems.append("give oip3_dbm or iip3_dbm, not both")
        if self.gain_tol_db < 0.0:
            problems.append(f"gain_tol_db must be >= 0, got {self.gain_tol_db}")

        if kind is StageKind.ADJUSTABLE_ATTENUATOR:
            s = self.setting_db
            if not (ATTEN_MIN_DB <= s <= ATTEN_MAX_DB):
                problems.append(
                    f"setting_db {s} outside [{ATTEN_MIN_DB}, {ATTEN_MAX_DB}] dB"
                )
            elif abs(s / ATTEN_STEP_DB - round(s / ATTEN_STEP_DB)) > 1e-9:
                problems.append(f"setting_db {s} is not a multiple of {ATTEN_STEP_DB} dB")
        elif self.setting_db != 0.0:
            problems.append(f"setting_db only applies to adjustable-attenuator stages")

        if problems:
            raise StageDefinitionError(f"stage {self.label!r}: " + "; ".join(problems))

    @property
    def is_passive(self) -> bool:
        return self.kind in PASSIVE_KINDS

    @property
    def is_nonlinear(self) -> bool:
        return self.oip3_dbm is not None or self.iip3_dbm is not None


@dataclass(frozen=True)
class FrequencyPlan:
    """Two-stage downconversion plan.

    if1_hz defaults to lo2_hz + if2_hz; an explicit value must equal
    lo2_hz + if2_hz or |lo2_hz - if2_hz|. lo1 tracks the RF tune frequency:
    high-side lo1 = rf + if1, low-side lo1 = rf - if1.
    """

    rf_band_hz: Tuple[float, float]
    lo2_hz: float
    if2_hz: float
    if1_hz: Optional[float] = None
    lo1_mode: str = "high-side"
    passband_hz: float = 5e6

    def __post_init__(self):
        problems = []
        lo, hi = self.rf_band_hz
        if not (0.0 < lo < hi):
            problems.append(f"rf_band_hz must satisfy 0 < low < high, got {self.rf_band_hz}")
        else:
            object.__setattr__(self, "rf_band_hz", (float(lo), float(hi)))
        if self.lo1_mode not in ("high-side", "low-side"):
            problems.append(f"lo1_mode must be high-side or low-side, got {self.lo1_mode!r}")
        for name in ("lo2_hz", "if2_hz", "passband_hz"):
            if getattr(self, name) <= 0.0:
                problems.append(f"{name} must be > 0")
        if not problems:
            if self.if1_hz is None:
                object.__setattr__(self, "if1_hz", self.lo2_hz + self.if2_hz)
            else:
                valid = (self.lo2_hz + self.if2_hz, abs(self.lo2_hz - self.if2_hz))
                if self.if1_hz not in valid:
                    problems.append(
                        f"if1_hz {self.if1_hz} inconsistent with lo2 {self.lo2_hz} and "
                        f"if2 {self.if2_hz}; expected one of {valid}"
                    )
        if problems:
            raise ChainDefinitionError(problems)

    def contains_rf(self, rf_hz: float) -> bool:
        return self.rf_band_hz[0] <= rf_hz <= self.rf_band_hz[1]


@dataclass(frozen=True)
class OperatingPoint:
    """Where the chain is evaluated: tune frequency, ambient, input drive,
    and optionally a single interfering tone ``(offset_hz, p_dbm)``."""

    rf_hz: float
    temp_degc: float = REFERENCE_TEMP_DEGC
    p_in_dbm: float = -32.0
    interferer: Optional[Tuple[float, float]] = None
    temp_range_degc: Tuple[float, float] = DEFAULT_TEMP_RANGE_DEGC

    def __post_init__(self):
        if self.rf_hz <= 0.0:
            raise OperatingPointError(f"rf_hz must be > 0, got {self.rf_hz}")
        lo, hi = self.temp_range_degc
        if not (lo <= self.temp_degc <= hi):
            raise OperatingPointError(
                f"temp_degc {self.temp_degc} outside validity range [{lo}, {hi}]"
            )
        if self.interferer is not None:
            offset, p = self.interferer
            if offset == 0.0:
                raise OperatingPointError("interferer offset_hz must be nonzero")
            object.__setattr__(self, "interferer", (float(offset), float(p)))


@dataclass(frozen=True)
class ResolvedStage:
    """StageSpec evaluated at an operating point; all cascade math reads these."""

    label: str
    kind: StageKind
    gain_db: float
    nf_db: float
    iip3_dbm: float
    oip3_dbm: float
    gain_lin: float
    noise_factor_lin: float
    iip3_mw: float

    @property
    def is_nonlinear(self) -> bool:
        return math.isfinite(self.iip3_dbm)


@dataclass(frozen=True)
class Chain:
    """Named stage list plus its frequency plan."""

    name: str
    plan: FrequencyPlan
    stages: Tuple[StageSpec, ...]
    identity: bool = False

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages and not self.identity:
            raise ChainDefinitionError(
                ["stage list is empty; set identity=true to build the identity chain"]
            )
        if self.identity and self.stages:
            raise ChainDefinitionError(["identity chain must have an empty stage list"])

    @property
    def attenuator_index(self) -> Optional[int]:
        for i, s in enumerate(self.stages):
            if s.kind is StageKind.ADJUSTABLE_ATTENUATOR:
                return i
        return None

    def with_attenuator_setting(self, setting_db: float) -> "Chain":
        idx = self.attenuator_index
        if idx is None:
            raise RxChainError(f"chain {self.name!r} has no adjustable-attenuator stage")
        stages = list(self.stages)
        stages[idx] = dataclasses.replace(stages[idx], setting_db=setting_db)
        return dataclasses.replace(self, stages=tuple(stages))


def derive_ip3(
    gain_db: float,
    oip3_dbm: Optional[float] = None,
    iip3_dbm: Optional[float] = None,
) -> Tuple[float, float]:
    """Complete the intercept pair from whichever one is given: oip3 = iip3 + gain.

    Returns (iip3_dbm, oip3_dbm).
    """
    if (oip3_dbm is None) == (iip3_dbm is None):
        raise StageDefinitionError("exactly one of oip3_dbm / iip3_dbm must be given")
    if oip3_dbm is None:
        oip3_dbm = iip3_dbm + gain_db
    else:
        iip3_dbm = oip3_dbm - gain_db
    return iip3_dbm, oip3_dbm


def resolve_stage(
    stage: StageSpec,
    point: OperatingPoint,
    gain_shift_db: float = 0.0,
) -> ResolvedStage:
    """Evaluate a stage at an operating point.

    gain_shift_db injects a tolerance excursion (worst-case corners, Monte
    Carlo draws) on top of the deterministic model.
    """
    base = stage.gain_table.gain_at(point.rf_hz) if stage.gain_table is not None else stage.gain_db
    gain = base + stage.gain_tempco_db_per_degc * (point.temp_degc - REFERENCE_TEMP_DEGC)
    gain += gain_shift_db
    if stage.kind is StageKind.ADJUSTABLE_ATTENUATOR:
        gain -= stage.setting_db

    nf = stage.nf_db
    if stage.kind is StageKind.ADJUSTABLE_ATTENUATOR:
        # commanded attenuation is thermal loss: it adds to the insertion NF
        nf = nf + stage.setting_db

    if stage.iip3_dbm is not None:
        iip3 = stage.iip3_dbm
        oip3 = iip3 + gain
    elif stage.oip3_dbm is not None:
        oip3 = stage.oip3_dbm
        iip3 = oip3 - gain
    else:
        iip3 = math.inf
        oip3 = math.inf

    return ResolvedStage(
        label=stage.label,
        kind=stage.kind,
        gain_db=gain,
        nf_db=nf,
        iip3_dbm=iip3,
        oip3_dbm=oip3,
        gain_lin=10.0 ** (gain / 10.0),
        noise_factor_lin=10.0 ** (nf / 10.0),
        iip3_mw=math.inf if math.isinf(iip3) else 10.0 ** (iip3 / 10.0),
    )


# ---------------------------------------------------------------------------
# chain documents (JSON)

_PLAN_KEYS = {"rf_band_hz", "lo2_hz", "if2_hz", "if1_hz", "lo1_mode", "passband_hz"}
_STAGE_KEYS = {
    "label",
    "kind",
    "gain_db",
    "nf_db",
    "oip3_dbm",
    "iip3_dbm",
    "gain_tempco_db_per_degc",
    "gain_tol_db",
    "setting_db",
    "gain_table",
    "nf_override",
}
_TOP_KEYS = {"name", "plan", "stages", "identity"}


def _load_gain_table(ref: str, base_dir: Optional[Path]) -> GainTable:
    path = Path(ref)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    if not path.exists():
        raise FrequencyRangeError(f"gain_table file not found: {path}")
    text = path.read_text()
    if path.suffix.lower() in (".s2p", ".s1p"):
        return GainTable.from_network(touchstone.parse_touchstone(text), source=str(path))
    table = touchstone.load_param_table(text)
    if table.temps_degc is not None or "gain_db" not in table.data:
        raise StageDefinitionError(
            f"gain_table CSV {path} must be 1-D with a gain_db column"
        )
    return GainTable(freqs_hz=table.freqs_hz, gains_db=table.data["gain_db"], source=str(path))


def _build_stage(raw: dict, base_dir: Optional[Path]) -> StageSpec:
    unknown = set(raw) - _STAGE_KEYS
    if unknown:
        raise StageDefinitionError(
            f"stage {raw.get('label', '?')!r}: unknown fields {sorted(unknown)}"
        )
    for req in ("label", "kind", "gain_db"):
        if req not in raw:
            raise StageDefinitionError(f"stage {raw.get('label', '?')!r}: missing field {req!r}")
    table = None
    if raw.get("gain_table") is not None:
        table = _load_gain_table(raw["gain_table"], base_dir)
    return StageSpec(
        label=raw["label"],
        kind=raw["kind"],
        gain_db=float(raw["gain_db"]),
        nf_db=None if raw.get("nf_db") is None else float(raw["nf_db"]),
        oip3_dbm=None if raw.get("oip3_dbm") is None else float(raw["oip3_dbm"]),
        iip3_dbm=None if raw.get("iip3_dbm") is None else float(raw["iip3_dbm"]),
        gain_tempco_db_per_degc=float(raw.get("gain_tempco_db_per_degc", 0.0)),
        gain_tol_db=float(raw.get("gain_tol_db", 0.0)),
        setting_db=float(raw.get("setting_db", 0.0)),
        gain_table=table,
        nf_override=bool(raw.get("nf_override", False)),
    )


def validate_document(doc: dict, base_dir: Optional[Path] = None) -> List[str]:
    """Collect every violation in a chain document. Empty list means valid."""
    problems: List[str] = []
    if not isinstance(doc, dict):
        return ["chain document must be a JSON object"]
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        problems.append(f"unknown top-level fields {sorted(unknown)}")
    if not doc.get("name"):
        problems.append("missing or empty 'name'")

    if "plan" not in doc:
        problems.append("missing 'plan'")
    else:
        plan_raw = doc["plan"]
        if not isinstance(plan_raw, dict):
            problems.append("'plan' must be an object")
        else:
            unknown = set(plan_raw) - _PLAN_KEYS
            if unknown:
                problems.append(f"plan: unknown fields {sorted(unknown)}")
            try:
                _build_plan(plan_raw)
            except (RxChainError, KeyError, TypeError, ValueError) as exc:
                problems.append(f"plan: {exc}")

    identity = bool(doc.get("identity", False))
    stages_raw = doc.get("stages")
    if stages_raw is None:
        problems.append("missing 'stages'")
        return problems
    if not isinstance(stages_raw, list):
        problems.append("'stages' must be a list")
        return problems
    if not stages_raw and not identity:
        problems.append("stage list is empty; set identity=true to build the identity chain")
    if identity and stages_raw:
        problems.append("identity chain must have an empty stage list")

    labels: Dict[str, int] = {}
    mixers = 0
    for i, raw in enumerate(stages_raw):
        if not isinstance(raw, dict):
            problems.append(f"stage {i}: must be an object")
            continue
        label = raw.get("label", f"#{i}")
        if label in labels:
            problems.append(f"stage {label!r}: duplicate label (also stage {labels[label]})")
        labels[label] = i
        if raw.get("kind") == StageKind.MIXER.value:
            mixers += 1
        try:
            _build_stage(raw, base_dir)
        except RxChainError as exc:
            problems.append(str(exc))

    if stages_raw and mixers not in (0, 2):
        problems.append(
            f"mixer count inconsistent with plan: found {mixers}, "
            "the two-stage downconversion plan needs exactly 2 (or none)"
        )
    return problems


def _build_plan(raw: dict) -> FrequencyPlan:
    band = raw["rf_band_hz"]
    return FrequencyPlan(
        rf_band_hz=(float(band[0]), float(band[1])),
        lo2_hz=float(raw["lo2_hz"]),
        if2_hz=float(raw["if2_hz"]),
        if1_hz=None if raw.get("if1_hz") is None else float(raw["if1_hz"]),
        lo1_mode=raw.get("lo1_mode", "high-side"),
        passband_hz=float(raw.get("passband_hz", 5e6)),
    )


def build_chain(doc: dict, base_dir: Optional[Path] = None) -> Chain:
    """Validate a chain document and construct the Chain. Raises with all violations."""
    problems = validate_document(doc, base_dir)
    if problems:
        raise ChainDefinitionError(problems)
    return Chain(
        name=doc["name"],
        plan=_build_plan(doc["plan"]),
        stages=tuple(_build_stage(raw, base_dir) for raw in doc["stages"]),
        identity=bool(doc.get("identity", False)),
    )


def load_chain(path: str | Path) -> Chain:
    """Read and build a chain JSON file; gain tables resolve relative to it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ChainDefinitionError([f"{path}: not valid JSON ({exc})"]) from exc
    return build_chain(doc, base_dir=path.parent)


def reference_chain_path() -> Path:
    """Path of the packaged reference receiver chain description."""
    return Path(__file__).parent / "data" / "fig2_chain.json"


def load_reference_chain() -> Chain:
    return load_chain(reference_chain_path())
