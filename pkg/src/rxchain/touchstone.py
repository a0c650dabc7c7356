"""Touchstone v1 two-port files and CSV parameter tables.

Reads vendor .s2p data (MA/DB/RI formats) into a TwoPortNetwork that keeps the
full four-parameter data, exposes |S21| in dB for gain lookups, and writes a
DB-format file back out losslessly. CSV parameter tables hold scalar columns on
a rectangular frequency (and optionally temperature) grid with linear
interpolation inside the hull; extrapolation is never performed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import FrequencyRangeError, TableFormatError, TouchstoneFormatError

_UNIT_SCALE = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_PARAM_ORDER = ("s11", "s21", "s12", "s22")


@dataclass(frozen=True)
class TwoPortNetwork:
    """Two-port S-parameter table, frequencies ascending in Hz.

    mag_db and angle_deg each map parameter name ("s11", "s21", "s12", "s22")
    to a per-frequency array. The source format is retained for reference;
    values are normalized to dB magnitude + angle on parse.
    """

    freqs_hz: np.ndarray
    mag_db: Dict[str, np.ndarray]
    angle_deg: Dict[str, np.ndarray]
    resistance_ohm: float = 50.0
    source_format: str = "MA"

    @property
    def s21_db(self) -> np.ndarray:
        return self.mag_db["s21"]

    @property
    def freq_points_hz(self) -> np.ndarray:
        return self.freqs_hz

    def gain_at(self, freq_hz: float) -> float:
        return gain_at(self, freq_hz)


def _mag_to_db(mag: float, line_no: int) -> float:
    if mag <= 0.0:
        raise TouchstoneFormatError(
            f"line {line_no}: magnitude {mag} is not positive, cannot express in dB"
        )
    return 20.0 * math.log10(mag)


def parse_touchstone(text: str) -> TwoPortNetwork:
    """Parse Touchstone v1 two-port text.

    Option line: ``# <unit> S <format> R <resistance>`` (tokens case-insensitive,
    unit defaults to GHz, format to MA, resistance to 50). ``!`` starts a comment,
    full-line or trailing. Data rows carry 9 columns: frequency then
    S11 S21 S12 S22 as (mag, angle), (dB, angle) or (re, im) pairs.
    """
    unit_scale = _UNIT_SCALE["GHZ"]
    fmt = "MA"
    resistance = 50.0
    saw_options = False

    freqs: List[float] = []
    mag_db: Dict[str, List[float]] = {p: [] for p in _PARAM_ORDER}
    ang_deg: Dict[str, List[float]] = {p: [] for p in _PARAM_ORDER}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise TouchstoneFormatError(
                f"line {line_no}: keyword {line.split()[0]} is Touchstone v2; only v1 is supported"
            )
        if line.startswith("#"):
            if saw_options:
                raise TouchstoneFormatError(f"line {line_no}: repeated option line")
            saw_options = True
            tokens = line[1:].upper().split()
            idx = 0
            while idx < len(tokens):
                tok = tokens[idx]
                if tok in _UNIT_SCALE:
                    unit_scale = _UNIT_SCALE[tok]
                elif tok in ("DB", "MA", "RI"):
                    fmt = tok
                elif tok == "R":
                    if idx + 1 >= len(tokens):
                        raise TouchstoneFormatError(
                            f"line {line_no}: R token without a resistance value"
                        )
                    idx += 1
                    resistance = float(tokens[idx])
                elif tok == "S":
                    pass
                elif tok in ("Y", "Z", "G", "H"):
                    raise TouchstoneFormatError(
                        f"line {line_no}: parameter type {tok} unsupported, only S"
                    )
                else:
                    raise TouchstoneFormatError(
                        f"line {line_no}: unrecognized option token {tok!r}"
                    )
                idx += 1
            continue

        cols = line.split()
        if len(cols) != 9:
            raise TouchstoneFormatError(
                f"line {line_no}: expected 9 columns (freq + 4 S-parameter pairs), got {len(cols)}"
            )
        try:
            values = [float(c) for c in cols]
        except ValueError as exc:
            raise TouchstoneFormatError(f"line {line_no}: non-numeric field ({exc})") from exc

        freq = values[0] * unit_scale
        if freqs and freq <= freqs[-1]:
            raise TouchstoneFormatError(
                f"line {line_no}: frequency {freq} Hz not ascending (previous {freqs[-1]} Hz)"
            )
        freqs.append(freq)

        for pi, param in enumerate(_PARAM_ORDER):
            a, b = values[1 + 2 * pi], values[2 + 2 * pi]
            if fmt == "DB":
                db, ang = a, b
            elif fmt == "MA":
                db, ang = _mag_to_db(a, line_no), b
            else:  # RI
                mod = math.hypot(a, b)
                db = _mag_to_db(mod, line_no)
                ang = math.degrees(math.atan2(b, a))
            mag_db[param].append(db)
            ang_deg[param].append(ang)

    if not freqs:
        raise TouchstoneFormatError("no data rows found")

    return TwoPortNetwork(
        freqs_hz=np.asarray(freqs, dtype=float),
        mag_db={p: np.asarray(v, dtype=float) for p, v in mag_db.items()},
        angle_deg={p: np.asarray(v, dtype=float) for p, v in ang_deg.items()},
        resistance_ohm=resistance,
        source_format=fmt,
    )


def write_touchstone(net: TwoPortNetwork) -> str:
    """Serialize to DB-format Touchstone v1 text.

    Frequencies are written in Hz with full float precision so a parse of the
    output reproduces freqs_hz and every dB magnitude exactly.
    """
    lines = [f"# HZ S DB R {net.resistance_ohm:.17g}"]
    for i, f in enumerate(net.freqs_hz):
        fields = [f"{f:.17g}"]
        for param in _PARAM_ORDER:
            fields.append(f"{net.mag_db[param][i]:.17g}")
            fields.append(f"{net.angle_deg[param][i]:.17g}")
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def gain_at(net: TwoPortNetwork, freq_hz: float) -> float:
    """|S21| in dB at freq_hz, linearly interpolated in the dB domain.

    Exact at grid points; raises FrequencyRangeError outside the tabulated span.
    """
    freqs = net.freqs_hz
    if freq_hz < freqs[0] or freq_hz > freqs[-1]:
        raise FrequencyRangeError(
            f"{freq_hz} Hz outside tabulated range [{freqs[0]}, {freqs[-1]}] Hz"
        )
    return float(np.interp(freq_hz, freqs, net.mag_db["s21"]))


@dataclass(frozen=True)
class ParamTable:
    """Scalar parameter columns on a rectangular (frequency[, temperature]) grid.

    data maps column name to an array shaped (n_freq,) for 1-D tables or
    (n_freq, n_temp) for 2-D tables.
    """

    freqs_hz: np.ndarray
    temps_degc: Optional[np.ndarray]
    data: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def columns(self) -> Tuple[str, ...]:
        return tuple(self.data.keys())

    def lookup(self, column: str, freq_hz: float, temp_degc: Optional[float] = None) -> float:
        if column not in self.data:
            raise TableFormatError(f"no column named {column!r}; have {sorted(self.data)}")
        f = self.freqs_hz
        if freq_hz < f[0] or freq_hz > f[-1]:
            raise FrequencyRangeError(
                f"{freq_hz} Hz outside table range [{f[0]}, {f[-1]}] Hz"
            )
        values = self.data[column]
        if self.temps_degc is None:
            return float(np.interp(freq_hz, f, values))
        if temp_degc is None:
            raise TableFormatError(f"column {column!r} is temperature-dependent; pass temp_degc")
        t = self.temps_degc
        if temp_degc < t[0] or temp_degc > t[-1]:
            raise FrequencyRangeError(
                f"{temp_degc} degC outside table range [{t[0]}, {t[-1]}] degC"
            )
        # bilinear: interpolate along temperature at each grid frequency, then along frequency
        along_t = np.array([np.interp(temp_degc, t, values[i, :]) for i in range(len(f))])
        return float(np.interp(freq_hz, f, along_t))


def load_param_table(text: str) -> ParamTable:
    """Parse a CSV parameter table.

    Header names the axes then the value columns: ``freq_hz[,temp_degc],<col>...``.
    Rows must tile a full rectangular grid with no duplicate axis points.
    """
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise TableFormatError("empty table")
    header = [h.strip() for h in lines[0].split(",")]
    if header[0] != "freq_hz":
        raise TableFormatError(f"first column must be freq_hz, got {header[0]!r}")
    has_temp = len(header) > 1 and header[1] == "temp_degc"
    value_cols = header[2:] if has_temp else header[1:]
    if not value_cols:
        raise TableFormatError("no value columns after the axis columns")

    rows: List[List[float]] = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(header):
            raise TableFormatError(
                f"line {line_no}: expected {len(header)} fields, got {len(fields)}"
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise TableFormatError(f"line {line_no}: non-numeric field ({exc})") from exc
    if not rows:
        raise TableFormatError("no data rows")

    arr = np.asarray(rows, dtype=float)
    freqs = np.unique(arr[:, 0])

    if not has_temp:
        if len(freqs) != arr.shape[0]:
            raise TableFormatError("duplicate freq_hz values")
        order = np.argsort(arr[:, 0])
        arr = arr[order]
        data = {col: arr[:, 1 + ci].copy() for ci, col in enumerate(value_cols)}
        return ParamTable(freqs_hz=arr[:, 0].copy(), temps_degc=None, data=data)

    temps = np.unique(arr[:, 1])
    if arr.shape[0] != len(freqs) * len(temps):
        raise TableFormatError(
            f"grid not rectangular: {arr.shape[0]} rows for "
            f"{len(freqs)} frequencies x {len(temps)} temperatures"
        )
    data = {}
    for ci, col in enumerate(value_cols):
        grid = np.full((len(freqs), len(temps)), np.nan)
        for row in arr:
            fi = int(np.searchsorted(freqs, row[0]))
            ti = int(np.searchsorted(temps, row[1]))
            if not math.isnan(grid[fi, ti]):
                raise TableFormatError(
                    f"duplicate grid point freq={row[0]} temp={row[1]} in column {col!r}"
                )
            grid[fi, ti] = row[2 + ci]
        data[col] = grid
    return ParamTable(freqs_hz=freqs, temps_degc=temps, data=data)
