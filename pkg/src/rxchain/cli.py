"""Command-line interface.

Subcommands mirror the library operations on chain description files:
validate, analyze, budget, sweep, spurs, calibrate, verify-im3, worst-case,
monte-carlo. All frequencies are plain numbers in Hz (no unit suffixes).
Exit codes: 0 success, 1 domain error (a modeling rule was violated),
2 usage error. Output is deterministic: identical inputs and seeds produce
byte-identical bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from . import cascade, intermod, sweeps, twotone
from .errors import RxChainError
from .model import Chain, OperatingPoint, load_chain, validate_document


@dataclass(frozen=True)
class CommandConfig:
    """Everything one invocation needs, decoded from argv.

    Overrides are carried verbatim; validation happens in the library types
    they feed (OperatingPoint, SweepGrid, ...), so the CLI enforces exactly
    the same rules as direct API use.
    """

    subcommand: str
    chain: Optional[str] = None
    out: Optional[str] = None
    plot_out: Optional[str] = None
    format: str = "csv"
    freq: Optional[float] = None
    temp: float = 25.0
    pin: float = -32.0
    bw: Optional[float] = None
    atten: Optional[float] = None
    seed: int = 12345
    trials: int = 10000
    freqs: Optional[str] = None
    temps: Optional[str] = None
    powers: Optional[str] = None
    interferer_offset: Optional[float] = None
    interferer_levels: Optional[str] = None
    no_interferer: bool = False
    mixer: int = 1
    sig: Optional[float] = None
    lo: Optional[float] = None
    if_center: Optional[float] = None
    if_passband: float = 5e6
    m_max: int = 3
    n_max: int = 3
    target: Optional[float] = None
    gain: Optional[float] = None
    oip3: Optional[float] = None
    drive: Optional[str] = None
    f1: float = 50e6
    f2: float = 51e6
    fs: float = 1.024e9
    samples: int = 2**20
    backend: str = "auto"

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "CommandConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        data = {k: v for k, v in vars(ns).items() if k in known}
        return cls(subcommand=ns.command, **{k: v for k, v in data.items() if k != "subcommand"})


def _num(x: float, width: int = 0) -> str:
    s = "unbounded" if math.isinf(x) else f"{x:.6f}"
    return s.rjust(width) if width else s


def _parse_float_list(text: str, flag: str) -> List[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise RxChainError(f"{flag}: expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise RxChainError(f"{flag}: empty list")
    return values


def _load(args) -> Chain:
    chain = load_chain(args.chain)
    if getattr(args, "atten", None) is not None:
        chain = chain.with_attenuator_setting(args.atten)
    return chain


def _point(args, chain: Chain) -> OperatingPoint:
    rf = args.freq
    if rf is None:
        lo, hi = chain.plan.rf_band_hz
        rf = (lo + hi) / 2.0
    return OperatingPoint(rf_hz=rf, temp_degc=args.temp, p_in_dbm=args.pin)


def _model(args, chain: Chain) -> cascade.NoiseModel:
    bw = getattr(args, "bw", None)
    return cascade.NoiseModel(bandwidth_hz=bw if bw is not None else chain.plan.passband_hz)


def _write_result(result: cascade.CascadeResult, out: str, fmt: str) -> None:
    text = result.to_json() if fmt == "json" else result.to_csv()
    Path(out).write_text(text)


def _print_totals(result: cascade.CascadeResult) -> None:
    print(f"point: rf {result.rf_hz:.0f} Hz, temp {result.temp_degc:g} degC, "
          f"pin {result.p_in_dbm:g} dBm, bandwidth {result.bandwidth_hz:.0f} Hz")
    print(f"total_gain_db    {_num(result.total_gain_db, 12)}")
    print(f"total_nf_db      {_num(result.total_nf_db, 12)}")
    print(f"total_iip3_dbm   {_num(result.total_iip3_dbm, 12)}")
    print(f"total_oip3_dbm   {_num(result.total_oip3_dbm, 12)}")
    print(f"noise_floor_dbm  {_num(result.noise_floor_dbm, 12)}")
    print(f"sfdr_db          {_num(result.sfdr_db, 12)}")


def _cmd_validate(args) -> int:
    path = Path(args.chain)
    try:
        import json

        doc = json.loads(path.read_text())
    except FileNotFoundError:
        print(f"error: {path} not found", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"{path}: INVALID")
        print(f" - not valid JSON: {exc}")
        return 1
    problems = validate_document(doc, base_dir=path.parent)
    if problems:
        print(f"{path}: INVALID")
        for p in problems:
            print(f" - {p}")
        return 1
    print(f"{path}: valid ({len(doc['stages'])} stages)")
    return 0


def _print_rows(result: cascade.CascadeResult, resolved) -> None:
    header = f"{'label':<14} {'gain_db':>10} {'cum_gain':>10} {'cum_nf':>10} {'cum_iip3':>12} {'cum_sfdr':>10}"
    print(header)
    for stage, row in zip(resolved, result.rows):
        print(
            f"{row.label:<14} {stage.gain_db:>10.3f} {row.cum_gain_db:>10.3f} "
            f"{row.cum_nf_db:>10.4f} "
            f"{('unbounded' if math.isinf(row.cum_iip3_dbm) else f'{row.cum_iip3_dbm:.3f}'):>12} "
            f"{('unbounded' if math.isinf(row.cum_sfdr_db) else f'{row.cum_sfdr_db:.3f}'):>10}"
        )


def _cmd_analyze(args) -> int:
    chain = _load(args)
    point = _point(args, chain)
    result = cascade.analyze(chain, point, _model(args, chain))
    resolved = cascade.resolve_chain(chain, point)
    print(f"chain {result.chain_name}: {len(chain.stages)} stages")
    _print_rows(result, resolved)
    _print_totals(result)
    if args.out:
        _write_result(result, args.out, args.format)
        print(f"wrote {args.format} to {args.out}")
    return 0


def _cmd_budget(args) -> int:
    chain = _load(args)
    point = _point(args, chain)
    model = _model(args, chain)
    result = cascade.analyze(chain, point, model)
    resolved = cascade.resolve_chain(chain, point)

    print(f"chain {result.chain_name}: {len(chain.stages)} stages")
    _print_rows(result, resolved)
    _print_totals(result)
    try:
        shares = cascade.bottleneck_report(result, resolved)
        print("intercept budget shares (largest first):")
        for label, share in shares:
            print(f"  {label:<14} {share:.4f}")
    except RxChainError:
        print("intercept budget shares: no nonlinear stages")
    if args.out:
        _write_result(result, args.out, args.format)
        print(f"wrote {args.format} to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    chain = _load(args)
    if args.no_interferer:
        interferer = None
    else:
        interferer = sweeps.Interferer(
            offset_hz=args.interferer_offset
            if args.interferer_offset is not None
            else sweeps.DEFAULT_INTERFERER_OFFSET_HZ,
            levels_dbm=tuple(
                _parse_float_list(args.interferer_levels, "--interferer-levels")
            )
            if args.interferer_levels is not None
            else sweeps.DEFAULT_INTERFERER_LEVELS_DBM,
        )
    grid = sweeps.SweepGrid(
        freqs_hz=tuple(_parse_float_list(args.freqs, "--freqs"))
        if args.freqs
        else sweeps.DEFAULT_FREQS_HZ,
        temps_degc=tuple(_parse_float_list(args.temps, "--temps"))
        if args.temps
        else sweeps.DEFAULT_TEMPS_DEGC,
        powers_dbm=tuple(_parse_float_list(args.powers, "--powers"))
        if args.powers
        else sweeps.DEFAULT_POWERS_DBM,
        interferer=interferer,
    )
    rows = sweeps.run_sweep(chain, grid, _model(args, chain))
    csv_text = sweeps.sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(csv_text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(csv_text)
    if args.plot_out:
        Path(args.plot_out).write_text(sweeps.sweep_plot_csv(rows))
        print(f"wrote plot data to {args.plot_out}")
    return 0


def _cmd_spurs(args) -> int:
    if args.chain:
        chain = load_chain(args.chain)
        rf = args.freq
        if rf is None:
            lo, hi = chain.plan.rf_band_hz
            rf = (lo + hi) / 2.0
        table = intermod.frequency_plan_table(chain.plan, rf)
        print(f"rf        {table.rf_hz:.0f} Hz")
        print(f"lo1       {table.lo1_hz:.0f} Hz")
        print(f"if1       {table.if1_hz:.0f} Hz")
        print(f"lo2       {table.lo2_hz:.0f} Hz")
        print(f"if2       {table.if2_hz:.0f} Hz")
        print(f"image1    {table.image1_hz:.0f} Hz")
        print(f"image2    {table.image2_hz:.0f} Hz")
        if args.mixer == 1:
            sig, lo, if_center = table.rf_hz, table.lo1_hz, table.if1_hz
        else:
            sig, lo, if_center = table.if1_hz, table.lo2_hz, table.if2_hz
        passband = chain.plan.passband_hz
    else:
        if args.sig is None or args.lo is None:
            raise RxChainError("spurs needs --chain or both --sig and --lo")
        if args.if_center is None:
            raise RxChainError("spurs with --sig/--lo needs --if-center")
        sig, lo, if_center = args.sig, args.lo, args.if_center
        passband = args.if_passband

    entries = intermod.mixer_spur_table(
        sig, lo, args.m_max, args.n_max, if_center, passband
    )
    csv_text = intermod.spur_table_csv(entries)
    if args.out:
        Path(args.out).write_text(csv_text)
        print(f"wrote {len(entries)} spur rows to {args.out}")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_calibrate(args) -> int:
    chain = load_chain(args.chain)
    freqs = _parse_float_list(args.freqs, "--freqs")
    result = sweeps.calibrate_attenuator(
        chain, freqs, target_gain_db=args.target, temp_degc=args.temp
    )
    print(f"target gain {result.target_gain_db:.6f} dB")
    print("rf_hz setting_db achieved_gain_db error_db")
    for r in result.rows:
        print(f"{r.rf_hz:.0f} {r.setting_db:.1f} {r.achieved_gain_db:.6f} {r.error_db:+.6f}")
    if args.out:
        Path(args.out).write_text(result.to_csv())
        print(f"wrote calibration table to {args.out}")
    return 0


def _cmd_verify_im3(args) -> int:
    drives = _parse_float_list(args.drive, "--drive")
    if len(drives) != 2:
        raise RxChainError(f"--drive needs exactly two comma-separated levels, got {len(drives)}")
    model = twotone.design_nonlinearity(args.gain, args.oip3)
    meas = [
        twotone.simulate_two_tone(
            model,
            args.f1,
            args.f2,
            p,
            sample_rate_hz=args.fs,
            num_samples=args.samples,
            backend=args.backend,
        )
        for p in drives
    ]
    print(
        f"device: gain {args.gain:.6f} dB, oip3 {args.oip3:.6f} dBm "
        f"(iip3 {model.iip3_dbm:.6f} dBm), backend {meas[0].backend}"
    )
    for p, m in zip(drives, meas):
        pred_in, _ = intermod.im3_level(p, p, model.iip3_dbm)
        pred_out = pred_in + args.gain
        print(
            f"drive {p:.3f} dBm: fund {m.fundamental_dbm:.6f} dBm, "
            f"im3 {m.im3_dbm:.6f} dBm, predicted im3 {pred_out:.6f} dBm, "
            f"delta {m.im3_dbm - pred_out:+.6f} dB"
        )
    extraction = twotone.extract_ip3(meas[0], meas[1])
    delta = extraction.iip3_dbm - model.iip3_dbm
    print(
        f"extracted iip3 {extraction.iip3_dbm:.6f} dBm "
        f"(configured {model.iip3_dbm:.6f}, delta {delta:+.6f} dB)"
    )
    print(f"extracted oip3 {extraction.oip3_dbm:.6f} dBm")
    print(
        f"slopes: fundamental {extraction.fund_slope_db_per_db:.6f} dB/dB, "
        f"im3 {extraction.im3_slope_db_per_db:.6f} dB/dB"
    )
    if abs(delta) > 0.1:
        print(f"FAIL: extracted intercept off by {delta:+.6f} dB (> 0.1 dB)")
        return 1
    print("PASS: extracted intercept within 0.1 dB of configured")
    return 0


def _cmd_worst_case(args) -> int:
    chain = _load(args)
    wc = sweeps.worst_case(chain, _point(args, chain), _model(args, chain))
    print(f"tolerance sum {wc.tol_sum_db:.6f} dB")
    print(f"{'corner':<10} {'gain_db':>12} {'nf_db':>12} {'iip3_dbm':>12} {'sfdr_db':>12}")
    for name, r in (("min_gain", wc.min_gain), ("nominal", wc.nominal), ("max_gain", wc.max_gain)):
        print(
            f"{name:<10} {_num(r.total_gain_db, 12)} {_num(r.total_nf_db, 12)} "
            f"{_num(r.total_iip3_dbm, 12)} {_num(r.sfdr_db, 12)}"
        )
    return 0


def _cmd_monte_carlo(args) -> int:
    chain = _load(args)
    summary = sweeps.monte_carlo(
        chain, _point(args, chain), n_trials=args.trials, seed=args.seed, model=_model(args, chain)
    )
    print(f"trials {summary.n_trials}, seed {summary.seed}")
    print(f"{'metric':<16} {'mean':>12} {'std':>12} {'min':>12} {'max':>12}")
    for name, s in (
        ("gain_db", summary.gain_db),
        ("nf_db", summary.nf_db),
        ("iip3_dbm", summary.iip3_dbm),
        ("noise_floor_dbm", summary.noise_floor_dbm),
        ("sfdr_db", summary.sfdr_db),
    ):
        print(f"{name:<16} {_num(s.mean, 12)} {_num(s.std, 12)} {_num(s.min, 12)} {_num(s.max, 12)}")
    return 0


def _add_point_args(p: argparse.ArgumentParser, with_bw: bool = True) -> None:
    p.add_argument("--freq", type=float, default=None, help="RF tune frequency in Hz (default: band center)")
    p.add_argument("--temp", type=float, default=25.0, help="ambient temperature in degC")
    p.add_argument("--pin", type=float, default=-32.0, help="input drive in dBm")
    if with_bw:
        p.add_argument("--bw", type=float, default=None, help="noise bandwidth in Hz (default: plan passband)")
    p.add_argument("--atten", type=float, default=None, help="override the adjustable-attenuator setting in dB")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rxchain",
        description="Receive-chain budget analysis on chain description files. "
        "All frequencies are plain Hz values.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a chain file against the schema rules")
    p.add_argument("--chain", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("analyze", help="cascade totals at one operating point")
    p.add_argument("--chain", required=True)
    _add_point_args(p)
    p.add_argument("--out", default=None, help="write the full result to this path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("budget", help="per-stage cumulative table and intercept shares")
    p.add_argument("--chain", required=True)
    _add_point_args(p)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_budget)

    p = sub.add_parser("sweep", help="analyze over a frequency/temperature/power grid")
    p.add_argument("--chain", required=True)
    p.add_argument("--freqs", default=None, help="comma-separated Hz values")
    p.add_argument("--temps", default=None, help="comma-separated degC values")
    p.add_argument("--powers", default=None, help="comma-separated dBm values")
    p.add_argument("--interferer-offset", type=float, default=None, help="interferer offset in Hz")
    p.add_argument("--interferer-levels", default=None, help="comma-separated dBm values")
    p.add_argument("--no-interferer", action="store_true", help="sweep without interferer margin columns")
    p.add_argument("--bw", type=float, default=None)
    p.add_argument("--out", default=None, help="write sweep rows CSV here (default: stdout)")
    p.add_argument("--plot-out", default=None, help="write long-format plot CSV here")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("spurs", help="mixer spur table and conversion frequencies")
    p.add_argument("--chain", default=None)
    p.add_argument("--freq", type=float, default=None, help="RF tune frequency in Hz")
    p.add_argument("--mixer", type=int, choices=(1, 2), default=1, help="which conversion to tabulate")
    p.add_argument("--sig", type=float, default=None, help="signal frequency in Hz (standalone mode)")
    p.add_argument("--lo", type=float, default=None, help="LO frequency in Hz (standalone mode)")
    p.add_argument("--if-center", type=float, default=None, help="IF center in Hz (standalone mode)")
    p.add_argument("--if-passband", type=float, default=5e6, help="IF passband width in Hz")
    p.add_argument("--m-max", type=int, default=3)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--out", default=None, help="write spur CSV here (default: stdout)")
    p.set_defaults(func=_cmd_spurs)

    p = sub.add_parser("calibrate", help="flatten chain gain with the adjustable attenuator")
    p.add_argument("--chain", required=True)
    p.add_argument("--freqs", required=True, help="comma-separated Hz values")
    p.add_argument("--target", type=float, default=None, help="target gain in dB (default: gain at lowest freq)")
    p.add_argument("--temp", type=float, default=25.0)
    p.add_argument("--out", default=None, help="write calibration CSV here")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("verify-im3", help="simulate a cubic device and check intercept extraction")
    p.add_argument("--gain", type=float, required=True, help="device gain in dB")
    p.add_argument("--oip3", type=float, required=True, help="device output intercept in dBm")
    p.add_argument("--drive", required=True, help="two comma-separated drive levels in dBm")
    p.add_argument("--f1", type=float, default=50e6, help="first tone in Hz")
    p.add_argument("--f2", type=float, default=51e6, help="second tone in Hz")
    p.add_argument("--fs", type=float, default=twotone.DEFAULT_SAMPLE_RATE_HZ, help="sample rate in Hz")
    p.add_argument("--samples", type=int, default=twotone.DEFAULT_NUM_SAMPLES)
    p.add_argument("--backend", choices=("auto", "compiled", "numpy"), default="auto")
    p.set_defaults(func=_cmd_verify_im3)

    p = sub.add_parser("worst-case", help="gain-tolerance corners")
    p.add_argument("--chain", required=True)
    _add_point_args(p)
    p.set_defaults(func=_cmd_worst_case)

    p = sub.add_parser("monte-carlo", help="uniform tolerance draws")
    p.add_argument("--chain", required=True)
    _add_point_args(p)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=12345)
    p.set_defaults(func=_cmd_monte_carlo)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = CommandConfig.from_namespace(args)
    try:
        return args.func(config)
    except RxChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
