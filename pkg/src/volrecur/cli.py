"""Command-line front end: one subcommand per pipeline stage.

Every subcommand reads ``--input`` (a price CSV or a volatility CSV, told
apart by header) and writes into ``--out-dir``. JSON outputs carry the tool
version, the full configuration and the mode each stage ran in, and contain
nothing that varies between runs, so identical configurations give
byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DataError, ExponentialBoundary, ParseError, VolrecurError
from .fitting import fit_all_and_rank, fit_qexp
from .hazard import hazard_curve
from .intervals import DEFAULT_TAUS, intervals_for_tau
from .io import PriceSeries, load_price_csv, read_table, write_json, write_table
from .predictor import predict
from .rolling import (DAYS_PER_MONTH, DEFAULT_WINDOW_MONTHS, WindowSpec, months_to_slots,
                      rolling_fit, slope_vs_tau)
from .synthetic import KINDS, GeneratorSpec, clustered_prices, events_to_volatility, renewal_event_series
from .volatility import NORMALIZED, VolatilitySeries, preprocess

COMMANDS = ("preprocess", "intervals", "fit", "hazard", "predict", "rolling", "simulate", "report")
DEFAULT_DELTA_T = (1,)
A_STAR = 0.1


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    slots_per_day: int = 240
    tau_list: tuple = DEFAULT_TAUS
    delta_t: tuple = DEFAULT_DELTA_T
    q_p_grid: object = "auto"
    split: float = 0.7
    in_sample: bool = False
    window_len: int | None = None
    window_step: int | None = None
    min_intervals: int = 100
    pattern: str = "window"
    out_dir: str = "."
    seed: int = 0
    days_per_month: int = DAYS_PER_MONTH
    drop_first_month: bool = False
    min_history_months: float = 0.0
    kind: str = "qexp"
    n: int = 10000
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.slots_per_day < 1:
            raise ConfigError("--slots-per-day must be positive")
        if not self.tau_list or any(not t > 1 for t in self.tau_list):
            raise ConfigError("--tau values must all exceed 1")
        if any(d < 1 for d in self.delta_t):
            raise ConfigError("--delta-t values must be positive integers")
        if not 0 < self.split < 1:
            raise ConfigError("--split must lie in (0, 1)")
        if isinstance(self.q_p_grid, list):
            g = self.q_p_grid
            if min(g) < 0 or max(g) > 1 or 0.0 not in g or 1.0 not in g:
                raise ConfigError("--q-p-grid must lie in [0, 1] and contain 0 and 1")
        if self.pattern not in ("window", "global"):
            raise ConfigError("--pattern must be 'window' or 'global'")
        if self.days_per_month < 1:
            raise ConfigError("--days-per-month must be positive")
        if self.command != "simulate" and not self.inputs:
            raise ConfigError(f"{self.command} needs --input")
        if self.command == "simulate" and self.kind not in KINDS:
            raise ConfigError(f"--kind must be one of {KINDS}")
        return self

    def window_spec(self) -> WindowSpec:
        month = months_to_slots(1, self.slots_per_day, self.days_per_month)
        length = self.window_len or DEFAULT_WINDOW_MONTHS * month
        step = self.window_step or month
        return WindowSpec(int(length), int(step), self.min_intervals)

    def echo(self) -> dict:
        out = asdict(self)
        out["tau_list"] = list(self.tau_list)
        out["delta_t"] = list(self.delta_t)
        return out


# parsing helpers -------------------------------------------------------------

def _number_list(text: str, kind=float):
    try:
        return [kind(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def _q_p_grid(text: str):
    if text == "auto":
        return "auto"
    if text.startswith("linspace:"):
        try:
            k = int(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad grid spec {text!r}") from None
        if k < 2:
            raise ConfigError("linspace grid needs at least 2 points")
        return np.linspace(0.0, 1.0, k).tolist()
    return _number_list(text)


def _params(items):
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param {key}: not a number: {value!r}") from None
    return out


def _tau_label(t) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t))


# input -----------------------------------------------------------------------

@dataclass
class LoadedInput:
    path: str
    normalized: VolatilitySeries
    raw: VolatilitySeries | None
    prices: PriceSeries | None
    kind: str


def _header(path: Path) -> list:
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        row = next(csv.reader(fh), None)
    if row is None:
        raise ParseError("empty file", line=1)
    return [h.strip() for h in row]


def _apply_filters(prices: PriceSeries, cfg: RunConfig) -> PriceSeries:
    if len(prices) == 0:
        raise DataError("price file has no records")
    if cfg.drop_first_month:
        keep = prices.day >= prices.day[0] + cfg.days_per_month
        prices = PriceSeries(prices.day[keep], prices.slot[keep], prices.price[keep], prices.slots_per_day)
    days = len(np.unique(prices.day))
    if days < cfg.min_history_months * cfg.days_per_month:
        raise DataError(f"history of {days} days is shorter than {cfg.min_history_months} months")
    return prices


def load_input(path, cfg: RunConfig) -> LoadedInput:
    """Price CSV (has a ``price`` column) or volatility CSV (has ``v``)."""
    path = Path(path)
    header = _header(path)
    if "price" in header:
        prices = _apply_filters(load_price_csv(path, cfg.slots_per_day), cfg)
        stages = preprocess(prices)
        return LoadedInput(str(path), stages["normalized"], stages["raw"], prices, "prices")
    if "v" in header:
        cols, data = read_table(path)
        for need in ("day", "slot"):
            if need not in cols:
                raise ParseError(f"missing column {need!r}", line=1)
        if len(data) == 0:
            raise DataError("volatility file has no records")
        v = data[:, cols.index("v")]
        if np.any(np.isnan(v)):
            raise DataError("volatility column has empty cells")
        vol = VolatilitySeries(data[:, cols.index("day")].astype(np.int64),
                               data[:, cols.index("slot")].astype(np.int64), v, NORMALIZED,
                               cfg.slots_per_day)
        return LoadedInput(str(path), vol, None, None, "volatility")
    raise ParseError("header has neither a 'price' nor a 'v' column", line=1)


# stages ----------------------------------------------------------------------

def _qexp_or_boundary(sample, min_n):
    try:
        return fit_qexp(sample, min_n=min_n)
    except ExponentialBoundary as exc:
        return exc.fit


def stage_preprocess(inp: LoadedInput, cfg: RunConfig, out: Path) -> dict:
    if inp.prices is None:
        raise DataError("preprocess needs a price CSV")
    stages = preprocess(inp.prices)
    raw, des, norm = stages["raw"], stages["deseasonalized"], stages["normalized"]
    write_table(out / "volatility.csv", ("day", "slot", "omega", "omega_deseasonalized", "v"),
                zip(raw.day.tolist(), raw.slot.tolist(), raw.values.tolist(), des.values.tolist(),
                    norm.values.tolist()))
    pattern = stages["pattern"]
    write_table(out / "intraday_pattern.csv", ("slot", "mean"), enumerate(pattern.mean.tolist()))
    return {"n_returns": len(raw), "n_days": pattern.day_count, "files": ["volatility.csv",
                                                                        "intraday_pattern.csv"]}


def stage_intervals(inp: LoadedInput, cfg: RunConfig, out: Path) -> dict:
    summary = {}
    for tau in cfg.tau_list:
        s = intervals_for_tau(inp.normalized, tau)
        name = f"intervals_tau{_tau_label(tau)}.csv"
        write_table(out / name, ("end_position", "tau", "x"),
                    zip(s.positions[1:].tolist(), s.raw.tolist(), s.scaled.tolist()))
        summary[_tau_label(tau)] = {"threshold": s.threshold, "n": s.n,
                                    "mean_interval": float(np.mean(s.raw)), "file": name}
    return summary


def stage_fit(inp: LoadedInput, cfg: RunConfig, out: Path | None) -> dict:
    per_tau, qs = {}, []
    for tau in cfg.tau_list:
        s = intervals_for_tau(inp.normalized, tau)
        ranking = fit_all_and_rank(s, min_n=cfg.min_intervals)
        per_tau[_tau_label(tau)] = {
            "threshold": s.threshold,
            "n": s.n,
            "best": ranking.best.family.value,
            "fits": [f.to_dict() for f in ranking],
            "failures": ranking.failures,
        }
        q_fit = next((f for f in ranking if f.family.value == "q_exp"), None)
        qs.append(np.nan if q_fit is None else q_fit.params["q"])
    result = {"per_tau": per_tau}
    finite = np.isfinite(qs)
    if np.count_nonzero(finite) >= 3:
        slope, intercept, stderr = slope_vs_tau(qs, cfg.tau_list)
        result["q_vs_tau"] = {"slope": slope, "intercept": intercept, "stderr": stderr}
    if out is not None:
        write_json(out / "fits.json", _envelope(cfg, "fit", inp.path, result))
    return result


def stage_hazard(inp: LoadedInput, cfg: RunConfig, out: Path) -> dict:
    summary = {}
    for tau in cfg.tau_list:
        s = intervals_for_tau(inp.normalized, tau)
        fit = _qexp_or_boundary(s, cfg.min_intervals)
        q, lam_x = fit.params["q"], fit.params["lambda_x"]
        entry = {"q": q, "lambda_x": lam_x, "files": []}
        for dt in cfg.delta_t:
            curve = hazard_curve(s, q, lam_x, dt)
            name = f"hazard_tau{_tau_label(tau)}_dt{dt}.csv"
            write_table(out / name, curve.header, curve.rows())
            entry["files"].append(name)
            emp = curve.empirical
            ok = ~np.isnan(emp)
            gap = np.abs(emp[ok] - curve.analytic[ok])
            entry[f"max_abs_gap_dt{dt}"] = float(gap.max()) if ok.any() else None
        summary[_tau_label(tau)] = entry
    return summary


def stage_predict(inp: LoadedInput, cfg: RunConfig, out: Path) -> dict:
    grid = None if cfg.q_p_grid == "auto" else cfg.q_p_grid
    summary = {}
    for tau in cfg.tau_list:
        for dt in cfg.delta_t:
            res = predict(inp.normalized, tau_q=tau, delta_t=dt, split=cfg.split,
                          in_sample=cfg.in_sample, q_p_grid=grid, min_n=cfg.min_intervals)
            label = f"tau{_tau_label(tau)}_dt{dt}"
            name = f"roc_{label}.csv"
            write_table(out / name, res.roc.header, res.roc.rows())
            s = res.summary(A_STAR)
            s["file"] = name
            summary[label] = s
    return summary


def stage_rolling(inp: LoadedInput, cfg: RunConfig, out: Path) -> dict:
    spec = cfg.window_spec()
    vol = inp.raw if inp.raw is not None else inp.normalized
    traj = rolling_fit(vol, cfg.tau_list, spec, pattern=cfg.pattern)
    write_table(out / "trajectory.csv", traj.header, traj.rows())
    q = traj.q_means()
    ok = ~np.isnan(q)
    return {
        "window_len": spec.window_len,
        "window_step": spec.step,
        "windows": traj.window_count,
        "points": len(traj.points),
        "pattern": traj.pattern,
        "q_mean_over_windows": float(np.mean(q[ok])) if ok.any() else None,
        "q_std_over_windows": float(np.std(q[ok])) if ok.any() else None,
        "file": "trajectory.csv",
    }


def _envelope(cfg: RunConfig, stage: str, path, result, provenance=None) -> dict:
    return {
        "tool": {"name": "volrecur", "version": __version__},
        "stage": stage,
        "input": str(path) if path is not None else None,
        "config": cfg.echo(),
        "seed": cfg.seed,
        "provenance": provenance or {},
        "result": result,
    }


def _predict_provenance(cfg):
    return {"mode": "in_sample" if cfg.in_sample else "out_of_sample",
            "split": None if cfg.in_sample else cfg.split}


# commands --------------------------------------------------------------------

def _out_for(cfg: RunConfig, path) -> Path:
    base = Path(cfg.out_dir)
    return base / Path(path).stem if len(cfg.inputs) > 1 else base


def run_one(cfg: RunConfig, path) -> None:
    out = _out_for(cfg, path)
    inp = load_input(path, cfg)
    c = cfg.command
    if c == "preprocess":
        write_json(out / "preprocess.json", _envelope(cfg, c, path, stage_preprocess(inp, cfg, out)))
    elif c == "intervals":
        write_json(out / "intervals.json", _envelope(cfg, c, path, stage_intervals(inp, cfg, out)))
    elif c == "fit":
        stage_fit(inp, cfg, out)
    elif c == "hazard":
        write_json(out / "hazard.json", _envelope(cfg, c, path, stage_hazard(inp, cfg, out)))
    elif c == "predict":
        write_json(out / "predict.json", _envelope(cfg, c, path, stage_predict(inp, cfg, out),
                                                   _predict_provenance(cfg)))
    elif c == "rolling":
        res = stage_rolling(inp, cfg, out)
        write_json(out / "rolling.json", _envelope(cfg, c, path, res, {"pattern": res["pattern"]}))
    elif c == "report":
        write_json(out / "report.json", _envelope(cfg, c, path, stage_report(inp, cfg, out),
                                                  _predict_provenance(cfg)))


def stage_report(inp: LoadedInput, cfg: RunConfig, out: Path) -> dict:
    """All stages in one JSON; rolling is skipped when the series is shorter than a window."""
    result = {"input_kind": inp.kind, "n_slots": len(inp.normalized)}
    if inp.prices is not None:
        result["preprocess"] = stage_preprocess(inp, cfg, out)
    result["intervals"] = stage_intervals(inp, cfg, out)
    result["fit"] = stage_fit(inp, cfg, None)
    result["hazard"] = stage_hazard(inp, cfg, out)
    result["predict"] = stage_predict(inp, cfg, out)
    if len(inp.normalized) >= cfg.window_spec().window_len:
        result["rolling"] = stage_rolling(inp, cfg, out)
    else:
        result["rolling"] = {"skipped": "series shorter than one window"}
    return result


def cmd_simulate(cfg: RunConfig) -> None:
    out = Path(cfg.out_dir)
    spec = GeneratorSpec(cfg.kind, dict(cfg.params), cfg.n, cfg.seed)
    if cfg.kind == "clustered":
        params = {"slots_per_day": cfg.slots_per_day, **spec.params}
        spec = GeneratorSpec("clustered", params, cfg.n, cfg.seed)
        prices = clustered_prices(spec)
        write_table(out / "simulated.csv", ("day", "slot", "price"),
                    zip(prices.day.tolist(), prices.slot.tolist(), prices.price.tolist()))
        meta = {"kind": "clustered", "format": "prices", "records": len(prices)}
    else:
        events = renewal_event_series(spec)
        vol = events_to_volatility(events, cfg.seed, cfg.slots_per_day)
        write_table(out / "simulated.csv", ("day", "slot", "v", "event"),
                    zip(vol.day.tolist(), vol.slot.tolist(), vol.values.tolist(), events.tolist()))
        meta = {"kind": cfg.kind, "format": "volatility", "records": len(events),
                "events": int(np.count_nonzero(events))}
    write_json(out / "simulate.json", _envelope(cfg, "simulate", None, meta, {"generator": "philox"}))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", action="append", default=[], help="price or volatility CSV (repeatable)")
    common.add_argument("--slots-per-day", type=int, default=240)
    common.add_argument("--tau", default=",".join(str(t) for t in DEFAULT_TAUS),
                        help="comma-separated mean recurrence times")
    common.add_argument("--delta-t", default="1", help="comma-separated horizons in slots")
    common.add_argument("--split", type=float, default=0.7, help="fraction used for fitting")
    common.add_argument("--in-sample", action="store_true", help="fit and score on the whole series")
    common.add_argument("--window-len", type=int, help="rolling window in slots (default 48 months)")
    common.add_argument("--window-step", type=int, help="rolling step in slots (default 1 month)")
    common.add_argument("--min-intervals", type=int, default=100)
    common.add_argument("--pattern", default="window", help="intraday pattern per 'window' or 'global'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default=".")
    common.add_argument("--q-p-grid", default="auto", help="'auto', 'linspace:N' or a comma list")
    common.add_argument("--days-per-month", type=int, default=DAYS_PER_MONTH)
    common.add_argument("--drop-first-month", action="store_true")
    common.add_argument("--min-history-months", type=float, default=0.0)

    parser = argparse.ArgumentParser(prog="volrecur", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"volrecur {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "simulate":
            p.add_argument("--kind", default="qexp", help=f"one of {', '.join(KINDS)}")
            p.add_argument("--n", type=int, default=10000, help="events (renewal) or days (clustered)")
            p.add_argument("--param", action="append", help="generator parameter key=value")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(
        command=args.command,
        inputs=list(args.input),
        slots_per_day=args.slots_per_day,
        tau_list=tuple(_number_list(args.tau)),
        delta_t=tuple(_number_list(args.delta_t, int)),
        q_p_grid=_q_p_grid(args.q_p_grid),
        split=args.split,
        in_sample=args.in_sample,
        window_len=args.window_len,
        window_step=args.window_step,
        min_intervals=args.min_intervals,
        pattern=args.pattern,
        out_dir=args.out_dir,
        seed=args.seed,
        days_per_month=args.days_per_month,
        drop_first_month=args.drop_first_month,
        min_history_months=args.min_history_months,
    )
    if args.command == "simulate":
        cfg.kind, cfg.n, cfg.params = args.kind, args.n, _params(args.param)
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.command == "simulate":
            cmd_simulate(cfg)
        elif len(cfg.inputs) == 1:
            run_one(cfg, cfg.inputs[0])
        else:
            with ThreadPoolExecutor() as pool:
                list(pool.map(lambda p: run_one(cfg, p), cfg.inputs))
    except VolrecurError as exc:
        print(f"volrecur {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
