"""Command-line entry point: ``optosqueeze analytic|simulate|sweep|validate``.

Runs are described by an INI file. ``[run]`` picks the protocol and output
grid, ``[params]`` holds SystemParams fields (units of omega_m), ``[schedule]``
the setup II switching options and optional ``[pump.N]`` sections list pump
drives. Every command writes a JSON manifest next to its data.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

from . import analytics
from .dynamics import DriveSpec, SystemParams
from .errors import ConfigError, OptoSqueezeError, StabilityError
from .protocols import PROTOCOLS, SWEEP_AXES, TwoStepSchedule, sweep
from .validation import run_checks

OUT_ENV = "OPTOSQUEEZE_OUT"
DEFAULT_OUT = "optosqueeze_out"
CSV_COLUMNS = ("t", "epr_min", "n_c1", "n_c2", "re_c1c2", "im_c1c2", "purity")
SWEEP_COLUMNS = ("index", "value", "status", "epr_min", "epr_min_predicted", "deviation",
                 "n_c1", "n_c2", "re_c1c2", "im_c1c2", "purity", "message")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3

_PARAM_FIELDS = [f.name for f in fields(SystemParams) if f.name != "pump"]
_OPTIONAL_PARAMS = {"delta", "omega_mod"}


def _num(x: float) -> str:
    return format(x, ".17g")


@dataclass(frozen=True)
class RunConfig:
    setup: str = "setup1_rwa"
    params: SystemParams = field(default_factory=SystemParams)
    grid: int = 201
    t_end: float | None = None
    t_switch: float | None = None
    single_step: bool = False
    first_mode: int = 1
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.setup not in PROTOCOLS:
            raise ConfigError(f"setup must be one of {', '.join(PROTOCOLS)}, got {self.setup!r}")
        if self.grid < 1:
            raise ConfigError(f"grid needs at least one point, got {self.grid}")
        if self.t_end is not None and not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if self.first_mode not in (1, 2):
            raise ConfigError("first_mode must be 1 or 2")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def to_dict(self) -> dict:
        p = self.params
        params = {name: getattr(p, name) for name in _PARAM_FIELDS}
        params["pump"] = [asdict(d) for d in p.pump]
        return {
            "setup": self.setup, "params": params, "grid": self.grid, "t_end": self.t_end,
            "t_switch": self.t_switch, "single_step": self.single_step,
            "first_mode": self.first_mode, "workers": self.workers, "out": self.out,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        raw = dict(d.pop("params", {}))
        pump = tuple(DriveSpec(**x) for x in raw.pop("pump", []))
        unknown = set(raw) - set(_PARAM_FIELDS)
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        try:
            params = SystemParams(**raw, pump=pump)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(params=params, **d)

    def schedule(self, params: SystemParams) -> TwoStepSchedule:
        return TwoStepSchedule.standard(params, t_switch=self.t_switch, first_mode=self.first_mode,
                                     single_step=self.single_step)

    def run_kwargs(self) -> dict:
        kw = {"t_end": self.t_end, "grid": self.grid}
        if self.setup == "setup2":
            kw["schedule"] = self.schedule
        return kw


def _optional_float(s: str) -> float | None:
    s = s.strip()
    return None if s.lower() in ("", "none", "auto") else float(s)


def parse_config(text: str) -> RunConfig:
    """Parse INI text into a RunConfig."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    d: dict = {"params": {}}
    try:
        if cp.has_section("run"):
            run = cp["run"]
            d["setup"] = run.get("setup", "setup1_rwa").strip()
            d["grid"] = run.getint("grid", 201)
            d["t_end"] = _optional_float(run.get("t_end", ""))
            d["workers"] = run.getint("workers", 1)
            out = run.get("out", "").strip()
            d["out"] = out or None
        if cp.has_section("params"):
            for key, val in cp["params"].items():
                if key not in _PARAM_FIELDS:
                    raise ConfigError(f"unknown parameter {key!r} in [params]")
                d["params"][key] = _optional_float(val) if key in _OPTIONAL_PARAMS else float(val)
        if cp.has_section("schedule"):
            sch = cp["schedule"]
            d["t_switch"] = _optional_float(sch.get("t_switch", ""))
            d["single_step"] = sch.getboolean("single_step", False)
            d["first_mode"] = sch.getint("first_mode", 1)
        pumps = sorted((s for s in cp.sections() if s.startswith("pump.")), key=lambda s: int(s[5:]))
        d["params"]["pump"] = [{k: float(v) for k, v in cp[s].items()} for s in pumps]
    except ValueError as exc:
        raise ConfigError(f"bad value in config: {exc}") from exc
    return RunConfig.from_dict(d)


def format_config(cfg: RunConfig) -> str:
    """Render a RunConfig as INI text that parses back to an equal config."""
    cp = configparser.ConfigParser()
    cp["run"] = {"setup": cfg.setup, "grid": str(cfg.grid),
                 "t_end": "" if cfg.t_end is None else _num(cfg.t_end),
                 "workers": str(cfg.workers), "out": cfg.out or ""}
    cp["params"] = {name: ("" if getattr(cfg.params, name) is None else _num(getattr(cfg.params, name)))
                    for name in _PARAM_FIELDS}
    cp["schedule"] = {"t_switch": "" if cfg.t_switch is None else _num(cfg.t_switch),
                      "single_step": str(cfg.single_step).lower(), "first_mode": str(cfg.first_mode)}
    for i, d in enumerate(cfg.params.pump, 1):
        cp[f"pump.{i}"] = {k: _num(v) for k, v in asdict(d).items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def _prediction_dict(params: SystemParams, with_setup2: bool) -> dict:
    pred = analytics.predict(params.kappa, params.gamma_m, params.n_th, params.chi1, params.chi2,
                             params.phi, with_setup2=with_setup2)
    return pred.as_dict()


def write_manifest(out_dir: Path, name: str, cfg: RunConfig, started: str, **extra) -> Path:
    manifest = {
        "config": cfg.to_dict(),
        "version": _version(),
        "started": started,
        "finished": _now(),
        **extra,
    }
    path = out_dir / name
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return path


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_analytic(cfg: RunConfig, out_dir: Path) -> int:
    started = _now()
    pred = _prediction_dict(cfg.params, with_setup2=cfg.setup == "setup2")
    rows = [("r", pred["r"]), ("G", pred["G"]), ("d0", pred["d0"]), ("epr_min", pred["epr_min"]),
            ("nth_max", pred["nth_max"]), ("t_min", pred["t_min"]),
            ("eta_plus", complex(*pred["eta_plus"])), ("eta_minus", complex(*pred["eta_minus"]))]
    if pred["nth_max_approx"] is not None:
        rows.insert(5, ("nth_max_approx", pred["nth_max_approx"]))
    for name, val in rows:
        print(f"{name:<16} {val:.10g}")
    if pred["t_min_extrapolated"]:
        print("note: t_min extrapolated below G = kappa/2")
    write_manifest(out_dir, "analytic.json", cfg, started, prediction=pred)
    return EXIT_OK


def _trajectory_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for k, t in enumerate(result.times):
        c = result.cross_moment[k]
        w.writerow([_num(float(v)) for v in (t, result.epr_min_series[k], result.occupations[k, 0],
                                              result.occupations[k, 1], c.real, c.imag,
                                              result.purity_series[k])])
    return buf.getvalue()


def cmd_simulate(cfg: RunConfig, out_dir: Path) -> int:
    started = _now()
    result = PROTOCOLS[cfg.setup](cfg.params, **cfg.run_kwargs())
    (out_dir / "trajectory.csv").write_text(_trajectory_csv(result))
    for msg in result.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    summary = result.summary()
    write_manifest(out_dir, "manifest.json", cfg, started,
                   prediction=None if result.prediction is None else result.prediction.as_dict(),
                   summary=summary, regime=result.regime, warnings=result.warnings)
    print(f"epr_min(final) = {summary['epr_min']:.10g}")
    if summary["epr_min_predicted"] is not None:
        print(f"epr_min(predicted) = {summary['epr_min_predicted']:.10g}")
    return EXIT_OK


def _sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        s = row.summary
        cells = [row.index, _num(row.value), row.status]
        for key in SWEEP_COLUMNS[3:-1]:
            v = s.get(key)
            cells.append("" if v is None else _num(float(v)))
        cells.append(row.message)
        w.writerow(cells)
    return buf.getvalue()


def parse_values(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be a comma-separated list of numbers: {exc}") from exc
    if not vals:
        raise ConfigError("--values is empty")
    return vals


def cmd_sweep(cfg: RunConfig, out_dir: Path, axis: str, values: list[float]) -> int:
    started = _now()
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    rows = sweep(cfg.params, axis, values, protocol=cfg.setup, workers=cfg.workers, **cfg.run_kwargs())
    (out_dir / "sweep.csv").write_text(_sweep_csv(rows))
    write_manifest(out_dir, "sweep.json", cfg, started, axis=axis, values=values,
                   statuses=[r.status for r in rows])
    for row in rows:
        tail = f"epr_min={row.summary['epr_min']:.10g}" if row.status == "ok" else row.message
        print(f"{axis}={row.value:g}  {row.status}  {tail}")
    return EXIT_OK


def cmd_validate(level: str, out_dir: Path | None) -> int:
    started = _now()
    checks = run_checks(level, progress=lambda c: print(c.line(), flush=True))
    ok = all(c.passed for c in checks)
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    if out_dir is not None:
        report = {"level": level, "started": started, "finished": _now(), "version": _version(),
                  "checks": [asdict(c) for c in checks], "passed": ok}
        (out_dir / f"validate_{level}.json").write_text(json.dumps(_jsonable(report), indent=2) + "\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optosqueeze",
                                     description="Dissipative two-mode mechanical squeezing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("analytic", "closed-form predictions"),
                        ("simulate", "run one protocol and write a CSV trajectory"),
                        ("sweep", "run a protocol over values of one parameter")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="INI run configuration (defaults to the built-in example)")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        if name == "sweep":
            p.add_argument("--axis", required=True, help="SystemParams field to vary")
            p.add_argument("--values", required=True, help="comma-separated values")
    p = sub.add_parser("validate", help="run the self-check suite")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--out", help="also write a JSON report to this directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            out_dir = None
            if args.out or os.environ.get(OUT_ENV):
                out_dir = Path(args.out or os.environ[OUT_ENV])
                out_dir.mkdir(parents=True, exist_ok=True)
            return cmd_validate(args.level, out_dir)
        cfg = load_config(args.config)
        out_dir = _out_dir(args, cfg)
        if args.command == "analytic":
            return cmd_analytic(cfg, out_dir)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir)
        return cmd_sweep(cfg, out_dir, args.axis, parse_values(args.values))
    except StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OptoSqueezeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
