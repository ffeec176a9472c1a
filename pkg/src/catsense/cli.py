"""Command-line front end.

    catsense pg --D 50 --theta 0.0314159
    catsense sweep --d 10:200:96 --theta bias --kappaT 0.02 --out snr.csv
    catsense fig2 --out results/ --format both
    catsense validate

Every option may also come from ``--config FILE`` holding ``key = value``
lines (keys are the option names without dashes). Command-line flags win over
the file, the file wins over defaults. Angles are radians; ``--theta bias``
pins theta to pi/(2D).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from catsense import __version__
from catsense.analytic import (
    DERIVATIVES,
    MODES,
    ProtocolConfig,
    bias_point,
    pg_approx_damped,
    ramsey_pg_damped,
    ramsey_pg_ideal,
    snr,
)
from catsense.errors import CatsenseError, UsageError
from catsense.sweep import FIGURE_GROUPS, FIGURE_PRESETS, QUANTITIES, Axis, SweepSpec, find_optimal_D, sweep, validation_report

SUBCOMMANDS = ("pg", "snr", "sweep", "optimum", "validate", "fig1", "fig2")
FORMATS = ("csv", "svg", "both")


def _theta(text):
    return "bias" if str(text).strip() == "bias" else float(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _quantities(text):
    q = [x.strip() for x in str(text).split(",") if x.strip()]
    bad = [x for x in q if x not in QUANTITIES]
    if bad:
        raise ValueError(f"unknown quantity {bad[0]!r}")
    return q


def _axis_or_bias(text):
    return "bias" if str(text).strip() == "bias" else Axis.parse(str(text))


# name -> (converter, default, help); booleans are store_true flags
_OPT = {
    "D": (float, None, "cat size |alpha0|^2"),
    "theta": (_theta, 0.0, "rotation angle in radians, or 'bias'"),
    "kappaT": (float, 0.0, "photon loss kappa*T"),
    "mode": (str, "exact", f"phase form: {', '.join(MODES)}"),
    "derivative": (str, "analytic", f"slope method: {', '.join(DERIVATIVES)}"),
    "h": (float, None, "central-difference step (default 1e-6/D)"),
    "oracle": (_bool, False, "also run the Fock-space oracle"),
    "d": (Axis.parse, None, "D range min:max:count"),
    "theta_range": (_axis_or_bias, None, "theta range min:max:count or 'bias'"),
    "kappaT_range": (Axis.parse, Axis.fixed(0.0), "kappaT range min:max:count or a value"),
    "quantities": (_quantities, ["pg_exact", "pg_approx", "snr"], "comma list of quantities"),
    "d_list": (_floats, None, "comma list of D values"),
    "theta_list": (_floats, None, "comma list of theta values (default 0, 0.2/D, pi/2D, pi/D)"),
    "kappaT_list": (_floats, [0.0, 0.02, 0.1], "comma list of kappaT values"),
    "out": (str, None, "output file (sweep) or directory (fig1/fig2)"),
    "format": (str, "csv", f"output format: {', '.join(FORMATS)}"),
    "no_metadata": (_bool, False, "omit the '# catsense' metadata line from CSV"),
    "workers": (int, 1, "worker processes"),
}

# subcommand -> list of (option name, cli flag)
_SUB = {
    "pg": [("D", "--D"), ("theta", "--theta"), ("kappaT", "--kappaT"), ("mode", "--mode"), ("oracle", "--oracle")],
    "snr": [("D", "--D"), ("theta", "--theta"), ("kappaT", "--kappaT"), ("mode", "--mode"),
            ("derivative", "--derivative"), ("h", "--h")],
    "sweep": [("d", "--d"), ("theta_range", "--theta"), ("kappaT_range", "--kappaT"), ("quantities", "--quantities"),
              ("out", "--out"), ("format", "--format"), ("no_metadata", "--no-metadata"), ("workers", "--workers")],
    "optimum": [("kappaT", "--kappaT"), ("d", "--d")],
    "validate": [("d_list", "--d"), ("theta_list", "--theta"), ("kappaT_list", "--kappaT"), ("workers", "--workers"),
                 ("out", "--out")],
    "fig1": [("out", "--out"), ("format", "--format"), ("no_metadata", "--no-metadata"), ("workers", "--workers")],
    "fig2": [("out", "--out"), ("format", "--format"), ("no_metadata", "--no-metadata"), ("workers", "--workers")],
}
_SUB_DEFAULTS = {
    "snr": {"theta": "bias"},
    "optimum": {"kappaT": 0.02, "d": Axis(20.0, 300.0, 281)},
    "sweep": {"theta_range": "bias"},
    "validate": {"d_list": [4.0, 10.0, 16.0, 25.0, 30.0]},
    "fig1": {"out": "results"},
    "fig2": {"out": "results"},
}


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    output: Path | None = None
    format: str = "csv"
    oracle: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="catsense", description="Cat-state Ramsey interferometer simulator")
    p.add_argument("--version", action="version", version=f"catsense {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name, opts in _SUB.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key = value config file")
        for key, flag in opts:
            conv, _, help_ = _OPT[key]
            if conv is _bool:
                sp.add_argument(flag, dest=key, action="store_const", const=True, default=None, help=help_)
            else:
                sp.add_argument(flag, dest=key, default=None, help=help_)
    return p


def read_config_file(path) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _flag_to_key(sub: str) -> dict[str, str]:
    # config files may use either the option name or the flag spelling
    m = {}
    for key, flag in _SUB[sub]:
        m[key] = key
        m[flag.lstrip("-")] = key
        m[flag.lstrip("-").replace("-", "_")] = key
    return m


def parse_config(argv=None) -> RunConfig:
    args = _build_parser().parse_args(argv)
    sub = args.subcommand
    names = _flag_to_key(sub)
    from_file = {}
    if args.config:
        for k, v in read_config_file(args.config).items():
            if k not in names:
                raise UsageError(f"unknown config key {k!r} for '{sub}'")
            from_file[names[k]] = v
    params = {}
    for key, flag in _SUB[sub]:
        conv, default, _ = _OPT[key]
        default = _SUB_DEFAULTS.get(sub, {}).get(key, default)
        raw = getattr(args, key)
        if raw is None:
            raw = from_file.get(key)
        if raw is None:
            params[key] = default
            continue
        try:
            params[key] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {flag}: {raw!r} ({exc})") from exc
    for key, choices in (("mode", MODES), ("derivative", DERIVATIVES), ("format", FORMATS)):
        if key in params and params[key] not in choices:
            raise UsageError(f"bad value for --{key}: {params[key]!r} (choose from {', '.join(choices)})")
    if sub in ("pg", "snr") and params.get("D") is None:
        raise UsageError(f"'{sub}' requires --D")
    if sub == "sweep" and params.get("d") is None:
        raise UsageError("'sweep' requires --d")
    out = params.pop("out", None)
    return RunConfig(
        subcommand=sub,
        parameters=params,
        output=Path(out) if out else None,
        format=params.pop("format", "csv"),
        oracle=bool(params.pop("oracle", False)),
    )


# -- commands -----------------------------------------------------------------


def _config_for(p) -> ProtocolConfig:
    D = p["D"]
    theta = bias_point(D) if p["theta"] == "bias" else p["theta"]
    return ProtocolConfig.from_angles(D=D, theta=theta, kappaT=p["kappaT"])


def _cmd_pg(rc: RunConfig, out) -> int:
    p = rc.parameters
    cfg = _config_for(p)
    if p["mode"] == "paper_literal":
        pg = ramsey_pg_ideal(cfg.alpha0, cfg.theta, mode="paper_literal")
    else:
        pg = ramsey_pg_damped(cfg)
    print(f"D={p['D']:.17g} theta={cfg.theta:.17g} kappaT={cfg.kappaT:.17g}", file=out)
    print(f"pg_{p['mode']} = {pg:.17g}", file=out)
    print(f"pg_approx = {pg_approx_damped(cfg.D, cfg.theta, cfg.kappaT):.17g}", file=out)
    if rc.oracle:
        from catsense.oracle import run_damped_sequence, run_ideal_sequence

        po = run_ideal_sequence(cfg.alpha0, cfg.theta) if cfg.kappaT == 0 else run_damped_sequence(cfg)
        print(f"pg_oracle = {po:.17g}", file=out)
    return 0


def _cmd_snr(rc: RunConfig, out) -> int:
    p = rc.parameters
    cfg = _config_for(p)
    r = snr(cfg, derivative=p["derivative"], h=p["h"], mode=p["mode"])
    print(f"D={p['D']:.17g} theta={cfg.theta:.17g} kappaT={cfg.kappaT:.17g}", file=out)
    print(f"snr = {r:.17g}", file=out)
    return 0


def _write(result, stem: Path, fmt: str, metadata: bool, out) -> None:
    from catsense.output import emit_csv, emit_svg

    if fmt in ("csv", "both"):
        print(f"wrote {emit_csv(result, stem.with_suffix('.csv'), metadata=metadata)}", file=out)
    if fmt in ("svg", "both"):
        print(f"wrote {emit_svg(result, stem.with_suffix('.svg'))}", file=out)


def _cmd_sweep(rc: RunConfig, out) -> int:
    p = rc.parameters
    theta = p["theta_range"]
    spec = SweepSpec(
        d_axis=p["d"],
        theta_axis=Axis.fixed(0.0) if theta == "bias" else theta,
        kappaT_axis=p["kappaT_range"],
        quantities=tuple(p["quantities"]),
        bias_mode=theta == "bias",
    )
    result = sweep(spec, workers=p["workers"])
    if rc.output is None:
        if rc.format != "csv":
            raise UsageError("--format svg/both needs --out")
        from catsense.output import csv_text

        out.write(csv_text(result, metadata=not p["no_metadata"]))
        return 0
    stem = rc.output.with_suffix("") if rc.output.suffix in (".csv", ".svg") else rc.output
    _write(result, stem, rc.format, not p["no_metadata"], out)
    return 0


def _cmd_optimum(rc: RunConfig, out) -> int:
    p = rc.parameters
    rep = find_optimal_D(p["kappaT"], p["d"])
    print(f"kappaT = {rep.kappaT:g}", file=out)
    print(f"d_star = {rep.d_star:.6f}", file=out)
    print(f"r_star = {rep.r_star:.10f}", file=out)
    print(f"bracket = [{rep.bracket[0]:g}, {rep.bracket[1]:g}], xtol = {rep.tolerance:g}", file=out)
    return 0


def _cmd_validate(rc: RunConfig, out) -> int:
    p = rc.parameters
    rep = validation_report(p["d_list"], p["theta_list"], p["kappaT_list"], workers=p["workers"])
    text = rep.render()
    print(text, file=out)
    if rc.output is not None:
        rc.output.parent.mkdir(parents=True, exist_ok=True)
        rc.output.write_text(text + "\n")
    return 0 if rep.passed else 1


def _cmd_fig(rc: RunConfig, out) -> int:
    p = rc.parameters
    for name in FIGURE_GROUPS[rc.subcommand]:
        result = sweep(FIGURE_PRESETS[name], workers=p["workers"])
        _write(result, rc.output / name, rc.format, not p["no_metadata"], out)
    return 0


_COMMANDS = {
    "pg": _cmd_pg,
    "snr": _cmd_snr,
    "sweep": _cmd_sweep,
    "optimum": _cmd_optimum,
    "validate": _cmd_validate,
    "fig1": _cmd_fig,
    "fig2": _cmd_fig,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        rc = parse_config(argv)
        return _COMMANDS[rc.subcommand](rc, out)
    except UsageError as exc:
        print(f"catsense: usage error: {exc}", file=sys.stderr)
        return 2
    except (CatsenseError, ValueError, OSError) as exc:
        print(f"catsense: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
