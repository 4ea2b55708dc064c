"""Command-line entry point: run, sweep, montecarlo, optimize, timing, check."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Any

from . import checks
from .analysis import (
    fidelity_formula,
    joint_probability_formula,
    monte_carlo,
    optimize_theta2,
    sweep,
    timing_budget,
)
from .errors import CavityTeleportError
from .protocol import THETA1_DEFAULT, THETA2_DEFAULT, ChannelParams, ProtocolConfig, run_postselected, run_sampled
from .rng import trial_rng

PUBLISHED_FIDELITY = 0.97
PUBLISHED_SUCCESS = 0.25
PUBLISHED_COS_SQRT2 = 0.078


# -- canonical JSON -------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in report")
    s = "%.17g" % x
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 0) -> str:
    """JSON with sorted keys and 17-significant-digit floats.

    Parsing the output and dumping it again reproduces it byte for byte.
    """
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(pad + dumps(v, indent + 1) for v in obj)
        return "[\n" + items + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            pad + json.dumps(str(k)) + ": " + dumps(obj[k], indent + 1) for k in sorted(obj)
        )
        return "{\n" + items + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _text(obj: Any, prefix: str = "") -> list[str]:
    if isinstance(obj, dict):
        lines = []
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{prefix}{k}:")
                lines.extend(_text(v, prefix + "  "))
            else:
                lines.append(f"{prefix}{k}: {_scalar(v)}")
        return lines
    if isinstance(obj, list):
        lines = []
        for v in obj:
            if isinstance(v, dict):
                lines.append(prefix + "- " + ", ".join(f"{k}={_scalar(v[k])}" for k in sorted(v)))
            else:
                lines.append(f"{prefix}- {_scalar(v)}")
        return lines
    return [prefix + _scalar(obj)]


def _scalar(v: Any) -> str:
    if v is None:
        return "NA"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, (list, dict)):
        return "[]" if isinstance(v, list) else "{}"
    return str(v)


def emit(payload: Any, fmt: str) -> None:
    out = dumps(payload) if fmt == "json" else "\n".join(_text(payload))
    sys.stdout.write(out + "\n")


# -- reports --------------------------------------------------------------

def discrepancy_notes(theta2: float, fidelity: float | None, p_joint: float | None) -> list[str]:
    notes = []
    if fidelity is not None:
        notes.append(
            f"published fidelity ~{PUBLISHED_FIDELITY}; computed {_fmt_float(fidelity)} "
            f"(difference {fidelity - PUBLISHED_FIDELITY:+.6f})"
        )
    if p_joint is not None:
        notes.append(
            f"published success probability {PUBLISHED_SUCCESS} (one of four Bell outcomes); "
            f"computed (e, e) detection probability {_fmt_float(p_joint)}"
        )
    if abs(theta2 - THETA2_DEFAULT) < 1e-12:
        c = math.cos(math.sqrt(2) * theta2)
        notes.append(
            f"published cos(sqrt(2)*theta2) ~{PUBLISHED_COS_SQRT2}; computed {_fmt_float(c)}"
        )
    return notes


@dataclass
class RunReport:
    config: dict[str, Any]
    p_e1: float
    p_e2_given_e1: float
    p_joint: float
    fidelity_sim: float
    fidelity_formula: float
    cos_sqrt2_theta2: float
    sampled_trial: dict[str, Any]
    discrepancy_notes: list[str] = field(default_factory=list)


def _config_echo(config: ProtocolConfig, renormalized: bool) -> dict[str, Any]:
    ch = config.channel
    return {
        "alpha_re": ch.alpha.real,
        "alpha_im": ch.alpha.imag,
        "beta_re": ch.beta.real,
        "beta_im": ch.beta.imag,
        "theta1": config.theta1,
        "theta2": config.theta2,
        "levels": config.mode_levels,
        "seed": config.seed,
        "renormalized": renormalized,
    }


def run_report(config: ProtocolConfig, renormalized: bool = False) -> RunReport:
    res = run_postselected(config)
    trial = run_sampled(config, trial_rng(config.seed, 0))
    return RunReport(
        config=_config_echo(config, renormalized),
        p_e1=res.p_e1,
        p_e2_given_e1=res.p_e2_given_e1,
        p_joint=res.p_joint,
        fidelity_sim=res.fidelity,
        fidelity_formula=fidelity_formula(config.theta2),
        cos_sqrt2_theta2=math.cos(math.sqrt(2) * config.theta2),
        sampled_trial={
            "outcomes": "".join(o.value for o in trial.outcomes),
            "success": trial.success,
            "path_probability": trial.path_probability,
        },
        discrepancy_notes=discrepancy_notes(config.theta2, res.fidelity, res.p_joint),
    )


# -- argument parsing -----------------------------------------------------

class _ArgError(Exception):
    pass


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["json", "text"], default="json")


def _add_channel(p: argparse.ArgumentParser) -> None:
    r = 1 / math.sqrt(2)
    p.add_argument("--alpha-re", type=float, default=r)
    p.add_argument("--alpha-im", type=float, default=0.0)
    p.add_argument("--beta-re", type=float, default=r)
    p.add_argument("--beta-im", type=float, default=0.0)
    p.add_argument("--levels", type=int, default=4, help="Fock levels per mode (>= 3)")
    p.add_argument(
        "--renormalize", action="store_true", help="scale (alpha, beta) to unit norm"
    )


def _add_angles(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta1", type=float, default=THETA1_DEFAULT)
    p.add_argument("--theta2", type=float, default=THETA2_DEFAULT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavity-teleport",
        description="Simulate teleportation of a zero/one-photon entangled state between bimodal cavities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="post-selected run with a full report")
    _add_channel(p)
    _add_angles(p)
    p.add_argument("--seed", type=int, default=0)
    _add_format(p)

    p = sub.add_parser("sweep", help="scan theta2 over a uniform grid")
    p.add_argument("--min", type=float, default=0.0, dest="tmin")
    p.add_argument("--max", type=float, default=2 * math.pi, dest="tmax")
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--csv", default=None, metavar="PATH")
    _add_channel(p)
    p.add_argument("--theta1", type=float, default=THETA1_DEFAULT)
    _add_format(p)

    p = sub.add_parser("montecarlo", help="sampled detections over many trials")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_channel(p)
    _add_angles(p)
    _add_format(p)

    p = sub.add_parser("optimize", help="maximize post-selected fidelity over theta2")
    p.add_argument("--min", type=float, default=5.2, dest="tmin")
    p.add_argument("--max", type=float, default=5.8, dest="tmax")
    p.add_argument("--grid", type=int, default=1000)
    _add_channel(p)
    p.add_argument("--theta1", type=float, default=THETA1_DEFAULT)
    _add_format(p)

    p = sub.add_parser("timing", help="protocol duration against the decoherence bound")
    p.add_argument("--g", type=float, required=True, help="coupling rate in 1/s")
    p.add_argument("--transit", type=float, default=0.0, help="atomic transit time in s")
    p.add_argument("--bound", type=float, default=1e-2, help="decoherence bound in s")
    _add_angles(p)
    _add_format(p)

    p = sub.add_parser("check", help="run the built-in consistency checks")
    _add_format(p)
    return parser


def _channel(args) -> tuple[ChannelParams, bool]:
    alpha = complex(args.alpha_re, args.alpha_im)
    beta = complex(args.beta_re, args.beta_im)
    n2 = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(n2 - 1.0) <= 1e-9:
        return ChannelParams(alpha, beta), False
    if not args.renormalize:
        raise _ArgError(
            f"|alpha|^2 + |beta|^2 = {n2!r} is not 1; pass --renormalize to rescale"
        )
    return ChannelParams.normalized(alpha, beta), True


def _config(args, **extra) -> tuple[ProtocolConfig, bool]:
    channel, renorm = _channel(args)
    kwargs = dict(channel=channel, mode_levels=args.levels, theta1=args.theta1)
    kwargs.update(extra)
    return ProtocolConfig(**kwargs), renorm


# -- subcommands ----------------------------------------------------------

def cmd_run(args) -> int:
    config, renorm = _config(args, theta2=args.theta2, seed=args.seed)
    emit(asdict(run_report(config, renorm)), args.format)
    return 0


def _row_dict(row) -> dict[str, Any]:
    return {
        "theta2": row.theta2,
        "cos_sqrt2_theta2": row.cos_sqrt2_theta2,
        "fidelity_formula": row.fidelity_formula,
        "fidelity_sim": row.fidelity_sim,
        "p_joint": row.p_joint,
    }


CSV_COLUMNS = ("theta2", "cos_sqrt2_theta2", "fidelity_formula", "fidelity_sim", "p_joint")


def write_csv(path: str, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            d = _row_dict(row)
            w.writerow(["NA" if d[c] is None else _fmt_float(d[c]) for c in CSV_COLUMNS])


def cmd_sweep(args) -> int:
    config, _ = _config(args)
    rows = sweep(args.tmin, args.tmax, args.steps, config)
    if args.csv:
        write_csv(args.csv, rows)
    emit({"rows": [_row_dict(r) for r in rows]}, args.format)
    return 0


def cmd_montecarlo(args) -> int:
    config, _ = _config(args, theta2=args.theta2, seed=args.seed)
    mc = monte_carlo(config, args.trials, args.seed)
    expected = joint_probability_formula(config.theta2)
    emit(
        {
            "trials": mc.trials,
            "seed": args.seed,
            "successes": mc.successes,
            "success_rate": mc.success_rate,
            "stderr": mc.stderr,
            "p_joint_expected": expected,
            "fidelity_of_successes": mc.fidelity_of_successes,
            "failures_by_outcome": mc.failures_by_outcome,
            "discrepancy_notes": discrepancy_notes(config.theta2, None, mc.success_rate),
        },
        args.format,
    )
    return 0


def cmd_optimize(args) -> int:
    config, _ = _config(args)
    t_star, f_star = optimize_theta2(args.tmin, args.tmax, config, grid=args.grid)
    emit(
        {
            "theta2_star": t_star,
            "fidelity_star": f_star,
            "cos_sqrt2_theta2_star": math.cos(math.sqrt(2) * t_star),
            "reference_theta2": THETA2_DEFAULT,
            "reference_fidelity": fidelity_formula(THETA2_DEFAULT),
        },
        args.format,
    )
    return 0


def cmd_timing(args) -> int:
    tb = timing_budget(args.g, args.theta1, args.theta2, args.transit, args.bound)
    d = asdict(tb)
    d["pulse_durations"] = list(tb.pulse_durations)
    emit(d, args.format)
    return 0


def cmd_check(args) -> int:
    results = checks.run_all()
    if args.format == "json":
        emit([asdict(r) for r in results], "json")
    else:
        for r in results:
            sys.stdout.write(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}\n")
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "montecarlo": cmd_montecarlo,
    "optimize": cmd_optimize,
    "timing": cmd_timing,
    "check": cmd_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (_ArgError, CavityTeleportError, ValueError) as exc:
        sys.stderr.write(f"cavity-teleport {args.command}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
