"""Command-line entry point: certify, simulate, ilc, picard, claims."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .claims import run_all
from .engine import RunRecord, run_drp
from .ilc import ilc_certificate, run_ilc
from .linearize import LinearizationError, linearize_at_origin
from .ltv import NumericalError, alpha_certificate
from .passop import PassEscapeError
from .picard import picard_drp, run_picard
from .scenarios import BUILTINS, ConfigError, build, parse_config, resolve
from .signals import DomainError
from .svgplot import semilog_svg

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG, EXIT_PROPERTY = 0, 1, 2, 3
PICARD_WARN_RATIO = 0.9


def write_norm_csv(path: Path, norms) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("k,norm\n")
        for k, v in enumerate(norms):
            fh.write(f"{k},{float(v):.17g}\n")


def _load(args):
    if args.config is not None:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
        raw = parse_config(text, str(path))
    elif args.scenario is not None:
        raw = parse_config(json.dumps({"scenario": args.scenario}), f"--scenario {args.scenario}")
    else:
        raise ConfigError("one of --config or --scenario is required")
    for flag, val in (("--passes", args.passes), ("--grid", args.grid), ("--seed", args.seed)):
        if val is not None and val < (0 if flag == "--seed" else 1):
            raise ConfigError(f"{flag} must be {'>= 0' if flag == '--seed' else '>= 1'}, got {val}")
    cfg = resolve(raw, seed=args.seed, passes=args.passes, intervals=args.grid)
    return build(cfg)


def _require_kind(built, kind: str) -> None:
    if built.kind != kind:
        raise ConfigError(f"scenario {built.name!r} is a {built.kind} scenario, not {kind}")


def _out_dir(args, built) -> Path:
    out = Path(args.out or built.config["output"].get("dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(args, built, norms, ylabel: str) -> Path:
    out = _out_dir(args, built)
    csv_path = out / f"{built.name}.csv"
    write_norm_csv(csv_path, norms)
    print(f"csv: {csv_path}")
    if args.svg or built.config["output"].get("svg", False):
        svg_path = out / f"{built.name}.svg"
        svg_path.write_text(semilog_svg(norms, built.name, ylabel), newline="\n")
        print(f"svg: {svg_path}")
    return csv_path


def _report_run(rec: RunRecord, label: str) -> int:
    norms = rec.output_norms
    print(f"passes: {rec.passes}")
    print(f"{label}[0]: {norms[0]:.17g}")
    print(f"{label}[{rec.passes}]: {norms[-1]:.17g}")
    if rec.gamma_hat is not None:
        print(f"gamma_hat: {rec.gamma_hat:.6g}")
    if rec.escaped:
        print(f"error: pass {rec.escape_pass} left the blow-up radius; partial CSV written",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_certify(args) -> int:
    built = _load(args)
    print(f"scenario: {built.name}")
    if built.kind == "ilc":
        cert = ilc_certificate(built.ilc)
        report = {"scenario": built.name, "kind": "ilc", **cert.as_dict()}
    else:
        system = picard_drp(built.picard) if built.kind == "picard" else built.system
        cert = alpha_certificate(linearize_at_origin(system))
        report = {"scenario": built.name, "kind": built.kind, **cert.as_dict()}
    for key in ("alpha", "margin", "verdict", "argmax_time"):
        val = report[key]
        print(f"{key}: {val:.17g}" if isinstance(val, float) else f"{key}: {val}")
    if "block_form_max_discrepancy" in report:
        print(f"block_form_max_discrepancy: {report['block_form_max_discrepancy']:.3g}")
    path = _out_dir(args, built) / f"{built.name}-certificate.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"json: {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    built = _load(args)
    _require_kind(built, "simulate")
    rec = run_drp(built.system, built.boundary, built.config["passes"],
                  built.config["solver"]["blowup_radius"])
    print(f"scenario: {built.name}")
    _emit(args, built, rec.output_norms, "sup-norm of y_k")
    return _report_run(rec, "norm")


def cmd_ilc(args) -> int:
    built = _load(args)
    _require_kind(built, "ilc")
    x0 = built.x0_seq
    print(f"scenario: {built.name}")
    print(f"x0 lambda: {x0.lam:.17g}" if x0.lam is not None else "x0 lambda: none")
    run = run_ilc(built.ilc, built.config["passes"], x0,
                  blowup_radius=built.config["solver"]["blowup_radius"])
    _emit(args, built, run.tracking_error_norms, "sup-norm of e_k")
    return _report_run(run.record, "error")


def cmd_picard(args) -> int:
    built = _load(args)
    _require_kind(built, "picard")
    run = run_picard(built.picard, built.config["passes"], built.x0_seq,
                     blowup_radius=built.config["solver"]["blowup_radius"])
    print(f"scenario: {built.name}")
    errs = run.errors
    _emit(args, built, errs, "sup-norm of x_k - x*")
    ratios = [b / a for a, b in zip(errs[1:], errs[2:]) if a > 0]
    if ratios and max(ratios) > PICARD_WARN_RATIO:
        print(f"warning: per-pass contraction reached {max(ratios):.3g} > {PICARD_WARN_RATIO}; "
              "the horizon may be too long or the boundary offset nonzero", file=sys.stderr)
    return _report_run(run.record, "error")


def cmd_claims(args) -> int:
    seed = 0 if args.seed is None else args.seed
    results = run_all(seed=seed, self_test=args.self_test)
    print(f"seed: {seed}")
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROPERTY


COMMANDS = {
    "certify": (cmd_certify, "linearize at the origin and report the stability certificate"),
    "simulate": (cmd_simulate, "run a process scenario and write per-pass output norms"),
    "ilc": (cmd_ilc, "run an iterative learning control scenario"),
    "picard": (cmd_picard, "run Picard iterations and write per-iterate errors"),
    "claims": (cmd_claims, "run the randomized sequence-inequality and spectral suites"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drplab", description="Nonlinear differential repetitive processes.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=None, help="RNG seed (overrides the config)")
        if name == "claims":
            p.add_argument("--self-test", action="store_true",
                           help="also run an inverted check that must fail")
            continue
        p.add_argument("--config", metavar="PATH", help="JSON scenario file")
        p.add_argument("--scenario", metavar="NAME",
                       help=f"builtin scenario ({', '.join(sorted(BUILTINS))})")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--passes", metavar="K", type=int, help="number of passes")
        p.add_argument("--grid", metavar="N", type=int, help="grid intervals per pass")
        p.add_argument("--svg", action="store_true", help="also write a semilog SVG plot")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        return func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PassEscapeError as exc:
        print(f"error: trajectory escaped: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NumericalError, LinearizationError, DomainError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
