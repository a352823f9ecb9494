"""Command-line entry point: one subcommand per experiment kind.

A plain-text config file (key=value per line, '#' comments) can override
any default training parameter; flags override the file. The default
output directory comes from --out or the SOMSIM_OUT environment
variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import harness
from .analysis import calibrate_activation
from .exceptions import SomsimError
from .network import CASE_COMBOS, combo_label

_TRAINING_KEYS = {
    "learning_rate": float,
    "sigma": float,
    "steps": int,
    "snapshot_interval": int,
}
_ANALYSIS_KEYS = {
    "theta": float,
    "sigma_act": float,
    "min_cluster_size": int,
    "few_encoder_max": int,
    "large_cluster_fraction": float,
    "eps_stab": float,
}


def _parse_config_file(path):
    """key=value lines -> (training overrides, analysis overrides)."""
    training, analysis = {}, {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SomsimError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in _TRAINING_KEYS:
                training[key] = _TRAINING_KEYS[key](value)
            elif key in _ANALYSIS_KEYS:
                analysis[key] = _ANALYSIS_KEYS[key](value)
            else:
                raise SomsimError(f"{path}:{lineno}: unknown key {key!r}")
    return training, analysis


def _add_common(p):
    p.add_argument("--seeds", type=int, default=50,
                   help="number of seeds (0..N-1)")
    p.add_argument("--seed", type=int, action="append", default=None,
                   help="explicit seed (repeatable; overrides --seeds)")
    p.add_argument("--out", default=None,
                   help="output directory (default: $SOMSIM_OUT or ./out)")
    p.add_argument("--render", action="store_true",
                   help="write sample map renderings")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--pairing", choices=["by_class", "uniform"],
                   default="by_class")
    p.add_argument("--config", default=None,
                   help="plain-text parameter override file")
    p.add_argument("--calibrate", action="store_true",
                   help="recalibrate the activation scale before running")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="somsim",
        description="Self-organizing-map network experiments with "
                    "injectable pathologies.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normal", help="normal-condition network ensemble")
    _add_common(p)

    p = sub.add_parser("omega", help="single map with update multiplier")
    _add_common(p)
    p.add_argument("--omega", type=float, required=True)

    p = sub.add_parser("xi", help="single map with ratio-factor updates")
    _add_common(p)
    p.add_argument("--c", type=float, default=1.1)

    p = sub.add_parser("sigma-sweep", help="single maps over a sigma list")
    _add_common(p)
    p.add_argument("--sigma", type=float, action="append", required=True,
                   help="neighborhood sigma (repeatable)")

    p = sub.add_parser("two-level", help="primary+associative propagation")
    _add_common(p)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--sigma-override", type=float, default=None)

    p = sub.add_parser("case-matrix", help="one disruption case, all combos")
    _add_common(p)
    p.add_argument("--case", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--omega", type=float, default=5.0)
    p.add_argument("--combo", default=None,
                   help="'+'-joined map names for sample rendering")

    p = sub.add_parser("calibrate", help="calibrate the activation scale")
    p.add_argument("--seeds", type=int, default=20)

    return ap


def _seeds(args):
    if args.seed:
        return list(args.seed)
    return list(range(args.seeds))


def _make_spec(args, name, kind, parameters):
    training, analysis = {}, {}
    if args.config:
        training, analysis = _parse_config_file(args.config)
    if args.theta is not None:
        analysis["theta"] = args.theta
    if args.calibrate:
        analysis["sigma_act"] = calibrate_activation(list(range(20)))
    out_dir = args.out or os.environ.get("SOMSIM_OUT") or "out"
    return harness.ExperimentSpec(
        name=name, kind=kind, seeds=_seeds(args), parameters=parameters,
        training=training, analysis=analysis, pairing_mode=args.pairing,
        out_dir=out_dir)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SomsimError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2
    except OSError as exc:
        json.dump({"error": "io", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3


def _dispatch(args):
    if args.command == "calibrate":
        sigma_act = calibrate_activation(list(range(args.seeds)))
        print(json.dumps({"sigma_act": sigma_act}))
        return 0

    if args.command == "normal":
        spec = _make_spec(args, "normal", harness.KIND_NORMAL, {})
    elif args.command == "omega":
        spec = _make_spec(args, f"omega{args.omega:g}", harness.KIND_OMEGA,
                          {"omega": args.omega})
    elif args.command == "xi":
        spec = _make_spec(args, f"xi-c{args.c:g}", harness.KIND_XI,
                          {"c": args.c})
    elif args.command == "sigma-sweep":
        spec = _make_spec(args, "sigma-sweep", harness.KIND_SIGMA_SWEEP,
                          {"sigmas": args.sigma})
    elif args.command == "two-level":
        params = {}
        if args.omega is not None:
            params["omega"] = args.omega
        if args.sigma_override is not None:
            params["sigma_override"] = args.sigma_override
        spec = _make_spec(args, "two-level", harness.KIND_TWO_LEVEL, params)
    elif args.command == "case-matrix":
        params = {"case": args.case, "omega": args.omega}
        if args.combo:
            combo = frozenset(args.combo.split("+"))
            if combo not in CASE_COMBOS:
                raise SomsimError(
                    f"--combo must be one of: "
                    f"{', '.join(combo_label(c) for c in CASE_COMBOS)}")
            params["combo"] = sorted(combo)
        spec = _make_spec(args, f"case{args.case}", harness.KIND_CASE_MATRIX,
                          params)
    else:  # pragma: no cover - argparse enforces the choices
        raise SomsimError(f"unknown command {args.command!r}")

    result = harness.run_experiment(spec, renders=args.render)
    json_path, csv_path = harness.emit_report(
        result, os.path.join(spec.out_dir, spec.name))
    summary = {
        "report": json_path,
        "table": csv_path,
        "histogram": result.histogram if len(result.histogram) <= 8
        else {"scopes": len(result.histogram)},
    }
    if "modal_front_histogram" in result.tables:
        summary["modal_front_histogram"] = \
            result.tables["modal_front_histogram"]
    print(json.dumps(summary, indent=1))
    return 0


if __name__ == "__main__":
    sys.exit(main())
