"""Command-line entry point: constants | wave | spread | verify.

Flags override the optional INI config file. Exit codes: 0 ok,
1 verification failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .backend import KERNEL_BACKEND
from .config import parse_config, resolved_dict
from .errors import ChemowaveError, ConfigError, NumericalError


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file (flags override it)")
    p.add_argument("-o", "--outdir", dest="directory", help="output directory")
    p.add_argument("--chi", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--dim", type=int)


def _add_grid_stepper(p: argparse.ArgumentParser):
    p.add_argument("--half-length", dest="half_length", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--scheme", choices=["imex_be", "imex_cn"])
    p.add_argument("--dt-max", dest="dt_max", type=float)
    p.add_argument("--cfl", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemowave",
        description="Wave-speed constants, traveling-wave profiles, and "
                    "spreading-speed measurements for the chemotaxis-logistic model.")
    parser.add_argument("--version", action="version",
                        version=f"chemowave {__version__} ({KERNEL_BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="critical decay rates, speeds, interval bounds")
    _add_common(p)

    p = sub.add_parser("wave", help="construct a traveling-wave profile")
    _add_common(p)
    _add_grid_stepper(p)
    p.add_argument("--c", type=float, help="wave speed (default c_star(chi))")
    p.add_argument("--tol-outer", dest="tol_outer", type=float)
    p.add_argument("--tol-inner", dest="tol_inner", type=float)
    p.add_argument("--max-outer", dest="max_outer", type=int)
    p.add_argument("--t-cap", dest="t_cap", type=float)

    p = sub.add_parser("spread", help="measure spreading speeds of a compact bump")
    _add_common(p)
    _add_grid_stepper(p)
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--snapshot-dt", dest="snapshot_dt", type=float)
    p.add_argument("--thresholds", type=str,
                   help="comma-separated front levels, e.g. 0.01,0.1,0.5")
    p.add_argument("--u0-radius", dest="u0_radius", type=float)
    p.add_argument("--u0-height", dest="u0_height", type=float)
    p.add_argument("--save-snapshots", action="store_true")

    p = sub.add_parser("verify", help="run the acceptance/property suites")
    _add_common(p)
    p.add_argument("--suite", help="elliptic|constants|envelopes|dynamics|wave|"
                                   "spreading|determinism|all")
    p.add_argument("--seed", type=int)
    return parser


def _overrides(ns: argparse.Namespace) -> dict:
    skip = {"command", "config", "save_snapshots"}
    out = {}
    for key, val in vars(ns).items():
        if key in skip or val is None:
            continue
        if key == "thresholds" and isinstance(val, str):
            val = tuple(float(tok) for tok in val.split(","))
        out[key] = val
    return out


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = parse_config(ns.config, _overrides(ns), command=ns.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if ns.command == "constants":
            from .artifacts import constants_command
            payload = constants_command(cfg)
            print(json.dumps(payload, sort_keys=True, indent=2))
            return 0
        if ns.command == "wave":
            from .artifacts import wave_command
            _, summary = wave_command(cfg)
            print(json.dumps(summary, sort_keys=True, indent=2))
            return 0
        if ns.command == "spread":
            from .artifacts import spread_command
            _, summary = spread_command(cfg, save_snapshots=ns.save_snapshots)
            print(json.dumps(summary, sort_keys=True, indent=2))
            return 0
        return _verify(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ChemowaveError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def _verify(cfg) -> int:
    from .artifacts import write_json
    from .verify import VerifyContext, run_suite
    ctx = VerifyContext(seed=cfg.seed)
    results = run_suite(ctx, cfg.suite)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.cid} {status} [{r.suite}] {r.title}: {r.detail}")
    os.makedirs(cfg.directory, exist_ok=True)
    report = {
        "artifact_version": __version__,
        "config": resolved_dict(cfg),
        "kernel_backend": KERNEL_BACKEND,
        "results": [{"cid": r.cid, "suite": r.suite, "title": r.title,
                     "passed": r.passed, "detail": r.detail} for r in results],
        "all_passed": all(r.passed for r in results),
    }
    write_json(os.path.join(cfg.directory, "verify_report.json"), report)
    return 0 if report["all_passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
