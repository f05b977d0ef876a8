"""Command-line interface.

Subcommands: register, bench, synth, primitives, selftest.
Exit codes: 0 success, 1 usage or input error, 2 numerical/degeneracy failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import BenchConfig, METHODS, emit_results, run_benchmark, synth_cloud
from .errors import AlgebraUsageError, CgaregError, DegeneracyError, NumericalDomainError, PlyError
from .ply_io import load_ply, save_ply_ascii
from .registration import (
    RegistrationConfig,
    primitives_for_points,
    register_cga_evd,
    register_vga_evd,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise _UsageError(message)


def _theta_spec(value: str):
    if value == "random":
        return value
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"theta must be a number in degrees or 'random', got {value!r}")


def _sigma_list(value: str):
    try:
        return [float(tok) for tok in value.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigmas must be a comma-separated list of reals, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cgareg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    reg = sub.add_parser("register", help="register two PLY clouds")
    reg.add_argument("--source", required=True)
    reg.add_argument("--target", required=True)
    reg.add_argument("--method", required=True, choices=METHODS)
    reg.add_argument("--exact-translation", action="store_true")
    reg.add_argument("--out", default=None, help="write the result JSON here instead of stdout")

    ben = sub.add_parser("bench", help="run the (dataset x sigma x trial) benchmark sweep")
    ben.add_argument("--dataset", required=True, nargs="+")
    ben.add_argument("--sigmas", required=True, type=_sigma_list)
    ben.add_argument("--trials", required=True, type=int)
    ben.add_argument("--theta-deg", required=True, type=_theta_spec)
    ben.add_argument("--t-mag", required=True, type=float)
    ben.add_argument("--seed", required=True, type=int)
    ben.add_argument("--method", required=True, choices=METHODS)
    ben.add_argument("--out", required=True)
    ben.add_argument("--format", default="csv", choices=("csv", "json"))

    syn = sub.add_parser("synth", help="generate a synthetic ASCII PLY cloud")
    syn.add_argument("--n", required=True, type=int)
    syn.add_argument("--seed", required=True, type=int)
    syn.add_argument("--shape", required=True, choices=("uniform-cube", "gaussian-blob"))
    syn.add_argument("--out", required=True)

    prim = sub.add_parser("primitives", help="export spectral primitives of a cloud")
    prim.add_argument("--source", required=True)
    prim.add_argument("--out", required=True)

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


def _cmd_register(args) -> int:
    source = load_ply(args.source)
    target = load_ply(args.target)
    cfg = RegistrationConfig(exact_translation=args.exact_translation)
    fn = register_cga_evd if args.method == "cga-evd" else register_vga_evd
    result = fn(source.points, target.points, cfg)
    payload = {"method": args.method, "source": source.name, "target": target.name}
    payload.update(result.to_dict())
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bench(args) -> int:
    cfg = BenchConfig(
        datasets=list(args.dataset),
        sigmas=args.sigmas,
        trials=args.trials,
        theta=args.theta_deg,
        t_mag=args.t_mag,
        seed=args.seed,
        method=args.method,
    )
    records = run_benchmark(cfg)
    emit_results(records, args.format, args.out)
    return 0


def _cmd_synth(args) -> int:
    cloud = synth_cloud(args.n, args.seed, args.shape)
    save_ply_ascii(args.out, cloud.points, comment=cloud.name)
    return 0


def _cmd_primitives(args) -> int:
    source = load_ply(args.source)
    records = primitives_for_points(source.points)
    payload = [r.to_dict() for r in records]
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest() else 2


_COMMANDS = {
    "register": _cmd_register,
    "bench": _cmd_bench,
    "synth": _cmd_synth,
    "primitives": _cmd_primitives,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (PlyError, AlgebraUsageError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (NumericalDomainError, DegeneracyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except CgaregError as exc:  # any other package error counts as numerical
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
