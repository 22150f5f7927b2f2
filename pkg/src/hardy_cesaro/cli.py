"""Command line front end.

Commands read a problem instance from JSON, run one computation and write
machine-readable JSON and CSV reports under the output directory.  Exit
status 0 means success (and, for ``check``, a certified bounded operator);
2 means the mathematics said no (an unbounded status or a failed reference
sweep); 1 means an operational problem such as malformed input.

CSV cells are written with ``repr`` so identical configurations produce
byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .boundedness import (DEFAULT_POINTS_PER_DECADE, DEFAULT_S_MAX,
                          DEFAULT_S_MIN, certify, log_grid, phi_profile)
from .measures import delta_kernel, kernel_norm_identity
from .operators import (TestFunction, apply_U, apply_adjoint, duality_gap,
                        random_test_pair)
from .quadrature import EvaluationError
from .reference_cases import run_example
from .weakcompact import weak_star_limit_check
from .weights import ProblemInstance, instance_from_dict

__all__ = ["main"]

EXIT_OK = 0
EXIT_OPERATIONAL = 1
EXIT_UNBOUNDED = 2


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


def _load_instance(args) -> ProblemInstance:
    path = args.instance
    if path is None:
        raise ValueError("this command requires --instance <path>")
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ValueError(f"instance file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}")
    inst = instance_from_dict(data)
    if args.tol is not None:
        if args.tol <= 0.0:
            raise ValueError("--tol must be positive")
        inst = inst.with_tol(args.tol)
    return inst


def _parse_grid(spec: str | None):
    if spec is None:
        return DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_POINTS_PER_DECADE
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("--grid expects smin:smax:points_per_decade")
    s_min, s_max, ppd = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0.0 < s_min < s_max) or ppd <= 0:
        raise ValueError("--grid expects 0 < smin < smax and positive density")
    return s_min, s_max, ppd


def _load_function(spec: str) -> TestFunction:
    text = spec
    if not spec.lstrip().startswith("{"):
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return TestFunction.from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed function JSON at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}")


def _config_dict(args, extra: dict | None = None) -> dict:
    out = {
        "command": args.command,
        "instance": args.instance,
        "tol": args.tol,
        "grid": args.grid,
        "seed": getattr(args, "seed", None),
        "self_check": bool(getattr(args, "self_check", False)),
        "version": __version__,
    }
    if extra:
        out.update(extra)
    return out


# -- commands ---------------------------------------------------------------------

def cmd_check(args) -> int:
    inst = _load_instance(args)
    s_min, s_max, ppd = _parse_grid(args.grid)
    verdict = certify(inst, s_min, s_max, ppd, self_check=args.self_check)
    payload = verdict.to_dict()
    payload["config"] = _config_dict(args)
    _write_json(Path(args.out) / "verdict.json", payload)
    if verdict.bounded:
        print(f"status=Bounded norm_estimate={verdict.norm_estimate!r}")
        return EXIT_OK
    print(f"status={verdict.status} witness={verdict.witness}")
    return EXIT_UNBOUNDED


def cmd_phi(args) -> int:
    inst = _load_instance(args)
    s_min, s_max, ppd = _parse_grid(args.grid)
    prof = phi_profile(inst, s_min, s_max, ppd, self_check=args.self_check)
    out = Path(args.out)
    _write_csv(out / "phi_profile.csv", ["s", "phi", "ratio"],
               zip(prof.s_values, prof.phi_values, prof.ratio_values))
    payload = prof.to_dict()
    payload["config"] = _config_dict(args)
    _write_json(out / "phi_profile.json", payload)
    finite = np.isfinite(prof.ratio_values).all()
    print(f"wrote {out / 'phi_profile.csv'} ({prof.s_values.size} rows)")
    return EXIT_OK if finite else EXIT_UNBOUNDED


def _image_command(args, apply_fn, stem: str) -> int:
    inst = _load_instance(args)
    f = _load_function(args.function)
    s_min, s_max, ppd = _parse_grid(args.grid)
    xs = log_grid(s_min, s_max, ppd)
    values = [apply_fn(inst, f, float(x)) for x in xs]
    out = Path(args.out)
    _write_csv(out / f"{stem}.csv", ["x", "value"], zip(xs, values))
    print(f"wrote {out / (stem + '.csv')} ({xs.size} rows)")
    return EXIT_OK if all(math.isfinite(v) for v in values) else EXIT_UNBOUNDED


def cmd_apply(args) -> int:
    return _image_command(args, apply_U, "apply")


def cmd_adjoint(args) -> int:
    def fn(inst, f, x):
        return apply_adjoint(inst, f, x, form=args.form)
    return _image_command(args, fn, "adjoint")


def cmd_delta(args) -> int:
    inst = _load_instance(args)
    s = args.location
    if s is None or s <= 0.0:
        raise ValueError("delta requires --location <positive s>")
    s_min, s_max, ppd = _parse_grid(args.grid)
    xs = log_grid(s_min, s_max, ppd)
    values = delta_kernel(inst, s, xs)
    out = Path(args.out)
    _write_csv(out / "delta_kernel.csv", ["x", "value"], zip(xs, values))
    identity = kernel_norm_identity(inst, s, args.tol)
    payload = identity.to_dict()
    payload["location"] = s
    payload["config"] = _config_dict(args)
    _write_json(out / "delta_identity.json", payload)
    print(f"kernel_norm={identity.kernel_norm!r} phi={identity.phi_value!r} "
          f"rel_gap={identity.rel_gap!r}")
    if not math.isfinite(identity.rel_gap):
        return EXIT_UNBOUNDED
    return EXIT_OK


def cmd_duality(args) -> int:
    inst = _load_instance(args)
    rng = np.random.default_rng(args.seed)
    rows = []
    worst = 0.0
    for i in range(args.pairs):
        f, h = random_test_pair(rng, inst)
        gap = duality_gap(inst, f, h, args.tol or 1e-8)
        worst = max(worst, gap)
        rows.append((float(i), gap))
    out = Path(args.out)
    _write_csv(out / "duality.csv", ["pair", "gap"], rows)
    payload = {"pairs": args.pairs, "max_gap": worst,
               "gaps": [g for _, g in rows], "config": _config_dict(args)}
    _write_json(out / "duality.json", payload)
    print(f"max duality gap over {args.pairs} pairs: {worst!r}")
    return EXIT_OK


def cmd_weakcompact(args) -> int:
    inst = _load_instance(args)
    report = weak_star_limit_check(inst)
    out = Path(args.out)
    payload = report.to_dict()
    payload["config"] = _config_dict(args)
    _write_json(out / "weakcompact.json", payload)
    rows = []
    for i, name in enumerate(report.g_names):
        for j, s in enumerate(report.s_values):
            rows.append((name, float(s), report.pairings[i, j],
                         report.gaps[i, j]) + tuple(report.concentration[j]))
    header = ["g", "s", "pairing", "gap"] + \
        [f"concentration_eps_{e:g}" for e in report.epsilons]
    _write_csv(out / "weakcompact.csv", header, rows)
    print(f"moment={report.moment!r} omega1(0)={report.omega1_at_zero!r} "
          f"degenerate={report.degenerate}")
    return EXIT_OK


def cmd_reproduce_example(args) -> int:
    report = run_example(args.which)
    for line in report.lines():
        print(line)
    out = Path(args.out)
    _write_json(out / f"example_{args.which}.json", report.to_dict())
    return EXIT_OK if report.all_ok else EXIT_UNBOUNDED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardy-cesaro",
        description="Numerical laboratory for averaging operators between "
                    "weighted L1 spaces on the half-line.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--instance", help="problem instance JSON path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--tol", type=float, default=None,
                       help="quadrature tolerance override")
        p.add_argument("--grid", default=None,
                       help="s grid as smin:smax:points_per_decade")
        p.add_argument("--seed", type=int, default=42,
                       help="seed for randomized suites")
        p.add_argument("--self-check", dest="self_check", action="store_true",
                       help="cross-validate both integral forms everywhere")

    p = sub.add_parser("check", help="certify the boundedness criterion")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("phi", help="tabulate the criterion integral and ratio")
    common(p)
    p.set_defaults(fn=cmd_phi)

    p = sub.add_parser("apply", help="sample the image of a function")
    common(p)
    p.add_argument("--function", required=True,
                   help="test function JSON (path or inline)")
    p.set_defaults(fn=cmd_apply)

    p = sub.add_parser("adjoint", help="sample the adjoint image of a function")
    common(p)
    p.add_argument("--function", required=True,
                   help="test function JSON (path or inline)")
    p.add_argument("--form", choices=("unit", "tail"), default="unit")
    p.set_defaults(fn=cmd_adjoint)

    p = sub.add_parser("delta", help="point-mass image kernel and norm identity")
    common(p)
    p.add_argument("--location", type=float, required=True,
                   help="atom location s > 0")
    p.set_defaults(fn=cmd_delta)

    p = sub.add_parser("duality", help="randomized duality pairing suite")
    common(p)
    p.add_argument("--pairs", type=int, default=10)
    p.set_defaults(fn=cmd_duality)

    p = sub.add_parser("weakcompact", help="weak-star escape diagnostic")
    common(p)
    p.set_defaults(fn=cmd_weakcompact)

    p = sub.add_parser("reproduce-example",
                       help="run a bundled reference sweep (a, b or c)")
    p.add_argument("which", choices=("a", "b", "c"))
    p.add_argument("--out", default="out")
    p.set_defaults(fn=cmd_reproduce_example)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, EvaluationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL


if __name__ == "__main__":
    sys.exit(main())
