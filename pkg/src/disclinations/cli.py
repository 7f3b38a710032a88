"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 runtime or I/O failure,
3 self-check failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import CoincidentPositionsError
from .pairlab import DipoleState, find_dipole_equilibrium, simulate_dipole
from .scenarios import ConfigError, builtin_scenarios, load_scenario, run_scenario
from .verify import run_invariant_suite

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_SELFCHECK = 0, 1, 2, 3

_OVERRIDES = {
    "t_end": "t_end",
    "rel_tol": "rel_tol",
    "abs_tol": "abs_tol",
    "eps_c": "collision_distance",
    "sample_interval": "sample_interval",
}


def _prepare(target, args):
    sc = load_scenario(target)
    changes = {field: getattr(args, opt) for opt, field in _OVERRIDES.items()
               if getattr(args, opt) is not None}
    if changes:
        try:
            sc = replace(sc, settings=sc.settings.replace(**changes))
        except ValueError as exc:
            raise ConfigError(f"settings: {exc}") from None
    if args.glide_set:
        sc = replace(sc, mode="glide", glide_set=args.glide_set)
    return sc


def _run_one(job):
    sc, out, seed = job
    tf = run_scenario(sc, out, seed)
    return f"{sc.name}: {tf.n_rows} rows, termination {tf.termination}, {len(tf.events)} events -> {tf.path}"


def cmd_run(args) -> int:
    scs = [_prepare(t, args) for t in args.targets]
    out = Path(args.out)
    if len(scs) == 1 and out.suffix:
        jobs = [(scs[0], out, args.seed)]
    else:
        jobs = [(sc, out / f"{sc.name}.csv", args.seed) for sc in scs]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            lines = list(pool.map(_run_one, jobs))
    else:
        lines = [_run_one(j) for j in jobs]
    for line in lines:
        print(line)
    return EXIT_OK


def cmd_list(args) -> int:
    for sc in builtin_scenarios():
        st = sc.settings
        print(f"{sc.name}  mode={sc.mode}  N={len(sc.disclinations)}  t_end={st.t_end:g}  {sc.description}")
        for k, d in enumerate(sc.disclinations, 1):
            print(f"    D{k}: s={d.angle:+g}  X=({d.x:.6f}, {d.y:.6f})")
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    reports = run_invariant_suite(args.seed)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<26} abs={r.max_abs_error:.3e} rel={r.max_rel_error:.3e}")
    ok = all(r.passed for r in reports)
    print("selfcheck passed" if ok else "selfcheck FAILED")
    return EXIT_OK if ok else EXIT_SELFCHECK


def cmd_dipole(args) -> int:
    try:
        DipoleState(args.delta0, args.s)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    tr = simulate_dipole(args.delta0, args.s, args.t_end, sample_interval=args.sample_interval)
    print("T,delta")
    for t, d in zip(tr.times, tr.delta):
        print(f"{t:.17g},{d:.17g}")
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    print(f"{find_dipole_equilibrium(1.0):.12f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disclinations", description="Dissipative dynamics of wedge disclinations in the unit disk.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run built-in scenarios or scenario documents")
    r.add_argument("targets", nargs="+", metavar="name|config-path")
    r.add_argument("--out", required=True, help="trace file (one target) or directory")
    r.add_argument("--t-end", type=float)
    r.add_argument("--rel-tol", type=float)
    r.add_argument("--abs-tol", type=float)
    r.add_argument("--eps-c", type=float, help="collision distance")
    r.add_argument("--sample-interval", type=float)
    r.add_argument("--glide-set", choices=["axes", "hex"])
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--jobs", type=int, default=1, help="run independent scenarios concurrently")
    r.set_defaults(func=cmd_run)

    sub.add_parser("list", help="list built-in scenarios").set_defaults(func=cmd_list)

    c = sub.add_parser("selfcheck", help="run the invariant suite")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_selfcheck)

    d = sub.add_parser("dipole", help="integrate the symmetric dipole separation")
    d.add_argument("--delta0", type=float, required=True)
    d.add_argument("--s", type=float, default=1.0)
    d.add_argument("--t-end", type=float, default=1.0)
    d.add_argument("--sample-interval", type=float, default=0.01)
    d.set_defaults(func=cmd_dipole)

    sub.add_parser("equilibrium", help="print the dipole equilibrium separation").set_defaults(func=cmd_equilibrium)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except (ConfigError, CoincidentPositionsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RuntimeError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
