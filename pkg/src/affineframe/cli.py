"""Command-line interface: ``affineframe {init,grow,prune,verify,bench,simulate}``.

Exit codes: 0 success, 1 usage error, 2 invalid input or refused operation,
3 audit failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import catalog
from .construction import AdditionRequest, GrowthError, add_vertex, random_growth_points
from .errors import AuditError, FrameworkError
from .framework import seed_framework
from .io import load_framework, load_points, load_scenario, load_trajectory, save_framework, save_points
from .pruning import delete_edge, delete_edge_two_relays, delete_vertex
from .sim import ScenarioError, ScenarioScript, run_scenario
from .verify import DEFAULT_TOLERANCES, full_audit, spectral_audit

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_AUDIT = 0, 1, 2, 3

FIXTURES = {
    "square": catalog.square_framework,
    "square-plus-outer": catalog.square_with_outer_vertex,
    "layered": catalog.layered_framework,
    "tetrahedron": catalog.tetrahedron_seed,
}
BENCH_SEED_POINTS = [(0.0, 1.0), (1.0, 0.0), (-1.0, 0.0), (0.0, -1.2)]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _say(msg: str = "") -> None:
    print(msg, flush=True)


def _audit_line(report) -> str:
    r = report.rigidity
    return f"zeros={r.zero_count}/{r.expected_zero_count} min_eig_ff={report.localizability.min_eigenvalue_ff:.4g} " + (
        "PASS" if report.passed else "FAIL: " + "; ".join(report.failures())
    )


# -- commands --------------------------------------------------------------


def cmd_init(args) -> int:
    if args.fixture:
        fw = FIXTURES[args.fixture]()
    else:
        pts = load_points(args.points)
        fw = seed_framework(pts, s=args.s)
    save_framework(fw, args.out)
    _say(f"wrote {fw!r} to {args.out}")
    return EXIT_OK


def cmd_grow(args) -> int:
    fw = load_framework(args.input)
    if args.points:
        pts = load_points(args.points, fw.dim)
    elif args.random:
        rng = np.random.default_rng(args.seed)
        pts = random_growth_points(fw, args.random, rng, d_per=args.dper, spread=args.spread)
        if args.save_points:
            save_points(pts, args.save_points)
    else:
        pts = np.empty((0, fw.dim))
    for k, p in enumerate(pts):
        try:
            fw = add_vertex(fw, AdditionRequest(tuple(p), s=args.s, d_per=args.dper), audit=False)
        except FrameworkError as exc:
            raise GrowthError(k, exc) from exc
        vid = fw.ids[-1]
        line = f"step {k}: vertex {vid} parents {fw.hierarchy[vid].parents}"
        if not args.no_audit:
            report = spectral_audit(fw)
            line += " " + _audit_line(report)
            if not report.passed:
                _say(line)
                raise AuditError(f"point {k}: audit failed", report)
        if not args.quiet:
            _say(line)
    save_framework(fw, args.out)
    _say(f"wrote {fw!r} to {args.out}")
    return EXIT_OK


def _coords(values):
    return None if values is None else tuple(float(v) for v in values)


def cmd_prune(args) -> int:
    fw = load_framework(args.input)
    if args.target == "vertex":
        new = delete_vertex(fw, args.u, d_per=args.dper)
        what = f"deleted vertex {args.u}"
    elif args.relay1 is not None or args.relay2 is not None:
        if args.relay1 is None or args.relay2 is None or args.third is None:
            raise FrameworkError("two-relay deletion needs --relay1, --third and --relay2")
        new = delete_edge_two_relays(fw, args.j, args.k, (_coords(args.relay1), args.third), _coords(args.relay2), s=args.s, d_per=args.dper)
        what = f"deleted edge ({args.j}, {args.k}) with relays {new.ids[-2]}, {new.ids[-1]}"
    else:
        new = delete_edge(fw, args.j, args.k, d_per=args.dper, relay=_coords(args.relay), anchor=args.anchor, min_phi=args.min_phi)
        added = [v for v in new.ids if v not in fw.index]
        what = f"deleted edge ({args.j}, {args.k})" + (f" with relay {added[0]}" if added else " directly")
    _say(what)
    _say(_audit_line(spectral_audit(new)))
    save_framework(new, args.out)
    _say(f"wrote {new!r} to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    fw = load_framework(args.input)
    report = full_audit(fw, DEFAULT_TOLERANCES, neighborhoods=not args.spectral_only)
    if args.json:
        print(json.dumps(report.to_dict(), indent=1))
    else:
        _say(report.summary())
    return EXIT_OK if report.passed else EXIT_AUDIT


def bench_growth(sizes, reps: int, seed: int = 0, audit: bool = False):
    """Mean and spread of wall-clock time to grow the 4-vertex seed by each size.

    Points are sampled before timing starts; only the additions are timed.
    """
    base = seed_framework(BENCH_SEED_POINTS)
    rng = np.random.default_rng(seed)
    rows = []
    for size in sizes:
        times = []
        for _ in range(reps):
            pts = random_growth_points(base, size, rng, spread=1.0)
            t0 = time.perf_counter()
            fw = base
            for p in pts:
                fw = add_vertex(fw, AdditionRequest(tuple(p)), audit=audit)
            times.append(time.perf_counter() - t0)
        rows.append({"agents": size, "reps": reps, "mean_s": float(np.mean(times)), "std_s": float(np.std(times)), "max_s": float(np.max(times))})
    return rows


def cmd_bench(args) -> int:
    if any(s < 1 for s in args.sizes):
        raise FrameworkError("sizes must be positive")
    rows = bench_growth(args.sizes, args.reps, args.seed, audit=args.audit)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow(r)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_simulate(args) -> int:
    fw = load_framework(args.framework)
    script = load_scenario(args.scenario) if args.scenario else None
    traj = load_trajectory(args.trajectory)
    if traj.dim != fw.dim:
        raise FrameworkError(f"trajectory is {traj.dim}D but the framework is {fw.dim}D")
    try:
        trace = run_scenario(fw, script or ScenarioScript(), traj, args.dt, horizon=args.horizon, record_every=args.record_every)
    except ScenarioError as exc:
        for ev in exc.trace.events:
            _say(f"t={ev.t:g} {ev.label}: {_audit_line(ev.audit)}")
        _say(str(exc))
        if args.out:
            exc.trace.to_csv(args.out)
        return EXIT_AUDIT if isinstance(exc.cause, AuditError) else EXIT_INVALID
    for ev in trace.events:
        _say(f"t={ev.t:g} {ev.label}: {_audit_line(ev.audit)}")
    for a, b in trace.intervals():
        _say(f"interval [{a:g}, {b:g}]: final error {trace.error_at_end(b):.3e}")
    if args.out:
        trace.to_csv(args.out)
        _say(f"wrote {len(trace.samples)} samples to {args.out}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="affineframe", description="Build, edit, audit and simulate stress-certified formation frameworks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("init", help="write a seed framework")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="JSON file with d+2 seed points")
    src.add_argument("--fixture", choices=sorted(FIXTURES))
    q.add_argument("--s", type=float, default=1.0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_init)

    q = sub.add_parser("grow", help="add vertices one at a time")
    q.add_argument("input")
    q.add_argument("points", nargs="?", help="JSON file of points to add in order")
    q.add_argument("--random", type=int, default=0, help="add this many random admissible points instead")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--spread", type=float, default=None)
    q.add_argument("--save-points", help="write the sampled points here")
    q.add_argument("--s", type=float, default=1.0)
    q.add_argument("--dper", type=float, default=None)
    q.add_argument("--no-audit", action="store_true")
    q.add_argument("--quiet", action="store_true", help="only report failures")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_grow)

    q = sub.add_parser("prune", help="delete an edge or a vertex")
    q.add_argument("input")
    tsub = q.add_subparsers(dest="target", required=True, parser_class=_Parser)
    e = tsub.add_parser("edge")
    e.add_argument("j", type=int)
    e.add_argument("k", type=int)
    e.add_argument("--relay", type=float, nargs="+", metavar="X", help="relay position if no direct deletion exists")
    e.add_argument("--anchor", type=int)
    e.add_argument("--min-phi", type=float, default=0.0, help="skip direct-deletion supports with a smaller phi entry")
    e.add_argument("--relay1", type=float, nargs="+", metavar="X")
    e.add_argument("--third", type=int, help="third parent of the first relay")
    e.add_argument("--relay2", type=float, nargs="+", metavar="X")
    v = tsub.add_parser("vertex")
    v.add_argument("u", type=int)
    for sp in (e, v):
        sp.add_argument("--dper", type=float, default=None)
        sp.add_argument("--s", type=float, default=1.0)
        sp.add_argument("--out", required=True)
    q.set_defaults(func=cmd_prune)

    q = sub.add_parser("verify", help="audit a framework file")
    q.add_argument("input")
    q.add_argument("--spectral-only", action="store_true", help="skip the neighborhood general-position scan")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("bench", help="time random growth from a 4-vertex seed")
    q.add_argument("--sizes", type=int, nargs="+", default=[5, 20, 50, 100, 200])
    q.add_argument("--reps", type=int, default=10)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--audit", action="store_true", help="include the per-step audit in the timing")
    q.add_argument("--out")
    q.set_defaults(func=cmd_bench)

    q = sub.add_parser("simulate", help="run a tracking scenario")
    q.add_argument("framework")
    q.add_argument("trajectory")
    q.add_argument("scenario", nargs="?")
    q.add_argument("--dt", type=float, default=None)
    q.add_argument("--horizon", type=float, default=None)
    q.add_argument("--record-every", type=int, default=1)
    q.add_argument("--out", help="CSV trace")
    q.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AuditError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except (FrameworkError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
