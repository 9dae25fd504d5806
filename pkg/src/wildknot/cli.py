"""Command line entry point: ``wildknot <command> [options]``.

Exit codes: 0 ok, 2 config/argument error, 3 validation failure, 4 numeric fault.
Every command writes its files into ``--out`` and prints one summary line.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import algebra, covers, fibration, necklace
from .conformal import GeometryError, LimitProximity
from .io import (
    ConfigError,
    NecklaceConfig,
    load_config,
    read_polyline,
    write_csv,
    write_point_cloud,
    write_polyline,
)

DEPTH_CAP = 12
LANES_ENV = "WILDKNOT_LANES"

EXIT_OK, EXIT_CONFIG, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4

NUMERIC_FAULTS = (
    GeometryError,
    LimitProximity,
    necklace.ConstructionFault,
    necklace.RefinementRequired,
    necklace.DimensionEstimateError,
    covers.PathRejected,
    fibration.OnThread,
    FloatingPointError,
)


class UsageError(Exception):
    pass


def _lanes(args) -> int:
    if args.lanes is not None:
        return max(1, args.lanes)
    env = os.environ.get(LANES_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{LANES_ENV}={env!r} is not an integer")
    return 1


def _config(args) -> NecklaceConfig:
    if not args.config:
        raise UsageError("this command needs --config")
    return load_config(args.config)


def _depth(args, cfg: NecklaceConfig | None = None) -> int:
    d = args.depth if args.depth is not None else (cfg.depth if cfg else 2)
    if d < 0 or d > args.depth_cap:
        raise UsageError(f"depth {d} outside 0..{args.depth_cap}")
    return d


def _model(args, cfg: NecklaceConfig | None) -> fibration.TrivialModel:
    if cfg is None:
        return fibration.TrivialModel(3, args.k if args.k is not None else 3, 0.5)
    return fibration.TrivialModel(cfg.ambient_dim, cfg.k, cfg.model_radius)


def _optional_config(args):
    return load_config(args.config) if args.config else None


# --- commands ------------------------------------------------------------------


def cmd_validate(args, out: Path):
    cfg = _config(args)
    neck = cfg.necklace()
    rep = necklace.validate(neck, cfg.tolerance, cfg.reach)
    rows = [(name, "n/a" if v is None else ("pass" if v else "fail")) for name, v in rep.as_rows()]
    write_csv(out / "validate.csv", ["check", "result"], rows)
    with open(out / "validate_failures.txt", "w") as fh:
        for f in rep.failures:
            fh.write(f + "\n")
    status = EXIT_OK if rep.ok else EXIT_INVALID
    return status, f"validate: {'pass' if rep.ok else 'FAIL'} k={neck.k} min_gap={rep.min_gap:.6g}"


def cmd_stage(args, out: Path):
    cfg = _config(args)
    m = _depth(args, cfg)
    stats = necklace.stage_statistics(cfg.necklace(), m)
    write_csv(out / "stages.csv", ["stage", "count", "max_radius", "min_gap"],
              [(s.stage, s.count, s.max_radius, s.min_gap) for s in stats])
    return EXIT_OK, f"stage: {len(stats)} stages, {sum(s.count for s in stats)} beads"


def cmd_limit_set(args, out: Path):
    cfg = _config(args)
    m = _depth(args, cfg)
    cloud = necklace.limit_points(cfg.necklace(), m)
    n = write_point_cloud(out / "limit_set.txt", cloud.points, cloud.radii, cloud.addresses,
                          header=f"depth-{m} bead centers; radius bounds the distance to the limit point")
    return EXIT_OK, f"limit-set: {n} points at depth {m}"


def cmd_knot_mesh(args, out: Path):
    cfg = _config(args)
    m = _depth(args, cfg)
    ka = necklace.knot_approx(cfg.necklace(), m)
    write_polyline(out / "knot.txt", ka.polyline, header=f"stage-{m} knot approximation")
    write_csv(out / "stitches.csv", ["vertex", "address"],
              [(i, necklace.address_str(a)) for i, a in ka.stitches])
    return EXIT_OK, f"knot-mesh: {len(ka.polyline)} vertices, {len(ka.stitches)} stitches"


def cmd_dimension(args, out: Path):
    cfg = _config(args)
    depths = args.depths or [7, 8]
    for d in depths:
        if d > args.depth_cap:
            raise UsageError(f"depth {d} above cap {args.depth_cap}")
    neck = cfg.necklace()
    est = necklace.dimension_estimate(neck, depths, converge_tol=args.converge_tol)
    rows = [(m, s) for m, s in est.per_depth_values]
    write_csv(out / "dimension.csv", ["depth", "s"], rows)
    msg = f"dimension: s_hat={est.s_hat:.6f} converged={est.converged}"
    if args.box:
        pts = necklace.limit_points(neck, max(depths)).points
        box = necklace.box_counting_dimension(pts, seed=cfg.seed)
        write_csv(out / "box_counting.csv", ["depth", "box_dimension"], [(max(depths), box)])
        msg += f" box={box:.6f}"
    return EXIT_OK, msg


def cmd_presentation(args, out: Path):
    try:
        G = algebra.knot_group(args.knot)
    except KeyError as exc:
        raise UsageError(str(exc))
    if args.copies < 1:
        raise UsageError("--copies must be >= 1")
    P = algebra.amalgamated_sum(G, args.copies)
    (out / "presentation.txt").write_text(algebra.format_presentation(P))
    ab = algebra.abelianization(P)
    return EXIT_OK, (f"presentation: {P.n_generators} generators, {P.n_relators} relators, "
                     f"H1 = {ab.describe(1)}")


def cmd_census(args, out: Path):
    cfg = _optional_config(args)
    k = args.k if args.k is not None else (cfg.k if cfg else 3)
    m = _depth(args, cfg)
    rows = []
    for s in range(m + 1):
        c = algebra.summand_census(k, s)
        rows.append((s, c.bead_count, c.summand_total, c.oriented_count, c.mirrored_count,
                     c.closed_form_alt if c.closed_form_alt is not None else ""))
    write_csv(out / "census.csv", ["stage", "bead_count", "summand_total", "oriented", "mirrored",
                                   "closed_form_alt"], rows)
    return EXIT_OK, f"census: k={k} stages 0..{m}, a_{m}={rows[-1][2]}"


def cmd_fiber(args, out: Path):
    cfg = _optional_config(args)
    model = _model(args, cfg)
    m = _depth(args, cfg)
    knot = None
    if model.dim == 3 and model.k >= 3:
        knot = necklace.knot_approx(model.necklace(), m).polyline
    pts = fibration.fiber_sample(model, args.theta, m, bound=args.bound, resolution=args.resolution,
                                 delta=args.delta, eps=args.eps, knot=knot, lanes=_lanes(args))
    n = write_point_cloud(out / "fiber.txt", pts,
                          header=f"page theta={args.theta:.17g} depth={m} bound={args.bound} "
                                 f"resolution={args.resolution}")
    return EXIT_OK, f"fiber: {n} points on page {args.theta:.6g} at depth {m}"


def _cover_config(args):
    cfg = _optional_config(args)
    model = _model(args, cfg)
    m = _depth(args, cfg)
    return cfg, covers.CoverConfig(args.q, model, m, args.theta_cut)


def cmd_lift(args, out: Path):
    _, cc = _cover_config(args)
    if not args.path:
        raise UsageError("lift needs --path")
    path = read_polyline(args.path)
    lp = covers.lift_path(cc, path, args.start_sheet)
    d = cc.model.dim
    write_csv(out / "lift.csv", ["index"] + [f"x{i + 1}" for i in range(d)] + ["sheet"],
              [(i, *v.base, v.sheet) for i, v in enumerate(lp.vertices)])
    return EXIT_OK, (f"lift: {len(lp.vertices)} vertices, {len(lp.crossings)} crossings, "
                     f"sheet {lp.start_sheet} -> {lp.end_sheet} (q={cc.q})")


def cmd_branch_check(args, out: Path):
    _, cc = _cover_config(args)
    model = cc.model
    knot = None
    if model.dim == 3 and model.k >= 3:
        knot = necklace.knot_approx(model.necklace(), cc.depth).polyline
    if args.point:
        pts = [np.asarray(args.point, float)]
    else:
        # default probes: points of the thread halfway between consecutive beads
        k = max(model.k, 1)
        pts = []
        for j in range(k):
            a = 2 * math.pi * (j + 0.5) / k
            p = np.zeros(model.dim)
            p[0], p[1] = math.cos(a), math.sin(a)
            pts.append(p)
    reports = [covers.verify_branch(cc, p, knot) for p in pts]
    write_csv(out / "branch.csv",
              ["point", "q", "rho", "winding", "closes_after", "retries", "ok"],
              [(" ".join(f"{v:.17g}" for v in r.point), r.q, r.rho, r.winding,
                "" if r.closes_after is None else r.closes_after, r.retries, int(r.ok))
               for r in reports])
    ok = all(r.ok for r in reports)
    return (EXIT_OK if ok else EXIT_INVALID), f"branch-check: {sum(r.ok for r in reports)}/{len(reports)} points have index {cc.q}"


def cmd_ends(args, out: Path):
    cfg, cc = _cover_config(args)
    seed = cfg.seed if cfg else 0
    rows = covers.ends_census(cc, cc.depth, args.samples, seed=seed)
    write_csv(out / "ends.csv", ["address", "components"],
              [(r.address, "undecided" if r.undecided else r.components) for r in rows])
    und = sum(r.undecided for r in rows)
    return EXIT_OK, f"ends: {len(rows)} beads at depth {cc.depth}, {und} undecided"


COMMANDS = {
    "validate": cmd_validate,
    "stage": cmd_stage,
    "limit-set": cmd_limit_set,
    "knot-mesh": cmd_knot_mesh,
    "dimension": cmd_dimension,
    "presentation": cmd_presentation,
    "census": cmd_census,
    "fiber": cmd_fiber,
    "lift": cmd_lift,
    "branch-check": cmd_branch_check,
    "ends": cmd_ends,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON necklace config")
    common.add_argument("--out", default=".", help="output directory (default: cwd)")
    common.add_argument("--depth", type=int)
    common.add_argument("--depth-cap", type=int, default=DEPTH_CAP)
    common.add_argument("--lanes", type=int, help=f"worker threads (env {LANES_ENV})")

    p = _Parser(prog="wildknot", description="Wild knots from beaded necklaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("validate", "stage", "limit-set", "knot-mesh"):
        sub.add_parser(name, parents=[common])
    s = sub.add_parser("dimension", parents=[common])
    s.add_argument("--depths", type=int, nargs="+")
    s.add_argument("--converge-tol", type=float, default=1e-2)
    s.add_argument("--box", action="store_true", help="also run the box-counting estimate")
    s = sub.add_parser("presentation", parents=[common])
    s.add_argument("--knot", default="trefoil", choices=sorted(algebra.KNOT_GROUPS))
    s.add_argument("--copies", type=int, default=1)
    s = sub.add_parser("census", parents=[common])
    s.add_argument("--k", type=int)
    s = sub.add_parser("fiber", parents=[common])
    s.add_argument("--k", type=int)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--bound", type=float, default=2.0)
    s.add_argument("--resolution", type=int, default=41)
    s.add_argument("--delta", type=float, default=1e-2)
    s.add_argument("--eps", type=float, default=1e-6)
    for name in ("lift", "branch-check", "ends"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--k", type=int)
        s.add_argument("--q", type=int, default=2)
        s.add_argument("--theta-cut", type=float, default=0.0)
        if name == "lift":
            s.add_argument("--path", help="polyline file")
            s.add_argument("--start-sheet", type=int, default=0)
        elif name == "branch-check":
            s.add_argument("--point", type=float, nargs="+")
        else:
            s.add_argument("--samples", type=int, default=64)
    return p


def main(argv=None) -> int:
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise UsageError(f"output directory {out} is not writable")
        status, summary = COMMANDS[args.command](args, out)
    except (UsageError, ConfigError) as exc:
        print(f"wildknot: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_FAULTS as exc:
        print(f"wildknot: numeric fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining ValueErrors come from configs that parse but describe an impossible setup
        print(f"wildknot: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{summary} ({time.perf_counter() - t0:.3f} s)")
    return status


if __name__ == "__main__":
    sys.exit(main())
