"""Command-line front end: ``hconvex <subcommand> ...``.

Exit status is 0 iff the report's ``overall_pass`` is true, 2 for usage
errors or missing inputs, 1 otherwise.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cubical import betti_of
from .harness import FIXTURES, SUITES, CheckRecord, CheckReport, RunConfig, run_fixture, run_suite
from .hconv import (
    DirectionSample,
    boundary_cells,
    centered_tgrid,
    hcomb,
    hextremal_points,
    hhull,
    quasiconvex_check,
    sample_lines,
)
from .scene_io import SceneError, load_scene
from .voxel import GridSpec, VoxelSet, hausdorff_cells, rasterize


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="write the JSON report here")
    p.add_argument("--resolution", type=int, help="cells per axis for scene and parameter grids")
    p.add_argument("--tolerance", type=float, help="Hausdorff tolerance in cells")
    p.add_argument("--threads", type=int, help="worker threads (default: $HCONVEX_THREADS or 1)")
    p.add_argument("--field", choices=("mod2", "rational"), default="mod2")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hconvex", description="Quaternionic convexity checks on voxelized compacts.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("fixture", help="run a scripted fixture")
    p.add_argument("name", choices=sorted(FIXTURES))
    _common(p)

    p = sub.add_parser("suite", help="run a seeded property suite")
    p.add_argument("name", choices=sorted(SUITES))
    p.add_argument("--trials", type=int, default=10)
    _common(p)

    p = sub.add_parser("betti", help="Betti numbers of a rasterized scene")
    p.add_argument("--scene", type=Path, required=True)
    p.add_argument("--grid", nargs=3, metavar=("LO", "HI", "CELLS"), help="override with a cube grid")
    p.add_argument("--expect", help="comma-separated Betti numbers the result must match")
    _common(p)

    p = sub.add_parser("hull", help="sampled h-hull of a scene on its own grid")
    p.add_argument("--scene", type=Path, required=True)
    p.add_argument("--functionals", type=int, default=32)
    _common(p)

    p = sub.add_parser("quasiconvex", help="Betti numbers of sampled line sections")
    p.add_argument("--scene", type=Path, required=True)
    p.add_argument("--lines", type=int, default=64)
    p.add_argument("--t-half-width", type=float, default=3.0)
    _common(p)

    p = sub.add_parser("extremal", help="sampled h-extremal points of a scene")
    p.add_argument("--scene", type=Path, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--directions", type=int, default=16)
    _common(p)
    return ap


def _cfg(a) -> RunConfig:
    return RunConfig(a.resolution, a.tolerance, a.field, a.threads)


def _load(a):
    doc = load_scene(a.scene)
    grid = doc.grid
    if getattr(a, "grid", None):
        lo, hi, cells = float(a.grid[0]), float(a.grid[1]), int(a.grid[2])
        grid = GridSpec.cube(lo, hi, cells, doc.frame.dim)
    elif a.resolution:
        grid = GridSpec(grid.lo, grid.hi, (a.resolution,) * grid.dim)
    return doc, grid


def _scene_report(name: str, a, extra: dict) -> CheckReport:
    cfg = dict(_cfg(a).to_json(), scene=str(a.scene), **extra)
    return CheckReport(name, a.seed, cfg)


def cmd_betti(a) -> CheckReport:
    doc, grid = _load(a)
    v = rasterize(doc.predicate, doc.frame, grid)
    b = betti_of(v, a.field)
    rep = _scene_report("betti", a, {"grid": grid.to_json()})
    ok = True
    if a.expect:
        want = [int(x) for x in a.expect.split(",")]
        ok = b.as_list()[: len(want)] == want
    rep.checks.append(CheckRecord("betti", ok, "derived", {"cells": v.count}, b.as_list(), observed={"empty": b.empty}))
    return rep


def cmd_hull(a) -> CheckReport:
    doc, grid = _load(a)
    v = rasterize(doc.predicate, doc.frame, grid)
    funcs = DirectionSample.sobol(doc.ambient_n, a.functionals, a.seed)
    H = hhull(v, VoxelSet(doc.frame, grid, np.ones(grid.cells, dtype=bool)), funcs)
    rep = _scene_report("hull", a, {"functionals": a.functionals})
    rep.checks.append(
        CheckRecord("hull_contains_scene", v <= H, "theorem", {"functionals": a.functionals},
                    hausdorff_cells=hausdorff_cells(H, v), observed={"hull_cells": H.count, "scene_cells": v.count})
    )
    return rep


def cmd_quasiconvex(a) -> CheckReport:
    doc, grid = _load(a)
    v = rasterize(doc.predicate, doc.frame, grid)
    dirs = DirectionSample.sobol(doc.ambient_n, a.lines, a.seed)
    tg = centered_tgrid(a.t_half_width, (a.resolution or 21) | 1)
    rep_q = quasiconvex_check(doc.predicate, sample_lines(v, dirs, a.seed), tg, a.field, threads=a.threads)
    rep = _scene_report("quasiconvex", a, {"lines": a.lines, "tgrid": tg.to_json()})
    rep.checks.append(
        CheckRecord("sections_no_3cycle", rep_q.verdict, "theorem", {"lines": rep_q.lines_tested}, rep_q.betti_rows(),
                    observed={"failures": rep_q.failures(), "empty": rep_q.empty_count})
    )
    return rep


def cmd_extremal(a) -> CheckReport:
    doc, grid = _load(a)
    v = rasterize(doc.predicate, doc.frame, grid)
    ext = hextremal_points(doc.predicate, boundary_cells(v), DirectionSample.sobol(doc.ambient_n, a.directions, a.seed), a.radius)
    rep = _scene_report("extremal", a, {"radius": a.radius, "directions": a.directions})
    obs = {"extremal_cells": ext.count, "boundary_cells": boundary_cells(v).count}
    if doc.ambient_n == 1 and grid.dim == 4:
        hd = hausdorff_cells(hcomb(ext), hcomb(v))
        tol = a.tolerance if a.tolerance is not None else 1.0
        rep.checks.append(CheckRecord("extremal_combination_recovers_set", hd <= tol, "theorem", {"tolerance_cells": tol}, hausdorff_cells=hd, observed=obs))
    else:
        rep.checks.append(CheckRecord("extremal_nonempty", ext.count > 0, "trivial", {}, observed=obs))
    return rep


def _emit(rep: CheckReport, out: Path | None) -> None:
    if out is not None:
        rep.write(out)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {rep.name}/{c.id}")
    if rep.error:
        print(f"ERROR {rep.error}", file=sys.stderr)
    print(f"overall_pass={str(rep.overall_pass).lower()} wall_ms={rep.wall_ms}")


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if a.threads is not None:
        os.environ["HCONVEX_THREADS"] = str(a.threads)
    if getattr(a, "scene", None) is not None and not a.scene.is_file():
        print(f"hconvex: scene file not found: {a.scene}", file=sys.stderr)
        return 2
    if a.cmd == "suite" and a.trials < 1:
        print("hconvex: --trials must be at least 1", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    if a.cmd == "fixture":
        rep = run_fixture(a.name, _cfg(a), a.seed)
    elif a.cmd == "suite":
        rep = run_suite(a.name, a.trials, a.seed, _cfg(a))
    else:
        handler = {"betti": cmd_betti, "hull": cmd_hull, "quasiconvex": cmd_quasiconvex, "extremal": cmd_extremal}[a.cmd]
        rep = CheckReport(a.cmd, a.seed, {})
        try:
            rep = handler(a)
        except SceneError as exc:
            print(f"hconvex: bad scene: {exc}", file=sys.stderr)
            return 2
        except Exception as exc:  # noqa: BLE001 - partial report, runtime failure
            rep.error = f"{type(exc).__name__}: {exc}"
        rep.wall_ms = int((time.perf_counter() - t0) * 1000)
    _emit(rep, a.out)
    return 0 if rep.overall_pass else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
