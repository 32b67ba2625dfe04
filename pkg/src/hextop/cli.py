"""Command-line front end.

Example::

    hextop --problem mbb --nex 60 --ney 20 --filter sens --out out/mbb
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

from . import io
from .element import element_stiffness
from .fea import Material, SolverError
from .filters import FILTER_MODES
from .mesh import MeshParams, build_mesh, export_mesh
from .optimizer import BisectionError, OptConfig, run
from .problems import PRESETS, from_config, get_problem, resolve

log = logging.getLogger("hextop")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hextop", description="Compliance topology optimisation on honeycomb meshes.")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--problem", choices=sorted(PRESETS), help="preset problem (default: mbb)")
    src.add_argument("--config", metavar="PATH", help="JSON problem/run description")
    p.add_argument("--nex", type=int, help="hexagons along x")
    p.add_argument("--ney", type=int, help="element rows along y")
    p.add_argument("--volfrac", type=float)
    p.add_argument("--penal", type=float)
    p.add_argument("--rfill", type=float, help="filter radius in model units")
    p.add_argument("--filter", choices=FILTER_MODES)
    p.add_argument("--max-iter", type=int, dest="maxiter")
    p.add_argument("--move", type=float)
    p.add_argument("--tol", type=float, help="stop when the max design change drops below this")
    p.add_argument("--edge", type=float, help="hexagon edge length")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--quiet", action="store_true", help="suppress per-iteration output")
    p.add_argument("--dump-k0", action="store_true", help="also write the element stiffness to k0.csv")
    return p


def _settings(args) -> tuple:
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {args.config}: {exc}") from exc
        spec = from_config(cfg)
    else:
        spec = get_problem(args.problem or "mbb")
    s = {"maxiter": 200, "tol": 0.01, "move": None, "edge": MeshParams.__dataclass_fields__["edge"].default}
    s.update(spec.defaults)
    overrides = {"hnex": args.nex, "hney": args.ney, "volfrac": args.volfrac, "penal": args.penal,
                 "rfill": args.rfill, "filter": args.filter, "maxiter": args.maxiter, "move": args.move,
                 "tol": args.tol, "edge": args.edge}
    s.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("hnex", "hney", "volfrac"):
        if key not in s:
            raise ValueError(f"missing required setting {key!r}")
    s.setdefault("penal", 3.0)
    s.setdefault("filter", "sens")
    s.setdefault("rfill", None)
    return spec, s


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        spec, s = _settings(args)
        mesh = build_mesh(MeshParams(s["hnex"], s["hney"], s["edge"]))
        problem = resolve(spec, mesh)
        cfg = OptConfig(volfrac=s["volfrac"], rfill=s["rfill"], filter=s["filter"], move=s["move"],
                        maxiter=s["maxiter"], change_tol=s["tol"])
        material = Material(penal=s["penal"])
    except ValueError as exc:
        print(f"hextop: error: {exc}", file=sys.stderr)
        return 2

    def report(state, rec):
        if not args.quiet:
            print(f"it: {rec.iteration} obj: {rec.compliance:.4f} vol: {rec.volume:.3f} ch: {rec.change:.3f}",
                  flush=True)

    try:
        out = io.ensure_dir(args.out)
        k0 = element_stiffness(cfg.nu, cfg.quadrature)
        t0 = time.perf_counter()
        state = run(mesh, problem.loads, problem.fixed_dofs, cfg, material, mask=problem.mask, k0=k0,
                    callback=report)
        wall = time.perf_counter() - t0
        io.write_densities(state.xphys, os.path.join(out, "densities.csv"))
        io.write_history(state.history, os.path.join(out, "history.jsonl"))
        io.render_svg(mesh, state.xphys, os.path.join(out, "design.svg"))
        export_mesh(mesh, out)
        if args.dump_k0:
            io.write_matrix_csv(k0.k0, os.path.join(out, "k0.csv"))
        echo = {k: (v if not (isinstance(v, float) and math.isnan(v)) else None) for k, v in s.items()}
        echo["problem"] = spec.name
        io.write_summary(
            {"compliance": state.compliance, "iterations": state.iteration, "wall_time": wall,
             "volume": state.volume, "nelem": mesh.nelem, "nnode": mesh.nnode, "config": echo},
            os.path.join(out, "summary.json"),
        )
    except (SolverError, BisectionError) as exc:
        print(f"hextop: solver failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"hextop: I/O failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
