"""Benchmark load cases, supports and passive regions resolved against a mesh.

Selectors are geometric wherever possible so they stay valid when the top
corner nodes of an even-row mesh are removed and the nodes are renumbered.

Node selectors (``"node"`` entries):

``"bottom-left"``, ``"bottom-right"``, ``"top-left"``, ``"top-right"`` (outermost
nodes of the bottom and top node rows), ``"last"``,
an integer node id (1-based, as in the CSV exports), or ``{"x": .., "y": ..}``
for the node nearest to a point in model units.

Support descriptors are ``{"edge": "left"|"right"|"bottom"|"top", "dofs": "x"|"y"|"xy"}``
(the left and right edges hold the outermost node of every node row)
or ``{"node": <selector>, "dofs": ...}``.  Passive descriptors are
``{"shape": "circle", "params": [cx, cy, r], "marker": -1|1}`` or
``{"shape": "rect", "params": [x0, x1, y0, y1], "marker": ...}`` with
coordinates given as fractions of ``(Lx, Ly)``, the largest centroid
coordinates; a circle radius is a fraction of ``Ly``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import HexMesh

__all__ = ["ProblemSpec", "ResolvedProblem", "PRESETS", "get_problem", "resolve", "from_config"]

_TOL = 1e-9


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    loads: tuple = ()
    supports: tuple = ()
    passive: tuple = ()
    defaults: dict = field(default_factory=dict)


@dataclass
class ResolvedProblem:
    loads: np.ndarray  # ndof x ncases
    fixed_dofs: np.ndarray
    mask: np.ndarray  # -1 void, 0 active, 1 solid


def _edge_nodes(mesh: HexMesh, edge: str) -> np.ndarray:
    """Boundary nodes; ``left``/``right`` take the outermost node of every node row."""
    row, col = mesh.node_grid[:, 0], mesh.node_grid[:, 1]
    if edge in ("left", "right"):
        key = col if edge == "left" else -col
        order = np.lexsort((key, row))
        first = np.concatenate(([True], row[order][1:] != row[order][:-1]))
        return np.sort(order[first])
    if edge == "bottom":
        return np.flatnonzero(row == 0)
    if edge == "top":
        return np.flatnonzero(row == mesh.params.hney)
    raise ValueError(f"unknown edge {edge!r}")


def select_node(mesh: HexMesh, sel) -> int:
    """0-based node index for a node selector."""
    x, y = mesh.coords[:, 0], mesh.coords[:, 1]
    if isinstance(sel, dict):
        try:
            px, py = float(sel["x"]), float(sel["y"])
        except (KeyError, TypeError, ValueError):
            raise ValueError(f"point selector needs numeric x and y, got {sel!r}") from None
        return int(np.argmin((x - px) ** 2 + (y - py) ** 2))
    if isinstance(sel, (int, np.integer)) and not isinstance(sel, bool):
        if not 1 <= sel <= mesh.nnode:
            raise ValueError(f"node id {sel} outside 1..{mesh.nnode}")
        return int(sel) - 1
    if sel == "last":
        return mesh.nnode - 1
    if sel == "bottom-left":
        return 0
    if sel == "bottom-right":
        return 2 * mesh.params.hnex
    if sel in ("top-left", "top-right"):
        top = _edge_nodes(mesh, "top")
        cols = mesh.node_grid[top, 1]
        return int(top[np.argmin(cols)] if sel == "top-left" else top[np.argmax(cols)])
    raise ValueError(f"unknown node selector {sel!r}")


_DOF_OFFSETS = {"x": (0,), "y": (1,), "xy": (0, 1)}


def _dofs(nodes, which: str) -> np.ndarray:
    try:
        offs = _DOF_OFFSETS[which]
    except KeyError:
        raise ValueError(f"dofs must be one of {sorted(_DOF_OFFSETS)}, got {which!r}") from None
    nodes = np.atleast_1d(np.asarray(nodes, dtype=np.int64))
    return np.concatenate([2 * nodes + o for o in offs])


def _passive_mask(mesh: HexMesh, descriptors) -> np.ndarray:
    ct = mesh.centroids
    lx, ly = ct[:, 0].max(), ct[:, 1].max()
    mask = np.zeros(mesh.nelem, dtype=np.int8)
    for d in descriptors:
        shape, p, marker = d["shape"], [float(v) for v in d["params"]], int(d["marker"])
        if marker not in (-1, 1):
            raise ValueError("passive marker must be -1 (void) or 1 (solid)")
        if shape == "circle":
            cx, cy, r = p
            inside = np.hypot(ct[:, 0] - cx * lx, ct[:, 1] - cy * ly) < r * ly
        elif shape == "rect":
            x0, x1, y0, y1 = p
            inside = (ct[:, 0] > x0 * lx) & (ct[:, 0] < x1 * lx) & (ct[:, 1] > y0 * ly) & (ct[:, 1] < y1 * ly)
        else:
            raise ValueError(f"unknown passive shape {shape!r}")
        mask[inside] = marker
    return mask


def resolve(spec: ProblemSpec, mesh: HexMesh) -> ResolvedProblem:
    ncases = 1 + max((int(ld.get("case", 0)) for ld in spec.loads), default=0)
    loads = np.zeros((mesh.ndof, ncases))
    for ld in spec.loads:
        if ld["dir"] not in ("x", "y"):
            raise ValueError(f"load direction must be 'x' or 'y', got {ld['dir']!r}")
        node = select_node(mesh, ld["node"])
        dof = 2 * node + (0 if ld["dir"] == "x" else 1)
        loads[dof, int(ld.get("case", 0))] += float(ld["mag"])
    if not np.all(np.any(loads != 0, axis=0)):
        raise ValueError(f"problem {spec.name!r}: every load case needs a nonzero load")

    fixed = []
    for s in spec.supports:
        if "edge" in s:
            nodes = _edge_nodes(mesh, s["edge"])
        else:
            nodes = [select_node(mesh, s["node"])]
        if len(nodes) == 0:
            raise ValueError(f"support selector {s!r} matched no nodes")
        fixed.append(_dofs(nodes, s.get("dofs", "xy")))
    if not fixed:
        raise ValueError(f"problem {spec.name!r} has no supports")
    fixed_dofs = np.unique(np.concatenate(fixed))
    return ResolvedProblem(loads=loads, fixed_dofs=fixed_dofs, mask=_passive_mask(mesh, spec.passive))


SQ3 = math.sqrt(3.0)

PRESETS = {
    # half MBB beam: load at the top-left corner, symmetry on the left edge,
    # roller at the bottom-right corner
    "mbb": ProblemSpec(
        "mbb",
        loads=({"node": "top-left", "dir": "y", "mag": -1.0},),
        supports=({"edge": "left", "dofs": "x"}, {"node": "bottom-right", "dofs": "y"}),
        defaults={"hnex": 60, "hney": 20, "volfrac": 0.5, "penal": 3.0, "rfill": 1.8 * SQ3, "filter": "sens"},
    ),
    # half Michell structure: load at the bottom-left node, pin at the bottom-right
    "michell": ProblemSpec(
        "michell",
        loads=({"node": "bottom-left", "dir": "y", "mag": -1.0},),
        supports=({"edge": "left", "dofs": "x"}, {"node": "bottom-right", "dofs": "xy"}),
        defaults={"hnex": 120, "hney": 120, "volfrac": 0.2, "penal": 3.0, "rfill": 3.6 * SQ3, "filter": "sens"},
    ),
    "cantilever2": ProblemSpec(
        "cantilever2",
        loads=(
            {"node": "bottom-right", "dir": "y", "mag": -1.0, "case": 0},
            {"node": "last", "dir": "y", "mag": 1.0, "case": 1},
        ),
        supports=({"edge": "left", "dofs": "xy"},),
        defaults={"hnex": 120, "hney": 120, "volfrac": 0.4, "penal": 3.0, "rfill": 4 * SQ3, "filter": "sens"},
    ),
    "passive-cantilever": ProblemSpec(
        "passive-cantilever",
        loads=({"node": "bottom-right", "dir": "y", "mag": -1.0},),
        supports=({"edge": "left", "dofs": "xy"},),
        passive=(
            {"shape": "circle", "params": [1 / 3, 1 / 2, 1 / 3], "marker": -1},
            {"shape": "rect", "params": [0.7, 0.9, 0.1, 0.3], "marker": 1},
        ),
        defaults={"hnex": 200, "hney": 100, "volfrac": 0.4, "penal": 3.0, "rfill": 6.4 * SQ3, "filter": "sens"},
    ),
}


def get_problem(name: str) -> ProblemSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PRESETS)}") from None


_RUN_KEYS = ("hnex", "hney", "volfrac", "penal", "rfill", "filter", "maxiter", "move", "tol", "edge")


def from_config(cfg: dict) -> ProblemSpec:
    """Build a problem from a JSON-style mapping.

    ``{"problem": <preset>}`` starts from a preset (explicit keys override its
    defaults); ``{"problem": "custom", "loads": [...], "supports": [...],
    "passive": [...]}`` describes one from scratch.  Loads use
    ``{"x", "y", "dir", "mag", "case"}`` (nearest node) or ``{"node", ...}``.
    """
    name = cfg.get("problem", "custom")
    base = None if name == "custom" else get_problem(name)
    defaults = dict(base.defaults) if base else {}
    defaults.update({k: cfg[k] for k in _RUN_KEYS if k in cfg})
    if "loads" in cfg:
        loads = []
        for ld in cfg["loads"]:
            ld = dict(ld)
            if "node" not in ld:
                ld["node"] = {"x": ld.pop("x"), "y": ld.pop("y")}
            loads.append(ld)
        loads = tuple(loads)
    elif base:
        loads = base.loads
    else:
        raise ValueError("custom problem needs loads")
    supports = tuple(cfg["supports"]) if "supports" in cfg else (base.supports if base else ())
    passive = tuple(cfg["passive"]) if "passive" in cfg else (base.passive if base else ())
    if not supports:
        raise ValueError("problem needs supports")
    return ProblemSpec(name, loads=loads, supports=supports, passive=passive, defaults=defaults)
