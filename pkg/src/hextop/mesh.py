"""Honeycomb tessellation of a rectangular domain.

Nodes are laid out in ``hney + 1`` zigzag rows of ``2 * hnex + 1`` nodes.
Node 0 sits at the bottom-left corner.  Element rows alternate between
``hnex`` hexagons (even rows) and ``hnex - 1`` hexagons shifted right by
half an element (odd rows).  Indices are 0-based in memory and 1-based in
the CSV exports.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = ["MeshParams", "HexMesh", "counts", "build_mesh", "export_mesh"]

DEFAULT_EDGE = 1.0


@dataclass(frozen=True)
class MeshParams:
    """Number of hexagons along x, number of element rows along y, edge length."""

    hnex: int
    hney: int
    edge: float = DEFAULT_EDGE

    def __post_init__(self):
        if int(self.hnex) != self.hnex or int(self.hney) != self.hney:
            raise ValueError("hnex and hney must be integers")
        if self.hnex < 1 or self.hney < 1:
            raise ValueError(f"mesh dimensions must be positive, got {self.hnex}x{self.hney}")
        if not (self.edge > 0 and math.isfinite(self.edge)):
            raise ValueError(f"edge length must be positive, got {self.edge}")


@dataclass(frozen=True)
class HexMesh:
    params: MeshParams
    coords: np.ndarray = field(repr=False)
    elem_nodes: np.ndarray = field(repr=False)
    centroids: np.ndarray = field(repr=False)
    # (row, column) of every node in the uncompacted node grid
    node_grid: np.ndarray = field(repr=False)

    @property
    def nelem(self) -> int:
        return self.elem_nodes.shape[0]

    @property
    def nnode(self) -> int:
        return self.coords.shape[0]

    @property
    def ndof(self) -> int:
        return 2 * self.nnode

    @property
    def elem_dofs(self) -> np.ndarray:
        """``nelem x 12`` DOF table, x and y DOF of each node interleaved."""
        dofs = np.empty((self.nelem, 12), dtype=self.elem_nodes.dtype)
        dofs[:, 0::2] = 2 * self.elem_nodes
        dofs[:, 1::2] = 2 * self.elem_nodes + 1
        return dofs

    def element_area(self) -> float:
        """Geometric area of one hexagon (all elements are congruent)."""
        return 1.5 * math.sqrt(3.0) * self.params.edge**2

    def element_polygons(self) -> np.ndarray:
        """Vertex coordinates as an ``nelem x 6 x 2`` array, CCW order."""
        return self.coords[self.elem_nodes]


def _check(params) -> MeshParams:
    if not isinstance(params, MeshParams):
        params = MeshParams(*params)
    return params


def counts(params) -> tuple[int, int]:
    """Closed-form element and node counts of the tessellation."""
    p = _check(params)
    nelem = p.hnex * math.ceil(p.hney / 2) + (p.hnex - 1) * (p.hney // 2)
    nnode = (2 * p.hnex + 1) * (p.hney + 1)
    if p.hney % 2 == 0:
        nnode -= 2
    return nelem, nnode


def _raw_connectivity(hnex: int, hney: int):
    """Element rows, leftmost columns and node table before hanging-node removal."""
    ncol = 2 * hnex + 1
    per_row = np.where(np.arange(hney) % 2 == 0, hnex, hnex - 1)
    rows = np.repeat(np.arange(hney, dtype=np.int64), per_row)
    starts = np.concatenate(([0], np.cumsum(per_row)[:-1]))
    q = np.arange(rows.size, dtype=np.int64) - np.repeat(starts, per_row)
    left = 2 * q + (rows % 2)

    bottom = rows * ncol + left
    top = bottom + ncol
    # top-right, top-center, top-left, bottom-left, bottom-center, bottom-right
    nodes = np.stack([top + 2, top + 1, top, bottom, bottom + 1, bottom + 2], axis=1)
    return rows, left, nodes


def hanging_nodes(params) -> list[int]:
    """0-based indices of the unreferenced top corners (empty for odd ``hney``)."""
    p = _check(params)
    if p.hney % 2:
        return []
    ncol = 2 * p.hnex + 1
    return [p.hney * ncol, p.hney * ncol + ncol - 1]


def build_mesh(params) -> HexMesh:
    """Build node coordinates and CCW element connectivity for a honeycomb grid."""
    p = _check(params)
    a = p.edge
    ncol = 2 * p.hnex + 1
    nrow = p.hney + 1

    rows, left, nodes = _raw_connectivity(p.hnex, p.hney)

    r = np.repeat(np.arange(nrow, dtype=np.int64), ncol)
    j = np.tile(np.arange(ncol, dtype=np.int64), nrow)
    zig = np.where((r + j) % 2 == 0, 0.25, -0.25)
    coords = np.column_stack([j * (a * math.cos(math.pi / 6)), a * (1.5 * r + zig)])
    grid = np.column_stack([r, j])

    hang = hanging_nodes(p)
    if hang:
        keep = np.ones(nrow * ncol, dtype=bool)
        keep[hang] = False
        renumber = np.cumsum(keep) - 1
        nodes = renumber[nodes]
        coords = coords[keep]
        grid = grid[keep]

    dx = a * math.cos(math.pi / 6)
    centroids = np.column_stack([(left + 1) * dx, a * (1.5 * rows + 0.75)])
    return HexMesh(params=p, coords=coords, elem_nodes=nodes, centroids=centroids, node_grid=grid)


def centroids(mesh: HexMesh) -> np.ndarray:
    return mesh.centroids


def export_mesh(mesh: HexMesh, path) -> tuple[str, str]:
    """Write ``nodes.csv`` (id,x,y) and ``elements.csv`` (id,n1..n6) with 1-based ids."""
    os.makedirs(path, exist_ok=True)
    node_file = os.path.join(path, "nodes.csv")
    elem_file = os.path.join(path, "elements.csv")
    try:
        with open(node_file, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "x", "y"])
            for i, (x, y) in enumerate(mesh.coords, start=1):
                w.writerow([i, repr(float(x)), repr(float(y))])
        with open(elem_file, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "n1", "n2", "n3", "n4", "n5", "n6"])
            for i, row in enumerate(mesh.elem_nodes + 1, start=1):
                w.writerow([i, *row.tolist()])
    except OSError as exc:
        raise OSError(f"could not write mesh files to {path}: {exc}") from exc
    return node_file, elem_file
