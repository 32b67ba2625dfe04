"""Run artifacts: density CSV, JSONL history, summary and SVG rendering."""
from __future__ import annotations

import json
import math
import os

import numpy as np

from .mesh import HexMesh

__all__ = ["gray_level", "render_svg", "write_densities", "write_history", "write_summary", "write_matrix_csv"]


def gray_level(rho: float) -> int:
    """8-bit channel value for density ``rho`` (1 -> black), rounded half up."""
    v = 255.0 * (1.0 - min(max(float(rho), 0.0), 1.0))
    return int(math.floor(v + 0.5))


def render_svg(mesh: HexMesh, xphys, path) -> str:
    """Write one grey-filled polygon per element; the y axis points up."""
    xphys = np.asarray(xphys, dtype=float)
    if xphys.shape != (mesh.nelem,):
        raise ValueError(f"expected {mesh.nelem} densities, got shape {xphys.shape}")
    xy = mesh.coords
    xmin, ymin = xy.min(axis=0)
    xmax, ymax = xy.max(axis=0)
    mx = 0.01 * (xmax - xmin)
    my = 0.01 * (ymax - ymin)
    vb = (xmin - mx, -(ymax + my), (xmax - xmin) + 2 * mx, (ymax - ymin) + 2 * my)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6f} {:.6f} {:.6f} {:.6f}">'.format(*vb),
        '<g stroke="none">',
    ]
    for poly, rho in zip(mesh.element_polygons(), xphys):
        g = gray_level(rho)
        pts = " ".join(f"{px:.6f},{-py:.6f}" for px, py in poly)
        lines.append(f'<polygon points="{pts}" fill="#{g:02x}{g:02x}{g:02x}"/>')
    lines += ["</g>", "</svg>", ""]
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines))
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc
    return str(path)


def write_densities(xphys, path) -> None:
    with open(path, "w") as fh:
        for v in np.asarray(xphys, dtype=float):
            fh.write(f"{float(v)!r}\n")


def write_history(records, path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.as_dict()) + "\n")


def write_summary(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_matrix_csv(a, path) -> None:
    """Dense matrix dump with full double precision (e.g. the element stiffness)."""
    np.savetxt(path, np.asarray(a), delimiter=",", fmt="%.17g")


def ensure_dir(path) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"could not create output directory {path}: {exc}") from exc
    return str(path)
