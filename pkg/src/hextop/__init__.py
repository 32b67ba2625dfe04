"""Topology optimisation on honeycomb (regular hexagon) meshes."""
from .element import element_stiffness, quadrature, shape_functions, shape_gradients
from .fea import Material, assemble, compliance_and_sensitivity, solve
from .filters import HeavisideSpec, build_filter
from .mesh import HexMesh, MeshParams, build_mesh, counts, export_mesh
from .optimizer import OptConfig, RunState, oc_update, run
from .problems import PRESETS, get_problem, resolve

__version__ = "0.1.0"

__all__ = [
    "HexMesh", "MeshParams", "build_mesh", "counts", "export_mesh",
    "element_stiffness", "quadrature", "shape_functions", "shape_gradients",
    "Material", "assemble", "solve", "compliance_and_sensitivity",
    "HeavisideSpec", "build_filter",
    "OptConfig", "RunState", "oc_update", "run",
    "PRESETS", "get_problem", "resolve",
]
