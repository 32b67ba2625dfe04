"""Linear elastic analysis on a honeycomb mesh with SIMP interpolation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .element import ElementStiffness
from .mesh import HexMesh

__all__ = [
    "Material",
    "SolverError",
    "assemble",
    "solve",
    "compliance_and_sensitivity",
    "volume_sensitivity",
    "load_matrix",
    "ReducedSolver",
]

RESIDUAL_TOL = 1e-9


class SolverError(RuntimeError):
    """The reduced stiffness system could not be solved (usually ill-posed supports)."""


@dataclass(frozen=True)
class Material:
    e0: float = 1.0
    emin: float | None = None  # defaults to 1e-9 * e0
    penal: float = 3.0

    def __post_init__(self):
        if self.emin is None:
            object.__setattr__(self, "emin", 1e-9 * self.e0)
        if not (0 < self.emin < self.e0):
            raise ValueError("need 0 < emin < e0")
        if self.penal < 1:
            raise ValueError("penalisation exponent must be >= 1")

    def modulus(self, x):
        return self.emin + np.asarray(x) ** self.penal * (self.e0 - self.emin)

    def dmodulus(self, x):
        return self.penal * (self.e0 - self.emin) * np.asarray(x) ** (self.penal - 1)


def _k0(k0):
    return k0.k0 if isinstance(k0, ElementStiffness) else np.asarray(k0)


def assemble(mesh: HexMesh, xphys, mat: Material, k0) -> sp.csc_matrix:
    """Global stiffness ``sum_j E(x_j) k0`` scattered through ``mesh.elem_dofs``."""
    xphys = np.asarray(xphys, dtype=float)
    if xphys.shape != (mesh.nelem,):
        raise ValueError(f"expected {mesh.nelem} densities, got shape {xphys.shape}")
    ke = _k0(k0)
    dofs = mesh.elem_dofs
    ik = np.repeat(dofs, 12, axis=1).ravel()
    jk = np.tile(dofs, (1, 12)).ravel()
    sk = (mat.modulus(xphys)[:, None] * ke.ravel()[None, :]).ravel()
    k = sp.coo_matrix((sk, (ik, jk)), shape=(mesh.ndof, mesh.ndof)).tocsc()
    k.sum_duplicates()
    return k


def load_matrix(loads, ndof: int) -> np.ndarray:
    f = np.asarray(loads, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] != ndof:
        raise ValueError(f"load vector length {f.shape[0]} does not match {ndof} DOFs")
    return f


def _cholmod():
    try:
        from cvxopt import cholmod, matrix, spmatrix
    except ImportError:  # pragma: no cover - depends on the environment
        return None
    return cholmod, matrix, spmatrix


class ReducedSolver:
    """Direct solver for ``K_ff u_f = f_f`` that keeps the fill-reducing analysis.

    The sparsity pattern of the stiffness matrix is fixed for a mesh, so the
    symbolic factorisation is done once and only the numeric factorisation is
    repeated.  CHOLMOD (through cvxopt) is used when available, SuperLU otherwise.
    """

    def __init__(self, ndof: int, fixed_dofs, backend: str = "auto"):
        fixed = np.unique(np.asarray(fixed_dofs, dtype=np.int64))
        if fixed.size == 0:
            raise SolverError("no supports given; the structure is free to move")
        if fixed.min() < 0 or fixed.max() >= ndof:
            raise ValueError("fixed DOF index out of range")
        self.ndof = ndof
        self.fixed = fixed
        self.free = np.setdiff1d(np.arange(ndof), fixed)
        if backend == "auto":
            backend = "cholmod" if _cholmod() is not None else "superlu"
        if backend not in ("cholmod", "superlu"):
            raise ValueError(f"unknown solver backend {backend!r}")
        if backend == "cholmod" and _cholmod() is None:
            raise ValueError("cholmod backend needs cvxopt")
        self.backend = backend
        self._symbolic = None

    def _factor_solve(self, kff, ff):
        if self.backend == "superlu":
            try:
                lu = spla.splu(kff.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                               options={"SymmetricMode": True})
            except RuntimeError as exc:
                raise SolverError(f"reduced stiffness matrix is singular: {exc}") from exc
            return lu.solve
        cholmod, matrix, spmatrix = _cholmod()
        low = sp.tril(kff, format="coo")
        a = spmatrix(matrix(low.data), matrix(low.row.astype(int)), matrix(low.col.astype(int)), low.shape)
        try:
            if self._symbolic is None:
                self._symbolic = cholmod.symbolic(a)
            cholmod.numeric(a, self._symbolic)
        except ArithmeticError as exc:
            raise SolverError("reduced stiffness matrix is not positive definite; check supports") from exc
        factor = self._symbolic

        def apply(rhs):
            b = matrix(np.array(rhs, dtype=float, order="F"))
            cholmod.solve(factor, b)
            return np.array(b).reshape(rhs.shape)

        return apply

    def solve(self, k, loads) -> np.ndarray:
        f = load_matrix(loads, self.ndof)
        u = np.zeros_like(f)
        ff = f[self.free]
        if not np.any(ff):
            return u if np.ndim(loads) == 2 else u[:, 0]
        kff = k[self.free][:, self.free].tocsr()
        apply = self._factor_solve(kff, ff)
        uf = apply(ff)
        if not np.all(np.isfinite(uf)):
            raise SolverError("non-finite displacements; check supports")
        res = relative_residual(kff, uf, ff)
        if np.any(res > RESIDUAL_TOL):
            # one refinement step usually recovers the lost digits
            uf = uf + apply(ff - kff @ uf)
            res = relative_residual(kff, uf, ff)
            if np.any(res > RESIDUAL_TOL):
                raise SolverError(
                    f"relative residual {res.max():.2e} exceeds {RESIDUAL_TOL:g}; supports may be ill-posed")
        self.last_residual = float(res.max())
        u[self.free] = uf
        return u if np.ndim(loads) == 2 else u[:, 0]


def relative_residual(kff, uf, ff) -> np.ndarray:
    """Per-column ``||K u - f|| / ||f||`` (zero columns report 0)."""
    num = np.linalg.norm(kff @ uf - ff, axis=0)
    den = np.linalg.norm(ff, axis=0)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def solve(k, loads, fixed_dofs, backend: str = "auto") -> np.ndarray:
    """Solve ``K u = f`` with ``u = 0`` on ``fixed_dofs``; one column per load case.

    Returns an array shaped like ``loads``.
    """
    return ReducedSolver(k.shape[0], fixed_dofs, backend).solve(k, loads)


def element_energies(mesh: HexMesh, u, k0) -> np.ndarray:
    """``u_j^T k0 u_j`` per element, summed over load cases."""
    ke = _k0(k0)
    u = np.asarray(u)
    if u.ndim == 1:
        u = u[:, None]
    dofs = mesh.elem_dofs
    ce = np.zeros(mesh.nelem)
    for col in u.T:
        ue = col[dofs]
        ce += np.einsum("ij,jk,ik->i", ue, ke, ue)
    return ce


def compliance_and_sensitivity(mesh: HexMesh, u, xphys, mat: Material, k0):
    """Compliance summed over load cases and its derivative w.r.t. ``xphys``."""
    xphys = np.asarray(xphys, dtype=float)
    ce = element_energies(mesh, u, k0)
    c = float(np.sum(mat.modulus(xphys) * ce))
    dc = -mat.dmodulus(xphys) * ce
    return c, dc


def volume_sensitivity(nelem: int, volfrac: float) -> np.ndarray:
    if not 0 < volfrac <= 1:
        raise ValueError("volume fraction must lie in (0, 1]")
    return np.full(nelem, 1.0 / (nelem * volfrac))
