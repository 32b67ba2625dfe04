"""Optimality-criteria loop for compliance minimisation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import fea
from .element import element_stiffness
from .filters import (
    FILTER_FORMS,
    FILTER_MODES,
    FilterOperator,
    HeavisideSpec,
    build_filter,
    chain_sensitivities,
    filter_density,
    heaviside_project,
)
from .mesh import HexMesh

__all__ = [
    "OptConfig",
    "BisectionError",
    "IterationRecord",
    "RunState",
    "oc_update",
    "initial_design",
    "physical_density",
    "run",
]

log = logging.getLogger(__name__)


class BisectionError(RuntimeError):
    pass


@dataclass
class OptConfig:
    volfrac: float = 0.5
    rfill: float | None = None
    filter: str = "sens"
    move: float | None = None  # 0.2, or 0.1 with heaviside
    maxiter: int = 200
    change_tol: float = 0.01
    lmin: float = 0.0
    lmax: float = 1e9
    bisection_tol: float = 1e-4
    heaviside: HeavisideSpec = field(default_factory=HeavisideSpec)
    nu: float = 0.29
    quadrature: str = "N25"
    # "conservative" filters with Hs.T so the filtered field keeps the design's volume
    filter_form: str = "conservative"

    def __post_init__(self):
        if not 0 < self.volfrac < 1:
            raise ValueError(f"volume fraction must lie in (0, 1), got {self.volfrac}")
        if self.filter not in FILTER_MODES:
            raise ValueError(f"unknown filter {self.filter!r}; choose from {FILTER_MODES}")
        if self.move is None:
            self.move = 0.1 if self.filter == "heaviside" else 0.2
        if not 0 < self.move <= 1:
            raise ValueError("move limit must lie in (0, 1]")
        if self.filter != "none" and (self.rfill is None or self.rfill <= 0):
            raise ValueError(f"filter {self.filter!r} needs a positive rfill")
        if self.filter_form not in FILTER_FORMS:
            raise ValueError(f"unknown filter form {self.filter_form!r}; choose from {FILTER_FORMS}")
        if self.maxiter < 1:
            raise ValueError("maxiter must be at least 1")
        if not 0 <= self.lmin < self.lmax:
            raise ValueError("need 0 <= lmin < lmax")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    compliance: float
    volume: float
    change: float
    beta: float
    lagrange: float

    def as_dict(self) -> dict:
        return {"iter": self.iteration, "compliance": self.compliance, "volume": self.volume,
                "change": self.change, "beta": self.beta}


@dataclass
class RunState:
    x: np.ndarray
    xtilde: np.ndarray
    xphys: np.ndarray
    iteration: int = 0
    compliance: float = float("nan")
    volume: float = float("nan")
    change: float = 1.0
    beta: float = 1.0
    lagrange: float = float("nan")
    history: list = field(default_factory=list)


def _mask(mask, nelem):
    if mask is None:
        return np.zeros(nelem, dtype=np.int8)
    m = np.asarray(mask).astype(np.int8)
    if m.shape != (nelem,):
        raise ValueError(f"passive mask must have {nelem} entries")
    if not np.all(np.isin(m, (-1, 0, 1))):
        raise ValueError("passive mask entries must be -1 (void), 0 (active) or 1 (solid)")
    if not np.any(m == 0):
        raise ValueError("passive mask leaves no active element")
    return m


def initial_design(nelem: int, volfrac: float, mask=None) -> np.ndarray:
    """Uniform start on the active set with the total material at ``volfrac * nelem``."""
    m = _mask(mask, nelem)
    act = m == 0
    x = np.zeros(nelem)
    x[m == 1] = 1.0
    x[act] = np.clip((volfrac * nelem - np.count_nonzero(m == 1)) / np.count_nonzero(act), 0.0, 1.0)
    return x


def physical_density(x, mode: str, op: FilterOperator | None, spec: HeavisideSpec | None, mask=None,
                     form: str = "standard"):
    """``(xtilde, xphys)`` for a design field under the given filter mode."""
    x = np.asarray(x, dtype=float)
    if mode in ("none", "sens"):
        xtilde = x.copy()
        xphys = x.copy()
    elif mode == "dens":
        xtilde = filter_density(op, x, form)
        xphys = xtilde.copy()
    else:
        xtilde = filter_density(op, x, form)
        xphys = heaviside_project(xtilde, spec)
    if mask is not None:
        xphys[mask == 1] = 1.0
        xphys[mask == -1] = 0.0
    return xtilde, xphys


def oc_update(x, dc, dv, cfg: OptConfig, mask=None, volume=None):
    """One optimality-criteria step; returns ``(x_new, lagrange)``.

    ``volume`` maps a candidate design to the constrained volume fraction and
    defaults to the plain mean.  The returned design is the one at the upper
    end of the final bisection bracket, so it never exceeds the target.
    """
    x = np.asarray(x, dtype=float)
    m = _mask(mask, x.size)
    act = m == 0
    if volume is None:
        volume = np.mean
    xa = x[act]
    grad = np.maximum(-np.asarray(dc, dtype=float)[act], 0.0)
    dva = np.asarray(dv, dtype=float)[act]
    lo = np.maximum(0.0, xa - cfg.move)
    hi = np.minimum(1.0, xa + cfg.move)
    base = x.copy()
    base[m == 1] = 1.0
    base[m == -1] = 0.0

    def trial(lam):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = grad / (lam * dva)
        ratio = np.nan_to_num(ratio, nan=0.0, posinf=np.inf)
        xn = base.copy()
        xn[act] = np.clip(xa * np.sqrt(ratio), lo, hi)
        return xn

    l1, l2 = cfg.lmin, cfg.lmax
    if volume(trial(l2)) > cfg.volfrac:
        raise BisectionError(f"volume target {cfg.volfrac} not reachable in Lagrange interval [{l1:g}, {l2:g}]")
    while (l2 - l1) / (l1 + l2) > cfg.bisection_tol:
        lmid = 0.5 * (l1 + l2)
        if volume(trial(lmid)) > cfg.volfrac:
            l1 = lmid
        else:
            l2 = lmid
    return trial(l2), l2


def run(mesh: HexMesh, loads, fixed_dofs, cfg: OptConfig, material: fea.Material | None = None,
        mask=None, k0=None, callback=None, solver_backend: str = "auto") -> RunState:
    """Optimise the density field; ``callback(state, record)`` fires after every iteration."""
    material = material or fea.Material()
    k0 = k0 if k0 is not None else element_stiffness(cfg.nu, cfg.quadrature)
    n = mesh.nelem
    m = _mask(mask, n)
    passive = None if not np.any(m) else m
    mode = cfg.filter
    op = build_filter(mesh.centroids, cfg.rfill) if mode != "none" else None
    spec = replace(cfg.heaviside) if mode == "heaviside" else None
    loads = fea.load_matrix(loads, mesh.ndof)
    solver = fea.ReducedSolver(mesh.ndof, fixed_dofs, solver_backend)

    x = initial_design(n, cfg.volfrac, m)
    xtilde, xphys = physical_density(x, mode, op, spec, passive, cfg.filter_form)
    state = RunState(x=x, xtilde=xtilde, xphys=xphys, beta=spec.beta if spec else 1.0)
    dv0 = fea.volume_sensitivity(n, cfg.volfrac)

    if mode == "heaviside":
        def volume(xn):
            return float(np.mean(physical_density(xn, mode, op, spec, passive, cfg.filter_form)[1]))
    else:
        volume = None

    for it in range(1, cfg.maxiter + 1):
        k = fea.assemble(mesh, xphys, material, k0)
        u = solver.solve(k, loads)
        c, dc = fea.compliance_and_sensitivity(mesh, u, xphys, material, k0)
        dc, dv = chain_sensitivities(op, dc, dv0, mode, x=x, xtilde=xtilde, spec=spec,
                                     form=cfg.filter_form)
        beta = spec.beta if spec else 1.0
        xnew, lam = oc_update(x, dc, dv, cfg, m, volume)
        change = float(np.max(np.abs(xnew - x)))
        x = xnew
        vol = volume(x) if volume else float(np.mean(x))
        rec = IterationRecord(it, c, vol, change, beta, lam)
        state.history.append(rec)
        if spec is not None:
            spec.advance(it)
        xtilde, xphys = physical_density(x, mode, op, spec, passive, cfg.filter_form)
        state.x, state.xtilde, state.xphys = x, xtilde, xphys
        state.iteration, state.compliance, state.volume = it, c, vol
        state.change, state.beta, state.lagrange = change, beta, lam
        if callback is not None:
            callback(state, rec)
        if change < cfg.change_tol:
            break
    return state
