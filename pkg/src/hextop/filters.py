"""Cone-weight neighbourhood filters and Heaviside projection."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

__all__ = [
    "FILTER_MODES",
    "FilterOperator",
    "HeavisideSpec",
    "build_filter",
    "FILTER_FORMS",
    "filter_density",
    "filter_sensitivity",
    "heaviside_project",
    "heaviside_derivative",
    "chain_sensitivities",
]

FILTER_MODES = ("none", "sens", "dens", "heaviside")
SENS_DELTA = 1e-3


@dataclass(frozen=True)
class FilterOperator:
    """``weights[i, j] = max(0, 1 - d_ij / rfill)`` and its row-normalised copy."""

    rfill: float
    weights: sp.csr_matrix
    rownorm: sp.csr_matrix
    rowsum: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def build_filter(centroids, rfill: float) -> FilterOperator:
    if not rfill > 0:
        raise ValueError(f"filter radius must be positive, got {rfill}")
    ct = np.asarray(centroids, dtype=float)
    n = ct.shape[0]
    pairs = cKDTree(ct).query_pairs(rfill, output_type="ndarray")
    i, j = pairs[:, 0], pairs[:, 1]
    d = np.linalg.norm(ct[i] - ct[j], axis=1)
    w = 1.0 - d / rfill
    keep = w > 0
    i, j, w = i[keep], j[keep], w[keep]
    diag = np.arange(n)
    rows = np.concatenate([diag, i, j])
    cols = np.concatenate([diag, j, i])
    vals = np.concatenate([np.ones(n), w, w])
    h = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    rowsum = np.asarray(h.sum(axis=1)).ravel()
    hs = sp.diags(1.0 / rowsum) @ h
    return FilterOperator(rfill=float(rfill), weights=h, rownorm=hs.tocsr(), rowsum=rowsum)


FILTER_FORMS = ("standard", "conservative")


def filter_density(op: FilterOperator, x, form: str = "standard") -> np.ndarray:
    """Weighted neighbourhood average ``Hs @ x``.

    ``form="conservative"`` applies ``Hs.T`` instead, which redistributes each
    element's material over its neighbourhood and keeps ``sum(x)`` exactly.
    """
    x = np.asarray(x, dtype=float)
    if form == "standard":
        return op.rownorm @ x
    if form == "conservative":
        return op.rownorm.T @ x
    raise ValueError(f"unknown filter form {form!r}; choose from {FILTER_FORMS}")


def filter_sensitivity(op: FilterOperator, x, dc, delta: float = SENS_DELTA) -> np.ndarray:
    """Density-weighted sensitivity average with a ``delta`` guard on small densities."""
    x = np.asarray(x, dtype=float)
    dc = np.asarray(dc, dtype=float)
    return (op.weights @ (x * dc)) / (np.maximum(delta, x) * op.rowsum)


@dataclass
class HeavisideSpec:
    beta: float = 1.0
    eta: float = 0.5
    betamax: float = 128.0
    double_every: int = 60

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("projection threshold eta must lie in [0, 1]")
        if self.beta <= 0 or self.betamax < self.beta:
            raise ValueError("need 0 < beta <= betamax")
        if self.double_every < 1:
            raise ValueError("double_every must be a positive iteration count")

    def advance(self, iteration: int) -> bool:
        """Double beta after every ``double_every``-th iteration while below the cap."""
        if iteration % self.double_every == 0 and self.beta < self.betamax:
            self.beta = min(2.0 * self.beta, self.betamax)
            return True
        return False


def _proj_den(beta, eta):
    return math.tanh(beta * eta) + math.tanh(beta * (1.0 - eta))


def heaviside_project(xtilde, spec: HeavisideSpec) -> np.ndarray:
    b, eta = spec.beta, spec.eta
    xt = np.asarray(xtilde, dtype=float)
    return (math.tanh(b * eta) + np.tanh(b * (xt - eta))) / _proj_den(b, eta)


def heaviside_derivative(xtilde, spec: HeavisideSpec) -> np.ndarray:
    b, eta = spec.beta, spec.eta
    xt = np.asarray(xtilde, dtype=float)
    # sech^2 via exp(-2|z|): 1 - tanh^2 cancels to 0 in the tails
    t = np.exp(-2.0 * np.abs(b * (xt - eta)))
    return b * 4.0 * t / (1.0 + t) ** 2 / _proj_den(b, eta)


def chain_sensitivities(op: FilterOperator | None, dc, dv, mode: str, x=None, xtilde=None,
                        spec: HeavisideSpec | None = None, form: str = "standard"):
    """Map sensitivities w.r.t. the physical field back to the design variables.

    ``x`` is the design field (needed by ``sens``), ``xtilde`` the filtered field
    (needed by ``heaviside``).  ``form`` must match the one used in
    :func:`filter_density`; the adjoint of ``Hs`` is ``Hs.T`` and vice versa.
    """
    if mode not in FILTER_MODES:
        raise ValueError(f"unknown filter mode {mode!r}; choose from {FILTER_MODES}")
    dc = np.asarray(dc, dtype=float)
    dv = np.asarray(dv, dtype=float)
    if mode == "none":
        return dc, dv
    if op is None:
        raise ValueError(f"filter mode {mode!r} needs a filter operator")
    if form not in FILTER_FORMS:
        raise ValueError(f"unknown filter form {form!r}; choose from {FILTER_FORMS}")
    hst = op.rownorm.T if form == "standard" else op.rownorm
    if mode == "sens":
        if x is None:
            raise ValueError("sensitivity filtering needs the design field x")
        return filter_sensitivity(op, x, dc), dv
    if mode == "dens":
        return hst @ dc, hst @ dv
    if spec is None:
        raise ValueError("heaviside mode needs a HeavisideSpec")
    if xtilde is None:
        raise ValueError("heaviside mode needs the filtered field xtilde")
    dh = heaviside_derivative(xtilde, spec)
    return hst @ (dc * dh), hst @ (dv * dh)
