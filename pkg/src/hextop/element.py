"""Wachspress hexagonal element.

The reference hexagon has circumradius 1 and vertices
``V_i = (cos((2i-1)pi/6), sin((2i-1)pi/6))``, i.e. the same counter-clockwise
order (top-right first) as the rows of ``HexMesh.elem_nodes``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "REF_AREA",
    "VERTICES",
    "QuadratureRule",
    "ElementStiffness",
    "shape_functions",
    "shape_gradients",
    "quadrature",
    "integrate",
    "element_stiffness",
    "plane_stress",
]

SQ3 = math.sqrt(3.0)
REF_AREA = 1.5 * SQ3
VERTICES = np.array(
    [[math.cos((2 * i - 1) * math.pi / 6), math.sin((2 * i - 1) * math.pi / 6)] for i in range(1, 7)]
)

# Edge lines l_k = A*eta1 + B*eta2 + C; l_k passes through V_k and V_{k-1}.
_LINES = np.array(
    [
        [1.0, SQ3, -SQ3],
        [-1.0, SQ3, -SQ3],
        [2.0, 0.0, SQ3],
        [1.0, SQ3, SQ3],
        [-1.0, SQ3, SQ3],
        [2.0, 0.0, -SQ3],
    ]
)
# N_i uses the four lines that do not pass through V_i (0-based line ids).
_FACTORS = np.array([[(i + k) % 6 for k in range(1, 5)] for i in range(6)])
_SCALE = np.array([1, 1, -1, 1, 1, -1]) / 18.0


def _as_points(eta):
    pts = np.asarray(eta, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != 2:
        raise ValueError("reference points must have two coordinates")
    circle = pts[:, 0] ** 2 + pts[:, 1] ** 2 - 3.0
    if np.any(circle >= 0.0):
        raise ValueError("point lies outside the circle eta1^2 + eta2^2 < 3")
    return pts, circle, single


def _line_values(pts):
    return pts @ _LINES[:, :2].T + _LINES[:, 2]


def shape_functions(eta) -> np.ndarray:
    """Evaluate N_1..N_6 at one point ``(2,)`` or many points ``(n, 2)``."""
    pts, circle, single = _as_points(eta)
    lv = _line_values(pts)
    num = np.prod(lv[:, _FACTORS], axis=2)
    out = _SCALE * num / circle[:, None]
    return out[0] if single else out


def shape_gradients(eta) -> np.ndarray:
    """Derivatives dN_i/deta as ``(6, 2)`` for one point or ``(n, 6, 2)`` for many."""
    pts, circle, single = _as_points(eta)
    lv = _line_values(pts)
    f = lv[:, _FACTORS]  # (n, 6, 4)
    num = np.prod(f, axis=2)
    dnum = np.zeros(f.shape[:2] + (2,))
    for k in range(4):
        others = np.prod(np.delete(f, k, axis=2), axis=2)
        dnum += others[..., None] * _LINES[_FACTORS[:, k], :2][None, :, :]
    dcircle = 2.0 * pts
    grad = (dnum * circle[:, None, None] - num[..., None] * dcircle[:, None, :]) / circle[:, None, None] ** 2
    grad *= _SCALE[None, :, None]
    return grad[0] if single else grad


@dataclass(frozen=True)
class QuadratureRule:
    """60-degree symmetric rule: a centre point plus rings of six points."""

    label: str
    center_weight: float
    rings: tuple  # ((radius, angle, weight), ...)

    @property
    def npoints(self) -> int:
        return 1 + 6 * len(self.rings)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Expanded ``(npoints, 2)`` coordinates and ``(npoints,)`` weights."""
        pts = [(0.0, 0.0)]
        wts = [self.center_weight]
        for r, alpha, w in self.rings:
            for i in range(1, 7):
                t = alpha + i * math.pi / 3
                pts.append((r * math.cos(t), r * math.sin(t)))
                wts.append(w)
        return np.array(pts), np.array(wts)


# Centre weight plus (radius, angle, weight) per ring.  The N13 outer ring
# (radius, angle) and the N25 outer-ring weight are the values that make the
# rules exact to degree 7 and 11; the other entries are the usual tabulated ones.
_RULES = {
    "N7": (0.255952380952381, ((0.748331477354788, 0.0, 0.124007936507936),)),
    "N13": (
        0.174588684325077,
        (
            (0.657671808727194, 0.0, 0.115855303626943),
            (0.943605629506383, 0.523598775598299, 0.021713248985544),
        ),
    ),
    "N19": (
        0.110826547228661,
        (
            (0.792824967172091, 0.0, 0.037749166510143),
            (0.537790663359878, 0.523598775598299, 0.082419705350590),
            (0.883544457934942, 0.523598775598299, 0.028026703601157),
        ),
    ),
    "N25": (
        0.087005549094808,
        (
            (0.487786213872069, 0.0, 0.071957468118574),
            (0.820741657108524, 0.0, 0.027500185650866),
            (0.771806696813652, 0.523598775598299, 0.045248932131663),
            (0.957912268790000, 0.523598775598299, 0.007459155916426),
        ),
    ),
}


# Printed values that fail the moment equations, kept for comparison.
_MISPRINTS = {
    "N13": {"ring": 1, "radius": 0.943650632725263, "angle": 0.523681372148045},
    "N25": {"ring": 3, "weight": 0.007459892497607},
}


def quadrature(label: str = "N25") -> QuadratureRule:
    """Hexagon rule ``N7``, ``N13``, ``N19`` or ``N25`` (1 + 6k points, exact to degree 5, 7, 9, 11)."""
    try:
        w0, rings = _RULES[label.upper()]
    except KeyError:
        raise ValueError(f"unknown quadrature rule {label!r}; choose from {sorted(_RULES)}") from None
    return QuadratureRule(label.upper(), w0, rings)


def misprinted_quadrature(label: str) -> QuadratureRule:
    """The rule with its commonly printed (inexact) entries restored."""
    rule = quadrature(label)
    fix = _MISPRINTS.get(rule.label)
    if fix is None:
        return rule
    rings = [list(r) for r in rule.rings]
    k = fix["ring"]
    rings[k][0] = fix.get("radius", rings[k][0])
    rings[k][1] = fix.get("angle", rings[k][1])
    rings[k][2] = fix.get("weight", rings[k][2])
    return QuadratureRule(rule.label, rule.center_weight, tuple(tuple(r) for r in rings))


def integrate(rule: QuadratureRule, f, area: float = REF_AREA) -> float:
    """Approximate the integral of ``f(eta1, eta2)`` over a hexagon of the given area.

    ``f`` is called once with coordinate arrays and must broadcast.
    """
    pts, wts = rule.points()
    vals = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
    vals = np.broadcast_to(vals, wts.shape)
    return float(area * np.dot(wts, vals))


def plane_stress(nu: float, e: float = 1.0) -> np.ndarray:
    return e / (1.0 - nu**2) * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, (1.0 - nu) / 2.0]])


def strain_displacement(grad: np.ndarray) -> np.ndarray:
    """3 x 12 B matrix from physical shape-function gradients ``(6, 2)``."""
    b = np.zeros((3, 12))
    b[0, 0::2] = grad[:, 0]
    b[1, 1::2] = grad[:, 1]
    b[2, 0::2] = grad[:, 1]
    b[2, 1::2] = grad[:, 0]
    return b


@dataclass(frozen=True)
class ElementStiffness:
    k0: np.ndarray
    nu: float
    rule: str


def element_stiffness(nu: float = 0.29, rule="N25", edge: float = 1.0 / SQ3) -> ElementStiffness:
    """Unit-modulus, unit-thickness plane-stress stiffness of a regular hexagon.

    The map from the reference hexagon is ``x = edge * eta + centre`` so the
    Jacobian is ``edge * I``.  ``edge`` cancels analytically and is kept only so
    the independence can be checked.
    """
    if not 0.0 <= nu < 0.5:
        raise ValueError(f"Poisson ratio must lie in [0, 0.5), got {nu}")
    if edge <= 0:
        raise ValueError("edge length must be positive")
    if isinstance(rule, str):
        rule = quadrature(rule)
    d = plane_stress(nu)
    pts, wts = rule.points()
    grads = shape_gradients(pts) / edge
    area = REF_AREA * edge**2
    k0 = np.zeros((12, 12))
    for g, w in zip(grads, wts):
        b = strain_displacement(g)
        k0 += w * (b.T @ d @ b)
    k0 *= area
    k0 = 0.5 * (k0 + k0.T)
    return ElementStiffness(k0=k0, nu=nu, rule=rule.label)
