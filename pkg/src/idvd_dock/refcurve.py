"""
Virtual-domain reference curves.

Each spatial axis is a quintic plus two sine terms,

    x(s) = sum_{k<=5} a_k s^k + b1 sin(pi s) + b2 sin(2 pi s),   s in [0, 1],

and yaw is a plain quintic. ``s`` is the normalized virtual argument
tau / tau_f; boundary derivatives are supplied already scaled by powers of
tau_f, so chain-rule factors are the caller's business (see ``invdyn``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .model import DomainError

PI = math.pi

# Rows: value, 1st, 2nd, 3rd derivative at s=0, then the same at s=1.
SPATIAL_MATRIX = np.array([
    [1, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, PI, 2 * PI],
    [0, 0, 2, 0, 0, 0, 0, 0],
    [0, 0, 0, 6, 0, 0, -PI ** 3, -8 * PI ** 3],
    [1, 1, 1, 1, 1, 1, 0, 0],
    [0, 1, 2, 3, 4, 5, -PI, 2 * PI],
    [0, 0, 2, 6, 12, 20, 0, 0],
    [0, 0, 0, 6, 24, 60, PI ** 3, -8 * PI ** 3],
], dtype=float)

# Rows: value, 1st, 2nd derivative at s=0, then at s=1.
YAW_MATRIX = np.array([
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 2, 0, 0, 0],
    [1, 1, 1, 1, 1, 1],
    [0, 1, 2, 3, 4, 5],
    [0, 0, 2, 6, 12, 20],
], dtype=float)

_SPATIAL_LU = lu_factor(SPATIAL_MATRIX)
_YAW_LU = lu_factor(YAW_MATRIX)

# Number of basis functions fixed by the boundary derivative orders: d0 + df + 1
# with d0 = df = 3 counted from zero (value..jerk) gives 8 spatial terms.
SPATIAL_TERMS = 8
YAW_TERMS = 6


def basis_order(d0: int, df: int) -> int:
    """Polynomial order needed to meet boundary derivatives up to ``d0`` and ``df``."""
    return d0 + df + 1


def matrix_sanity(tol: float = 1e-8) -> tuple[float, float]:
    """Determinants of the spatial and yaw boundary matrices; raise if either is singular."""
    det_spatial = float(np.linalg.det(SPATIAL_MATRIX))
    det_yaw = float(np.linalg.det(YAW_MATRIX))
    for name, det in (("spatial", det_spatial), ("yaw", det_yaw)):
        if not abs(det) > tol:
            raise DomainError(f"{name} boundary matrix is numerically singular (det={det})")
    return det_spatial, det_yaw


def _poly_basis(s: np.ndarray, order: int, degree: int) -> np.ndarray:
    """Columns d^order/ds^order of s^k for k = 0..degree."""
    cols = []
    for k in range(degree + 1):
        if k < order:
            cols.append(np.zeros_like(s))
        else:
            coef = math.perm(k, order)
            cols.append(coef * s ** (k - order))
    return np.stack(cols, axis=-1)


def _trig_basis(s: np.ndarray, order: int) -> np.ndarray:
    cols = []
    for m in (1, 2):
        w = m * PI
        # derivative n of sin(w s) is w^n sin(w s + n pi/2)
        cols.append(w ** order * np.sin(w * s + order * PI / 2))
    return np.stack(cols, axis=-1)


def _check_domain(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(s < 0.0) or np.any(s > 1.0):
        raise DomainError("normalized argument must lie in [0, 1]")
    return s


def spatial_basis(s, order: int) -> np.ndarray:
    """Row(s) of the 8 spatial basis functions differentiated ``order`` times."""
    if not 0 <= order <= 3:
        raise DomainError("spatial derivative order must be 0..3")
    s = _check_domain(s)
    return np.concatenate([_poly_basis(s, order, 5), _trig_basis(s, order)], axis=-1)


def yaw_basis(s, order: int) -> np.ndarray:
    if not 0 <= order <= 2:
        raise DomainError("yaw derivative order must be 0..2")
    s = _check_domain(s)
    return _poly_basis(s, order, 5)


@lru_cache(maxsize=32)
def grid_basis(node_count: int, order: int, kind: str = "spatial") -> np.ndarray:
    """Basis rows on the uniform grid ``linspace(0, 1, node_count)``; read-only, cached."""
    s = np.linspace(0.0, 1.0, node_count)
    b = spatial_basis(s, order) if kind == "spatial" else yaw_basis(s, order)
    b.flags.writeable = False
    return b


@dataclass(frozen=True)
class SpatialAxisCurve:
    a: tuple[float, ...]
    b1: float
    b2: float

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([*self.a, self.b1, self.b2])

    def __call__(self, s, order: int = 0):
        return spatial_basis(s, order) @ self.coefficients


@dataclass(frozen=True)
class YawCurve:
    a: tuple[float, ...]

    @property
    def coefficients(self) -> np.ndarray:
        return np.array(self.a)

    def __call__(self, s, order: int = 0):
        return yaw_basis(s, order) @ self.coefficients


def spatial_rhs(p0, v0, a0, j0, pf, vf, af, jf, tau_f):
    """Right-hand side for one axis (or stacked axes when inputs are arrays)."""
    t = tau_f
    return np.array([p0, v0 * t, a0 * t ** 2, j0 * t ** 3, pf, vf * t, af * t ** 2, jf * t ** 3], dtype=float)


def yaw_rhs(y0, r0, c0, yf, rf, cf, tau_f):
    t = tau_f
    return np.array([y0, r0 * t, c0 * t ** 2, yf, rf * t, cf * t ** 2], dtype=float)


def solve_spatial_axis(rhs, tau_f: float | None = None) -> SpatialAxisCurve:
    """
    Solve the constant 8x8 boundary system for one axis.

    ``rhs`` is the already scaled vector from :func:`spatial_rhs`; ``tau_f`` is
    accepted only for validation.
    """
    if tau_f is not None and not tau_f > 0:
        raise DomainError("tau_f must be > 0")
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (8,) or not np.all(np.isfinite(rhs)):
        raise DomainError("spatial right-hand side must be 8 finite values")
    c = lu_solve(_SPATIAL_LU, rhs)
    return SpatialAxisCurve(tuple(c[:6]), float(c[6]), float(c[7]))


def solve_yaw(rhs, tau_f: float | None = None) -> YawCurve:
    if tau_f is not None and not tau_f > 0:
        raise DomainError("tau_f must be > 0")
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (6,) or not np.all(np.isfinite(rhs)):
        raise DomainError("yaw right-hand side must be 6 finite values")
    return YawCurve(tuple(lu_solve(_YAW_LU, rhs)))


@dataclass(frozen=True)
class ReferenceCurve:
    x: SpatialAxisCurve
    y: SpatialAxisCurve
    z: SpatialAxisCurve
    yaw: YawCurve
    tau_f: float

    def __post_init__(self):
        if not (math.isfinite(self.tau_f) and self.tau_f > 0):
            raise DomainError("tau_f must be > 0")

    def spatial_coefficients(self) -> np.ndarray:
        """(8, 3) coefficient matrix, one column per axis."""
        return np.stack([self.x.coefficients, self.y.coefficients, self.z.coefficients], axis=1)

    def position(self, s, order: int = 0) -> np.ndarray:
        """Spatial values (or s-derivatives), shape (..., 3)."""
        return spatial_basis(s, order) @ self.spatial_coefficients()

    def heading(self, s, order: int = 0):
        return self.yaw(s, order)

    def on_grid(self, node_count: int, order: int) -> tuple[np.ndarray, np.ndarray | None]:
        """Same as :func:`evaluate` on the uniform grid, using cached bases."""
        xyz = grid_basis(node_count, order) @ self.spatial_coefficients()
        yaw = grid_basis(node_count, order, "yaw") @ self.yaw.coefficients if order <= 2 else None
        return xyz, yaw


def evaluate(curve: ReferenceCurve, s, order: int = 0):
    """
    Evaluate all reference functions at normalized argument ``s``.

    Returns ``(xyz, yaw)`` where ``yaw`` is None for ``order == 3`` (the yaw
    quintic only carries boundary data up to second order).
    """
    xyz = curve.position(s, order)
    yaw = curve.heading(s, order) if order <= 2 else None
    return xyz, yaw


def build_curve(p0, v0, a0, j0, pf, vf, af, jf, yaw_bc, tau_f: float) -> ReferenceCurve:
    """
    Solve all four reference functions in one go.

    Spatial arguments are length-3 arrays (north, east, down) of time-domain
    boundary derivatives; ``yaw_bc`` is ``(yaw0, rate0, accel0, yawf, ratef, accelf)``.
    """
    if not (math.isfinite(tau_f) and tau_f > 0):
        raise DomainError("tau_f must be > 0")
    rhs = spatial_rhs(*(np.asarray(v, dtype=float) for v in (p0, v0, a0, j0, pf, vf, af, jf)), tau_f)
    if not np.all(np.isfinite(rhs)):
        raise DomainError("non-finite boundary data")
    c = lu_solve(_SPATIAL_LU, rhs)
    axes = [SpatialAxisCurve(tuple(c[:6, i]), float(c[6, i]), float(c[7, i])) for i in range(3)]
    yaw = solve_yaw(yaw_rhs(*yaw_bc, tau_f))
    return ReferenceCurve(*axes, yaw, float(tau_f))
