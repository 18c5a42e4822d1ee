"""Discrete divergence of projection fields and the diagnostics built on it.

With ``P = 1/2 (I + Q)`` and ``Q = [[q1, q2], [q2, -q1]]`` the divergence
``(div P)_i = sum_j d_j P_ij`` reads

    div P = 1/2 (dx q1 + dy q2,  dx q2 - dy q1).

Derivatives use central differences where both neighbours are interior and
second-order one-sided differences otherwise. Cells without three aligned
interior cells in some direction raise :class:`MaskTooThin`.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import MaskTooThin, MissingNormals, SegmentLeavesDomain
from .geometry import Grid, TubularDomain
from .linefield import ProjectionField, projection_from_q

_OPERATORS: "weakref.WeakKeyDictionary[Grid, tuple]" = weakref.WeakKeyDictionary()


def _derivative_matrix(mask: np.ndarray, h: float, axis: int) -> sp.csr_matrix:
    ny, nx = mask.shape
    index = -np.ones(mask.shape, dtype=np.int64)
    index[mask] = np.arange(mask.sum())
    pad = np.pad(index, 2, constant_values=-1)
    jj, ii = np.nonzero(mask)
    jp, ip = jj + 2, ii + 2
    if axis == 1:
        def nb(k):
            return pad[jp, ip + k]
    else:
        def nb(k):
            return pad[jp + k, ip]
    me = index[jj, ii]
    m1, p1, m2, p2 = nb(-1), nb(1), nb(-2), nb(2)
    central = (m1 >= 0) & (p1 >= 0)
    forward = ~central & (p1 >= 0) & (p2 >= 0)
    backward = ~central & ~forward & (m1 >= 0) & (m2 >= 0)
    bad = ~(central | forward | backward)
    if np.any(bad):
        j, i = jj[bad][0], ii[bad][0]
        raise MaskTooThin(f"cell {(int(j), int(i))} has no admissible stencil along axis {axis}")
    rows, cols, vals = [], [], []

    def add(sel, col, c):
        rows.append(me[sel])
        cols.append(col[sel])
        vals.append(np.full(int(sel.sum()), c / (2 * h)))

    add(central, m1, -1.0)
    add(central, p1, 1.0)
    add(forward, me, -3.0)
    add(forward, p1, 4.0)
    add(forward, p2, -1.0)
    add(backward, me, 3.0)
    add(backward, m1, -4.0)
    add(backward, m2, 1.0)
    n = len(me)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def derivative_operators(grid: Grid):
    """Sparse ``(Dx, Dy)`` acting on interior values in row-major order."""
    ops = _OPERATORS.get(grid)
    if ops is None:
        ops = (_derivative_matrix(grid.mask, grid.h, 1), _derivative_matrix(grid.mask, grid.h, 0))
        _OPERATORS[grid] = ops
    return ops


@dataclass(frozen=True, eq=False)
class VectorGridField:
    """Cell values ``(ny, nx, 2)``, zero outside the mask."""

    grid: Grid
    values: np.ndarray

    @property
    def interior(self):
        return self.values[self.grid.mask]

    def norm(self):
        return np.linalg.norm(self.values, axis=-1)


def _scatter(grid: Grid, v_int: np.ndarray) -> np.ndarray:
    out = np.zeros(grid.mask.shape + (2,))
    out[grid.mask] = v_int
    return out


def divergence_interior(grid: Grid, q_int: np.ndarray) -> np.ndarray:
    Dx, Dy = derivative_operators(grid)
    q1, q2 = q_int[:, 0], q_int[:, 1]
    return 0.5 * np.stack([Dx @ q1 + Dy @ q2, Dx @ q2 - Dy @ q1], axis=1)


def apply_projection(q_int: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``P v`` per cell with ``P = 1/2 (I + Q)``."""
    q1, q2 = q_int[:, 0], q_int[:, 1]
    v1, v2 = v[:, 0], v[:, 1]
    return 0.5 * np.stack([v1 + q1 * v1 + q2 * v2, v2 + q2 * v1 - q1 * v2], axis=1)


def divergence(field: ProjectionField) -> VectorGridField:
    return VectorGridField(field.grid, _scatter(field.grid, divergence_interior(field.grid, field.interior)))


@dataclass(frozen=True, eq=False)
class ResidualReport:
    residual: VectorGridField
    l2: float
    linf: float
    trace: float
    h: float

    def to_json(self) -> dict:
        return {"l2": self.l2, "linf": self.linf, "trace": self.trace, "h": self.h}


def residual(field: ProjectionField) -> ResidualReport:
    """``P div P`` with its grid L2 and max norms and the boundary trace."""
    grid = field.grid
    q = field.interior
    R = apply_projection(q, divergence_interior(grid, q))
    mag = np.linalg.norm(R, axis=1)
    l2 = float(np.sqrt(np.sum(mag**2) * grid.h**2))
    linf = float(mag.max()) if len(mag) else 0.0
    return ResidualReport(VectorGridField(grid, _scatter(grid, R)), l2, linf,
                          boundary_trace(field), grid.h)


def lp_div_norm(field: ProjectionField, p: float, exclude_core=None) -> float:
    """``sum |div P|^p h^2`` over interior cells.

    ``exclude_core=(center, radius)`` drops cells whose centres lie within
    ``radius`` of ``center``; by default nothing is excluded.
    """
    if not 1.0 <= p <= 4.0:
        raise ValueError("p must lie in [1, 4]")
    grid = field.grid
    mag = np.linalg.norm(divergence_interior(grid, field.interior), axis=1)
    if exclude_core is not None:
        center, radius = exclude_core
        c = grid.centers()[grid.mask]
        mag = mag[np.hypot(*(c - np.asarray(center)).T) >= radius]
    return float(np.sum(mag**p) * grid.h**2)


def energy_G0(field: ProjectionField) -> float:
    """Gamma-limit energy ``1/8 int |div P|^2``."""
    return lp_div_norm(field, 2.0) / 8.0


def trace_density(field: ProjectionField):
    """``|P n|`` on each boundary cell, with the cell quadrature weights."""
    grid = field.grid
    n = grid.boundary_normals
    if n is None or len(n) != len(grid.boundary_cells) or not np.all(np.isfinite(n)):
        raise MissingNormals("grid carries no boundary normals")
    cells = grid.boundary_cells
    q = field.q[cells[:, 0], cells[:, 1]]
    Pn = apply_projection(q, n)
    return np.linalg.norm(Pn, axis=1), grid.boundary_weights


def boundary_trace(field: ProjectionField) -> float:
    """Boundary integral of ``|P n|``."""
    dens, w = trace_density(field)
    return float(np.sum(dens * w))


def exact_solution(tube: TubularDomain, grid: Grid) -> ProjectionField:
    """The unique solution on a tube: projection onto the tangent of the
    nearest point of the centre curve."""
    c = grid.centers()[grid.mask]
    t = tube.curve.nearest_t(c)
    tang = tube.curve.frame_at_t(t)[1]
    q = np.stack([tang[:, 0] ** 2 - tang[:, 1] ** 2, 2 * tang[:, 0] * tang[:, 1]], axis=1)
    return ProjectionField.from_interior(grid, q)


def frobenius_distance(q_a, q_b):
    """``||P_a - P_b||_F`` computed from double-angle vectors."""
    return np.linalg.norm(np.asarray(q_a) - np.asarray(q_b), axis=-1) / np.sqrt(2.0)


def _interpolate_q(field: ProjectionField, points):
    """Bilinear interpolation of ``q``; ``None`` rows where the 4-cell stencil
    is not entirely interior."""
    grid = field.grid
    ny, nx = grid.shape
    fx = (points[:, 0] - grid.origin[0]) / grid.h - 0.5
    fy = (points[:, 1] - grid.origin[1]) / grid.h - 0.5
    i0 = np.floor(fx).astype(int)
    j0 = np.floor(fy).astype(int)
    wx, wy = fx - i0, fy - j0
    ok = (i0 >= 0) & (i0 + 1 < nx) & (j0 >= 0) & (j0 + 1 < ny)
    i0c, j0c = np.clip(i0, 0, nx - 2), np.clip(j0, 0, ny - 2)
    m = grid.mask
    ok &= m[j0c, i0c] & m[j0c, i0c + 1] & m[j0c + 1, i0c] & m[j0c + 1, i0c + 1]
    q = field.q
    val = ((1 - wx) * (1 - wy))[:, None] * q[j0c, i0c] + (wx * (1 - wy))[:, None] * q[j0c, i0c + 1] \
        + ((1 - wx) * wy)[:, None] * q[j0c + 1, i0c] + (wx * wy)[:, None] * q[j0c + 1, i0c + 1]
    val /= np.maximum(np.linalg.norm(val, axis=1), 1e-300)[:, None]
    return val, ok


def check_propagation(field: ProjectionField, x0, step: float | None = None) -> float:
    """Largest ``||P(y) - P(x0)||_F`` for ``y`` on the line through ``x0``
    orthogonal to the range of ``P(x0)``.

    ``x0`` is snapped to the centre of its cell, where the field value is
    known exactly. The line is followed in both directions until the
    interpolation stencil leaves the mask, i.e. it is clipped to the
    connected inside part.
    """
    grid = field.grid
    x0 = np.asarray(x0, dtype=float)
    if not grid.inside(x0[None, :])[0]:
        raise SegmentLeavesDomain(f"x0={x0.tolist()} is not an interior point")
    j, i = (int(v[0]) for v in grid.cell_of(x0[None, :]))
    xc = np.array([grid.origin[0] + (i + 0.5) * grid.h, grid.origin[1] + (j + 0.5) * grid.h])
    q0 = field.q[j, i]
    theta = 0.5 * np.arctan2(q0[1], q0[0])
    kernel = np.array([-np.sin(theta), np.cos(theta)])
    step = grid.h / 2 if step is None else step
    nmax = int(np.ceil(np.ptp(grid.centers().reshape(-1, 2), axis=0).max() / step)) + 2
    worst = 0.0
    for sgn in (1.0, -1.0):
        tau = sgn * step * np.arange(1, nmax)
        pts = xc + tau[:, None] * kernel
        val, ok = _interpolate_q(field, pts)
        stop = np.argmin(ok) if not ok.all() else len(ok)
        if stop:
            worst = max(worst, float(frobenius_distance(val[:stop], q0).max()))
    return worst
