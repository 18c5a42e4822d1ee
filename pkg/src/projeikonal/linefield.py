"""Unoriented line fields stored as double-angle vectors.

A direction angle ``theta`` (defined modulo pi) is stored as
``q = (cos 2 theta, sin 2 theta)``. The projection onto the line is
``P = m (x) m = 1/2 [[1 + q1, q2], [q2, 1 - q1]]`` for ``m = (cos theta,
sin theta)``, and ``q`` does not see the sign of ``m``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NonOrientable, NotAProjection, UnresolvableJump
from .geometry import Grid

# largest admissible double-angle jump between neighbours in loop_index
LOOP_GAP = np.pi / 2
# |m1 . m2| below this counts as exactly orthogonal in lift
ORTHO_TOL = 1e-9


# --------------------------------------------------------------------------
# single-matrix conversions


class Representations(NamedTuple):
    theta: float
    q: np.ndarray
    P: np.ndarray
    m: np.ndarray


def projection_from_q(q):
    """Projection matrices ``(..., 2, 2)`` from double-angle vectors."""
    q = np.asarray(q, dtype=float)
    q1, q2 = q[..., 0], q[..., 1]
    P = np.empty(q.shape[:-1] + (2, 2))
    P[..., 0, 0] = 0.5 * (1 + q1)
    P[..., 1, 1] = 0.5 * (1 - q1)
    P[..., 0, 1] = P[..., 1, 0] = 0.5 * q2
    return P


def q_from_theta(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(2 * theta), np.sin(2 * theta)], axis=-1)


def theta_from_q(q):
    q = np.asarray(q, dtype=float)
    return np.mod(0.5 * np.arctan2(q[..., 1], q[..., 0]), np.pi)


def convert(*, theta=None, q=None, P=None, m=None, tol: float = 1e-6) -> Representations:
    """Convert one representation of a line into all of them.

    Exactly one of ``theta``, ``q``, ``P`` or ``m`` must be given. The
    returned ``m`` has angle ``theta`` in ``[0, pi)``; ``-m`` represents the
    same line.
    """
    given = [x is not None for x in (theta, q, P, m)]
    if sum(given) != 1:
        raise TypeError("pass exactly one of theta, q, P, m")
    if theta is not None:
        th = float(np.mod(theta, np.pi))
    elif q is not None:
        q = np.asarray(q, dtype=float)
        if abs(np.hypot(*q) - 1) > tol:
            raise NotAProjection(f"|q| = {np.hypot(*q)} is not 1")
        th = float(theta_from_q(q))
    elif m is not None:
        m = np.asarray(m, dtype=float)
        if abs(np.hypot(*m) - 1) > tol:
            raise NotAProjection(f"|m| = {np.hypot(*m)} is not 1")
        th = float(np.mod(np.arctan2(m[1], m[0]), np.pi))
    else:
        check = validate_projection(P, tol)
        if not check.ok:
            raise NotAProjection(f"not a rank-one orthogonal projection: {check.failed}")
        P = np.asarray(P, dtype=float)
        th = float(theta_from_q(np.array([P[0, 0] - P[1, 1], P[0, 1] + P[1, 0]])))
    mm = np.array([np.cos(th), np.sin(th)])
    return Representations(th, q_from_theta(th), np.outer(mm, mm), mm)


class ProjectionCheck(NamedTuple):
    ok: bool
    idempotency: float
    symmetry: float
    trace_defect: float
    failed: tuple


def validate_projection(P, tol: float = 1e-9) -> ProjectionCheck:
    """Check ``P^2 = P``, ``P = P^T`` and ``tr P = 1`` (rank one) up to ``tol``."""
    P = np.asarray(P, dtype=float)
    idem = float(np.linalg.norm(P @ P - P))
    sym = float(np.linalg.norm(P - P.T))
    tr = float(abs(np.trace(P) - 1.0))
    failed = tuple(name for name, v in (("idempotent", idem), ("symmetric", sym), ("rank", tr)) if v > tol)
    return ProjectionCheck(not failed, idem, sym, tr, failed)


# --------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class ProjectionField:
    """Double-angle vectors on the interior cells of ``grid``.

    ``q`` has shape ``(ny, nx, 2)``; entries outside the mask are zero.
    """

    grid: Grid
    q: np.ndarray = field(repr=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        mask = self.grid.mask
        if q.shape != mask.shape + (2,):
            raise ValueError(f"q has shape {q.shape}, expected {mask.shape + (2,)}")
        norm = np.linalg.norm(q[mask], axis=-1)
        if np.any(norm < 1e-12):
            raise NotAProjection("zero double-angle vector on an interior cell")
        q[mask] /= norm[:, None]
        q[~mask] = 0.0
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_theta(cls, grid: Grid, theta) -> "ProjectionField":
        return cls(grid, np.where(grid.mask[..., None], q_from_theta(theta), 0.0))

    @classmethod
    def from_angle_function(cls, grid: Grid, fn) -> "ProjectionField":
        c = grid.centers()
        return cls.from_theta(grid, fn(c[..., 0], c[..., 1]))

    @classmethod
    def from_interior(cls, grid: Grid, q_int) -> "ProjectionField":
        q = np.zeros(grid.mask.shape + (2,))
        q[grid.mask] = q_int
        return cls(grid, q)

    @property
    def interior(self) -> np.ndarray:
        """``(N, 2)`` double-angle vectors in row-major interior order."""
        return self.q[self.grid.mask]

    @property
    def theta(self) -> np.ndarray:
        return np.where(self.grid.mask, theta_from_q(self.q), np.nan)

    @property
    def P(self) -> np.ndarray:
        return np.where(self.grid.mask[..., None, None], projection_from_q(self.q), 0.0)

    def to_json(self) -> dict:
        return {"grid": self.grid.to_json(), "q": self.interior.tolist()}

    @classmethod
    def from_json(cls, data: dict, domain=None) -> "ProjectionField":
        grid = Grid.from_json(data["grid"], domain)
        q = np.zeros(grid.mask.shape + (2,))
        q[grid.mask] = np.asarray(data["q"], dtype=float).reshape(-1, 2)
        return cls(grid, q)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True, eq=False)
class UnitVectorField:
    grid: Grid
    m: np.ndarray = field(repr=False)

    def to_projection(self) -> ProjectionField:
        m = self.m
        q = np.stack([m[..., 0] ** 2 - m[..., 1] ** 2, 2 * m[..., 0] * m[..., 1]], axis=-1)
        return ProjectionField(self.grid, np.where(self.grid.mask[..., None], q, 0.0))


@dataclass(frozen=True)
class DefectReport:
    loop: list
    index: float

    @property
    def orientable(self) -> bool:
        return float(self.index).is_integer()


# --------------------------------------------------------------------------
# standard fields


def constant_field(grid: Grid, theta: float) -> ProjectionField:
    return ProjectionField.from_theta(grid, np.full(grid.shape, float(theta)))


def target_field(grid: Grid, center=(0.0, 0.0)) -> ProjectionField:
    """Concentric stripes around ``center``: direction = azimuth + pi/2."""
    cx, cy = center
    return ProjectionField.from_angle_function(
        grid, lambda x, y: np.arctan2(y - cy, x - cx) + np.pi / 2)


def radial_field(grid: Grid, center=(0.0, 0.0)) -> ProjectionField:
    cx, cy = center
    return ProjectionField.from_angle_function(grid, lambda x, y: np.arctan2(y - cy, x - cx))


def uturn_field(grid: Grid, center=(0.0, 0.0)) -> ProjectionField:
    """Index +1/2 defect: direction = azimuth / 2."""
    cx, cy = center
    return ProjectionField.from_angle_function(grid, lambda x, y: 0.5 * np.arctan2(y - cy, x - cx))


# --------------------------------------------------------------------------
# loops and indices


def _wrap(a):
    return np.mod(a + np.pi, 2 * np.pi) - np.pi


def square_loop(grid: Grid, center, half_side: int):
    """Counterclockwise 4-connected loop of cells on a square ring."""
    j0, i0 = (int(v[0]) for v in grid.cell_of([center]))
    k = int(half_side)
    loop = []
    loop += [(j0 - k, i) for i in range(i0 - k, i0 + k)]
    loop += [(j, i0 + k) for j in range(j0 - k, j0 + k)]
    loop += [(j0 + k, i) for i in range(i0 + k, i0 - k, -1)]
    loop += [(j, i0 - k) for j in range(j0 + k, j0 - k, -1)]
    return loop


def _loop_angles(field_: ProjectionField, loop) -> np.ndarray:
    cells = np.asarray(loop, dtype=int).reshape(-1, 2)
    mask = field_.grid.mask
    ny, nx = mask.shape
    j, i = cells[:, 0], cells[:, 1]
    if np.any((j < 0) | (j >= ny) | (i < 0) | (i >= nx)) or not mask[j, i].all():
        raise ValueError("loop leaves the interior mask")
    step = np.abs(np.roll(cells, -1, axis=0) - cells).sum(axis=1)
    if np.any(step != 1):
        raise ValueError("loop is not a closed 4-connected cell path")
    q = field_.q[j, i]
    return np.arctan2(q[:, 1], q[:, 0])


def _winding(phi: np.ndarray, max_gap: float) -> float:
    gaps = _wrap(np.roll(phi, -1) - phi)
    if np.any(np.abs(gaps) >= max_gap):
        raise UnresolvableJump(f"double-angle jump {np.abs(gaps).max():.3f} >= {max_gap:.3f}")
    return float(gaps.sum())


def loop_index(field_: ProjectionField, loop) -> float:
    """Winding of the line direction along ``loop`` in full turns.

    The double angle winds ``4 pi * index``; the result is a multiple of 1/2.
    """
    total = _winding(_loop_angles(field_, loop), LOOP_GAP)
    return round(total / (2 * np.pi)) / 2


def _orient_ccw(cells: list, grid: Grid) -> list:
    c = np.asarray(cells, dtype=float)
    x, y = c[:, 1], c[:, 0]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    return cells if area >= 0 else cells[::-1]


def lift(field_: ProjectionField) -> UnitVectorField:
    """Continuous unit vector field ``m`` with ``m (x) m = P``.

    Breadth-first traversal from the first interior cell in scan order,
    choosing each new sign to keep neighbours within 90 degrees. A non-tree
    edge whose vectors point in opposite directions closes a cycle with a
    half-integer index, reported through :class:`NonOrientable`.
    """
    grid = field_.grid
    mask = grid.mask
    theta = theta_from_q(field_.q)
    base = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    ny, nx = mask.shape
    sign = np.zeros(mask.shape, dtype=np.int8)
    parent = -np.ones(mask.shape + (2,), dtype=int)
    cells = np.argwhere(mask)
    if len(cells) == 0:
        raise ValueError("empty mask")
    root = tuple(cells[0])
    sign[root] = 1
    queue = deque([root])
    while queue:
        j, i = queue.popleft()
        mj = sign[j, i] * base[j, i]
        for dj, di in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            b, a = j + dj, i + di
            if not (0 <= b < ny and 0 <= a < nx and mask[b, a]):
                continue
            dot = float(mj @ base[b, a])
            if abs(dot) < ORTHO_TOL:
                raise UnresolvableJump(f"orthogonal neighbours at {(j, i)} and {(b, a)}")
            if sign[b, a] == 0:
                sign[b, a] = 1 if dot > 0 else -1
                parent[b, a] = (j, i)
                queue.append((b, a))
            elif dot * sign[b, a] < 0:
                loop = _fundamental_cycle(parent, (j, i), (b, a))
                loop = _orient_ccw(loop, grid)
                total = _winding(_loop_angles(field_, loop), np.pi)
                raise NonOrientable(DefectReport(loop, round(total / (2 * np.pi)) / 2))
    if np.any(sign[mask] == 0):
        raise ValueError("interior mask is not connected")
    m = np.where(mask[..., None], sign[..., None] * base, 0.0)
    return UnitVectorField(grid, m)


def _fundamental_cycle(parent, u, v):
    def path(c):
        out = [c]
        while parent[c][0] >= 0:
            c = tuple(parent[c])
            out.append(c)
        return out

    pu, pv = path(u), path(v)
    on_v = {c: k for k, c in enumerate(pv)}
    for k, c in enumerate(pu):
        if c in on_v:
            lca_u, lca_v = k, on_v[c]
            break
    # u -> ... -> lca -> ... -> v, closed by the edge v -> u
    return [tuple(map(int, c)) for c in pu[:lca_u + 1] + pv[:lca_v][::-1]]
