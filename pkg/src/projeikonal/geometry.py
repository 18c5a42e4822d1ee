"""Closed planar curves, tubular domains and their rasterization.

Conventions used throughout the package:

* curves are oriented counterclockwise;
* the unit normal ``n`` is the tangent rotated by -90 degrees, so it points
  outward on a counterclockwise convex curve;
* curvature is signed and positive on a counterclockwise circle;
* the tube coordinate ``r`` increases along ``n``, so the offset curve at
  ``r`` has length ``int |1 + r kappa(s)| ds``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import (
    CurvatureBoundViolated,
    FewerThanFourPoints,
    NonPositiveDelta,
    OffsetTooLarge,
    SelfIntersecting,
    SelfOverlap,
    SpacingTooCoarse,
)

TABLE_SIZE = 1024
COARSE_SAMPLES = 256
NEWTON_ITERS = 20
NEWTON_TOL = 1e-10

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _rot_minus90(v):
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


class ClosedCurve:
    """A closed C2 curve parametrized on ``t in [0, 1)`` and by arc length.

    Subclasses implement :meth:`derivatives`, returning position and the
    first two derivatives with respect to ``t``. Arc length is tabulated at
    ``TABLE_SIZE`` parameter values and inverted by linear interpolation, so
    ``s_of_t`` and ``t_of_s`` are exact inverses of one another.
    """

    kind = "curve"

    def derivatives(self, t):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    @cached_property
    def _table(self):
        t = np.linspace(0.0, 1.0, TABLE_SIZE + 1)
        a, b = t[:-1], t[1:]
        nodes = 0.5 * (b - a)[:, None] * _GL_NODES[None, :] + 0.5 * (a + b)[:, None]
        _, dp, _ = self.derivatives(nodes)
        speed = np.linalg.norm(dp, axis=-1)
        seg = 0.5 * (b - a) * (speed * _GL_WEIGHTS).sum(axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        return t, s

    @property
    def length(self) -> float:
        return float(self._table[1][-1])

    def t_of_s(self, s):
        t_tab, s_tab = self._table
        return np.interp(np.mod(s, self.length), s_tab, t_tab)

    def s_of_t(self, t):
        t_tab, s_tab = self._table
        return np.interp(np.mod(t, 1.0), t_tab, s_tab)

    def frame_at_t(self, t):
        """Position, unit tangent, outward normal and signed curvature at ``t``."""
        p, dp, ddp = self.derivatives(np.mod(t, 1.0))
        speed = np.linalg.norm(dp, axis=-1)
        tangent = dp / speed[..., None]
        cross = dp[..., 0] * ddp[..., 1] - dp[..., 1] * ddp[..., 0]
        kappa = cross / speed**3
        return p, tangent, _rot_minus90(tangent), kappa

    def geometry(self, s):
        """Return ``(point, tangent, normal, curvature)`` at arc length ``s``."""
        return self.frame_at_t(self.t_of_s(np.asarray(s, dtype=float)))

    @cached_property
    def max_curvature(self) -> float:
        t = np.linspace(0.0, 1.0, 8 * TABLE_SIZE, endpoint=False)
        return float(np.abs(self.frame_at_t(t)[3]).max())

    def sample(self, n: int):
        s = np.linspace(0.0, self.length, n, endpoint=False)
        return s, self.geometry(s)[0]

    def nearest_t(self, points):
        """Parameter of the nearest curve point for each row of ``points``.

        Coarse sampling followed by guarded Newton iterations on
        ``(gamma(t) - x) . gamma'(t) = 0``.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        tc = np.arange(COARSE_SAMPLES) / COARSE_SAMPLES
        pc = self.derivatives(tc)[0]
        out = np.empty(len(points))
        chunk = 4096
        for lo in range(0, len(points), chunk):
            x = points[lo:lo + chunk]
            d2 = ((x[:, None, :] - pc[None, :, :]) ** 2).sum(axis=-1)
            t = tc[np.argmin(d2, axis=1)]
            for _ in range(NEWTON_ITERS):
                p, dp, ddp = self.derivatives(t)
                diff = p - x
                g = (diff * dp).sum(axis=-1)
                H = (dp * dp).sum(axis=-1) + (diff * ddp).sum(axis=-1)
                step = np.where(H > 0, g / np.where(H > 0, H, 1.0), 0.0)
                step = np.clip(step, -1.0 / COARSE_SAMPLES, 1.0 / COARSE_SAMPLES)
                t = t - step
                if np.all(np.abs(step) < NEWTON_TOL):
                    break
            out[lo:lo + chunk] = np.mod(t, 1.0)
        return out

    def offset_length(self, r: float) -> float:
        """Length of the offset curve ``gamma + r n``."""
        if abs(r) * self.max_curvature >= 1.0:
            raise OffsetTooLarge(f"|r|={abs(r)} >= 1/max|kappa|={1 / self.max_curvature}")
        return self._integrate(lambda kappa: np.abs(1.0 + r * kappa))

    def total_curvature(self) -> float:
        return self._integrate(lambda kappa: kappa)

    def _integrate(self, fn) -> float:
        t_tab, _ = self._table
        a, b = t_tab[:-1], t_tab[1:]
        nodes = 0.5 * (b - a)[:, None] * _GL_NODES[None, :] + 0.5 * (a + b)[:, None]
        _, dp, _ = self.derivatives(nodes)
        kappa = self.frame_at_t(nodes)[3]
        speed = np.linalg.norm(dp, axis=-1)
        return float((0.5 * (b - a) * (fn(kappa) * speed * _GL_WEIGHTS).sum(axis=1)).sum())


class Circle(ClosedCurve):
    kind = "circle"

    def __init__(self, radius: float, center=(0.0, 0.0)):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        w = 2 * np.pi
        c, s = np.cos(w * t), np.sin(w * t)
        rho = self.radius
        p = np.stack([self.center[0] + rho * c, self.center[1] + rho * s], axis=-1)
        dp = np.stack([-rho * w * s, rho * w * c], axis=-1)
        ddp = np.stack([-rho * w * w * c, -rho * w * w * s], axis=-1)
        return p, dp, ddp

    @property
    def length(self) -> float:
        return 2 * np.pi * self.radius

    def t_of_s(self, s):
        return np.mod(np.asarray(s, dtype=float) / self.length, 1.0)

    def s_of_t(self, t):
        return np.mod(t, 1.0) * self.length

    @cached_property
    def max_curvature(self) -> float:
        return 1.0 / self.radius

    def nearest_t(self, points):
        d = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        return np.mod(np.arctan2(d[:, 1], d[:, 0]) / (2 * np.pi), 1.0)

    def offset_length(self, r: float) -> float:
        if abs(r) >= self.radius:
            raise OffsetTooLarge(f"|r|={abs(r)} >= radius {self.radius}")
        return 2 * np.pi * (self.radius + r)

    def to_json(self):
        return {"kind": "circle", "center": self.center.tolist(), "radius": self.radius}


class Ellipse(ClosedCurve):
    kind = "ellipse"

    def __init__(self, a: float, b: float, center=(0.0, 0.0)):
        if a <= 0 or b <= 0:
            raise ValueError("semi-axes must be positive")
        self.a, self.b = float(a), float(b)
        self.center = np.asarray(center, dtype=float)

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        w = 2 * np.pi
        c, s = np.cos(w * t), np.sin(w * t)
        a, b = self.a, self.b
        p = np.stack([self.center[0] + a * c, self.center[1] + b * s], axis=-1)
        dp = np.stack([-a * w * s, b * w * c], axis=-1)
        ddp = np.stack([-a * w * w * c, -b * w * w * s], axis=-1)
        return p, dp, ddp

    @cached_property
    def max_curvature(self) -> float:
        a, b = self.a, self.b
        return max(a / b**2, b / a**2)

    def to_json(self):
        return {"kind": "ellipse", "a": self.a, "b": self.b, "center": self.center.tolist()}


class SplineCurve(ClosedCurve):
    """Periodic cubic spline through control points, uniform parameter."""

    kind = "spline"

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        self.points = pts
        knots = np.linspace(0.0, 1.0, len(pts) + 1)
        self._spline = CubicSpline(knots, np.vstack([pts, pts[:1]]), bc_type="periodic")

    def derivatives(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        return self._spline(t), self._spline(t, 1), self._spline(t, 2)

    def to_json(self):
        return {"kind": "spline", "points": self.points.tolist()}


def _segments_intersect(poly: np.ndarray) -> bool:
    """True when any two non-adjacent edges of the closed polygon cross."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    n = len(poly)

    def orient(p, q, r):
        return np.sign((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                       - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    o1 = orient(a[i], b[i], a[j])
    o2 = orient(a[i], b[i], b[j])
    o3 = orient(a[j], b[j], a[i])
    o4 = orient(a[j], b[j], b[i])
    return bool(np.any((o1 * o2 < 0) & (o3 * o4 < 0)))


def _signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def curve_from_points(points) -> SplineCurve:
    """Periodic cubic spline through at least four distinct points.

    Clockwise input is reversed so the curve is counterclockwise.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (N, 2) array")
    if len(pts) < 4:
        raise FewerThanFourPoints(f"need at least 4 points, got {len(pts)}")
    if len(np.unique(pts, axis=0)) != len(pts):
        raise SelfIntersecting("control points are not pairwise distinct")
    if _segments_intersect(pts):
        raise SelfIntersecting("control polygon self-intersects")
    if _signed_area(pts) < 0:
        pts = pts[::-1].copy()
    curve = SplineCurve(pts)
    _, dense = curve.sample(max(8 * len(pts), 256))
    if _segments_intersect(dense):
        raise SelfIntersecting("interpolating spline self-intersects")
    return curve


def curve_geometry(curve: ClosedCurve, s: float):
    """Point, unit tangent, outward unit normal and signed curvature at ``s``."""
    p, t, n, k = curve.geometry(np.asarray([s], dtype=float))
    return p[0], t[0], n[0], float(k[0])


def offset_length(curve: ClosedCurve, r: float) -> float:
    return curve.offset_length(r)


def curve_from_json(spec: dict) -> ClosedCurve:
    kind = spec.get("kind")
    if kind == "circle":
        return Circle(spec["radius"], spec.get("center", (0.0, 0.0)))
    if kind == "ellipse":
        return Ellipse(spec["a"], spec["b"], spec.get("center", (0.0, 0.0)))
    if kind == "spline":
        return curve_from_points(spec["points"])
    raise ValueError(f"unknown curve kind {kind!r}")


# --------------------------------------------------------------------------
# Domains


class Domain:
    """Planar region with membership, outward normals and a bounding box."""

    def contains(self, points) -> np.ndarray:
        raise NotImplementedError

    def outward_normal(self, points) -> np.ndarray:
        raise NotImplementedError

    @property
    def bbox(self):
        raise NotImplementedError

    @property
    def area(self) -> float:
        raise NotImplementedError

    @property
    def half_width(self) -> float:
        """Smallest half-thickness of the region; bounds admissible spacings."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class TubularDomain(Domain):
    """The set of points within distance ``delta`` of a closed curve."""

    curve: ClosedCurve
    delta: float

    def tube_coordinates(self, points):
        """Arrays ``(s, r, inside)`` for every row of ``points``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t = self.curve.nearest_t(pts)
        p, _, n, _ = self.curve.frame_at_t(t)
        r = ((pts - p) * n).sum(axis=-1)
        s = self.curve.s_of_t(t)
        inside = np.hypot(*(pts - p).T) < self.delta
        return s, r, inside

    def embed(self, s, r):
        p, _, n, _ = self.curve.geometry(s)
        return p + np.asarray(r, dtype=float)[..., None] * n

    def contains(self, points):
        return self.tube_coordinates(points)[2]

    def outward_normal(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t = self.curve.nearest_t(pts)
        p, _, n, _ = self.curve.frame_at_t(t)
        r = ((pts - p) * n).sum(axis=-1)
        return np.where((r >= 0)[:, None], n, -n)

    @property
    def bbox(self):
        _, pts = self.curve.sample(4096)
        lo = pts.min(axis=0) - self.delta
        hi = pts.max(axis=0) + self.delta
        return lo, hi

    @property
    def area(self) -> float:
        # int_{-delta}^{delta} int |1 + r kappa| ds dr, odd part cancels
        return 2.0 * self.delta * self.curve.length

    @property
    def half_width(self) -> float:
        return self.delta

    def to_json(self):
        return {"curve": self.curve.to_json(), "delta": self.delta}


@dataclass(frozen=True, eq=False)
class Disc(Domain):
    radius: float = 1.0
    center: tuple = (0.0, 0.0)

    def contains(self, points):
        d = np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(self.center)
        return np.hypot(d[:, 0], d[:, 1]) < self.radius

    def outward_normal(self, points):
        d = np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(self.center)
        return d / np.hypot(d[:, 0], d[:, 1])[:, None]

    @property
    def bbox(self):
        c = np.asarray(self.center, dtype=float)
        return c - self.radius, c + self.radius

    @property
    def area(self):
        return np.pi * self.radius**2

    @property
    def half_width(self):
        return self.radius

    def to_json(self):
        return {"kind": "disc", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Rectangle(Domain):
    """Axis-aligned open rectangle; normals are those of the nearest side."""

    lower: tuple = (-1.0, -1.0)
    upper: tuple = (1.0, 1.0)

    def contains(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        return np.all((p > lo) & (p < hi), axis=1)

    def outward_normal(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        gaps = np.stack([p[:, 0] - lo[0], hi[0] - p[:, 0], p[:, 1] - lo[1], hi[1] - p[:, 1]], axis=1)
        normals = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])
        return normals[np.argmin(gaps, axis=1)]

    @property
    def bbox(self):
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    @property
    def area(self):
        lo, hi = self.bbox
        return float(np.prod(hi - lo))

    @property
    def half_width(self):
        lo, hi = self.bbox
        return float(np.min(hi - lo)) / 2

    def to_json(self):
        return {"kind": "rectangle", "lower": list(self.lower), "upper": list(self.upper)}


def make_tube(curve: ClosedCurve, delta: float) -> TubularDomain:
    """Validated tubular neighbourhood of ``curve`` with half-width ``delta``."""
    if not delta > 0:
        raise NonPositiveDelta(f"delta must be positive, got {delta}")
    kmax = curve.max_curvature
    if delta * kmax >= 1.0:
        raise CurvatureBoundViolated(f"delta={delta} >= 1/max|kappa|={1 / kmax:.6g}")
    L = curve.length
    n = int(np.clip(np.ceil(4 * L / delta), 512, 8192))
    s, pts = curve.sample(n)
    pairs = cKDTree(pts).query_pairs(2 * delta, output_type="ndarray")
    if len(pairs):
        sep = np.abs(s[pairs[:, 0]] - s[pairs[:, 1]])
        sep = np.minimum(sep, L - sep)
        if np.any(sep >= np.pi * delta):
            raise SelfOverlap("non-adjacent parts of the curve are closer than 2*delta")
    return TubularDomain(curve, float(delta))


def tube_coordinates(tube: TubularDomain, x):
    """``(s, r)`` of a single point, or ``None`` when it lies outside the tube."""
    s, r, inside = tube.tube_coordinates(np.asarray(x, dtype=float)[None, :])
    if not inside[0]:
        return None
    return float(s[0]), float(r[0])


def domain_from_json(spec: dict) -> Domain:
    if "curve" in spec:
        return make_tube(curve_from_json(spec["curve"]), spec["delta"])
    kind = spec.get("kind")
    if kind == "disc":
        return Disc(float(spec.get("radius", 1.0)), tuple(spec.get("center", (0.0, 0.0))))
    if kind == "rectangle":
        return Rectangle(tuple(spec["lower"]), tuple(spec["upper"]))
    raise ValueError(f"unrecognised domain specification: {spec!r}")


# --------------------------------------------------------------------------
# Grids


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform cell-centred grid with an interior mask.

    ``mask[j, i]`` refers to the cell centred at ``(x0 + (i + 1/2) h,
    y0 + (j + 1/2) h)``. Boundary cells are interior cells with at least one
    exterior 4-neighbour. Each carries the domain's outward normal and a
    quadrature weight equal to the exposed face length projected onto that
    normal, so that summing weights approximates the boundary length.
    """

    h: float
    origin: tuple
    mask: np.ndarray
    boundary_cells: np.ndarray = field(repr=False)
    boundary_normals: np.ndarray = field(repr=False)
    boundary_weights: np.ndarray = field(repr=False)
    domain: Domain | None = field(default=None, repr=False)

    @property
    def shape(self):
        return self.mask.shape

    @property
    def n_interior(self) -> int:
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        return self.n_interior * self.h**2

    def centers(self) -> np.ndarray:
        ny, nx = self.mask.shape
        x = self.origin[0] + (np.arange(nx) + 0.5) * self.h
        y = self.origin[1] + (np.arange(ny) + 0.5) * self.h
        X, Y = np.meshgrid(x, y)
        return np.stack([X, Y], axis=-1)

    def cell_of(self, points):
        """``(j, i)`` index of the cell containing each point."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        i = np.floor((p[:, 0] - self.origin[0]) / self.h).astype(int)
        j = np.floor((p[:, 1] - self.origin[1]) / self.h).astype(int)
        return j, i

    def inside(self, points) -> np.ndarray:
        j, i = self.cell_of(points)
        ny, nx = self.mask.shape
        ok = (i >= 0) & (i < nx) & (j >= 0) & (j < ny)
        out = np.zeros(len(i), dtype=bool)
        out[ok] = self.mask[j[ok], i[ok]]
        return out

    def to_json(self) -> dict:
        ny, nx = self.mask.shape
        return {
            "h": self.h,
            "origin": list(map(float, self.origin)),
            "nx": nx,
            "ny": ny,
            "mask": self.mask.astype(int).ravel().tolist(),
            "boundary_cells": self.boundary_cells.tolist(),
            "boundary_normals": self.boundary_normals.tolist(),
            "boundary_weights": self.boundary_weights.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict, domain: Domain | None = None) -> "Grid":
        mask = np.asarray(data["mask"], dtype=bool).reshape(data["ny"], data["nx"])
        return cls(
            h=float(data["h"]),
            origin=tuple(data["origin"]),
            mask=mask,
            boundary_cells=np.asarray(data["boundary_cells"], dtype=int).reshape(-1, 2),
            boundary_normals=np.asarray(data["boundary_normals"], dtype=float).reshape(-1, 2),
            boundary_weights=np.asarray(data["boundary_weights"], dtype=float),
            domain=domain,
        )


def boundary_data(mask: np.ndarray, h: float, normal_fn):
    """Boundary cells, their normals and projected exposed-face weights."""
    padded = np.pad(mask, 1, constant_values=False)
    inner = padded[1:-1, 1:-1]
    # exposed faces in the four axis directions: +x, -x, +y, -y
    exposed = np.stack([
        inner & ~padded[1:-1, 2:],
        inner & ~padded[1:-1, :-2],
        inner & ~padded[2:, 1:-1],
        inner & ~padded[:-2, 1:-1],
    ], axis=-1)
    is_bnd = exposed.any(axis=-1)
    cells = np.argwhere(is_bnd)
    if normal_fn is None:
        face_normals = np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]])
        ex = exposed[cells[:, 0], cells[:, 1]].astype(float)
        normals = ex @ face_normals
        norm = np.linalg.norm(normals, axis=1)
        # cells exposed on opposite faces only: fall back to the first face
        degenerate = norm < 1e-12
        first = face_normals[np.argmax(ex, axis=1)]
        normals[degenerate] = first[degenerate]
        normals /= np.linalg.norm(normals, axis=1)[:, None]
    else:
        normals = normal_fn(cells)
    ex = exposed[cells[:, 0], cells[:, 1]]
    weights = h * (ex[:, 0:2].sum(axis=1) * np.abs(normals[:, 0])
                   + ex[:, 2:4].sum(axis=1) * np.abs(normals[:, 1]))
    return cells, normals, weights


def rasterize(domain: Domain, h: float) -> Grid:
    """Cell-centre rasterization with analytic outward normals on the boundary."""
    if not h > 0:
        raise SpacingTooCoarse("h must be positive")
    if h >= domain.half_width / 4:
        raise SpacingTooCoarse(f"h={h} must be below half-width/4 = {domain.half_width / 4}")
    return raster_grid(domain, h)


def raster_grid(domain: Domain, h: float) -> Grid:
    """:func:`rasterize` without the resolution check (coarse auxiliary grids)."""
    lo, hi = domain.bbox
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) + 2 * h
    n = 2 * np.ceil(half / h).astype(int)
    origin = center - 0.5 * n * h
    x = origin[0] + (np.arange(n[0]) + 0.5) * h
    y = origin[1] + (np.arange(n[1]) + 0.5) * h
    X, Y = np.meshgrid(x, y)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    mask = domain.contains(pts).reshape(n[1], n[0])

    def normal_fn(cells):
        c = np.stack([x[cells[:, 1]], y[cells[:, 0]]], axis=1)
        nrm = domain.outward_normal(c)
        return nrm / np.linalg.norm(nrm, axis=1)[:, None]

    cells, normals, weights = boundary_data(mask, h, normal_fn)
    return Grid(h=float(h), origin=(float(origin[0]), float(origin[1])), mask=mask,
                boundary_cells=cells, boundary_normals=normals,
                boundary_weights=weights, domain=domain)


def grid_from_mask(mask: np.ndarray, h: float, origin=(0.0, 0.0), domain: Domain | None = None) -> Grid:
    """Grid from an explicit mask; normals come from ``domain`` or the staircase."""
    mask = np.asarray(mask, dtype=bool)
    normal_fn = None
    if domain is not None:
        ny, nx = mask.shape

        def normal_fn(cells):
            c = np.stack([origin[0] + (cells[:, 1] + 0.5) * h,
                          origin[1] + (cells[:, 0] + 0.5) * h], axis=1)
            nrm = domain.outward_normal(c)
            return nrm / np.linalg.norm(nrm, axis=1)[:, None]

    cells, normals, weights = boundary_data(mask, h, normal_fn)
    return Grid(h=float(h), origin=tuple(map(float, origin)), mask=mask,
                boundary_cells=cells, boundary_normals=normals,
                boundary_weights=weights, domain=domain)
