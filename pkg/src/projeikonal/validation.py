"""Input validation helpers used at estimator and function boundaries."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import MissingNormals
from .geometry import Grid


def check_grid(grid, *, require_normals: bool = True) -> Grid:
    if not isinstance(grid, Grid):
        raise TypeError(f"expected a Grid, got {type(grid).__name__}")
    if grid.n_interior == 0:
        raise ValueError("grid has an empty interior mask")
    if require_normals:
        n = grid.boundary_normals
        if n is None or len(n) != len(grid.boundary_cells) or not np.all(np.isfinite(n)):
            raise MissingNormals("grid carries no boundary normals")
    return grid


def check_scalar(x, name, *, min_val=None, include_min=True, integer=False):
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(x, bool) or not isinstance(x, kind):
        raise TypeError(f"{name} must be {'an integer' if integer else 'a real number'}, got {x!r}")
    if min_val is not None:
        bad = x < min_val if include_min else x <= min_val
        if bad:
            op = ">=" if include_min else ">"
            raise ValueError(f"{name} must be {op} {min_val}, got {x!r}")
    return x


def check_params(p) -> None:
    check_scalar(p.lam, "lam", min_val=0.0)
    check_scalar(p.step, "step", min_val=0.0, include_min=False)
    check_scalar(p.max_iters, "max_iters", min_val=1, integer=True)
    check_scalar(p.grad_tol, "grad_tol", min_val=0.0, include_min=False)
    check_scalar(p.seed, "seed", min_val=0, integer=True)
    check_scalar(p.smoothing, "smoothing", min_val=0.0)
    if not isinstance(p.multilevel, bool):
        raise TypeError("multilevel must be a bool")
    if p.stencil not in ("compact", "central"):
        raise ValueError(f"stencil must be 'compact' or 'central', got {p.stencil!r}")


def check_ladder(h_ladder) -> list:
    hs = [float(h) for h in h_ladder]
    if len(hs) < 3:
        raise ValueError("the h ladder needs at least three spacings")
    for a, b in zip(hs, hs[1:]):
        if not np.isclose(a, 2 * b, rtol=1e-9):
            raise ValueError("successive spacings in the h ladder must halve")
    return hs
