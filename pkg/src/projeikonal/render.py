"""SVG pictures of line fields and stripe patterns.

Line fields are drawn as unoriented segments, one per (strided) cell, with no
arrowheads. Numbers are written with a fixed number of decimals so that equal
inputs give byte-identical documents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .copolymer import BinaryPattern
from .errors import EmptyField, MaskTooThin
from .fields import divergence_interior
from .linefield import ProjectionField

# anchors of a perceptually ordered ramp (dark blue to yellow)
_RAMP = np.array([
    [0x44, 0x01, 0x54],
    [0x3b, 0x52, 0x8b],
    [0x21, 0x91, 0x8c],
    [0x5e, 0xc9, 0x62],
    [0xfd, 0xe7, 0x25],
], dtype=float)
PATTERN_SAMPLES = 512


@dataclass(frozen=True)
class RenderSpec:
    stride: int = 1
    stroke_width: float = 1.0
    size: int = 512
    heatmap: bool = False
    stroke: str = "#202020"
    fill_on: str = "#2b4c7e"
    fill_off: str = "#f4f1ea"
    decimals: int = 3

    def __post_init__(self):
        if isinstance(self.stride, bool) or not isinstance(self.stride, int) or self.stride < 1:
            raise ValueError("stride must be an integer >= 1")
        if not self.stroke_width > 0 or not self.size > 0:
            raise ValueError("stroke width and image size must be positive")


def ramp_color(t: float) -> str:
    """Hex colour at ``t in [0, 1]`` on the heatmap ramp."""
    t = float(np.clip(t, 0.0, 1.0)) * (len(_RAMP) - 1)
    k = min(int(t), len(_RAMP) - 2)
    rgb = (1 - (t - k)) * _RAMP[k] + (t - k) * _RAMP[k + 1]
    return "#" + "".join(f"{int(round(c)):02x}" for c in rgb)


class _Canvas:
    """World-to-pixel map with the y axis pointing up."""

    def __init__(self, lo, hi, spec: RenderSpec):
        self.lo = np.asarray(lo, dtype=float)
        span = np.asarray(hi, dtype=float) - self.lo
        self.scale = spec.size / float(span.max())
        self.width, self.height = span * self.scale
        self.fmt = f"{{:.{spec.decimals}f}}"

    def xy(self, p):
        p = np.asarray(p, dtype=float)
        x = (p[..., 0] - self.lo[0]) * self.scale
        y = self.height - (p[..., 1] - self.lo[1]) * self.scale
        return x, y

    def num(self, v) -> str:
        s = self.fmt.format(float(v))
        return "0" if s.lstrip("-").strip("0.") == "" else s

    def header(self) -> str:
        w, h = self.num(self.width), self.num(self.height)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
                f'viewBox="0 0 {w} {h}">')


def render_field(field: ProjectionField, spec: RenderSpec | None = None) -> str:
    """Segments of length ``0.8 * stride * h`` centred on the cell centres."""
    spec = spec or RenderSpec()
    grid = field.grid
    if grid.n_interior == 0:
        raise EmptyField("the field has no interior cells")
    ny, nx = grid.shape
    lo = np.asarray(grid.origin, dtype=float)
    canvas = _Canvas(lo, lo + grid.h * np.array([nx, ny]), spec)
    parts = [canvas.header()]
    if spec.heatmap:
        parts.append(_heatmap(field, canvas))
    sel = grid.mask.copy()
    sel[np.arange(ny) % spec.stride != 0, :] = False
    sel[:, np.arange(nx) % spec.stride != 0] = False
    if not sel.any():
        raise EmptyField("no cell survives the stride")
    centers = grid.centers()[sel]
    theta = 0.5 * np.arctan2(field.q[sel][:, 1], field.q[sel][:, 0])
    half = 0.4 * spec.stride * grid.h * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    x1, y1 = canvas.xy(centers - half)
    x2, y2 = canvas.xy(centers + half)
    n = canvas.num
    parts.append(f'<g stroke="{spec.stroke}" stroke-width="{n(spec.stroke_width)}" '
                 f'stroke-linecap="round" fill="none">')
    for a, b, c, d in zip(x1, y1, x2, y2):
        parts.append(f'<line x1="{n(a)}" y1="{n(b)}" x2="{n(c)}" y2="{n(d)}"/>')
    parts += ["</g>", "</svg>"]
    return "\n".join(parts) + "\n"


def _heatmap(field: ProjectionField, canvas: _Canvas) -> str:
    grid = field.grid
    try:
        mag = np.linalg.norm(divergence_interior(grid, field.interior), axis=1)
    except MaskTooThin:
        return ""
    top = mag.max() if mag.size and mag.max() > 0 else 1.0
    cells = np.argwhere(grid.mask)
    corner = np.asarray(grid.origin) + grid.h * np.stack([cells[:, 1], cells[:, 0] + 1], axis=1)
    x, y = canvas.xy(corner)
    side = canvas.num(grid.h * canvas.scale)
    n = canvas.num
    rows = ['<g stroke="none">']
    for a, b, m in zip(x, y, mag):
        rows.append(f'<rect x="{n(a)}" y="{n(b)}" width="{side}" height="{side}" '
                    f'fill="{ramp_color(m / top)}"/>')
    rows.append("</g>")
    return "\n".join(rows)


def _ring_path(pattern: BinaryPattern, r_in: float, r_out: float, canvas: _Canvas, s) -> str:
    n = canvas.num
    pieces = []
    for r in (r_out, r_in):
        x, y = canvas.xy(pattern.domain.embed(s, np.full(len(s), r)))
        pts = " L ".join(f"{n(a)} {n(b)}" for a, b in zip(x, y))
        pieces.append(f"M {pts} Z")
    return " ".join(pieces)


def render_pattern(pattern: BinaryPattern, spec: RenderSpec | None = None) -> str:
    """The tube in the ``u = 0`` colour with each ``u = 1`` band as a ring."""
    spec = spec or RenderSpec()
    tube = pattern.domain
    lo, hi = tube.bbox
    canvas = _Canvas(lo, hi, spec)
    s = np.linspace(0.0, tube.curve.length, PATTERN_SAMPLES, endpoint=False)
    parts = [canvas.header()]
    d = tube.delta
    parts.append(f'<path fill="{spec.fill_off}" fill-rule="evenodd" stroke="none" '
                 f'd="{_ring_path(pattern, -d, d, canvas, s)}"/>')
    for a, b in pattern.bands:
        parts.append(f'<path fill="{spec.fill_on}" fill-rule="evenodd" stroke="none" '
                     f'd="{_ring_path(pattern, a, b, canvas, s)}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render(obj, spec: RenderSpec | None = None) -> str:
    """SVG document for a :class:`ProjectionField` or a :class:`BinaryPattern`."""
    if isinstance(obj, ProjectionField):
        return render_field(obj, spec)
    if isinstance(obj, BinaryPattern):
        return render_pattern(obj, spec)
    raise TypeError(f"cannot render {type(obj).__name__}")
