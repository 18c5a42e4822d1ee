"""Projection-valued eikonal equation ``P div P = 0`` on planar domains.

Modules:

* :mod:`~projeikonal.geometry`: closed curves, tubular domains, grids;
* :mod:`~projeikonal.linefield`: projection fields, lifting and defect indices;
* :mod:`~projeikonal.fields`: discrete divergence, residuals and exact tube solutions;
* :mod:`~projeikonal.variational`: residual minimization and the tubularity test;
* :mod:`~projeikonal.copolymer`: stripe patterns and the copolymer energies;
* :mod:`~projeikonal.render` and :mod:`~projeikonal.cli`: SVG output and the command line.
"""

from .copolymer import (
    BinaryPattern,
    EnergyBreakdown,
    Pattern1D,
    TransportPlan,
    energy_ladder,
    energy_suite,
    make_stripes,
    mk_distance,
    optimal_width,
    perimeter,
    recovery_pattern,
)
from .fields import (
    boundary_trace,
    check_propagation,
    divergence,
    energy_G0,
    exact_solution,
    lp_div_norm,
    residual,
)
from .geometry import Circle, Disc, Ellipse, Grid, TubularDomain, curve_from_points, make_tube, rasterize
from .linefield import ProjectionField, convert, lift, loop_index
from .render import RenderSpec, render
from .variational import (
    MinimizeParams,
    ProjectionFieldMinimizer,
    TubularityTest,
    minimize,
    objective,
    tubularity_test,
)

__version__ = "0.1.0"
