import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projeikonal.errors import (
    CurvatureBoundViolated,
    FewerThanFourPoints,
    NonPositiveDelta,
    OffsetTooLarge,
    SelfIntersecting,
    SelfOverlap,
    SpacingTooCoarse,
)
from projeikonal.geometry import (
    Circle,
    Disc,
    Ellipse,
    curve_from_json,
    curve_from_points,
    curve_geometry,
    domain_from_json,
    grid_from_mask,
    make_tube,
    offset_length,
    rasterize,
    tube_coordinates,
)


@pytest.fixture(scope="module")
def annulus():
    return make_tube(Circle(1.5), 0.5)


def test_spline_through_four_circle_points_has_unit_curvature():
    # A uniform-parameter cubic through four points is visibly non-circular
    # (pointwise curvature spans [0.84, 1.33]); its mean curvature
    # 2 pi / L is within 10% of 1, and eight points are within 10% pointwise.
    ang = np.arange(4) * np.pi / 2
    curve = curve_from_points(np.stack([np.cos(ang), np.sin(ang)], axis=1))
    s = np.linspace(0, curve.length, 400, endpoint=False)
    kappa = curve.geometry(s)[3]
    assert kappa.mean() == pytest.approx(1.0, rel=0.1)
    assert 0.8 < kappa.min() and kappa.max() < 1.35
    ang = np.arange(8) * np.pi / 4
    curve = curve_from_points(np.stack([np.cos(ang), np.sin(ang)], axis=1))
    kappa = curve.geometry(np.linspace(0, curve.length, 400, endpoint=False))[3]
    assert np.all(np.abs(kappa - 1.0) < 0.1)


def test_fewer_than_four_points():
    with pytest.raises(FewerThanFourPoints):
        curve_from_points([[0, 0], [1, 0], [0, 1]])


def test_self_intersecting_polygon_is_rejected():
    bowtie = [[0, 0], [1, 1], [1, 0], [0, 1]]
    with pytest.raises(SelfIntersecting):
        curve_from_points(bowtie)


def test_spline_ellipse_max_curvature():
    t = np.arange(16) * 2 * np.pi / 16
    curve = curve_from_points(np.stack([2 * np.cos(t), np.sin(t)], axis=1))
    assert curve.max_curvature == pytest.approx(2.0, rel=0.05)


def test_circle_frame():
    p, t, n, k = curve_geometry(Circle(1.5), 0.0)
    assert k == pytest.approx(1 / 1.5, abs=1e-12)
    assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(p, [1.5, 0.0], atol=1e-12)
    # normal points outward on a counterclockwise circle
    np.testing.assert_allclose(n, [1.0, 0.0], atol=1e-12)


def test_ellipse_vertex_curvature():
    curve = Ellipse(2.0, 1.0)
    assert curve_geometry(curve, 0.0)[3] == pytest.approx(2.0, rel=1e-9)


@pytest.mark.parametrize("curve", [Circle(1.5), Ellipse(2, 1), curve_from_points(
    [[1, 0], [0.3, 0.8], [-1, 0.2], [-0.5, -0.9], [0.6, -0.7]])])
def test_frame_orthogonal_and_periodic(curve):
    s = np.linspace(0, curve.length, 97)
    p, t, n, _ = curve.geometry(s)
    np.testing.assert_allclose((t * n).sum(axis=1), 0.0, atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(n, axis=1), 1.0, atol=1e-12)
    p2 = curve.geometry(s + curve.length)[0]
    np.testing.assert_allclose(p, p2, atol=1e-12)


def test_make_tube_annulus(annulus):
    pts = np.array([[0.99, 0], [1.01, 0], [1.99, 0], [2.01, 0], [0, -1.5]])
    np.testing.assert_array_equal(annulus.contains(pts), [False, True, True, False, True])
    assert annulus.area == pytest.approx(3 * np.pi)


def test_make_tube_errors():
    with pytest.raises(CurvatureBoundViolated):
        make_tube(Circle(1.5), 2.0)
    with pytest.raises(NonPositiveDelta):
        make_tube(Circle(1.5), 0.0)


def test_self_overlap_of_a_thin_neck():
    # dumbbell: two lobes joined by a narrow waist
    t = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    r = 1.0 - 0.85 * np.cos(t) ** 2
    pts = np.stack([2 * np.cos(t), r * np.sin(t)], axis=1)
    curve = curve_from_points(pts)
    with pytest.raises((SelfOverlap, CurvatureBoundViolated)):
        make_tube(curve, 0.3)


def test_tube_acceptance_monotone_in_delta():
    curve = Ellipse(2, 1)
    accepted = []
    for d in (0.1, 0.2, 0.3, 0.4, 0.45, 0.55):
        try:
            make_tube(curve, d)
            accepted.append(True)
        except (CurvatureBoundViolated, SelfOverlap):
            accepted.append(False)
    assert accepted == sorted(accepted, reverse=True)


def test_tube_coordinates_examples(annulus):
    s, r = tube_coordinates(annulus, np.array([1.25, 0.0]))
    assert s == pytest.approx(0.0, abs=1e-12)
    assert r == pytest.approx(-0.25, abs=1e-12)
    assert tube_coordinates(annulus, np.array([0.0, 1.5]))[1] == pytest.approx(0.0, abs=1e-12)
    assert tube_coordinates(annulus, np.array([0.0, 0.0])) is None


@pytest.mark.parametrize("curve, tol", [(Circle(1.5), 1e-6), (Ellipse(2, 1), 1e-6),
                                         (curve_from_points([[1.5, 0], [0, 1.2], [-1.4, 0], [0, -1.0],
                                                             [1.0, -0.8]]), 1e-3)])
def test_tube_coordinate_round_trip(curve, tol):
    tube = make_tube(curve, 0.4)
    rng = np.random.default_rng(1)
    s = rng.uniform(0, curve.length, 10_000)
    r = rng.uniform(-0.4, 0.4, 10_000) * 0.999
    s2, r2, inside = tube.tube_coordinates(tube.embed(s, r))
    assert inside.all()
    ds = np.abs(s2 - s)
    ds = np.minimum(ds, curve.length - ds)
    assert ds.max() < tol and np.abs(r2 - r).max() < tol


def test_rasterize_annulus_area_and_convergence(annulus):
    errs = {}
    for h in (1 / 16, 1 / 32, 1 / 64, 1 / 128):
        errs[h] = abs(rasterize(annulus, h).area - 3 * np.pi)
    assert errs[1 / 32] / (3 * np.pi) < 0.05
    # Lattice counts fluctuate, so individual halvings need not gain 2x;
    # the error stays inside a first-order envelope and decreases overall.
    boundary = 6 * np.pi
    assert all(e <= 0.25 * boundary * h for h, e in errs.items())
    assert errs[1 / 128] < errs[1 / 16] / 2


def test_rasterize_rejects_coarse_spacing(annulus):
    with pytest.raises(SpacingTooCoarse):
        rasterize(annulus, 0.5)


def test_grid_boundary_normals_unit_and_adjacent(annulus):
    g = rasterize(annulus, 1 / 32)
    np.testing.assert_allclose(np.linalg.norm(g.boundary_normals, axis=1), 1.0, atol=1e-12)
    assert g.mask[g.boundary_cells[:, 0], g.boundary_cells[:, 1]].all()
    # normals on the outer rim point away from the centre, inner rim towards it
    c = g.centers()[g.boundary_cells[:, 0], g.boundary_cells[:, 1]]
    radial = c / np.linalg.norm(c, axis=1)[:, None]
    dot = (radial * g.boundary_normals).sum(axis=1)
    rad = np.linalg.norm(c, axis=1)
    assert np.all(dot[rad > 1.5] > 0.99) and np.all(dot[rad < 1.5] < -0.99)
    # weights approximate the boundary length 2 pi (1 + 2)
    assert g.boundary_weights.sum() == pytest.approx(6 * np.pi, rel=0.05)


def test_grid_json_round_trip(annulus):
    g = rasterize(annulus, 1 / 16)
    g2 = type(g).from_json(g.to_json())
    np.testing.assert_array_equal(g.mask, g2.mask)
    np.testing.assert_allclose(g.boundary_normals, g2.boundary_normals)


def test_grid_from_mask_staircase_normals():
    mask = np.zeros((6, 6), dtype=bool)
    mask[1:5, 1:5] = True
    g = grid_from_mask(mask, 0.1)
    assert len(g.boundary_cells) == 12
    np.testing.assert_allclose(np.linalg.norm(g.boundary_normals, axis=1), 1.0)


def test_offset_length_examples():
    c = Circle(1.5)
    assert offset_length(c, 0.25) == pytest.approx(2 * np.pi * 1.75)
    assert offset_length(c, -0.25) == pytest.approx(2 * np.pi * 1.25)
    assert offset_length(c, 0.0) == c.length
    with pytest.raises(OffsetTooLarge):
        offset_length(c, 1.6)


@settings(max_examples=30, deadline=None)
@given(r=st.floats(0.0, 0.45))
def test_offset_lengths_sum_to_at_least_twice_length(r):
    for curve in (Circle(1.5), Ellipse(2, 1)):
        assert offset_length(curve, r) + offset_length(curve, -r) >= 2 * curve.length - 1e-9


def test_ellipse_offset_length_matches_turning_number():
    # int (1 + r kappa) ds = L + 2 pi r for a simple closed curve
    curve = Ellipse(2, 1)
    assert offset_length(curve, 0.3) == pytest.approx(curve.length + 2 * np.pi * 0.3, rel=1e-9)


def test_domain_json_round_trip(annulus):
    tube = domain_from_json(annulus.to_json())
    assert tube.delta == 0.5 and tube.curve.radius == 1.5
    assert isinstance(domain_from_json({"kind": "disc"}), Disc)
    spline = curve_from_json({"kind": "spline", "points": [[1, 0], [0, 1], [-1, 0], [0, -1]]})
    assert spline.length == pytest.approx(2 * np.pi, rel=0.05)
    with pytest.raises(ValueError):
        curve_from_json({"kind": "square"})
