import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import square_grid
from projeikonal.errors import NonOrientable, NotAProjection, UnresolvableJump
from projeikonal.geometry import rasterize
from projeikonal.linefield import (
    ProjectionField,
    UnitVectorField,
    constant_field,
    convert,
    lift,
    loop_index,
    square_loop,
    target_field,
    uturn_field,
    validate_projection,
)


def test_convert_horizontal():
    r = convert(theta=0.0)
    np.testing.assert_allclose(r.P, [[1, 0], [0, 0]])
    np.testing.assert_allclose(r.q, [1, 0])


def test_convert_is_sign_blind():
    a, b = convert(m=[0, 1]), convert(m=[0, -1])
    np.testing.assert_array_equal(a.P, b.P)
    np.testing.assert_allclose(a.P, [[0, 0], [0, 1]], atol=1e-15)


def test_convert_diagonal():
    r = convert(theta=np.pi / 4)
    np.testing.assert_allclose(r.P, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)
    np.testing.assert_allclose(r.q, [0, 1], atol=1e-15)


@settings(max_examples=50)
@given(st.floats(-10, 10))
def test_convert_round_trips(theta):
    r = convert(theta=theta)
    for other in (convert(q=r.q), convert(P=r.P), convert(m=r.m), convert(m=-r.m)):
        np.testing.assert_allclose(other.P, r.P, atol=1e-12)
    np.testing.assert_allclose(r.P, np.outer(r.m, r.m), atol=1e-15)
    assert validate_projection(r.P, 1e-12).ok


def test_convert_rejects_non_projections():
    with pytest.raises(NotAProjection):
        convert(P=np.eye(2))
    with pytest.raises(NotAProjection):
        convert(m=[1.0, 1.0])
    with pytest.raises(TypeError):
        convert(theta=0.0, q=[1, 0])


def test_validate_projection_diagnostics():
    # the identity is a projection, but of rank two
    assert validate_projection(np.eye(2)).failed == ("rank",)
    assert validate_projection(np.zeros((2, 2))).failed == ("rank",)
    assert validate_projection(convert(theta=1.234).P, 1e-12).ok


@settings(max_examples=30, deadline=None)
@given(st.lists(st.booleans(), min_size=64, max_size=64))
def test_sign_gauge_invariance(flips):
    grid = square_grid(8)
    rng = np.random.default_rng(3)
    th = rng.uniform(0, 2 * np.pi, grid.shape)
    m = np.stack([np.cos(th), np.sin(th)], axis=-1)
    flipped = m * np.where(np.reshape(flips, grid.shape), -1.0, 1.0)[..., None]
    a = UnitVectorField(grid, m).to_projection()
    b = UnitVectorField(grid, flipped).to_projection()
    np.testing.assert_allclose(a.P, b.P, atol=1e-15)


def test_field_invariants_and_json_round_trip():
    grid = square_grid(10)
    f = ProjectionField.from_theta(grid, np.random.default_rng(0).uniform(0, 7, grid.shape))
    np.testing.assert_allclose(np.linalg.norm(f.interior, axis=1), 1.0, atol=1e-12)
    P = f.P[grid.mask]
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(np.trace(P, axis1=1, axis2=2), 1.0, atol=1e-12)
    g = ProjectionField.from_json(f.to_json())
    np.testing.assert_array_equal(g.q, f.q)
    # theta and theta + pi give the same field
    f2 = ProjectionField.from_theta(grid, f.theta + np.pi)
    np.testing.assert_allclose(f2.q, f.q, atol=1e-12)


def test_loop_index_examples():
    grid = square_grid(40)
    loop = square_loop(grid, (0.0, 0.0), 10)
    assert loop_index(constant_field(grid, 0.3), loop) == 0
    assert loop_index(target_field(grid, (0.01, 0.02)), loop) == 1
    assert loop_index(uturn_field(grid, (0.01, 0.02)), loop) == 0.5


def test_loop_index_invariance_and_additivity():
    grid = square_grid(60)
    field = target_field(grid, (0.013, 0.017))
    loop = square_loop(grid, (0.0, 0.0), 12)
    assert loop_index(field, loop) == 1
    # reparametrization: start elsewhere on the loop
    assert loop_index(field, loop[7:] + loop[:7]) == 1
    # homotopy: nested loops around the same core
    assert {loop_index(field, square_loop(grid, (0.0, 0.0), k)) for k in (3, 8, 20, 25)} == {1}
    # two +1/2 cores enclosed together give +1
    c = grid.centers()
    th = 0.5 * (np.arctan2(c[..., 1], c[..., 0] - 0.3) + np.arctan2(c[..., 1], c[..., 0] + 0.3))
    two = ProjectionField.from_theta(grid, th)
    assert loop_index(two, square_loop(grid, (0.0, 0.01), 20)) == 1
    assert loop_index(two, square_loop(grid, (0.3, 0.01), 4)) == 0.5


def test_loop_index_unresolvable_jump():
    grid = square_grid(20)
    th = np.where(grid.centers()[..., 0] > 0, np.pi / 2, 0.0)
    with pytest.raises(UnresolvableJump):
        loop_index(ProjectionField.from_theta(grid, th), square_loop(grid, (0.0, 0.0), 5))


def test_lift_constant_field():
    grid = square_grid(6)
    m = lift(constant_field(grid, 2.0)).m
    np.testing.assert_allclose(m[grid.mask], np.tile([np.cos(2.0), np.sin(2.0)], (36, 1)),
                               atol=1e-12)


def test_lift_target_on_annulus(annulus):
    grid = rasterize(annulus, 1 / 16)
    field = target_field(grid)
    m = lift(field).m[grid.mask]
    c = grid.centers()[grid.mask]
    azim = np.stack([-c[:, 1], c[:, 0]], axis=1) / np.linalg.norm(c, axis=1)[:, None]
    dots = (m * azim).sum(axis=1)
    assert np.all(np.abs(dots - dots[0]) < 1e-12) and abs(abs(dots[0]) - 1) < 1e-12


def test_lift_uturn_reports_half_index():
    grid = square_grid(48, hole=0.15)
    with pytest.raises(NonOrientable) as info:
        lift(uturn_field(grid))
    report = info.value.report
    assert report.index == 0.5 and not report.orientable
    assert loop_index(uturn_field(grid), report.loop) == 0.5


def test_lift_reproduces_random_smooth_orientable_fields():
    grid = square_grid(24)
    c = grid.centers()
    rng = np.random.default_rng(7)
    for _ in range(100):
        a, b, ph = rng.normal(size=3)
        th = a * c[..., 0] + b * c[..., 1] ** 2 + ph
        m = np.stack([np.cos(th), np.sin(th)], axis=-1)
        lifted = lift(UnitVectorField(grid, m).to_projection()).m
        s = np.sign((lifted * m).sum(axis=-1))
        assert np.all(s == s[0, 0])
        np.testing.assert_allclose(lifted, s[0, 0] * m, atol=1e-12)
