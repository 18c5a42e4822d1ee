import numpy as np
import pytest
from sklearn.base import clone

from projeikonal.errors import DivergedLineSearch
from projeikonal.fields import exact_solution, frobenius_distance, residual
from projeikonal.geometry import Circle, Disc, Rectangle, grid_from_mask, make_tube, rasterize
from projeikonal.linefield import ProjectionField
from projeikonal.variational import (
    MinimizeParams,
    ProjectionFieldMinimizer,
    TubularityTest,
    _descend,
    gradient,
    minimize,
    objective,
    random_initial_field,
    restart_seeds,
    tubularity_test,
    verdict,
)


def patch_grid(n=8, h=1 / 16):
    mask = np.pad(np.ones((n, n), dtype=bool), 1)
    return grid_from_mask(mask, h, (-h, -h), Rectangle((0, 0), (n * h, n * h)))


def angle_field(grid, phi):
    return ProjectionField.from_interior(grid, np.stack([np.cos(phi), np.sin(phi)], axis=1))


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("stencil", ["compact", "central"])
def test_gradient_matches_finite_differences(seed, stencil):
    g = patch_grid()
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0, 2 * np.pi, g.n_interior)
    grad = gradient(angle_field(g, phi), 1.0, stencil)
    perp = np.stack([-np.sin(phi), np.cos(phi)], axis=1)
    analytic = np.sum(grad * perp, axis=1)
    e = 1e-6
    numeric = np.empty(g.n_interior)
    for i in range(g.n_interior):
        d = np.zeros(g.n_interior)
        d[i] = e
        numeric[i] = (objective(angle_field(g, phi + d), 1.0, stencil)
                      - objective(angle_field(g, phi - d), 1.0, stencil)) / (2 * e)
    assert np.linalg.norm(numeric - analytic) <= 1e-6 * np.linalg.norm(analytic)


def test_gradient_is_tangential():
    g = patch_grid()
    f = random_initial_field(g, 4, 0.0)
    grad = gradient(f)
    assert np.abs(np.sum(grad * f.interior, axis=1)).max() < 1e-12


def test_central_objective_without_penalty_is_squared_residual():
    g = patch_grid()
    f = random_initial_field(g, 3, 0.05)
    assert objective(f, 0.0, "central") == pytest.approx(residual(f).l2 ** 2, rel=1e-12)


def test_constant_field_on_disc_pays_only_the_boundary():
    # |P n|^2 = cos^2 of the angle to the normal; its integral over the unit circle is pi
    g = rasterize(Disc(1.0), 1 / 64)
    f = ProjectionField.from_interior(g, np.tile([1.0, 0.0], (g.n_interior, 1)))
    assert objective(f, 0.0) < 1e-20
    assert objective(f, 1.0) == pytest.approx(np.pi, rel=0.01)
    assert objective(f, 2.5) == pytest.approx(2.5 * objective(f, 1.0), rel=1e-12)


def test_exact_annulus_init_stops_quickly(annulus, annulus_grid_32):
    f = exact_solution(annulus, annulus_grid_32)
    rep = minimize(annulus_grid_32, MinimizeParams(grad_tol=1e-4), init=f)
    assert rep.converged and rep.iterations <= 5
    assert rep.objective <= objective(f)


def test_random_init_recovers_annulus_solution(annulus, annulus_grid_32):
    g = annulus_grid_32
    rep = minimize(g, MinimizeParams(seed=0))
    assert rep.objective <= 1e-3
    assert np.all(np.diff(rep.objective_trace) <= 0)
    R = np.hypot(*g.centers()[g.mask].T)
    away = (R > 1.1) & (R < 1.9)
    dist = frobenius_distance(rep.field.interior[away], exact_solution(annulus, g).interior[away])
    assert dist.max() < 0.1


def test_minimize_is_deterministic(annulus):
    g = rasterize(annulus, 1 / 16)
    a = minimize(g, MinimizeParams(seed=11, max_iters=50))
    b = minimize(g, MinimizeParams(seed=11, max_iters=50))
    assert np.array_equal(a.field.q, b.field.q)
    assert a.objective_trace == b.objective_trace


def test_disc_floor_is_far_above_annulus(annulus):
    h = 1 / 32
    disc = minimize(rasterize(Disc(1.0), h), MinimizeParams(seed=0, max_iters=200))
    ref = objective(exact_solution(annulus, rasterize(annulus, h)))
    assert disc.objective > 10 * ref


def test_line_search_rejects_non_finite_objective():
    class Broken:
        def value_and_gradient(self, q):
            return float("nan"), np.zeros_like(q)

        def value(self, q):
            return float("nan")

    with pytest.raises(DivergedLineSearch):
        _descend(Broken(), np.ones((4, 2)), 10, 1e-9, 1.0)


def test_chain_sharing_matches_independent_solves(annulus):
    ladder = (1 / 16, 1 / 32, 1 / 64)
    params = MinimizeParams(seed=5, max_iters=20)
    rep = tubularity_test(annulus, ladder, params)
    first = rep.restarts[0]
    assert first["seed"] == restart_seeds(5)[0]
    for h, v in zip(ladder, first["values"]):
        solo = minimize(rasterize(annulus, h), MinimizeParams(seed=first["seed"], max_iters=20))
        assert v == pytest.approx(solo.objective, rel=1e-12)
    assert all(r["monotone"] for r in rep.restarts)


@pytest.mark.parametrize("values,expected", [
    ([1e-3, 4e-4, 1e-4], "tubular-consistent"),
    ([0.5, 0.5, 0.49], "obstructed"),
    ([1e-3, 8e-4, 1e-4], "inconclusive"),
])
def test_verdict_rules(values, expected):
    assert verdict(values, [1e-4, 2e-5, 5e-6]) == expected


def test_plateau_below_reference_floor_is_inconclusive():
    assert verdict([1e-6, 1e-6, 1e-6], [1e-6, 5e-7, 2e-7]) == "inconclusive"


def test_bad_ladder_is_rejected(annulus):
    with pytest.raises(ValueError):
        tubularity_test(annulus, (1 / 16, 1 / 24, 1 / 32))
    with pytest.raises(ValueError):
        tubularity_test(annulus, (1 / 16, 1 / 32))


def test_estimators(annulus):
    g = rasterize(annulus, 1 / 16)
    est = ProjectionFieldMinimizer(seed=2, max_iters=40)
    assert clone(est).get_params()["seed"] == 2
    est.fit(g)
    assert est.objective_ == est.report_.objective
    assert est.score(g) == pytest.approx(-est.objective_)
    assert est.transform(g).shape == g.shape + (2,)
    tt = TubularityTest(h_ladder=(1 / 16, 1 / 32, 1 / 64), max_iters=10)
    assert tt.predict(annulus) in {"tubular-consistent", "obstructed", "inconclusive"}
    assert tt.report_.h == [1 / 16, 1 / 32, 1 / 64]
