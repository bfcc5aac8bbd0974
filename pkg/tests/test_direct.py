import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from l1helmholtz import closed_form as cf
from l1helmholtz.direct import (
    SolverOptions,
    initial_profile,
    minimize,
    project_sphere,
    prox_l1,
    smooth_gradient,
    tail_mass,
)
from l1helmholtz.exceptions import DegenerateProfileError, StepSizeError
from l1helmholtz.grid import (
    RadialGrid,
    RadialProfile,
    evaluate_functional,
    inner,
    kinetic_energy,
    l2_norm,
)


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        g = RadialGrid(200, 2.0)
        p = RadialProfile(g, np.exp(-g.nodes ** 2) + 0.1 * rng.standard_normal(g.n))
        grad = smooth_gradient(p)
        eps = 1e-6
        for _ in range(10):
            d = RadialProfile(g, rng.standard_normal(g.n))
            fd = (kinetic_energy(p.with_values(p.values + eps * d.values))
                  - kinetic_energy(p.with_values(p.values - eps * d.values))) / (2 * eps)
            assert inner(grad, d) == pytest.approx(fd, rel=1e-6)

    def test_sinc_eigenfunction(self):
        errs = []
        for n in (401, 801):
            g = RadialGrid(n, 2.0)
            k = 3.0
            p = RadialProfile(g, np.sinc(k * g.nodes / np.pi))
            inside = g.nodes < 1.9
            errs.append(np.max(np.abs(smooth_gradient(p).values - k * k * p.values)[inside]))
        assert errs[1] < errs[0] / 3.5

    def test_needs_three_nodes(self):
        with pytest.raises(ValueError):
            smooth_gradient(RadialProfile(RadialGrid(2, 1.0), [1.0, 0.0]))


class TestProx:
    def test_against_scalar_oracle(self):
        rng = np.random.default_rng(3)
        g = RadialGrid(8, 1.0)
        p = RadialProfile(g, rng.uniform(-1, 1, 8))
        t = 0.3
        out = prox_l1(p, t).values
        for x, y in zip(p.values, out):
            res = minimize_scalar(lambda z: 0.5 * (z - x) ** 2 + t * z, bounds=(0, 5), method="bounded",
                                  options={"xatol": 1e-12})
            assert y == pytest.approx(res.x, abs=1e-8)

    def test_zero_threshold_clips(self):
        g = RadialGrid(4, 1.0)
        np.testing.assert_array_equal(prox_l1(RadialProfile(g, [1, -1, 2, -2]), 0.0).values, [1, 0, 2, 0])

    def test_negative_threshold(self):
        with pytest.raises(ValueError):
            prox_l1(RadialProfile(RadialGrid(4, 1.0), np.ones(4)), -1.0)


class TestProjection:
    def test_unit_norm_and_idempotent(self):
        g = RadialGrid(100, 1.0)
        p = project_sphere(RadialProfile(g, np.linspace(3, 0, 100)))
        assert l2_norm(p) == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(project_sphere(p).values, p.values, rtol=1e-14)

    def test_halves(self):
        g = RadialGrid(100, 1.0)
        p = project_sphere(RadialProfile(g, np.linspace(3, 0, 100)))
        np.testing.assert_allclose(project_sphere(p * 2.0).values, p.values, rtol=1e-14)

    def test_zero_raises(self):
        with pytest.raises(DegenerateProfileError):
            project_sphere(RadialProfile(RadialGrid(10, 1.0), np.zeros(10)))


@pytest.fixture(scope="module")
def run2048(params1):
    grid = RadialGrid(2048, 2 * params1.R)
    return grid, minimize(1.0, grid, SolverOptions(seed=0))


class TestMinimize:
    def test_energy_and_support(self, run2048, params1):
        grid, (prof, e, trace) = run2048
        F = cf.solve_report(1.0)[2]["F_total"]
        assert abs(e.total - F) / F <= 1e-3
        support = grid.nodes[np.flatnonzero(prof.values > 0)[-1]]
        assert abs(support - params1.R) / params1.R <= 0.05
        assert trace.converged

    def test_unit_norm_on_every_record(self, run2048):
        _, (_, _, trace) = run2048
        assert len(trace) > 0
        assert all(r.l2err <= 1e-10 for r in trace.records)
        assert trace.max_ascent <= 1e-6

    def test_virial(self, run2048):
        _, (prof, e, _) = run2048
        assert abs(2 * e.kinetic - 1.5 * e.l1) / (2 * e.kinetic) <= 1e-2

    def test_tail_empty(self, run2048):
        _, (prof, _, _) = run2048
        assert tail_mass(prof) == 0.0

    def test_residual_close_to_sampled(self, run2048, params1):
        grid, (prof, _, _) = run2048
        ref = cf.helmholtz_residual(cf.sample(params1, grid), params1)
        assert cf.helmholtz_residual(prof, params1) <= 10 * ref

    def test_stationary_at_discrete_minimiser(self, run2048):
        grid, (prof, e, _) = run2048
        opts = SolverOptions(max_iters=100, warm_start=False, check_every=10, record_every=10)
        prof2, e2, _ = minimize(1.0, grid, opts, init=prof)
        assert abs(e2.total - e.total) / e.total <= 1e-9

    def test_mesh_independence(self, run2048, params1):
        _, (_, e, _) = run2048
        e1024 = minimize(1.0, RadialGrid(1024, 2 * params1.R), SolverOptions(seed=0)).energy
        assert abs(e1024.total - e.total) / e.total <= 5e-3

    def test_seed_determinism(self, params1):
        grid = RadialGrid(300, 2 * params1.R)
        opts = SolverOptions(seed=7, energy_tol=1e-8)
        a = minimize(1.0, grid, opts)
        b = minimize(1.0, grid, opts)
        np.testing.assert_array_equal(a.profile.values, b.profile.values)
        assert a.energy.total == b.energy.total

    def test_rearrange_every(self, params1):
        grid = RadialGrid(300, 2 * params1.R)
        prof, e, _ = minimize(1.0, grid, SolverOptions(seed=1, rearrange_every=50, energy_tol=1e-8))
        assert np.all(np.diff(prof.values) <= 0)
        F = cf.solve_report(1.0)[2]["F_total"]
        assert abs(e.total - F) / F <= 1e-2

    def test_cold_start(self, params1):
        grid = RadialGrid(200, 2 * params1.R)
        _, e, trace = minimize(1.0, grid, SolverOptions(warm_start=False, energy_tol=1e-9))
        assert trace.levels == [200]
        F = cf.solve_report(1.0)[2]["F_total"]
        assert abs(e.total - F) / F <= 2e-2

    def test_init_must_match_grid(self, params1):
        g = RadialGrid(100, 2.0)
        with pytest.raises(ValueError):
            minimize(1.0, g, init=initial_profile(RadialGrid(101, 2.0)))


class TestFailures:
    def test_huge_beta_zeroes_profile(self):
        g = RadialGrid(100, 1.0)
        with pytest.raises(DegenerateProfileError):
            minimize(1e12, g, SolverOptions(warm_start=False))

    def test_huge_step_diverges(self):
        g = RadialGrid(100, 3.0)
        with pytest.raises((StepSizeError, DegenerateProfileError)):
            minimize(1e-3, g, SolverOptions(step=50 * g.h ** 2, warm_start=False, max_iters=5000))

    def test_rejects_beta(self):
        with pytest.raises(ValueError):
            minimize(0.0, RadialGrid(10, 1.0))

    @pytest.mark.parametrize("kw", [dict(step=0.0), dict(max_iters=0), dict(energy_tol=0.0),
                                    dict(rearrange_every=-1), dict(check_every=0)])
    def test_options_validation(self, kw):
        with pytest.raises(ValueError):
            SolverOptions(**kw)


def test_initial_profile():
    g = RadialGrid(64, 3.0)
    p = initial_profile(g)
    assert l2_norm(p) == pytest.approx(1.0, abs=1e-14)
    assert not np.array_equal(initial_profile(g, 1).values, initial_profile(g, 2).values)
    np.testing.assert_array_equal(initial_profile(g, 1).values, initial_profile(g, 1).values)
