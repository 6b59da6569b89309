import numpy as np
import pytest

from mfgibbs.dynamics import SimConfig, run_chain
from mfgibbs.energies import ParticleSystem, QuadraticMeanEnergy, PairwiseKernelEnergy
from mfgibbs.errors import GibbsUndefinedError
from mfgibbs.spectral1d import (
    Grid1D,
    conditional_potential,
    gaussian_exact,
    gaussian_kl,
    grid_poincare,
    proximal_gibbs_fixed_point,
)


def ou_grid(kappa=1.0, lo=-10.0, hi=10.0, n=2001):
    return Grid1D.from_callable(lambda x: 0.5 * kappa * x * x, lo, hi, n)


class TestGrid1D:
    def test_density_normalized(self):
        g = ou_grid()
        assert abs(np.trapezoid(g.density(), dx=g.spacing) - 1.0) < 1e-12

    def test_density_matches_gaussian(self):
        g = ou_grid()
        ref = np.exp(-0.5 * g.x**2) / np.sqrt(2 * np.pi)
        assert np.max(np.abs(g.density() - ref)) < 1e-10

    def test_validation(self):
        with pytest.raises(ValueError):
            Grid1D(1.0, 0.0, 10, np.zeros(10))
        with pytest.raises(ValueError):
            Grid1D(0.0, 1.0, 10, np.zeros(9))
        with pytest.raises(ValueError):
            Grid1D(0.0, 1.0, 3, np.array([0.0, np.inf, 0.0]))


class TestGridPoincare:
    def test_ou_unit(self):
        res = grid_poincare(ou_grid(1.0))
        assert abs(res.gap - 1.0) < 1e-3
        assert res.converged
        assert res.ground_mass < 1e-8

    def test_ou_scaling(self):
        # gap of U = kappa x^2 / 2 is exactly kappa
        for kappa in (0.5, 2.0, 4.0):
            lo = 12.0 / np.sqrt(kappa)
            res = grid_poincare(ou_grid(kappa, -lo, lo, 4001))
            assert abs(res.gap - kappa) < 2e-3 * kappa

    def test_additive_shift_invariant(self):
        g = ou_grid()
        shifted = Grid1D(g.lo, g.hi, g.n, g.potential + 7.3)
        a = grid_poincare(g).gap
        b = grid_poincare(shifted).gap
        assert abs(a - b) < 1e-12

    def test_translation_invariant(self):
        g = Grid1D.from_callable(lambda x: 0.5 * (x - 2.0) ** 2, -10.0, 14.0, 2401)
        res = grid_poincare(g)
        assert abs(res.gap - 1.0) < 1e-3

    def test_double_well_below_convexity(self):
        # U = (x^2-1)^2 has a small gap due to the barrier, far below the
        # curvature at the wells (which is 8)
        g = Grid1D.from_callable(lambda x: (x * x - 1.0) ** 2, -6.0, 6.0, 4001)
        res = grid_poincare(g)
        assert 0.0 < res.gap < 4.0

    def test_boundary_mass_guard(self):
        g = Grid1D.from_callable(lambda x: 0.5 * x * x, -2.0, 2.0, 101)
        with pytest.raises(ValueError):
            grid_poincare(g)

    def test_refinement_consistency(self):
        coarse = grid_poincare(ou_grid(n=401), check_convergence=False).gap
        fine = grid_poincare(ou_grid(n=3201), check_convergence=False).gap
        # second-order scheme: coarse error should dominate and both are close
        assert abs(fine - 1.0) < abs(coarse - 1.0) + 1e-9
        assert abs(coarse - fine) < 1e-3


class TestConditionalPotential:
    def test_quadratic_closed_form(self):
        # x1 | rest for the quadratic-mean energy: curvature 1 - a/N
        a, N = 0.5, 20
        system = ParticleSystem(QuadraticMeanEnergy(a), N, 1)
        rng = np.random.default_rng(5)
        frozen = rng.normal(size=N - 1)
        grid = conditional_potential(system, frozen, -30.0, 30.0, 3001)
        res = grid_poincare(grid)
        assert abs(res.gap - (1.0 - a / N)) < 1e-3

    def test_frozen_count_checked(self):
        system = ParticleSystem(QuadraticMeanEnergy(0.5), 5, 1)
        with pytest.raises(ValueError):
            conditional_potential(system, np.zeros(3), -10, 10, 101)

    def test_kernel_curvature_positive(self):
        kern = PairwiseKernelEnergy(eta=1.0, L=1.0, alpha=0.05)
        system = ParticleSystem(kern, 10, 1)
        frozen = np.linspace(-1.0, 1.0, 9)
        grid = conditional_potential(system, frozen, -40.0, 40.0, 2001)
        res = grid_poincare(grid)
        assert res.gap > np.exp(-1) - 1e-6  # uniform lower bound eta e^{-L}


class TestFixedPoint:
    def test_quadratic_standard_normal(self):
        # flat derivative |x|^2/2 - a xbar x; symmetric fixed point is N(0, 1)
        res = proximal_gibbs_fixed_point(QuadraticMeanEnergy(0.5), -8.0, 8.0, 1601)
        assert res.converged
        ref = np.exp(-0.5 * res.grid_x**2) / np.sqrt(2 * np.pi)
        assert np.max(np.abs(res.density - ref)) < 1e-10
        assert abs(res.variance() - 1.0) < 1e-6

    def test_kernel_fixed_point(self):
        kern = PairwiseKernelEnergy(eta=1.0, L=1.0, alpha=0.05)
        res = proximal_gibbs_fixed_point(kern, -12.0, 12.0, 1201)
        assert res.converged
        assert abs(np.trapezoid(res.density, dx=res.grid_x[1] - res.grid_x[0]) - 1.0) < 1e-9
        # symmetric energy, symmetric window: even density
        assert np.max(np.abs(res.density - res.density[::-1])) < 1e-7

    def test_mc_cross_check(self):
        # large-N particle marginal approximates the mean-field fixed point
        system = ParticleSystem(QuadraticMeanEnergy(0.5), 100, 1)
        cfg = SimConfig(
            step=0.1, n_steps=20000, burn_in=2000, thin=5,
            replicas=4, seed=11, sampler="MALA",
        )
        traj = run_chain(system, cfg, observables={"x1": lambda x: float(x[0, 0])})
        var_mc = float(np.var(traj.observables["x1"]))
        res = proximal_gibbs_fixed_point(QuadraticMeanEnergy(0.5), -8.0, 8.0, 801)
        assert abs(var_mc - res.variance()) < 0.1


class TestGaussianExact:
    def test_small_system(self):
        system = ParticleSystem(QuadraticMeanEnergy(0.5), 2, 1)
        res = gaussian_exact(system)
        np.testing.assert_allclose(res.precision, [[0.75, -0.25], [-0.25, 0.75]])
        assert abs(res.poincare - 0.5) < 1e-12
        assert res.lsi == res.poincare
        np.testing.assert_allclose(res.precision @ res.covariance, np.eye(2), atol=1e-12)

    def test_matches_quadratic_formula(self):
        for a in (0.2, 0.8):
            for N in (5, 50):
                system = ParticleSystem(QuadraticMeanEnergy(a), N, 1)
                assert abs(gaussian_exact(system).poincare - (1.0 - a)) < 1e-12

    def test_undefined(self):
        with pytest.raises(GibbsUndefinedError):
            gaussian_exact(ParticleSystem(QuadraticMeanEnergy(1.2), 5, 1))

    def test_rejects_other_energies(self):
        kern = PairwiseKernelEnergy(eta=1.0, L=1.0, alpha=0.05)
        with pytest.raises(TypeError):
            gaussian_exact(ParticleSystem(kern, 5, 1))


class TestGaussianKL:
    def test_identical_zero(self):
        assert abs(gaussian_kl([0.0], [[2.0]], [0.0], [[2.0]])) < 1e-12

    def test_mean_shift_scalar(self):
        # KL(N(m,1) || N(0,1)) = m^2/2
        assert abs(gaussian_kl([1.0], [[1.0]], [0.0], [[1.0]]) - 0.5) < 1e-12

    def test_variance_scalar(self):
        # KL(N(0,s) || N(0,1)) = (s - 1 - ln s)/2
        s = 0.5
        expected = 0.5 * (s - 1.0 - np.log(s))
        assert abs(gaussian_kl([0.0], [[s]], [0.0], [[1.0]]) - expected) < 1e-12
        assert abs(expected - 0.09657359027997264) < 1e-15

    def test_multivariate_rotation_invariant(self):
        rng = np.random.default_rng(6)
        A = rng.normal(size=(3, 3))
        cov = A @ A.T + 0.5 * np.eye(3)
        m = rng.normal(size=3)
        kl = gaussian_kl(m, cov, np.zeros(3), np.eye(3))
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        kl_rot = gaussian_kl(Q @ m, Q @ cov @ Q.T, np.zeros(3), np.eye(3))
        assert abs(kl - kl_rot) < 1e-10

    def test_nonnegative(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = rng.normal(size=(2, 2))
            b = rng.normal(size=(2, 2))
            kl = gaussian_kl(
                rng.normal(size=2), a @ a.T + 0.1 * np.eye(2),
                rng.normal(size=2), b @ b.T + 0.1 * np.eye(2),
            )
            assert kl >= -1e-12

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            gaussian_kl([0.0], [[1.0]], [0.0], [[0.0]])


class TestLsiFisherProperty:
    def fisher_info(self, mean, cov, prec_target):
        # I(N(m,S) || N(0,S*)) with S* = prec_target^{-1}:
        # |prec_target m|^2 + tr((prec_target - S^{-1}) S (prec_target - S^{-1}))
        S = np.atleast_2d(cov)
        m = np.atleast_1d(mean)
        D = prec_target - np.linalg.inv(S)
        return float(m @ prec_target @ prec_target @ m + np.trace(D @ S @ D))

    def test_lsi_constant_is_sharp_bound(self):
        # KL <= I / (2 rho) with rho the exact LSI constant, tight for
        # covariance perturbations along the soft eigendirection
        system = ParticleSystem(QuadraticMeanEnergy(0.5), 4, 1)
        exact = gaussian_exact(system)
        A = exact.precision
        rho = exact.lsi
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(100):
            m = 0.5 * rng.normal(size=4)
            B = rng.normal(size=(4, 4))
            S = 0.2 * (B @ B.T) + 0.5 * np.eye(4)
            kl = gaussian_kl(m, S, np.zeros(4), exact.covariance)
            fi = self.fisher_info(m, S, A)
            assert 2.0 * rho * kl <= fi + 1e-10
            if fi > 0:
                worst = max(worst, 2.0 * rho * kl / fi)
        # near-tight along the minimal eigendirection via small mean shifts
        v = np.linalg.eigh(A)[1][:, 0]
        kl = gaussian_kl(1e-3 * v, exact.covariance, np.zeros(4), exact.covariance)
        fi = self.fisher_info(1e-3 * v, exact.covariance, A)
        assert abs(2.0 * rho * kl / fi - 1.0) < 1e-6
