import itertools

import numpy as np
import pytest

from mfgibbs.measures import (
    DiscreteMeasure,
    UnsupportedTransportError,
    empirical,
    mix,
    w2_squared,
)


def brute_force_w2_uniform(xs, ys):
    """Oracle: minimum over all permutations of the assignment cost."""
    xs = np.atleast_2d(np.asarray(xs, float))
    ys = np.atleast_2d(np.asarray(ys, float))
    n = xs.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        cost = sum(float(np.sum((xs[i] - ys[perm[i]]) ** 2)) for i in range(n)) / n
        best = min(best, cost)
    return best


class TestEmpirical:
    def test_two_points(self):
        mu = empirical([[0.0], [2.0]])
        assert mu.n_atoms == 2
        np.testing.assert_allclose(mu.weights, [0.5, 0.5])

    def test_duplicates_kept(self):
        mu = empirical([[1.0], [1.0], [1.0]])
        assert mu.n_atoms == 3
        np.testing.assert_allclose(mu.weights, [1 / 3] * 3)

    def test_2d(self):
        mu = empirical([[0.0, 0.0], [1.0, 1.0]])
        assert mu.dim == 2
        np.testing.assert_allclose(mu.weights, [0.5, 0.5])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical(np.empty((0, 1)))


class TestInvariants:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            DiscreteMeasure([[0.0]], [0.5])

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            DiscreteMeasure([[0.0], [1.0]], [1.5, -0.5])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            DiscreteMeasure([[np.nan]], [1.0])

    def test_immutable(self):
        mu = empirical([[0.0], [2.0]])
        with pytest.raises(ValueError):
            mu.points[0, 0] = 5.0


class TestMix:
    def test_diracs(self):
        out = mix(empirical([[0.0]]), empirical([[2.0]]), 0.5)
        np.testing.assert_allclose(sorted(out.points[:, 0]), [0.0, 2.0])
        np.testing.assert_allclose(out.weights, [0.5, 0.5])

    def test_t_zero_is_nu(self):
        mu = empirical([[0.0]])
        nu = empirical([[1.0], [3.0]])
        out = mix(mu, nu, 0.0)
        np.testing.assert_allclose(out.points, nu.points)
        np.testing.assert_allclose(out.weights, nu.weights)

    def test_weight_arithmetic(self):
        out = mix(empirical([[0.0], [1.0]]), empirical([[2.0]]), 0.5)
        np.testing.assert_allclose(sorted(out.points[:, 0]), [0.0, 1.0, 2.0])
        np.testing.assert_allclose(sorted(out.weights), [0.25, 0.25, 0.5])

    def test_t_out_of_range(self):
        mu = empirical([[0.0]])
        with pytest.raises(ValueError):
            mix(mu, mu, 1.5)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            mix(empirical([[0.0]]), empirical([[0.0, 0.0]]), 0.5)


class TestW2:
    def test_identical(self):
        mu = empirical([[0.0], [2.0]])
        assert w2_squared(mu, mu) == 0.0

    def test_shifted_pair_matches_brute_force(self):
        mu = empirical([[0.0], [2.0]])
        nu = empirical([[1.0], [3.0]])
        expected = brute_force_w2_uniform([[0.0], [2.0]], [[1.0], [3.0]])
        assert expected == 1.0
        assert abs(w2_squared(mu, nu) - expected) < 1e-12

    def test_quantile_split(self):
        # half the mass of a Dirac moves distance 2: cost 0.5 * 4
        mu = empirical([[0.0]])
        nu = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
        assert abs(w2_squared(mu, nu) - 2.0) < 1e-12

    def test_dirac_pairs_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x, y = rng.normal(size=2)
            assert w2_squared(empirical([[x]]), empirical([[y]])) == (x - y) ** 2

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            mu = random_measure(rng)
            nu = random_measure(rng)
            assert abs(w2_squared(mu, nu) - w2_squared(nu, mu)) < 1e-12

    def test_triangle_inequality(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            mu, nu, pi = (random_measure(rng) for _ in range(3))
            d = lambda a, b: np.sqrt(w2_squared(a, b))
            assert d(mu, nu) <= d(mu, pi) + d(pi, nu) + 1e-9

    def test_quantile_agrees_with_assignment_in_1d(self):
        # uniform equal-size instances admit both routes
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(1, 8))
            xs = rng.normal(size=(n, 1))
            ys = rng.normal(size=(n, 1))
            quantile = w2_squared(empirical(xs), empirical(ys))
            if n <= 6:
                assert abs(quantile - brute_force_w2_uniform(xs, ys)) < 1e-10

    def test_d2_assignment(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(1, 6))
            xs = rng.normal(size=(n, 2))
            ys = rng.normal(size=(n, 2))
            got = w2_squared(empirical(xs), empirical(ys))
            assert abs(got - brute_force_w2_uniform(xs, ys)) < 1e-10

    def test_unsupported_instance(self):
        mu = DiscreteMeasure([[0.0, 0.0], [1.0, 1.0]], [0.3, 0.7])
        nu = empirical([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(UnsupportedTransportError):
            w2_squared(mu, nu)


def random_measure(rng, d=1):
    n = int(rng.integers(1, 6))
    w = rng.random(n) + 0.1
    return DiscreteMeasure(rng.normal(size=(n, d)), w / w.sum())
