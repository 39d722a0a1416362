import math
import unittest

import numpy as np

from src.core.errors import DomainError, LiftError, PreconditionError
from src.measures.domain import Domain
from src.measures.problem import build_problem
from src.measures.weight import Weight
from src.orthopoly.basis import orthonormal_basis
from src.partition.correlation import m_point_correlation
from src.partition.partition_function import (
    HOM_GRAM,
    MONTE_CARLO,
    NORM_PRODUCT,
    homogeneous_gram_matrix,
    mu_n_measure,
    partition_hom_gram,
    partition_monte_carlo,
    partition_norm_product,
    r1_norm_formula,
)
from src.partition.vandermonde import (
    batch_log_weighted_vdm,
    direct_log_homogeneous_det,
    lift_to_F,
    log_abs_vdm,
    log_homogeneous_vdm,
    log_weighted_vdm,
)


class TestVandermonde(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.points = np.array([0.0, 1.0, 3.0])

    def test_log_abs_vdm(self):
        """Test the product of pairwise distances"""
        self.assertAlmostEqual(log_abs_vdm(self.points), math.log(6.0), places=14)
        self.assertTrue(np.isneginf(log_abs_vdm([1.0, 1.0, 2.0])))

    def test_log_weighted_vdm(self):
        """Test the weighted Vandermonde includes w^n at every point"""
        w = Weight.gaussian()
        expected = math.log(6.0) - 2.0 * (0.0 + 1.0 + 9.0)
        self.assertAlmostEqual(log_weighted_vdm(self.points, w, 2), expected, places=12)
        with self.assertRaises(PreconditionError):
            log_weighted_vdm(self.points, w, 3)
        zero = Weight.tabulated([0.0, 1.0, 3.0], [1.0, 0.0, 1.0])
        self.assertTrue(np.isneginf(log_weighted_vdm(self.points, zero, 2)))

    def test_batch_matches_single(self):
        """Test the row-wise evaluation"""
        configurations = np.array([[0.0, 1.0, 3.0], [0.5, -0.5, 2.0]], dtype=complex)
        w = Weight.gaussian()
        batch = batch_log_weighted_vdm(configurations, w.log_value(configurations), 2)
        for row, value in zip(configurations, batch):
            self.assertAlmostEqual(value, log_weighted_vdm(row, w, 2), places=12)

    def test_lift(self):
        """Test lifting to the circled set"""
        w = Weight.gaussian()
        point = lift_to_F(0.5, 1.0, w)
        self.assertAlmostEqual(abs(point.t), math.exp(-0.25), places=14)
        self.assertAlmostEqual(point.base, 0.5 + 0j, places=14)
        with self.assertRaises(LiftError):
            lift_to_F(1.0, 0.0, Weight.tabulated([1.0], [0.0]))

    def test_homogeneous_factorization(self):
        """Test the factorized homogeneous determinant against the direct one"""
        rng = np.random.default_rng(11)
        w = Weight.gaussian(0.5)
        n = 4
        lams = rng.uniform(-2.0, 2.0, n + 1)
        points = [lift_to_F(lam, theta, w) for lam, theta in zip(lams, rng.uniform(0, 2 * np.pi, n + 1))]
        factorized = log_homogeneous_vdm(points, n, cross_check_cap=0)
        self.assertAlmostEqual(factorized, direct_log_homogeneous_det(points, n), places=9)
        self.assertAlmostEqual(factorized, direct_log_homogeneous_det(points, n, dps=34), places=10)
        expected = log_weighted_vdm(lams, w, n)
        self.assertAlmostEqual(factorized, expected, places=10)
        with self.assertRaises(PreconditionError):
            log_homogeneous_vdm(points[:-1], n)


class TestPartitionFunction(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.circle = build_problem(Domain.circle(), Weight.unit(), 40, normalize=True)
        self.interval = build_problem(Domain.interval(-1, 1), Weight.unit(), 28)
        self.gaussian = build_problem(Domain.interval(-2, 2), Weight.gaussian(), 16)

    def test_norm_product_on_circle(self):
        """Test Z_n = (n+1)! on the normalized circle"""
        result = partition_norm_product(orthonormal_basis(self.circle, 4))
        self.assertEqual(result.route, NORM_PRODUCT)
        self.assertAlmostEqual(result.log_z, math.log(120.0), places=10)
        self.assertEqual(result.stderr_log, 0.0)
        self.assertAlmostEqual(result.free_energy, math.exp(math.log(120.0) / 16.0), places=10)

    def test_routes_agree(self):
        """Test the norm-product and homogeneous Gram routes"""
        for problem, n in ((self.circle, 4), (self.interval, 6), (self.gaussian, 3)):
            norm = partition_norm_product(orthonormal_basis(problem, n)).log_z
            gram = partition_hom_gram(problem, n)
            self.assertEqual(gram.route, HOM_GRAM)
            self.assertAlmostEqual(norm, gram.log_z, places=8)

    def test_fiber_quadrature(self):
        """Test the explicit fiber integration matches the analytic reduction"""
        analytic = partition_hom_gram(self.gaussian, 3).log_z
        fibered = partition_hom_gram(self.gaussian, 3, fiber_nodes=8).log_z
        self.assertAlmostEqual(analytic, fibered, places=10)
        gram = homogeneous_gram_matrix(self.gaussian, 3, fiber_nodes=8)
        np.testing.assert_allclose(gram, homogeneous_gram_matrix(self.gaussian, 3), rtol=1e-10, atol=1e-14)

    def test_extended_route(self):
        """Test the homogeneous Gram route in extended precision"""
        extended = build_problem(Domain.interval(-1, 1), Weight.unit(), 28, precision='extended', n=6)
        norm = partition_norm_product(orthonormal_basis(self.interval, 6)).log_z
        self.assertAlmostEqual(partition_hom_gram(extended, 6).log_z, norm, places=9)

    def test_monte_carlo_on_circle(self):
        """Test the Monte Carlo estimate brackets Z_2 = 6"""
        problem = build_problem(Domain.circle(), Weight.unit(), 12, normalize=True)
        result = partition_monte_carlo(problem, 2, 200_000, seed=7)
        self.assertEqual(result.route, MONTE_CARLO)
        self.assertLess(abs(result.value - 6.0), 4.0 * result.stderr)
        self.assertAlmostEqual(result.stderr_log, result.stderr / result.value)

    def test_monte_carlo_deterministic(self):
        """Test the estimate does not depend on the thread count"""
        problem = build_problem(Domain.circle(), Weight.unit(), 12, normalize=True)
        serial = partition_monte_carlo(problem, 2, 40_000, seed=3, block_size=10_000, threads=1)
        threaded = partition_monte_carlo(problem, 2, 40_000, seed=3, block_size=10_000, threads=4)
        self.assertEqual(serial.log_z, threaded.log_z)
        self.assertEqual(serial.stderr, threaded.stderr)

    def test_monte_carlo_limits(self):
        """Test Monte Carlo preconditions"""
        with self.assertRaises(PreconditionError):
            partition_monte_carlo(self.circle, 9, 20_000, seed=1)
        with self.assertRaises(PreconditionError):
            partition_monte_carlo(self.circle, 2, 500, seed=1)

    def test_mu_n_is_probability(self):
        """Test mu_n has unit mass"""
        basis = orthonormal_basis(self.interval, 5)
        self.assertAlmostEqual(mu_n_measure(basis, self.interval).total_mass, 1.0, places=10)

    def test_r1_integrates_to_z(self):
        """Test the integral of R_1 against w^{2n} dmu is Z_n"""
        basis = orthonormal_basis(self.gaussian, 3)
        log_r1 = r1_norm_formula(basis, self.gaussian.measure.nodes)
        integral = float(np.sum(self.gaussian.varying_weights(3) * np.exp(log_r1)))
        self.assertAlmostEqual(math.log(integral), partition_norm_product(basis).log_z, places=9)


class TestCorrelation(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.problem = build_problem(Domain.interval(-1, 1), Weight.unit(), 12)
        self.basis = orthonormal_basis(self.problem, 2)

    def test_one_point_matches_norm_formula(self):
        """Test tensor quadrature of R_1 against the norm formula"""
        grid = m_point_correlation(self.problem, self.basis, 2, 1, [(0.3,), (-0.8,)])
        expected = r1_norm_formula(self.basis, [0.3, -0.8])
        np.testing.assert_allclose(np.log(grid.values), expected, atol=1e-9)
        self.assertEqual(list(grid.to_frame().columns), ['z1_re', 'z1_im', 'R_m', 'R_m_normalized'])

    def test_full_correlation(self):
        """Test R_{n+1} is the squared Vandermonde"""
        problem = build_problem(Domain.interval(-1, 1), Weight.unit(), 8)
        basis = orthonormal_basis(problem, 1)
        grid = m_point_correlation(problem, basis, 1, 2, [(0.0, 0.5)])
        self.assertAlmostEqual(grid.values[0], 0.25, places=14)

    def test_thread_independence(self):
        """Test the result does not depend on the thread count"""
        serial = m_point_correlation(self.problem, self.basis, 2, 2, [(0.1, 0.4)], threads=1)
        threaded = m_point_correlation(self.problem, self.basis, 2, 2, [(0.1, 0.4)], threads=3)
        self.assertEqual(serial.values[0], threaded.values[0])

    def test_preconditions(self):
        """Test correlation guards"""
        with self.assertRaises(PreconditionError):
            m_point_correlation(self.problem, self.basis, 2, 0, [()])
        with self.assertRaises(PreconditionError):
            m_point_correlation(self.problem, self.basis, 2, 4, [(0.0, 0.1, 0.2, 0.3)])
        with self.assertRaises(PreconditionError):
            m_point_correlation(self.problem, self.basis, 6, 1, [(0.0,)])
        with self.assertRaises(DomainError):
            m_point_correlation(self.problem, self.basis, 2, 1, [(1.5,)])


if __name__ == '__main__':
    unittest.main()
