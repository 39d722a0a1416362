import math
import unittest

import numpy as np

from src.core.errors import DegeneracyError, DomainError, PreconditionError
from src.measures.domain import Domain
from src.measures.problem import build_problem
from src.measures.weight import Weight
from src.orthopoly.basis import (
    CHOLESKY,
    EXTENDED,
    STIELTJES,
    orthonormal_basis,
    orthonormality_residual,
    stieltjes_recurrence,
)
from src.orthopoly.christoffel import (
    arcsine_density,
    bm_constant,
    christoffel,
    green_reference,
    log_kernel_check,
    strong_asymptotic_check,
)
from src.orthopoly.gram import check_order, cholesky_factor, gram_matrix


class TestGram(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.circle = build_problem(Domain.circle(), Weight.unit(), 16, normalize=True)
        self.interval = build_problem(Domain.interval(-1, 1), Weight.unit(), 16)

    def test_circle_gram_is_identity(self):
        """Test monomials are orthonormal on the normalized circle"""
        gram = gram_matrix(self.circle, 3)
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-14)

    def test_interval_gram_moments(self):
        """Test Gram entries are the moments of dx on [-1, 1]"""
        gram = gram_matrix(self.interval, 3)
        self.assertFalse(np.iscomplexobj(gram))
        self.assertAlmostEqual(gram[0, 0], 2.0, places=13)
        self.assertAlmostEqual(gram[1, 1], 2.0 / 3.0, places=13)
        self.assertAlmostEqual(gram[0, 1], 0.0, places=13)
        np.testing.assert_array_equal(gram, gram.T)

    def test_check_order(self):
        """Test the 4(n+1) quadrature requirement"""
        check_order(self.interval, 3)
        with self.assertRaises(PreconditionError):
            check_order(self.interval, 4)

    def test_cholesky_factor(self):
        """Test the factorization and its breakdown"""
        gram = np.array([[4.0, 2.0], [2.0, 3.0]])
        factor = cholesky_factor(gram)
        np.testing.assert_allclose(factor @ factor.T, gram, atol=1e-14)
        self.assertEqual(factor[0, 1], 0.0)
        with self.assertRaises(DegeneracyError) as context:
            cholesky_factor(np.diag([1.0, 0.0]))
        self.assertEqual(context.exception.degree, 1)


class TestBasis(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.interval = build_problem(Domain.interval(-1, 1), Weight.unit(), 28)
        self.circle = build_problem(Domain.circle(), Weight.unit(), 24, normalize=True)

    def test_legendre_monic_norms(self):
        """Test monic Legendre norms on [-1, 1]"""
        basis = orthonormal_basis(self.interval, 4)
        self.assertEqual(basis.method, STIELTJES)
        expected = 0.5 * np.log([2.0, 2.0 / 3.0, 8.0 / 45.0])
        np.testing.assert_allclose(basis.log_monic_norms[:3], expected, atol=1e-12)

    def test_stieltjes_orthonormality(self):
        """Test the recurrence basis is orthonormal"""
        basis = orthonormal_basis(self.interval, 6)
        self.assertLess(orthonormality_residual(basis, self.interval), 1e-10)
        self.assertEqual(basis.size, 7)

    def test_cholesky_orthonormality(self):
        """Test the Cholesky basis on an interval"""
        basis = orthonormal_basis(self.interval, 4, method=CHOLESKY)
        self.assertEqual(basis.method, CHOLESKY)
        self.assertLess(orthonormality_residual(basis, self.interval), 1e-9)
        self.assertGreater(basis.gram_condition, 1.0)

    def test_extended_matches_double(self):
        """Test the extended basis agrees with the recurrence basis"""
        extended_problem = build_problem(Domain.interval(-1, 1), Weight.unit(), 28, precision='extended', n=6)
        extended = orthonormal_basis(extended_problem, 6)
        self.assertEqual(extended.method, EXTENDED)
        double = orthonormal_basis(self.interval, 6)
        np.testing.assert_allclose(extended.log_monic_norms, double.log_monic_norms, atol=1e-10)
        self.assertLess(orthonormality_residual(extended, extended_problem), 1e-10)

    def test_circle_basis(self):
        """Test monomials are the orthonormal basis on the normalized circle"""
        basis = orthonormal_basis(self.circle, 5)
        self.assertEqual(basis.method, CHOLESKY)
        np.testing.assert_allclose(basis.log_monic_norms, np.zeros(6), atol=1e-12)
        np.testing.assert_allclose(basis.monic_norms, np.ones(6), atol=1e-12)

    def test_recurrence_coefficients(self):
        """Test symmetric measures have vanishing recurrence centers"""
        x = self.interval.measure.nodes.real
        alpha, root_beta, log_norms = stieltjes_recurrence(x, self.interval.measure.weights, 4)
        self.assertLess(np.max(np.abs(alpha)), 1e-13)
        self.assertAlmostEqual(root_beta[0], math.sqrt(2.0), places=13)
        self.assertAlmostEqual(root_beta[1], 1.0 / math.sqrt(3.0), places=13)

    def test_breakdown_on_few_points(self):
        """Test breakdown when the support is too small"""
        cloud = build_problem(Domain.point_cloud([0.0, 1.0, 2.0]), Weight.unit(), 3)
        with self.assertRaises(DegeneracyError) as context:
            orthonormal_basis(cloud, 3, method=STIELTJES)
        self.assertEqual(context.exception.degree, 3)

    def test_unknown_method(self):
        """Test an unknown basis method"""
        with self.assertRaises(DomainError):
            orthonormal_basis(self.interval, 2, method='gram-schmidt')

    def test_to_dict(self):
        """Test basis export"""
        data = orthonormal_basis(self.interval, 2).to_dict()
        self.assertEqual(data['level'], 2)
        self.assertEqual(len(data['coefficients']), 3)
        self.assertEqual(len(data['coefficients'][2]), 3)


class TestChristoffel(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.circle = build_problem(Domain.circle(), Weight.unit(), 84, normalize=True)
        self.interval = build_problem(Domain.interval(-1, 1), Weight.unit(), 164)

    def test_circle_kernel(self):
        """Test K_n = n + 1 on the unit circle"""
        basis = orthonormal_basis(self.circle, 4)
        field = christoffel(basis, np.exp(1j * np.array([0.3, 2.0, 5.1])))
        np.testing.assert_allclose(field.values, np.full(3, 5.0), rtol=1e-12)
        self.assertEqual(list(field.to_frame().columns), ['z_re', 'z_im', 'K_n'])

    def test_arcsine_density(self):
        """Test the arcsine law"""
        self.assertAlmostEqual(arcsine_density(0.0), 1.0 / math.pi)
        self.assertAlmostEqual(arcsine_density(1.0, 0.0, 2.0), 1.0 / math.pi)

    def test_strong_asymptotics_interval(self):
        """Test K_n / (n+1) approaches the arcsine density"""
        result = strong_asymptotic_check(self.interval, 0.0, 40)
        self.assertAlmostEqual(result.reference, 1.0 / math.pi)
        self.assertLess(result.relative_gap, 0.05)

    def test_strong_asymptotics_circle(self):
        """Test the uniform law on the circle"""
        result = strong_asymptotic_check(self.circle, 1j, 10)
        self.assertAlmostEqual(result.computed, 1.0, places=10)
        self.assertLess(result.relative_gap, 1e-10)

    def test_strong_asymptotics_bad_point(self):
        """Test points outside the support interior"""
        with self.assertRaises(DomainError):
            strong_asymptotic_check(self.interval, 1.5, 4)
        with self.assertRaises(DomainError):
            strong_asymptotic_check(self.interval, 1.0, 4)
        disk = build_problem(Domain.disk(), Weight.unit(), 10)
        with self.assertRaises(DomainError):
            strong_asymptotic_check(disk, 0.0, 2)

    def test_bm_constant(self):
        """Test the Bernstein-Markov constant on the circle"""
        basis = orthonormal_basis(self.circle, 3)
        self.assertAlmostEqual(bm_constant(basis, self.circle), 4.0, places=10)
        with self.assertRaises(PreconditionError):
            bm_constant(basis, self.circle, grid=Domain.circle().grid(5))
        with self.assertRaises(DomainError):
            bm_constant(basis, self.circle, grid=Domain.circle(2.0).grid(40))

    def test_log_kernel_outside_circle(self):
        """Test the log kernel approaches the Green function off the circle"""
        basis = orthonormal_basis(self.circle, 20)
        result = log_kernel_check(basis, self.circle, [2.0])
        self.assertAlmostEqual(result.reference[0], math.log(2.0))
        self.assertLess(abs(result.gap[0]), 0.02)

    def test_log_kernel_needs_level(self):
        """Test level zero is rejected"""
        basis = orthonormal_basis(self.circle, 0)
        with self.assertRaises(PreconditionError):
            log_kernel_check(basis, self.circle, [2.0])

    def test_green_reference_interval(self):
        """Test the interval Green function"""
        value = green_reference(Domain.interval(-1, 1), np.array([2.0 + 0j]))
        self.assertAlmostEqual(value[0], math.log(2.0 + math.sqrt(3.0)), places=12)
        self.assertIsNone(green_reference(Domain.interval_union([(0, 1), (2, 3)]), np.array([5.0 + 0j])))


if __name__ == '__main__':
    unittest.main()
