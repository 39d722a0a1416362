import math
import unittest

import numpy as np
from scipy.stats import chisquare

from src.cli.verify import circle_complement_oracle
from src.core.errors import DomainError, PreconditionError
from src.ensemble.deviation import (
    DeviationReport,
    complement_curve,
    deviation_bound,
    indicator_A,
    large_deviation_estimate,
)
from src.ensemble.sampler import KERNEL_CHAIN, REJECTION, EnsembleSample, sample_pn
from src.measures.domain import Domain
from src.measures.problem import build_problem
from src.measures.weight import Weight
from src.orthopoly.basis import orthonormal_basis
from src.partition.partition_function import mu_n_measure


class TestSampler(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.problem = build_problem(Domain.circle(), Weight.unit(), 24, normalize=True)
        self.basis = orthonormal_basis(self.problem, 2)

    def test_kernel_chain_shape(self):
        """Test configurations are distinct points of the quadrature grid"""
        sample = sample_pn(self.problem, self.basis, 2, 50, seed=1)
        self.assertEqual(sample.configurations.shape, (50, 3))
        self.assertEqual(sample.method, KERNEL_CHAIN)
        for row in sample.configurations:
            self.assertEqual(np.unique(row).size, 3)
        np.testing.assert_allclose(np.abs(sample.configurations), 1.0, atol=1e-12)

    def test_reproducible(self):
        """Test the sample depends only on the seed"""
        first = sample_pn(self.problem, self.basis, 2, 30, seed=5, threads=1)
        second = sample_pn(self.problem, self.basis, 2, 30, seed=5, threads=4)
        other = sample_pn(self.problem, self.basis, 2, 30, seed=6, threads=1)
        np.testing.assert_array_equal(first.configurations, second.configurations)
        self.assertFalse(np.array_equal(first.configurations, other.configurations))

    def test_pair_distance_moment(self):
        """Test E|z_0 - z_1|^2 = 3 under P_1 on the circle"""
        problem = build_problem(Domain.circle(), Weight.unit(), 16, normalize=True)
        basis = orthonormal_basis(problem, 1)
        sample = sample_pn(problem, basis, 1, 10_000, seed=2)
        squared = np.abs(sample.configurations[:, 0] - sample.configurations[:, 1]) ** 2
        self.assertLess(abs(float(np.mean(squared)) - 3.0), 4.0 / math.sqrt(10_000))

    def test_rejection(self):
        """Test rejection sampling at low level"""
        problem = build_problem(Domain.circle(), Weight.unit(), 8, normalize=True)
        sample = sample_pn(problem, None, 1, 20, seed=3, method=REJECTION)
        self.assertEqual(sample.configurations.shape, (20, 2))
        self.assertEqual(sample.method, REJECTION)

    def test_preconditions(self):
        """Test sampler guards"""
        with self.assertRaises(PreconditionError):
            sample_pn(self.problem, None, 2, 10, seed=1)
        with self.assertRaises(PreconditionError):
            sample_pn(self.problem, self.basis, 3, 10, seed=1)
        with self.assertRaises(PreconditionError):
            sample_pn(self.problem, None, 5, 10, seed=1, method=REJECTION)
        with self.assertRaises(PreconditionError):
            sample_pn(self.problem, self.basis, 2, 0, seed=1)
        with self.assertRaises(DomainError):
            sample_pn(self.problem, self.basis, 2, 10, seed=1, method='metropolis')

    def test_to_lines(self):
        """Test the sample dump format"""
        sample = EnsembleSample(1, np.array([[1.0 + 0j, -1.0 + 0.5j]]), 0, KERNEL_CHAIN)
        self.assertEqual(sample.to_lines(), ['1.0,0.0 -1.0,0.5'])
        self.assertEqual(sample.count, 1)


class TestSamplerDistribution(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.interval = Domain.interval(-1, 1)

    @staticmethod
    def _node_counts(sample, nodes):
        points = sample.configurations.reshape(-1)
        index = np.argmin(np.abs(points[:, None] - nodes[None, :]), axis=1)
        return np.bincount(index, minlength=nodes.size)

    def test_one_point_marginal(self):
        """Test pooled sample points follow mu_n for levels 1 to 3"""
        for n in (1, 2, 3):
            problem = build_problem(self.interval, Weight.gaussian(), 16, normalize=True)
            basis = orthonormal_basis(problem, n)
            sample = sample_pn(problem, basis, n, 4_000, seed=10 + n)
            observed = self._node_counts(sample, problem.measure.nodes)
            target = mu_n_measure(basis, problem).weights
            expected = observed.sum() * target / target.sum()
            self.assertGreater(chisquare(observed, expected).pvalue, 1e-3, f"level {n}")

    def test_circle_marginal_uniform(self):
        """Test the level-1 marginal on the circle is uniform over 32 angular bins"""
        problem = build_problem(Domain.circle(), Weight.unit(), 64, normalize=True)
        basis = orthonormal_basis(problem, 1)
        sample = sample_pn(problem, basis, 1, 100_000, seed=21)
        angles = np.mod(np.angle(sample.configurations.reshape(-1)), 2.0 * np.pi)
        nodes = np.rint(angles / (2.0 * np.pi / 64)).astype(int) % 64
        observed = np.bincount(nodes // 2, minlength=32)
        self.assertEqual(observed.size, 32)
        self.assertGreater(chisquare(observed).pvalue, 1e-3)

    def test_chain_matches_rejection(self):
        """Test kernel-chain and rejection samples agree on the mean pair distance"""
        problem = build_problem(self.interval, Weight.unit(), 16, normalize=True)
        basis = orthonormal_basis(problem, 2)
        statistics = []
        for method, seed in ((KERNEL_CHAIN, 31), (REJECTION, 32)):
            z = sample_pn(problem, basis, 2, 4_000, seed=seed, method=method).configurations
            pair = (np.abs(z[:, 0] - z[:, 1]) + np.abs(z[:, 0] - z[:, 2]) + np.abs(z[:, 1] - z[:, 2])) / 3.0
            statistics.append((float(np.mean(pair)), float(np.std(pair, ddof=1) / math.sqrt(pair.size))))
        (chain_mean, chain_err), (rejection_mean, rejection_err) = statistics
        self.assertLess(abs(chain_mean - rejection_mean), 4.0 * math.hypot(chain_err, rejection_err))


class TestDeviation(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.w = Weight.unit()

    def test_indicator(self):
        """Test membership in the set A_{n, eta}"""
        self.assertTrue(indicator_A([1.0, -1.0], self.w, 1, 0.5, 1.0))
        self.assertFalse(indicator_A([1.0, 1.0001], self.w, 1, 0.5, 1.0))
        with self.assertRaises(PreconditionError):
            indicator_A([1.0, -1.0], self.w, 1, 1.0, 1.0)
        with self.assertRaises(PreconditionError):
            indicator_A([1.0, -1.0], self.w, 1, 0.0, 1.0)

    def test_bound(self):
        """Test the deviation bound"""
        self.assertAlmostEqual(deviation_bound(2, 0.5, 1.0), 0.75 ** 4)
        self.assertEqual(deviation_bound(0, 0.5, 1.0), 1.0)

    def test_report(self):
        """Test the pass rule and the exported row"""
        report = DeviationReport(3, 0.2, 1.0, -1.0, 0.05, 0.01, 0.04, 10_000)
        self.assertTrue(report.passed)
        self.assertEqual(list(report.to_row().keys()), ['n', 'eta', 'estimate', 'stderr', 'bound', 'pass'])
        failing = DeviationReport(3, 0.2, 1.0, -1.0, 0.5, 0.01, 0.04, 10_000)
        self.assertFalse(failing.passed)

    def test_circle_oracle(self):
        """Test the n = 1 complement probability on the circle against the closed form"""
        problem = build_problem(Domain.circle(), Weight.unit(), 360, normalize=True)
        basis = orthonormal_basis(problem, 1)
        report = large_deviation_estimate(problem, basis, 1, 0.5, 20_000, seed=4, delta_w=1.0)
        oracle = circle_complement_oracle(0.5)
        self.assertLess(abs(report.estimate - oracle), 4.0 * report.stderr + 2e-3)
        self.assertTrue(report.passed)

    def test_complement_curve_monotone(self):
        """Test the complement probability does not grow with eta"""
        problem = build_problem(Domain.circle(), Weight.unit(), 24, normalize=True)
        basis = orthonormal_basis(problem, 2)
        sample = sample_pn(problem, basis, 2, 2_000, seed=9)
        curve = complement_curve(sample, self.w, [0.1, 0.3, 0.5, 0.7, 0.9], 1.0)
        estimates = [r.estimate for r in curve]
        self.assertTrue(all(b <= a for a, b in zip(estimates, estimates[1:])))

    def test_minimum_count(self):
        """Test the sample count floor"""
        problem = build_problem(Domain.circle(), Weight.unit(), 8, normalize=True)
        with self.assertRaises(PreconditionError):
            large_deviation_estimate(problem, None, 1, 0.5, 100, seed=1, delta_w=1.0)


if __name__ == '__main__':
    unittest.main()
