import math
import unittest

import numpy as np

from src.core.errors import PreconditionError
from src.unbounded.free_energy import FreeEnergySeries, free_energy_unbounded, hermite_log_norm_product
from src.unbounded.restriction import (
    choose_restriction,
    exponential_fit,
    restricted_norm_compare,
    restriction_decay,
    tail_ratio,
    validate_field,
)


class TestRestriction(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.gaussian = [0.0, 0.0, 1.0]
        self.quartic = [0.0, 0.0, 0.5, 0.0, 0.25]

    def test_validate_field(self):
        """Test admissible external fields"""
        np.testing.assert_array_equal(validate_field([0.0, 0.0, 1.0, 0.0]), [0.0, 0.0, 1.0])
        with self.assertRaises(PreconditionError):
            validate_field([0.0, 1.0])
        with self.assertRaises(PreconditionError):
            validate_field([0.0, 0.0, -1.0])
        with self.assertRaises(PreconditionError):
            validate_field([0.0, 0.0, -1.0, 0.0, 1.0])

    def test_tail_ratio_shrinks(self):
        """Test the tail ratio decreases with the half-width"""
        q = validate_field(self.gaussian)
        self.assertGreater(tail_ratio(q, 2, 1, 0.5), tail_ratio(q, 2, 1, 1.0))
        self.assertLess(tail_ratio(q, 2, 1, 4.0), 1e-12)

    def test_choose_restriction(self):
        """Test the chosen half-width is the first accepted doubling"""
        tol = 1e-10
        a = choose_restriction(self.gaussian, 2, tol)
        q = validate_field(self.gaussian)
        self.assertLessEqual(max(tail_ratio(q, 2, k, a) for k in range(3)), tol)
        if a > 1.0:
            self.assertGreater(max(tail_ratio(q, 2, k, a / 2.0) for k in range(3)), tol)
        with self.assertRaises(PreconditionError):
            choose_restriction(self.gaussian, 2, 0.0)

    def test_norm_chain(self):
        """Test restricted norms dominate full-line norms"""
        report = restricted_norm_compare(self.quartic, 3, 2.0)
        self.assertTrue(np.all(report.ratios >= 1.0 - 1e-8))
        self.assertGreaterEqual(report.log_gap_bound, -1e-7)
        rows = report.to_rows()
        self.assertEqual(len(rows), 4)
        self.assertEqual(set(rows[0].keys()), {'degree', 'norm_p_full', 'norm_p_restricted',
                                               'norm_q_restricted', 'norm_q_full', 'ratio'})
        with self.assertRaises(PreconditionError):
            restricted_norm_compare(self.quartic, 3, 0.0)

    def test_full_line_norms_gaussian(self):
        """Test the full-line monic norms against the Hermite closed form"""
        report = restricted_norm_compare(self.gaussian, 2, 4.0)
        c = 4.0
        expected = 0.5 * (0.5 * np.log(np.pi / c) + np.array([0.0, math.log(0.125), math.log(2.0 * 0.125 ** 2)]))
        np.testing.assert_allclose(report.log_p_full, expected, atol=1e-10)

    def test_exponential_fit(self):
        """Test the exponential fit and its noise floor"""
        x = np.arange(5, dtype=float)
        a, b = exponential_fit(x, 2.0 * np.exp(-0.7 * x))
        self.assertAlmostEqual(a, 2.0, places=8)
        self.assertAlmostEqual(b, 0.7, places=8)
        self.assertIsNone(exponential_fit(x, np.zeros(5)))

    def test_restriction_decay(self):
        """Test the restriction excess decays with the level"""
        decay = restriction_decay(self.gaussian, 1.5, [2, 4, 6, 8])
        self.assertEqual(decay.levels, [2, 4, 6, 8])
        self.assertGreater(decay.excess[0], decay.excess[-1])
        self.assertIsNotNone(decay.fit)
        self.assertGreater(decay.fit[1], 0.0)


class TestFreeEnergy(unittest.TestCase):
    def test_hermite_product(self):
        """Test the closed form at n = 1"""
        self.assertAlmostEqual(hermite_log_norm_product(1), math.log(math.pi / 4.0), places=13)
        with self.assertRaises(PreconditionError):
            hermite_log_norm_product(1, 0.0)

    def test_series_matches_closed_form(self):
        """Test the full-line route against the Hermite closed form"""
        series = free_energy_unbounded([0.0, 0.0, 1.0], [2, 4], solve_energy=False)
        for n, log_z in zip(series.levels, series.log_z_full):
            self.assertAlmostEqual(log_z, hermite_log_norm_product(n), places=9)
        self.assertTrue(all(g < 1e-8 for g in series.gaps))
        self.assertIsNone(series.limit_gap)
        frame = series.to_frame()
        self.assertEqual(list(frame.columns), ['n', 'A', 'log_Z_fullline', 'log_Z_restricted',
                                               'free_energy_fullline', 'free_energy_restricted',
                                               'delta_w_energy_route'])
        self.assertTrue(frame['delta_w_energy_route'].isna().all())

    def test_limit_gap(self):
        """Test the relative gap to the energy route"""
        series = FreeEnergySeries([10, 20], [4.0, 4.0], [100.0 * 0.1, 400.0 * 0.1],
                                  [100.0 * 0.1, 400.0 * 0.1], math.exp(0.1))
        self.assertAlmostEqual(series.limit_full, math.exp(0.1), places=12)
        self.assertAlmostEqual(series.limit_gap, 0.0, places=12)
        self.assertEqual(series.gaps, [0.0, 0.0])

    def test_invalid_levels(self):
        """Test level validation"""
        with self.assertRaises(PreconditionError):
            free_energy_unbounded([0.0, 0.0, 1.0], [4, 2], solve_energy=False)


if __name__ == '__main__':
    unittest.main()
