import math
import os
import threading
import unittest
from unittest.mock import patch

import numpy as np

from src.core.errors import (
    ConfigurationError,
    ConvergenceError,
    DegeneracyError,
    PotlabError,
    PreconditionError,
)
from src.core.parallel import ordered_map, substream, thread_count
from src.core.precision import (
    extended_dps,
    is_finite_log,
    log_factorial,
    machine_epsilon,
    ordered_sum,
    relative_gap,
    validate_mode,
)


class TestErrors(unittest.TestCase):
    def test_configuration_error_location(self):
        """Test that configuration errors report line, column and field"""
        error = ConfigurationError("Bad value", field='domain.kind', line=3, column=5)
        self.assertIn("line 3, column 5", str(error))
        self.assertIn("field 'domain.kind'", str(error))
        self.assertEqual(error.field, 'domain.kind')
        self.assertIsInstance(error, ValueError)
        self.assertIsInstance(error, PotlabError)

    def test_degeneracy_error_degree(self):
        """Test that degeneracy errors carry the failing degree"""
        error = DegeneracyError("Breakdown", degree=4)
        self.assertEqual(error.degree, 4)
        self.assertIn("(degree 4)", str(error))
        self.assertIsInstance(error, ArithmeticError)

    def test_convergence_error_residual(self):
        """Test that convergence errors carry the last residual"""
        error = ConvergenceError("Stalled", residual=1.5e-3)
        self.assertEqual(error.residual, 1.5e-3)
        self.assertIn("1.500e-03", str(error))

    def test_plain_messages(self):
        """Test that errors without location keep their message"""
        self.assertEqual(str(ConfigurationError("Missing")), "Missing")
        self.assertEqual(str(PreconditionError("n too large")), "n too large")


class TestPrecision(unittest.TestCase):
    def test_validate_mode(self):
        """Test precision mode validation"""
        self.assertEqual(validate_mode('double'), 'double')
        self.assertEqual(validate_mode('extended'), 'extended')
        with self.assertRaises(ConfigurationError):
            validate_mode('quad')

    def test_extended_dps(self):
        """Test working digits grow with the level"""
        self.assertEqual(extended_dps(0), 34)
        self.assertEqual(extended_dps(5), 34)
        self.assertEqual(extended_dps(30), 80)
        self.assertEqual(extended_dps(10, base=50), 50)

    def test_machine_epsilon(self):
        """Test machine epsilon for double and mpmath digits"""
        self.assertEqual(machine_epsilon(), np.finfo(float).eps)
        self.assertAlmostEqual(machine_epsilon(20), 1e-20, delta=1e-30)

    def test_log_factorial(self):
        """Test log(k!)"""
        self.assertAlmostEqual(log_factorial(0), 0.0)
        self.assertAlmostEqual(log_factorial(5), math.log(120), places=12)

    def test_ordered_sum(self):
        """Test left-to-right summation"""
        self.assertEqual(ordered_sum([1.0, 2.0, 3.5]), 6.5)
        self.assertEqual(ordered_sum([]), 0.0)

    def test_relative_gap(self):
        """Test relative gap"""
        self.assertEqual(relative_gap(0.0, 0.0), 0.0)
        self.assertAlmostEqual(relative_gap(1.0, 2.0), 0.5)
        self.assertAlmostEqual(relative_gap(-2.0, 2.0), 2.0)

    def test_is_finite_log(self):
        """Test finite log detection"""
        self.assertTrue(is_finite_log(-3.0))
        self.assertFalse(is_finite_log(float('-inf')))
        self.assertFalse(is_finite_log(float('nan')))


class TestParallel(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.items = list(range(20))

    @patch.dict(os.environ, {'POTLAB_THREADS': '3'})
    def test_thread_count_environment(self):
        """Test that the environment caps the requested count"""
        self.assertEqual(thread_count(8), 3)
        self.assertEqual(thread_count(2), 2)
        self.assertEqual(thread_count(None), 3)

    @patch.dict(os.environ, {'POTLAB_THREADS': '8'})
    def test_thread_count_never_raised_by_environment(self):
        """Test that an explicit request below the cap is honored"""
        self.assertEqual(thread_count(1), 1)
        self.assertEqual(thread_count(4), 4)
        idents = ordered_map(lambda _: threading.get_ident(), self.items, 1)
        self.assertEqual(set(idents), {threading.get_ident()})

    @patch.dict(os.environ, {'POTLAB_THREADS': 'many'})
    def test_thread_count_invalid_environment(self):
        """Test that a malformed environment value falls back to the default"""
        self.assertEqual(thread_count(2), 2)

    @patch.dict(os.environ, {}, clear=True)
    def test_thread_count_default(self):
        """Test thread count fallback"""
        self.assertEqual(thread_count(4), 4)
        self.assertEqual(thread_count(None), 1)
        self.assertEqual(thread_count(0), 1)

    def test_ordered_map_keeps_order(self):
        """Test that results come back in input order for any thread count"""
        serial = ordered_map(lambda x: x * x, self.items, 1)
        threaded = ordered_map(lambda x: x * x, self.items, 4)
        self.assertEqual(serial, [x * x for x in self.items])
        self.assertEqual(threaded, serial)

    def test_substream_reproducible(self):
        """Test that substreams depend only on (seed, index)"""
        first = substream(7, 2).random(5)
        again = substream(7, 2).random(5)
        other = substream(7, 3).random(5)
        np.testing.assert_array_equal(first, again)
        self.assertFalse(np.array_equal(first, other))


if __name__ == '__main__':
    unittest.main()
