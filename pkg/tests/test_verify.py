import math
import unittest
from unittest.mock import patch

import numpy as np

from src.cli.verify import (
    AcceptanceSuite,
    CriterionRecord,
    SuiteReport,
    brute_force_fekete,
    circle_complement_oracle,
    parse_suite,
    skipped,
    strictly_decreasing,
)
from src.core.errors import ConfigurationError, NumericError
from src.measures.domain import Domain


class TestSuiteHelpers(unittest.TestCase):
    def test_parse_suite(self):
        """Test suite selection"""
        self.assertEqual(parse_suite('core'), list(range(1, 10)))
        self.assertEqual(parse_suite('3,1,3'), [1, 3])
        for text in ('fast', '0', '10', ''):
            with self.assertRaises(ConfigurationError) as context:
                parse_suite(text)
            self.assertEqual(context.exception.field, 'suite')

    def test_records(self):
        """Test record export and the suite pass rule"""
        good = CriterionRecord('1.kernel', 1e-14, 0.0, 1e-10, True)
        skip = skipped('5.strong', 'needs level 100')
        self.assertTrue(skip.skipped)
        self.assertEqual(list(good.to_dict().keys()),
                         ['id', 'observed', 'expected', 'tolerance', 'pass', 'skipped', 'note'])
        report = SuiteReport('core', 7, [good, skip])
        self.assertTrue(report.passed)
        self.assertEqual(report.to_dict()['seed'], 7)
        self.assertEqual(len(report.to_dict()['criteria']), 2)
        failing = SuiteReport('core', 7, [good, CriterionRecord('2.circle', 2.0, 0.0, 1.0, False)])
        self.assertFalse(failing.passed)

    def test_circle_oracle(self):
        """Test the closed-form complement probability"""
        self.assertAlmostEqual(circle_complement_oracle(0.5), 0.019511, places=5)
        phi = 2.0 * math.asin(math.sqrt(0.5) / 2.0)
        self.assertAlmostEqual(circle_complement_oracle(0.5), (phi - math.sin(phi)) / math.pi, places=12)

    def test_brute_force_fekete(self):
        """Test the exhaustive search on a coarse grid"""
        grid = Domain.interval(-1.0, 1.0).grid(20)
        np.testing.assert_allclose(brute_force_fekete(grid, 2), [-1.0, 0.0, 1.0], atol=1e-12)

    def test_strictly_decreasing(self):
        """Test the monotonicity helper"""
        self.assertTrue(strictly_decreasing([3.0, 2.0, 1.0]))
        self.assertFalse(strictly_decreasing([3.0, 3.0]))


class TestAcceptanceSuite(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.suite = AcceptanceSuite({}, max_level=4, threads=1)

    def test_defaults(self):
        """Test seed and level filtering"""
        self.assertEqual(self.suite.seed, 20240611)
        self.assertEqual(self.suite._levels('circle_levels', [1, 2, 4, 8]), [1, 2, 4])
        self.assertEqual(AcceptanceSuite({'verify': {'seed': 3}}).seed, 3)
        self.assertEqual(AcceptanceSuite({}, seed=11).seed, 11)

    def test_circle_identities(self):
        """Test the circle identities pass at low levels"""
        report = self.suite.run([1])
        self.assertEqual([r.id for r in report.records], ['1.kernel', '1.partition'])
        self.assertTrue(report.passed)

    def test_free_energy_trend(self):
        """Test the circle trend passes and the interval limit is skipped"""
        records = {r.id: r for r in self.suite.free_energy_trend()}
        self.assertTrue(records['2.circle'].passed)
        self.assertTrue(records['2.interval'].skipped)

    def test_skips_high_levels(self):
        """Test criteria beyond the level cap are skipped"""
        records = self.suite.one_point_convergence() + self.suite.strong_asymptotics()
        self.assertTrue(all(r.skipped for r in records))

    def test_failure_is_recorded(self):
        """Test a numerical failure becomes a failed record"""
        with patch.object(AcceptanceSuite, 'circle_identities', side_effect=NumericError('breakdown')):
            report = self.suite.run([1])
        self.assertFalse(report.passed)
        self.assertEqual(report.records[0].id, '1')
        self.assertEqual(report.records[0].note, 'breakdown')


if __name__ == '__main__':
    unittest.main()
