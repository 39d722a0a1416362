import json
import logging
import math
import os
import shutil
import tempfile
import unittest
from unittest.mock import ANY, MagicMock, mock_open, patch

import pandas as pd
import yaml

from src.cli.cli_interface import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_VERIFY_FAILED,
    build_parser,
    load_config,
    main,
    setup_logging,
)


class TestCLIInterface(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.out_dir = tempfile.mkdtemp()
        self.circle = self._write_problem('circle.json', {
            'domain': {'kind': 'circle'},
            'weight': {'kind': 'unit'},
            'measure': {'normalize': True},
        })
        # Reset logging before each test
        for handler in logging.root.handlers[:]:
            logging.root.removeHandler(handler)

    def tearDown(self):
        shutil.rmtree(self.out_dir, ignore_errors=True)

    def _write_problem(self, name, spec):
        path = os.path.join(self.out_dir, name)
        with open(path, 'w') as file:
            json.dump(spec, file)
        return path

    def _run(self, *argv):
        with patch('src.cli.cli_interface.load_config', return_value={}), patch('sys.stderr'):
            return main(list(argv) + ['--out', self.out_dir])

    def test_setup_logging(self):
        """Test logging setup"""
        logger = setup_logging('DEBUG')
        self.assertIsInstance(logger, logging.Logger)
        self.assertEqual(logging.root.level, logging.DEBUG)
        self.assertEqual(len(logging.root.handlers), 1)
        self.assertIsInstance(logging.root.handlers[0], logging.StreamHandler)
        self.assertIsNotNone(logging.root.handlers[0].formatter)

    @patch('builtins.open', new_callable=mock_open, read_data="logging:\n  level: INFO\nruntime:\n  threads: 2")
    def test_load_config(self, mock_file):
        """Test configuration loading"""
        config = load_config()
        self.assertIsInstance(config, dict)
        self.assertEqual(config['runtime']['threads'], 2)
        mock_file.assert_called_once_with('src/config/config.yaml', 'r')

    @patch('builtins.open')
    def test_load_config_file_not_found(self, mock_file):
        """Test configuration loading with missing file"""
        mock_file.side_effect = FileNotFoundError()
        with self.assertRaises(FileNotFoundError) as context:
            load_config()
        self.assertIn("Configuration file not found", str(context.exception))

    def test_main_missing_config(self):
        """Test a missing configuration file exits with the config code"""
        missing = FileNotFoundError("Configuration file not found: src/config/config.yaml")
        with patch('src.cli.cli_interface.load_config', side_effect=missing), \
                patch('sys.stderr') as stderr:
            status = main(['partition', '--problem', self.circle, '--n', '1', '--out', self.out_dir])
        self.assertEqual(status, EXIT_CONFIG)
        stderr.write.assert_any_call(ANY)

    def test_main_malformed_config(self):
        """Test unreadable or non-mapping configuration exits with the config code"""
        for outcome in ({'side_effect': yaml.YAMLError("bad indent")}, {'return_value': ['not', 'a', 'mapping']}):
            with patch('src.cli.cli_interface.load_config', **outcome), patch('sys.stderr'):
                status = main(['ortho', '--problem', self.circle, '--n', '1', '--out', self.out_dir])
            self.assertEqual(status, EXIT_CONFIG)

    def test_parser_requires_command(self):
        """Test the parser rejects a missing subcommand"""
        with patch('sys.stderr'):
            with self.assertRaises(SystemExit):
                build_parser().parse_args([])

    def test_partition(self):
        """Test the partition command on the normalized circle"""
        status = self._run('partition', '--problem', self.circle, '--n', '1..3', '--route', 'norm')
        self.assertEqual(status, EXIT_OK)
        frame = pd.read_csv(os.path.join(self.out_dir, 'partition.csv'))
        self.assertEqual(list(frame.columns), ['n', 'log_Z_norm', 'log_Z_gram', 'log_Z_mc', 'stderr', 'free_energy'])
        self.assertAlmostEqual(frame['log_Z_norm'][1], math.log(6.0), places=10)
        self.assertTrue(frame['log_Z_gram'].isna().all())
        self.assertTrue(os.path.exists(os.path.join(self.out_dir, 'partition_free_energy.svg')))

    def test_ortho(self):
        """Test the ortho command writes its artifacts"""
        status = self._run('ortho', '--problem', self.circle, '--n', '2')
        self.assertEqual(status, EXIT_OK)
        for name in ('ortho.csv', 'ortho_norms.csv', 'ortho.json', 'ortho_residual.svg'):
            self.assertTrue(os.path.exists(os.path.join(self.out_dir, name)))

    def test_missing_problem_file(self):
        """Test a missing problem file is a configuration error"""
        status = self._run('ortho', '--problem', os.path.join(self.out_dir, 'missing.json'))
        self.assertEqual(status, EXIT_CONFIG)

    def test_malformed_levels(self):
        """Test a malformed level list is a configuration error"""
        self.assertEqual(self._run('ortho', '--problem', self.circle, '--n', '5..2'), EXIT_CONFIG)

    def test_order_too_small(self):
        """Test an insufficient quadrature order is a numerical precondition failure"""
        problem = self._write_problem('coarse.json', {
            'domain': {'kind': 'circle'},
            'measure': {'order': 4, 'normalize': True},
        })
        status = self._run('partition', '--problem', problem, '--n', '3', '--route', 'norm')
        self.assertEqual(status, EXIT_NUMERIC)

    def test_unbounded_needs_line(self):
        """Test the unbounded command rejects bounded domains"""
        self.assertEqual(self._run('unbounded', '--problem', self.circle, '--n', '2'), EXIT_CONFIG)

    @patch('src.cli.cli_interface.Dashboard')
    @patch('src.cli.cli_interface.AcceptanceSuite')
    def test_verify(self, mock_suite, mock_dashboard):
        """Test verify exit codes follow the suite outcome"""
        report = MagicMock()
        report.to_dict.return_value = {'suite': 'core', 'passed': True, 'criteria': []}
        report.passed = True
        mock_suite.return_value.run.return_value = report

        self.assertEqual(self._run('verify', '--suite', '1,2', '--n', '4'), EXIT_OK)
        mock_suite.assert_called_once_with({}, 4, ANY, None)
        mock_suite.return_value.run.assert_called_once_with([1, 2], '1,2')
        mock_dashboard.return_value.display.assert_called_once_with(report)
        self.assertTrue(os.path.exists(os.path.join(self.out_dir, 'verify.json')))

        report.passed = False
        self.assertEqual(self._run('verify'), EXIT_VERIFY_FAILED)

    def test_verify_bad_suite(self):
        """Test an unknown suite name"""
        self.assertEqual(self._run('verify', '--suite', 'nightly'), EXIT_CONFIG)


if __name__ == '__main__':
    unittest.main()
