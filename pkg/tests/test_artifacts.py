import json
import math
import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd

from src.cli.artifacts import dump_json, frame_to_csv, to_jsonable, write_csv, write_json, write_lines
from src.cli.plots import line_plot_svg, write_line_plot


class TestArtifacts(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures"""
        self.out_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.out_dir, ignore_errors=True)

    def test_to_jsonable(self):
        """Test conversion of numpy, complex and nonfinite values"""
        data = {
            'z': 1.5 - 2.0j,
            'values': np.array([1.0, np.nan]),
            'count': np.int64(3),
            'flag': np.bool_(True),
            'inf': math.inf,
            1: (np.float64(0.25),),
        }
        self.assertEqual(to_jsonable(data), {
            'z': [1.5, -2.0],
            'values': [1.0, None],
            'count': 3,
            'flag': True,
            'inf': None,
            '1': [0.25],
        })

    def test_csv_round_trip_precision(self):
        """Test CSV floats keep full precision"""
        frame = pd.DataFrame({'n': [1], 'value': [math.pi]})
        text = frame_to_csv(frame)
        self.assertEqual(text.splitlines()[0], 'n,value')
        self.assertEqual(float(text.splitlines()[1].split(',')[1]), math.pi)
        path = write_csv(frame, os.path.join(self.out_dir, 'values.csv'))
        self.assertEqual(pd.read_csv(path, float_precision='round_trip')['value'][0], math.pi)

    def test_json(self):
        """Test JSON output"""
        self.assertEqual(json.loads(dump_json({'a': np.float64(2.0)})), {'a': 2.0})
        self.assertTrue(dump_json({}).endswith('\n'))
        path = write_json({'z': 1j}, os.path.join(self.out_dir, 'out.json'))
        with open(path) as file:
            self.assertEqual(json.load(file), {'z': [0.0, 1.0]})

    def test_write_lines(self):
        """Test line dumps"""
        path = write_lines(['a', 'b'], os.path.join(self.out_dir, 'lines.txt'))
        with open(path) as file:
            self.assertEqual(file.read(), 'a\nb\n')


class TestPlots(unittest.TestCase):
    def test_svg_document(self):
        """Test the SVG document structure"""
        svg = line_plot_svg({'Z': ([1, 2, 3], [1.0, 2.0, 4.0])}, title='Free energy', y_label='Z')
        self.assertTrue(svg.startswith('<svg xmlns='))
        self.assertTrue(svg.endswith('</svg>\n'))
        self.assertIn('Free energy', svg)
        self.assertEqual(svg.count('<path'), 1)
        self.assertEqual(svg.count('<circle'), 3)

    def test_skips_nonfinite_points(self):
        """Test NaN and nonpositive log-axis points are skipped"""
        svg = line_plot_svg({'r': ([1, 2, 3], [1e-3, np.nan, 0.0])}, log_y=True)
        self.assertEqual(svg.count('<circle'), 1)
        self.assertIn('log10', svg)
        empty = line_plot_svg({'r': ([1], [np.nan])})
        self.assertNotIn('<path', empty)

    def test_write_line_plot(self):
        """Test writing a plot file"""
        out_dir = tempfile.mkdtemp()
        try:
            path = write_line_plot(os.path.join(out_dir, 'plot.svg'), {'a': ([0, 1], [0, 1])}, title='t')
            with open(path) as file:
                self.assertIn('<svg', file.read())
        finally:
            shutil.rmtree(out_dir, ignore_errors=True)


if __name__ == '__main__':
    unittest.main()
