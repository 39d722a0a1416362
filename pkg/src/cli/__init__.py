"""
Batch front end: problem-file driven commands, artifact writers, SVG plots
and the acceptance suite.
"""

from .run_config import RunConfig, parse_n_list
from .artifacts import write_csv, write_json
from .plots import line_plot_svg, write_line_plot
from .verify import AcceptanceSuite, CriterionRecord, SuiteReport

__all__ = [
    'RunConfig',
    'parse_n_list',
    'write_csv',
    'write_json',
    'line_plot_svg',
    'write_line_plot',
    'AcceptanceSuite',
    'CriterionRecord',
    'SuiteReport',
]
