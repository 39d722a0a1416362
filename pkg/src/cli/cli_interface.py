import argparse
import copy
import logging
import sys
from datetime import datetime
from typing import Optional

import numpy as np
import pandas as pd
import yaml

from src.core.errors import ConfigurationError, PotlabError
from src.core.parallel import thread_count
from src.ensemble.deviation import large_deviation_estimate
from src.ensemble.sampler import SAMPLING_METHODS, sample_pn
from src.equilibrium.diameter import fekete_empirical_convergence, transfinite_diameter
from src.equilibrium.solver import equilibrium_solve
from src.measures.domain import CIRCLE, INTERVAL_UNION, LINE, Domain
from src.measures.problem import WeightedProblem, parse_domain, parse_weight, problem_from_dict, read_problem_file
from src.measures.weight import FIELD
from src.orthopoly.basis import orthonormal_basis, orthonormality_residual
from src.orthopoly.christoffel import bm_constant, christoffel, log_kernel_check
from src.partition.partition_function import partition_hom_gram, partition_monte_carlo, partition_norm_product
from src.unbounded.free_energy import free_energy_unbounded
from src.unbounded.restriction import choose_restriction
from .artifacts import write_csv, write_json, write_lines
from .dashboard import Dashboard
from .plots import write_line_plot
from .run_config import ROUTES, RunConfig
from .verify import AcceptanceSuite, parse_suite

CONFIG_PATH = 'src/config/config.yaml'

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def setup_logging(level: str = 'INFO'):
    """Setup logging configuration"""
    # Remove any existing handlers
    for handler in logging.root.handlers[:]:
        logging.root.removeHandler(handler)

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    ))
    logging.root.addHandler(handler)
    logging.root.setLevel(getattr(logging, str(level).upper(), logging.INFO))

    return logging.getLogger(__name__)


def load_config(path: str = CONFIG_PATH):
    """Load configuration from yaml file"""
    try:
        with open(path, 'r') as file:
            return yaml.safe_load(file)
    except FileNotFoundError:
        raise FileNotFoundError(f"Configuration file not found: {path}")


def _section(config: dict, name: str) -> dict:
    return config.get(name, {}) or {}


# Problem handling

def read_spec(run: RunConfig) -> dict:
    if run.problem is None:
        raise ConfigurationError("This command needs a problem file", field='problem')
    spec = read_problem_file(run.problem)
    if not isinstance(spec, dict):
        raise ConfigurationError("Problem file must hold a JSON object")
    return spec


def problem_at(spec: dict, n: int, run: RunConfig, config: dict) -> WeightedProblem:
    """
    Build the problem at level n.

    The CLI precision flag overrides the file; line problems without a
    restriction interval get one from choose_restriction at level n.
    """
    spec = copy.deepcopy(spec)
    if run.precision is not None:
        spec['precision'] = {'mode': run.precision}
    domain = spec.get('domain') or {}
    measure = spec.setdefault('measure', {}) or {}
    spec['measure'] = measure
    if isinstance(domain, dict) and domain.get('kind') == LINE and measure.get('restriction') is None:
        weight = parse_weight(spec.get('weight'))
        if weight.kind != FIELD:
            raise ConfigurationError("Line problems need a field weight or an explicit restriction",
                                     field='measure.restriction')
        measure['restriction'] = choose_restriction(weight.coefficients, max(n, 1),
                                                    float(_section(config, 'unbounded').get('tol', 1e-12)))
    return problem_from_dict(spec, n)


def solve_domain(problem: WeightedProblem) -> Domain:
    """Domain carrying the equilibrium problem: the restriction interval for lines"""
    if problem.domain.kind == LINE:
        return Domain.interval(-problem.restriction, problem.restriction)
    return problem.domain


def evaluation_grid(problem: WeightedProblem, count: int) -> np.ndarray:
    return solve_domain(problem).grid(count)


def solve_equilibrium(problem: WeightedProblem, run: RunConfig, config: dict):
    settings = _section(config, 'equilibrium')
    return equilibrium_solve(
        solve_domain(problem), problem.weight,
        grid_size=int(run.grid_size or settings.get('grid_size', 800)),
        max_iter=int(settings.get('max_iter', 20000)),
        tol=float(settings.get('tol', 1e-8)),
        armijo=float(settings.get('armijo', 1e-4)),
        support_threshold=float(settings.get('support_threshold', 1e-6)),
        polish_every=int(settings.get('polish_every', 25)),
    )


def build_basis(problem: WeightedProblem, n: int, config: dict):
    settings = _section(config, 'orthopoly')
    return orthonormal_basis(problem, n, method=settings.get('method', 'auto'),
                             condition_warning=float(settings.get('condition_warning', 1e12)),
                             base_dps=int(_section(config, 'precision').get('extended_digits', 34)))


# Commands

def cmd_ortho(run: RunConfig, config: dict, logger) -> int:
    spec = read_spec(run)
    norms, summary, bases = [], [], []
    for n in run.n_list:
        problem = problem_at(spec, n, run, config)
        basis = build_basis(problem, n, config)
        residual = orthonormality_residual(basis, problem)
        logger.info(f"Level {n}: {basis.method} basis, residual {residual:.3e}")
        for j, log_norm in enumerate(basis.log_monic_norms):
            norms.append({'n': n, 'degree': j, 'log_monic_norm': float(log_norm)})
        summary.append({'n': n, 'method': basis.method, 'gram_condition': basis.gram_condition,
                        'orthonormality_residual': residual})
        bases.append(basis.to_dict())
    write_csv(pd.DataFrame(norms, columns=['n', 'degree', 'log_monic_norm']), run.output_path('ortho_norms.csv'))
    frame = pd.DataFrame(summary, columns=['n', 'method', 'gram_condition', 'orthonormality_residual'])
    write_csv(frame, run.output_path('ortho.csv'))
    write_json({'problem': run.problem, 'bases': bases}, run.output_path('ortho.json'))
    write_line_plot(run.output_path('ortho_residual.svg'),
                    {'residual': (frame['n'], frame['orthonormality_residual'])},
                    title='Orthonormality residual', y_label='residual', log_y=True)
    return EXIT_OK


def cmd_christoffel(run: RunConfig, config: dict, logger) -> int:
    spec = read_spec(run)
    oversampling = int(_section(config, 'orthopoly').get('bm_oversampling', 20))
    values, summary = [], []
    for n in run.n_list:
        problem = problem_at(spec, n, run, config)
        basis = build_basis(problem, n, config)
        points = evaluation_grid(problem, int(run.grid_size or 200))
        frame = christoffel(basis, points, run.threads).to_frame()
        frame.insert(0, 'n', n)
        values.append(frame)
        bm, green_gap = np.nan, np.nan
        if problem.domain.is_bounded:
            try:
                bm = bm_constant(basis, problem, oversampling=oversampling)
            except PotlabError as e:
                logger.warning(f"Bernstein-Markov constant unavailable at level {n}: {e}")
        else:
            bm = bm_constant(basis, problem, grid=evaluation_grid(problem, max(oversampling * n, 10)))
        if n >= 1:
            check = log_kernel_check(basis, problem, points)
            if check.gap is not None:
                green_gap = float(np.max(np.abs(check.gap)))
        summary.append({'n': n, 'bm_constant': bm, 'log_kernel_gap': green_gap})
    write_csv(pd.concat(values, ignore_index=True), run.output_path('christoffel.csv'))
    frame = pd.DataFrame(summary, columns=['n', 'bm_constant', 'log_kernel_gap'])
    write_csv(frame, run.output_path('christoffel_summary.csv'))
    write_line_plot(run.output_path('christoffel_bm.svg'), {'M_n': (frame['n'], frame['bm_constant'])},
                    title='Bernstein-Markov constant', y_label='M_n', log_y=True)
    return EXIT_OK


def cmd_partition(run: RunConfig, config: dict, logger) -> int:
    spec = read_spec(run)
    settings = _section(config, 'partition')
    routes = ('norm', 'gram', 'mc') if run.route == 'all' else (run.route,)
    samples = int(run.count or settings.get('mc_samples', 1_000_000))
    max_level = int(settings.get('mc_max_level', 8))
    rows = []
    for n in run.n_list:
        problem = problem_at(spec, n, run, config)
        row = {'n': n, 'log_Z_norm': np.nan, 'log_Z_gram': np.nan, 'log_Z_mc': np.nan, 'stderr': np.nan}
        if 'norm' in routes:
            row['log_Z_norm'] = partition_norm_product(build_basis(problem, n, config)).log_z
        if 'gram' in routes:
            row['log_Z_gram'] = partition_hom_gram(problem, n).log_z
        if 'mc' in routes and n <= max_level:
            estimate = partition_monte_carlo(problem, n, samples, run.seed,
                                             int(settings.get('mc_block_size', 50_000)), run.threads,
                                             max_level, int(settings.get('mc_min_samples', 10_000)))
            row['log_Z_mc'] = estimate.log_z
            row['stderr'] = estimate.stderr_log
        if np.isfinite(row['log_Z_norm']) and np.isfinite(row['log_Z_gram']):
            gap = abs(row['log_Z_norm'] - row['log_Z_gram'])
            if gap > 1e-8:
                logger.warning(f"Level {n}: norm-product and hom-gram routes differ by {gap:.3e}")
        exact = [row[k] for k in ('log_Z_norm', 'log_Z_gram', 'log_Z_mc') if np.isfinite(row[k])]
        row['free_energy'] = float(np.exp(exact[0] / n ** 2)) if exact and n >= 1 else np.nan
        rows.append(row)
    frame = pd.DataFrame(rows, columns=['n', 'log_Z_norm', 'log_Z_gram', 'log_Z_mc', 'stderr', 'free_energy'])
    write_csv(frame, run.output_path('partition.csv'))
    write_line_plot(run.output_path('partition_free_energy.svg'), {'Z_n^(1/n^2)': (frame['n'], frame['free_energy'])},
                    title='Free energy', y_label='Z_n^(1/n^2)')
    return EXIT_OK


def cmd_equilibrium(run: RunConfig, config: dict, logger) -> int:
    spec = read_spec(run)
    problem = problem_at(spec, run.n_list[-1], run, config)
    equilibrium = solve_equilibrium(problem, run, config)
    frame = equilibrium.to_frame()
    write_csv(frame, run.output_path('equilibrium.csv'))
    summary = {
        'domain': equilibrium.domain.to_dict(),
        'grid_size': int(equilibrium.nodes.size),
        'energy': equilibrium.energy,
        'delta_w': equilibrium.delta_w,
        'residual': equilibrium.residual,
        'variational_spread': equilibrium.variational_spread,
        'iterations': equilibrium.iterations,
        'support_cells': int(np.sum(equilibrium.support)),
    }
    if equilibrium.domain.kind == INTERVAL_UNION:
        summary['support_hull'] = list(equilibrium.support_hull())
    write_json(summary, run.output_path('equilibrium.json'))
    write_line_plot(run.output_path('equilibrium_density.svg'), {'density': (frame['node'], frame['density'])},
                    title='Equilibrium density', x_label='node', y_label='density')
    return EXIT_OK


def cmd_fekete(run: RunConfig, config: dict, logger) -> int:
    spec = read_spec(run)
    settings = _section(config, 'fekete')
    problem = problem_at(spec, run.n_list[-1], run, config)
    domain = solve_domain(problem)
    equilibrium = None
    if domain.kind in (INTERVAL_UNION, CIRCLE):
        equilibrium = solve_equilibrium(problem, run, config)
    grid_factor = int(settings.get('grid_factor', 40))
    report = transfinite_diameter(domain, problem.weight, run.n_list, grid_factor=grid_factor,
                                  max_sweeps=int(settings.get('max_sweeps', 50)), equilibrium=equilibrium)
    write_csv(report.to_frame(), run.output_path('fekete.csv'))
    write_json(dict(report.to_dict(), configurations=[c.to_dict() for c in report.configurations]),
               run.output_path('fekete.json'))
    series = {'Fekete': (report.levels, report.estimates)}
    if report.energy_delta is not None:
        series['energy route'] = (report.levels, [report.energy_delta] * len(report.levels))
    write_line_plot(run.output_path('fekete_diameter.svg'), series, title='Transfinite diameter',
                    y_label='delta estimate')
    if equilibrium is not None:
        convergence = fekete_empirical_convergence(domain, problem.weight, run.n_list, equilibrium,
                                                   grid_factor=grid_factor)
        frame = convergence.to_frame()
        write_csv(frame, run.output_path('fekete_convergence.csv'))
        write_line_plot(run.output_path('fekete_convergence.svg'), {convergence.mode: (frame['n'], frame['distance'])},
                        title='Fekete empirical measures', y_label='weak-* distance', log_y=True)
    return EXIT_OK


def cmd_deviation(run: RunConfig, config: dict, logger) -> int:
    spec = read_spec(run)
    settings = _section(config, 'ensemble')
    count = int(run.count or settings.get('count', 100_000))
    method = run.method or settings.get('method', 'kernel-chain')
    if method not in SAMPLING_METHODS:
        raise ConfigurationError(f"Unknown sampling method '{method}'", field='method')
    delta_w = solve_equilibrium(problem_at(spec, run.n_list[-1], run, config), run, config).delta_w
    rows = []
    for n in run.n_list:
        problem = problem_at(spec, n, run, config)
        eta = run.eta if run.eta is not None else delta_w * min(0.5, n ** -0.5 if n else 0.5)
        basis = build_basis(problem, n, config) if method == 'kernel-chain' else None
        sample = sample_pn(problem, basis, n, count, run.seed, method, run.threads,
                           int(settings.get('rejection_max_level', 4)))
        report = large_deviation_estimate(problem, basis, n, eta, count, run.seed, delta_w, method, sample,
                                          int(settings.get('min_count', 10_000)))
        rows.append(report.to_row())
        if run.dump_samples:
            write_lines(sample.to_lines(), run.output_path(f'samples_n{n}.txt'))
    frame = pd.DataFrame(rows, columns=['n', 'eta', 'estimate', 'stderr', 'bound', 'pass'])
    write_csv(frame, run.output_path('deviation.csv'))
    write_line_plot(run.output_path('deviation.svg'),
                    {'estimate': (frame['n'], frame['estimate']), 'bound': (frame['n'], frame['bound'])},
                    title='Complement probability', y_label='probability', log_y=True)
    return EXIT_OK


def cmd_unbounded(run: RunConfig, config: dict, logger) -> int:
    spec = read_spec(run)
    domain = parse_domain(spec.get('domain') or {})
    if domain.kind != LINE:
        raise ConfigurationError("The unbounded command needs a line problem", field='domain.kind')
    weight = parse_weight(spec.get('weight'))
    if weight.kind != FIELD:
        raise ConfigurationError("The unbounded command needs a field weight", field='weight.kind')
    settings = _section(config, 'unbounded')
    series = free_energy_unbounded(weight.coefficients, run.n_list, float(settings.get('tol', 1e-12)),
                                   int(run.grid_size or settings.get('grid_size', 1200)), threads=run.threads)
    frame = series.to_frame()
    write_csv(frame, run.output_path('unbounded.csv'))
    rows = []
    for report in series.reports:
        rows.extend(dict(row, n=report.level) for row in report.to_rows())
    columns = ['n', 'degree', 'norm_p_full', 'norm_p_restricted', 'norm_q_restricted', 'norm_q_full', 'ratio']
    write_csv(pd.DataFrame(rows, columns=columns), run.output_path('unbounded_restriction.csv'))
    write_json({
        'coefficients': list(weight.coefficients),
        'levels': series.levels,
        'half_widths': series.half_widths,
        'limit_fullline': series.limit_full,
        'limit_restricted': series.limit_restricted,
        'delta_w_energy_route': series.delta_w_energy,
        'limit_gap': series.limit_gap,
        'gap_bounds': [r.log_gap_bound for r in series.reports],
    }, run.output_path('unbounded.json'))
    plot = {
        'full line': (frame['n'], frame['free_energy_fullline']),
        'restricted': (frame['n'], frame['free_energy_restricted']),
    }
    if series.delta_w_energy is not None:
        plot['energy route'] = (frame['n'], frame['delta_w_energy_route'])
    write_line_plot(run.output_path('unbounded_free_energy.svg'), plot, title='Free energy on the line',
                    y_label='Z_n^(1/n^2)')
    return EXIT_OK


def cmd_verify(run: RunConfig, config: dict, logger) -> int:
    criteria = parse_suite(run.suite)
    suite = AcceptanceSuite(config, max(run.n_list) if run.levels_given else None, run.threads,
                            run.seed if run.seeds else None)
    report = suite.run(criteria, run.suite)
    write_json(report.to_dict(), run.output_path('verify.json'))
    Dashboard(config).display(report)
    if not report.passed:
        logger.error("Acceptance suite failed")
        return EXIT_VERIFY_FAILED
    return EXIT_OK


COMMANDS = {
    'ortho': cmd_ortho,
    'christoffel': cmd_christoffel,
    'partition': cmd_partition,
    'equilibrium': cmd_equilibrium,
    'fekete': cmd_fekete,
    'deviation': cmd_deviation,
    'unbounded': cmd_unbounded,
    'verify': cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", help="JSON problem file")
    common.add_argument("--n", help="Levels: a..b, a,b,c or a single level")
    common.add_argument("--seed", help="Seed, or a comma list of seeds")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--precision", choices=['double', 'extended'], help="Override the problem precision")

    parser = argparse.ArgumentParser(prog="potlab", description="Weighted potential theory experiments")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("ortho", parents=[common], help="Orthonormal bases and monic norms")
    christoffel_parser = commands.add_parser("christoffel", parents=[common], help="Christoffel functions")
    christoffel_parser.add_argument("-M", "--grid-size", dest="grid_size", type=int, help="Evaluation points")
    partition_parser = commands.add_parser("partition", parents=[common], help="Partition function routes")
    partition_parser.add_argument("--route", choices=ROUTES, default='all')
    partition_parser.add_argument("--count", type=int, help="Monte Carlo samples")
    for name, text in (("equilibrium", "Weighted equilibrium measure"), ("fekete", "Fekete points")):
        sub = commands.add_parser(name, parents=[common], help=text)
        sub.add_argument("-M", "--grid-size", dest="grid_size", type=int, help="Energy cells")
    deviation_parser = commands.add_parser("deviation", parents=[common], help="Large-deviation estimates")
    deviation_parser.add_argument("--eta", type=float, help="Deviation eta (default scales with n^-1/2)")
    deviation_parser.add_argument("--count", type=int, help="Configurations per level")
    deviation_parser.add_argument("--method", choices=SAMPLING_METHODS)
    deviation_parser.add_argument("--dump-samples", dest="dump_samples", action="store_true")
    unbounded_parser = commands.add_parser("unbounded", parents=[common], help="Free energy on the real line")
    unbounded_parser.add_argument("-M", "--grid-size", dest="grid_size", type=int, help="Energy cells")
    verify_parser = commands.add_parser("verify", parents=[common], help="Run the acceptance suite")
    verify_parser.add_argument("--suite", default='core', help="'core' or a comma list of criteria")
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logger = setup_logging()

    try:
        # Setup
        try:
            config = load_config() or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigurationError(f"Cannot read configuration: {e}", field='config')
        if not isinstance(config, dict):
            raise ConfigurationError("Configuration file must hold a mapping", field='config')
        logger = setup_logging(_section(config, 'logging').get('level', 'INFO'))
        runtime = _section(config, 'runtime')
        args.out = args.out or runtime.get('output_dir', 'out')
        args.threads = thread_count(runtime.get('threads'))

        logger.info(f"=== potlab {args.command} Starting ===")
        logger.info(f"Problem: {getattr(args, 'problem', None)}")
        logger.info(f"Start Time: {datetime.now()}")

        run = RunConfig.from_args(args)
        run.prepare_output()
        status = COMMANDS[run.command](run, config, logger)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PotlabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(str(e), file=sys.stderr)
        return EXIT_NUMERIC
    logger.info(f"=== potlab {args.command} Finished (exit {status}) ===")
    return status


if __name__ == "__main__":
    sys.exit(main())
