import argparse
import logging
import os
import sys
import traceback

import numpy as np

from constants import (
    DEFAULT_OUTPUT_DIR,
    DEFAULT_INGEST_MODE,
    CLAMP_EPS,
    DEFAULT_MAXITER,
    DEFAULT_GTOL,
    DEFAULT_START,
    DEFAULT_INTEGRATION_TOL,
    MAX_QUADRATURE_DIM,
    DEFAULT_MC_SIZE,
    DEFAULT_SEED,
    DEFAULT_WINDOW,
    DEFAULT_STEP,
    DEFAULT_BAND_MULTIPLIER,
    DEFAULT_ROLLING_WORKERS,
    DEFAULT_SIM_SIZE,
    FD_STEP,
    FD_GRADIENT_TOL,
    FD_HESSIAN_TOL,
    FD_CHECK_ROWS,
    EXIT_OK,
)
from src.checks import check_gradient, check_hessian, sample_rows
from src.dataset import CopulaDataset, IngestOptions, ingest, write_dataset
from src.errors import IntegrationError, ParseError, VineError
from src.evaluate import simulate
from src.inference import FitOptions, fit_mle, fit_sequential, prepare
from src.information import asymptotic_se_mle, asymptotic_se_seq, expected_moments
from src.report import format_layout, print_fit, write_fit, write_information, write_table
from src.rolling import RollingConfig, band_table, rolling_fit
from src.utils.logger import Logger
from src.vine_spec import read_spec

# exit code when a derivative check exceeds its tolerance
EXIT_CHECK_FAILED = 1


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description='R-vine copula estimation and inference')

    # Mode selection
    mode_group = parser.add_mutually_exclusive_group(required=True)
    mode_group.add_argument('--fit', action='store_true', help='Fit the spec parameters to data')
    mode_group.add_argument('--check', action='store_true',
                            help='Compare analytic derivatives with finite differences')
    mode_group.add_argument('--fisher', action='store_true',
                            help='Expected Fisher information and asymptotic standard errors')
    mode_group.add_argument('--rolling', action='store_true', help='Rolling-window ML estimation')
    mode_group.add_argument('--simulate', action='store_true', help='Sample from the spec')

    # Common arguments
    parser.add_argument('--spec', type=str, required=True, help='R-vine spec file')
    parser.add_argument('--data', type=str, help='Delimited data file with a header row')
    parser.add_argument('--out', type=str, default=DEFAULT_OUTPUT_DIR,
                        help=f'Output directory (file for --simulate) (default: {DEFAULT_OUTPUT_DIR})')
    parser.add_argument('--verbose', action='store_true', help='Echo log messages to the console')

    ingest_group = parser.add_argument_group('Data Options')
    ingest_group.add_argument('--ingest-mode', type=str, choices=['already_uniform', 'rank_transform'],
                              default=DEFAULT_INGEST_MODE,
                              help=f'How data are mapped to the unit cube (default: {DEFAULT_INGEST_MODE})')
    ingest_group.add_argument('--clamp-eps', type=float, default=CLAMP_EPS,
                              help=f'Clamp margin for uniform data (default: {CLAMP_EPS})')
    ingest_group.add_argument('--index-col', type=str, default=None,
                              help='Column holding row labels such as dates')

    fit_group = parser.add_argument_group('Fit Options')
    fit_group.add_argument('--method', type=str, choices=['ml', 'seq'], default='ml',
                           help='Full maximum likelihood or tree-by-tree estimation (default: ml)')
    fit_group.add_argument('--start', type=str, choices=['sequential', 'spec'], default=DEFAULT_START,
                           help=f'Starting values of the ML fit (default: {DEFAULT_START})')
    fit_group.add_argument('--gradient', type=str, choices=['analytic', 'numeric'], default='analytic',
                           help='Analytic score or finite-difference gradient (default: analytic)')
    fit_group.add_argument('--maxiter', type=int, default=DEFAULT_MAXITER,
                           help=f'Optimizer iteration limit (default: {DEFAULT_MAXITER})')
    fit_group.add_argument('--gtol', type=float, default=DEFAULT_GTOL,
                           help=f'Projected gradient tolerance (default: {DEFAULT_GTOL})')

    check_group = parser.add_argument_group('Check Options')
    check_group.add_argument('--what', type=str, choices=['gradient', 'hessian'], default='gradient',
                             help='Derivative to check (default: gradient)')
    check_group.add_argument('--fd-step', type=float, default=FD_STEP,
                             help=f'Finite-difference step (default: {FD_STEP})')
    check_group.add_argument('--check-rows', type=int, default=FD_CHECK_ROWS,
                             help=f'Rows sampled from the data (default: {FD_CHECK_ROWS})')

    fisher_group = parser.add_argument_group('Fisher Options')
    fisher_group.add_argument('--tol', type=float, default=DEFAULT_INTEGRATION_TOL,
                              help=f'Integration tolerance (default: {DEFAULT_INTEGRATION_TOL})')
    fisher_group.add_argument('--monte-carlo', action='store_true',
                              help=f'Monte Carlo expectations (required above d={MAX_QUADRATURE_DIM})')
    fisher_group.add_argument('--mc-size', type=int, default=DEFAULT_MC_SIZE,
                              help=f'Monte Carlo sample size (default: {DEFAULT_MC_SIZE})')

    rolling_group = parser.add_argument_group('Rolling Options')
    rolling_group.add_argument('--window', type=int, default=DEFAULT_WINDOW,
                               help=f'Observations per window (default: {DEFAULT_WINDOW})')
    rolling_group.add_argument('--step', type=int, default=DEFAULT_STEP,
                               help=f'Shift between windows (default: {DEFAULT_STEP})')
    rolling_group.add_argument('--band-multiplier', type=float, default=DEFAULT_BAND_MULTIPLIER,
                               help=f'Band half-width in standard errors (default: {DEFAULT_BAND_MULTIPLIER})')
    rolling_group.add_argument('--workers', type=int, default=DEFAULT_ROLLING_WORKERS,
                               help=f'Parallel cold-started windows (default: {DEFAULT_ROLLING_WORKERS})')
    rolling_group.add_argument('--cold-start', action='store_true',
                               help='Start every window from the full-sample sequential estimate')

    sim_group = parser.add_argument_group('Simulation Options')
    sim_group.add_argument('--n', type=int, default=DEFAULT_SIM_SIZE,
                           help=f'Number of observations (default: {DEFAULT_SIM_SIZE})')
    sim_group.add_argument('--seed', type=int, default=DEFAULT_SEED,
                           help=f'Random seed for simulation and Monte Carlo (default: {DEFAULT_SEED})')

    return parser.parse_args(argv)


def _load_data(args):
    if not args.data:
        raise ParseError("--data is required for this command")
    opts = IngestOptions(mode=args.ingest_mode, clamp_eps=args.clamp_eps, index_col=args.index_col)
    return ingest(args.data, opts)


def _fit_options(args):
    return FitOptions(maxiter=args.maxiter, gtol=args.gtol, start=args.start, gradient=args.gradient)


def cmd_fit(args, logger):
    spec = read_spec(args.spec)
    data = _load_data(args)
    if args.method == 'ml':
        result = fit_mle(spec, data, _fit_options(args), logger=logger)
    else:
        result = fit_sequential(spec, data, _fit_options(args), logger=logger)
    paths = write_fit(result, args.out)
    print_fit(result)
    print(f"Results saved to: {paths['summary']}")
    return EXIT_OK


def cmd_check(args, logger):
    spec = read_spec(args.spec)
    data = _load_data(args)
    spec, u = prepare(spec, data)
    u = sample_rows(u, args.check_rows, args.seed)
    if args.what == 'gradient':
        report = check_gradient(spec, u, step=args.fd_step, tol=FD_GRADIENT_TOL, logger=logger)
    else:
        report = check_hessian(spec, u, step=args.fd_step, tol=FD_HESSIAN_TOL, logger=logger)
    frame = report.to_frame()
    if not frame.empty:
        print(frame.to_string(index=False))
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_fisher(args, logger):
    spec = read_spec(args.spec).normalize()
    if spec.d > MAX_QUADRATURE_DIM and not args.monte_carlo:
        raise IntegrationError(
            f"deterministic integration supports d <= {MAX_QUADRATURE_DIM}; pass --monte-carlo for d={spec.d}")
    moments = expected_moments(spec, tol=args.tol, monte_carlo=args.monte_carlo or None,
                               mc_size=args.mc_size, seed=args.seed, logger=logger)
    se_mle = asymptotic_se_mle(spec, moments=moments)
    se_seq = asymptotic_se_seq(spec, moments=moments)
    write_information(spec, moments, se_mle, se_seq, args.out)
    print(f"Fisher information ({moments.method}):")
    print(format_layout(moments.info, machine=False), end="")
    print("ASE (ML):")
    print(format_layout(se_mle, machine=False), end="")
    print("ASE (sequential):")
    print(format_layout(se_seq, machine=False), end="")
    print(f"Results saved to: {args.out}")
    return EXIT_OK


def cmd_rolling(args, logger):
    spec = read_spec(args.spec)
    data = _load_data(args)
    cfg = RollingConfig(window=args.window, step=args.step, band_multiplier=args.band_multiplier,
                        workers=args.workers, cold_start=args.cold_start)
    result = rolling_fit(spec, data, cfg, _fit_options(args), logger=logger)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "rolling.csv")
    write_table(band_table(result, cfg), path)
    failed = sum(not w.converged for w in result.windows)
    print(f"Windows fitted: {len(result)} ({failed} not converged)")
    print(f"Results saved to: {path}")
    return EXIT_OK


def cmd_simulate(args, logger):
    spec = read_spec(args.spec)
    spec_n = spec.normalize()
    sample = simulate(spec_n, args.n, seed=args.seed)
    # back to the variable order of the spec file
    order = np.argsort(spec_n.permutation)
    data = CopulaDataset(sample.values[:, order], [sample.labels[j] for j in order])
    path = args.out if args.out.endswith(".csv") else os.path.join(args.out, "simulated.csv")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    write_dataset(data, path)
    logger.log_message(f"simulated {args.n} rows with seed {args.seed} to {path}")
    print(f"Simulated {args.n} observations. Output saved to: {path}")
    return EXIT_OK


COMMANDS = {
    'fit': cmd_fit,
    'check': cmd_check,
    'fisher': cmd_fisher,
    'rolling': cmd_rolling,
    'simulate': cmd_simulate,
}


def main(argv=None):
    args = parse_args(argv)
    logger = Logger("main", see_time=True, console_log=args.verbose)
    mode = next(name for name in COMMANDS if getattr(args, name))
    try:
        return COMMANDS[mode](args, logger)
    except VineError as err:
        print(f"Error: {err}", file=sys.stderr)
        logger.log_message(traceback.format_exc(), level=logging.ERROR)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
