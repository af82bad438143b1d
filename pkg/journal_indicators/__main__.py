#!/usr/bin/env python3
"""
Journal Indicators

Command-line interface for estimating journal citation indicators from the
mean and standard deviation of citations, and for checking the estimates
against raw data or simulation.

Usage:
    python3 -m journal_indicators summarize --input citations.csv
    python3 -m journal_indicators indicators --summary table.csv
    python3 -m journal_indicators compare --summary table.csv --t 1 --r 2
    python3 -m journal_indicators rank --summary table.csv
    python3 -m journal_indicators validate --summary table.csv --seed 7
    python3 -m journal_indicators plot-data --figure csi --summary table.csv --seed 7

Results go to stdout (or --output); logs go to stderr.
"""

import argparse
import logging
import logging.handlers
import os
import sys

from . import __version__, commands, dataset
from .commands import FIGURES
from .config import SettingsManager
from .errors import EXIT_ERROR, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION_FAILED, IndicatorError

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']


def configure_logging(verbosity=0):
    """Root logger on stderr, level from JOURNAL_INDICATORS_LOG_LEVEL or -v."""
    log_level = os.environ.get('JOURNAL_INDICATORS_LOG_LEVEL', 'WARNING').upper()
    if log_level not in LOG_LEVELS:
        log_level = 'WARNING'
    level = getattr(logging, log_level)
    if verbosity:
        level = min(level, logging.INFO if verbosity == 1 else logging.DEBUG)

    handlers = [logging.StreamHandler(sys.stderr)]

    # Set JOURNAL_INDICATORS_ENABLE_FILE_LOGGING=1 to also log to a rotating file
    enable_file_logging = os.environ.get('JOURNAL_INDICATORS_ENABLE_FILE_LOGGING', '0').lower() in ['1', 'true', 'yes']
    if enable_file_logging:
        try:
            handlers.append(logging.handlers.RotatingFileHandler(
                'journal_indicators.log',
                maxBytes=10*1024*1024,  # 10MB per file
                backupCount=3,
                encoding='utf-8'
            ))
        except OSError as e:
            print(f"Warning: Cannot create rotating log file 'journal_indicators.log': {e}", file=sys.stderr)

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
    logger.debug(f"Logging configured at {logging.getLevelName(level)} level")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be >= 0, got {value}")
    return value


def _threshold(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not 0.5 < value < 1.0:
        raise argparse.ArgumentTypeError(f"threshold must be in (0.5, 1), got {value}")
    return value


def _tolerance(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"tolerance must be >= 0, got {value}")
    return value


def _add_output_flags(parser):
    parser.add_argument('--format', choices=['csv', 'json'],
                        help='Output format (default: output.format from settings, csv)')
    parser.add_argument('--output', type=str, default='-',
                        help='Output file (default: - for stdout)')


def _add_moments_flag(parser):
    parser.add_argument('--moments', choices=['measured', 'derived'],
                        help='Log moments to use: measured mu/sigma columns when present, or derived '
                             'from (m, v) (default: estimation.moment_source from settings)')


def _add_pair_sizes(parser):
    parser.add_argument('--kt', type=_positive_int, help='Group size for journal t (default: estimation.default_k)')
    parser.add_argument('--kr', type=_positive_int, help='Group size for journal r (default: estimation.default_k)')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='journal-indicators',
        description='Estimate journal citation indicators from (m, v) under a log-normal model. '
                    'All citation counts are shifted by +1; the shift is always on.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--settings', type=str,
                        help='Path to a settings file overriding the bundled defaults')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='Log more (-v info, -vv debug); overrides JOURNAL_INDICATORS_LOG_LEVEL when louder')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    p = subparsers.add_parser('summarize', help='Per-journal N, m, v, mu, sigma from a citations file')
    p.add_argument('--input', required=True, help='Citations file (journal_id,paper_id,citations)')
    _add_output_flags(p)

    p = subparsers.add_parser('indicators', help='Impact factor and estimated h-index per journal')
    p.add_argument('--summary', required=True, help='Summary file (id,name,n_papers,m,v[,mu,sigma])')
    _add_moments_flag(p)
    _add_output_flags(p)

    p = subparsers.add_parser('compare', help='CSI, group CSI and minimum representative size for two journals')
    p.add_argument('--summary', required=True, help='Summary file')
    p.add_argument('--t', required=True, dest='id_t', metavar='ID', help='Id of journal t')
    p.add_argument('--r', required=True, dest='id_r', metavar='ID', help='Id of journal r')
    _add_pair_sizes(p)
    p.add_argument('--threshold', type=_threshold, help='Success threshold for kappa (default: estimation.threshold)')
    _add_moments_flag(p)
    _add_output_flags(p)

    p = subparsers.add_parser('rank', help='Estimated average rank of every journal')
    p.add_argument('--summary', required=True, help='Summary file')
    _add_moments_flag(p)
    _add_output_flags(p)

    p = subparsers.add_parser('validate', help='Check every estimate against Monte Carlo simulation')
    p.add_argument('--summary', required=True, help='Summary file')
    p.add_argument('--seed', type=_seed, required=True, help='Random seed (required, >= 0)')
    p.add_argument('--samples', type=_positive_int, help='Synthetic papers per journal (default: simulation.n_samples)')
    p.add_argument('--tolerance', type=_tolerance, help='Allowed absolute error for probabilities (default: simulation.tolerance)')
    _add_pair_sizes(p)
    p.add_argument('--trials', type=_positive_int, help='Group draws per comparison (default: simulation.trials)')
    _add_output_flags(p)

    p = subparsers.add_parser('plot-data', help='Scatter data: real or simulated value against the estimate')
    p.add_argument('--figure', required=True, choices=FIGURES, help='Indicator to plot')
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--citations', help='Citations file; x is the empirical value')
    source.add_argument('--summary', help='Summary file; x is the value on a synthetic journal')
    p.add_argument('--seed', type=_seed, required=True, help='Random seed (required, >= 0)')
    _add_pair_sizes(p)
    p.add_argument('--threshold', type=_threshold, help='Success threshold for kappa (default: estimation.threshold)')
    p.add_argument('--trials', type=_positive_int, help='Group draws per comparison (default: simulation.trials)')
    p.add_argument('--samples', type=_positive_int,
                   help='Synthetic papers per journal with --summary (default: each journal\'s N)')
    _add_moments_flag(p)
    _add_output_flags(p)

    return parser


def run(args, settings):
    """Dispatch one subcommand; returns (result, exit status)."""
    if args.command == 'summarize':
        return commands.summarize(dataset.load_citations(args.input), settings), EXIT_OK

    if args.command == 'plot-data':
        citations = dataset.load_citations(args.citations) if args.citations else None
        records = dataset.load_summary(args.summary) if args.summary else None
        result = commands.plot_data(args.figure, settings, args.seed, citations=citations, records=records,
                                    source=args.moments, k_t=args.kt, k_r=args.kr, threshold=args.threshold,
                                    trials=args.trials, samples=args.samples)
        return result, EXIT_OK

    records = dataset.load_summary(args.summary)
    if args.command == 'indicators':
        return commands.indicators(records, settings, args.moments), EXIT_OK
    if args.command == 'compare':
        result = commands.compare(records, args.id_t, args.id_r, settings, k_t=args.kt, k_r=args.kr,
                                  threshold=args.threshold, source=args.moments)
        return result, EXIT_OK
    if args.command == 'rank':
        return commands.rank(records, settings, args.moments), EXIT_OK
    if args.command == 'validate':
        report = commands.validate(records, settings, args.seed, samples=args.samples, tolerance=args.tolerance,
                                   k_t=args.kt, k_r=args.kr, trials=args.trials)
        if not report.passed:
            for entry in report.failures():
                logger.warning(f"validation failed: {entry.indicator} {entry.subject} "
                               f"(error {entry.abs_error}, tolerance {entry.tolerance})")
        return report, EXIT_OK if report.passed else EXIT_VALIDATION_FAILED
    raise ValueError(f"unhandled command {args.command!r}")


def main(argv=None):
    """Main function of the journal indicators CLI; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    configure_logging(args.verbose)

    try:
        settings = SettingsManager(args.settings)
        result, status = run(args, settings)
        dataset.write_results(result, args.output, args.format or settings.output_format, settings.precision)
    except IndicatorError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_ERROR
    return status


if __name__ == "__main__":
    sys.exit(main())
