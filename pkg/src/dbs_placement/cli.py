import argparse
import logging
import sys
from pathlib import Path

from dbs_placement import __version__
from dbs_placement.conf import settings
from dbs_placement.config import defaults_document, demand_fields, load_config, load_generator_config
from dbs_placement.errors import PlacementError
from dbs_placement.experiment import format_validation_report, run_experiment, validate
from dbs_placement.fs import ensure_dir
from dbs_placement.logging import setup_logging
from dbs_placement.scenario import dump_demand_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_IO_ERROR = 3


def _run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    reports = run_experiment(config, args.output)

    for report in reports:
        for outcome in report.outcomes:
            print(f'slot={report.slot} method={outcome.method} objective={outcome.objective:.6g} '
                  f'feasible={outcome.feasible}')

    return EXIT_OK if all(report.feasible for report in reports) else EXIT_INFEASIBLE


def _validate(args: argparse.Namespace) -> int:
    report = validate(load_config(args.config))
    print(format_validation_report(report))

    return EXIT_OK if report.passed else EXIT_CONFIG_ERROR


def _generate(args: argparse.Namespace) -> int:
    config = load_generator_config(args.spec)
    output = ensure_dir(Path(args.output))

    for slot, field in enumerate(demand_fields(config)):
        path = output / f'demand_slot_{slot:03d}.csv'
        dump_demand_csv(field, config.grid, path)
        logger.info(f'Wrote {path}')

    return EXIT_OK


def _defaults(args: argparse.Namespace) -> int:
    sys.stdout.write(defaults_document().decode('utf-8'))

    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dbs-placement', description='Latency aware drone base station placement')
    parser.add_argument('--version', action='version', version=__version__)
    subparsers = parser.add_subparsers(dest='command', required=True)

    run_parser = subparsers.add_parser('run', help='Run LEAP and the baselines over every slot of a scenario')
    run_parser.add_argument('config', type=Path)
    run_parser.add_argument('-o', '--output', type=Path, default=None, help='Override the configured output_dir')
    run_parser.set_defaults(handler=_run)

    validate_parser = subparsers.add_parser('validate', help='Check LEAP, the queue model and the KKT split')
    validate_parser.add_argument('config', type=Path)
    validate_parser.set_defaults(handler=_validate)

    generate_parser = subparsers.add_parser('generate', help='Write synthetic hotspot demand as per-slot CSV files')
    generate_parser.add_argument('spec', type=Path)
    generate_parser.add_argument('-o', '--output', type=Path, required=True)
    generate_parser.set_defaults(handler=_generate)

    defaults_parser = subparsers.add_parser('defaults', help='Print the default radio, energy and validation values')
    defaults_parser.set_defaults(handler=_defaults)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(settings)

    try:
        return args.handler(args)
    except PlacementError as e:
        logger.error(str(e))

        return EXIT_CONFIG_ERROR
    except OSError as e:
        logger.error(f'I/O error: {e}')

        return EXIT_IO_ERROR


if __name__ == '__main__':
    sys.exit(main())
