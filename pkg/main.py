"""
Shock TASEP toolkit - Main Entry Point

Subcommands run the Monte Carlo experiments, build distribution tables
and aggregate reports. Exit status is 0 iff every enabled check passed,
1 on a failed check or unexpected error, 2 on a configuration error.
"""

import os
import sys
import argparse
from typing import List, Optional

from dotenv import load_dotenv

from src.errors import ConfigError
from src.infrastructure.config import DEFAULT_CONFIG_PATH, load_config
from src.monitoring import StructuredLogger, set_log_level
from src.orchestration import EXPERIMENTS, TABLE_LAWS, ExperimentWorkflow

# Load environment variables
load_dotenv()

COMMANDS = list(EXPERIMENTS) + ['fredholm-tables', 'report']
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Second-class particle, backwards geodesic and Tracy-Widom numerics for shock TASEP'
    )
    parser.add_argument(
        'command',
        choices=COMMANDS,
        help='Subcommand to run'
    )
    parser.add_argument(
        '--config',
        type=str,
        default=DEFAULT_CONFIG_PATH,
        help=f'YAML run configuration (default: {DEFAULT_CONFIG_PATH})'
    )
    parser.add_argument(
        '--seeds',
        type=int,
        help='Override the sample count of every experiment the command runs'
    )
    parser.add_argument(
        '--law',
        choices=TABLE_LAWS,
        default='gue',
        help='Distribution for fredholm-tables (default: gue)'
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    logger = StructuredLogger(name='main')

    try:
        config = load_config(args.config)
    except ConfigError as e:
        logger.error("Invalid configuration", error=str(e), path=args.config)
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    set_log_level(os.getenv('LOG_LEVEL') or config.log_level)
    logger.info("Starting command", command=args.command, config=args.config)

    workflow = ExperimentWorkflow(config)
    try:
        result = workflow.run(args.command, seeds=args.seeds, law=args.law)
    except ConfigError as e:
        logger.error("Invalid configuration", error=str(e), command=args.command)
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    print_result(result)
    return EXIT_OK if result['passed'] else EXIT_FAILED


def print_result(result: dict):
    """Print a one-screen summary of a command result"""
    print("=" * 80)
    mark = "✅" if result['passed'] else "❌"
    print(f"{mark} {result['command'].upper()}")
    print("=" * 80)

    for report in result.get('reports', []):
        print(f"\n📌 {report['experiment']}: {report.get('status')}")
        for name, ok in sorted(report.get('checks', {}).items()):
            print(f"   {'✓' if ok else '✗'} {name}")
        if report.get('error'):
            print(f"   error: {report['error']}")

    for path in result.get('files', []):
        print(f"💾 {path}")

    for name, entry in result.get('experiments', {}).items():
        print(f"   {'✓' if entry['passed'] else '✗'} {name}: {entry['status']}")

    print("=" * 80)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n👋 Interrupted by user.")
        sys.exit(EXIT_FAILED)
    except Exception as e:
        logger = StructuredLogger(name='main')
        logger.error(f"Unexpected error: {str(e)}", error=str(e))
        print(f"\n❌ Unexpected error: {str(e)}")
        sys.exit(EXIT_FAILED)
