import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv

from src.config import MODES, preset_names, resolve_config
from src.errors import ConfigError, DomainError, InvalidInputError, NumericalError, RelblowError
from src.graph import RunPipeline
from src.state import STATUS_FAILED_SUITE, STATUS_NUMERICAL, STATUS_OUTSIDE

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_OUTSIDE = 3

STATUS_EXIT = {STATUS_NUMERICAL: EXIT_NUMERICAL, STATUS_FAILED_SUITE: EXIT_NUMERICAL, STATUS_OUTSIDE: EXIT_OUTSIDE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relblow", description="Singularity formation laboratory for 1+1-D relativistic Euler flows.")
    parser.add_argument("mode", choices=MODES, help="What to run.")
    parser.add_argument("--config", help=f"TOML file or preset name ({', '.join(preset_names())}).")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override one dotted config key; repeatable. Values parse as JSON scalars.")
    parser.add_argument("--out", help="Output directory (default: $RELBLOW_OUT or ./runs).")
    parser.add_argument("--seed", type=int, help="Random seed for the verification suites.")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the relblow command line."""
    load_dotenv()

    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(args.mode, args.config, args.overrides, args.out, args.seed)
    except UsageError as e:
        print(f"Usage error: {e}")
        return EXIT_USAGE
    except ConfigError as e:
        print(f"Config error: {e}")
        return EXIT_USAGE

    try:
        result = RunPipeline(config).run()
    except (ConfigError, InvalidInputError) as e:
        print(f"Config error: {e}")
        return EXIT_USAGE
    except DomainError as e:
        print(f"Outside theory: {e}")
        return EXIT_OUTSIDE
    except NumericalError as e:
        print(f"Numerical failure: {e}")
        if e.diagnostics:
            print(f"Diagnostics: {e.diagnostics}")
        return EXIT_NUMERICAL
    except RelblowError as e:
        print(f"Run failed: {type(e).__name__}: {e}")
        return EXIT_NUMERICAL

    status = result.get("status")
    verdict = result.get("result", {}).get("verdict")
    print(f"{config.mode}: {verdict} [{status}] -> {result.get('run_dir')}")
    return STATUS_EXIT.get(status, EXIT_OK)


if __name__ == "__main__":
    sys.exit(main())
