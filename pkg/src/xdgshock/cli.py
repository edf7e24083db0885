"""Command-line entry point: ``xdgshock [flags]``.

Exit status: 0 converged, 1 not converged, 2 bad configuration, 3 I/O failure.
"""
from __future__ import annotations

import logging
import sys

from .config import build_parser, parse_config
from .errors import ConfigurationError, XdgShockError
from .experiment import run_experiment

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def main(argv=None) -> int:
    parser = build_parser()
    try:
        cfg, verbose = parse_config(argv, parser)
    except ConfigurationError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    level = logging.WARNING if not verbose else (logging.INFO if verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        result = run_experiment(cfg)
    except OSError as exc:
        print(f"{parser.prog}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigurationError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except XdgShockError as exc:
        print(f"{parser.prog}: run failed: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED

    print(f"x_interface={result.trace.final_position:.10f} error={result.error:.3e} "
          f"pseudo_steps={len(result.trace.steps)} converged={result.converged}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
