"""
    anisofield.cli
    --------------

    Command line front end: ``anisofield <experiment> --config <path>``.
    Exit status is 0 when every check passes, 1 on a tolerance failure,
    2 on a configuration error and 3 on a numerical failure.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import argparse
import logging
import os

from anisofield import config as _config, errors, experiments
from anisofield.io import write_json


logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1


def _parser():
    parser = argparse.ArgumentParser(
        prog="anisofield",
        description="Simulate anisotropic long-range dependent random fields "
        "and check their scaling limits.",
    )
    parser.add_argument(
        "experiment",
        choices=_config.EXPERIMENTS,
        help="Experiment to run",
    )
    parser.add_argument(
        "-c", "--config",
        dest="config",
        help="Configuration file (TOML, YAML or JSON)",
    )
    parser.add_argument(
        "-p", "--preset",
        dest="preset",
        choices=_config.list_presets(aliases=True),
        help="Named preset merged below the configuration file",
    )
    parser.add_argument(
        "-s", "--seed",
        type=int,
        dest="seed",
        help="Root seed of all random streams",
    )
    parser.add_argument(
        "-o", "--out",
        dest="output",
        help="Output directory",
    )
    parser.add_argument(
        "-t", "--threads",
        type=int,
        dest="threads",
        help="Worker threads",
    )
    parser.add_argument(
        "-l", "--level",
        action="store",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        dest="level",
        help="Logging level",
    )
    return parser


def main(argv=None):
    options = _parser().parse_args(argv)
    logging.basicConfig(
        level=options.level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )

    overrides = {"seed": options.seed, "output": options.output, "threads": options.threads}
    try:
        resolved = _config.resolve(
            options.config,
            preset=options.preset,
            overrides=overrides,
            experiment=options.experiment,
        )
    except errors.AnisofieldError as exc:
        root = options.output or _config.DEFAULTS["output"]
        os.makedirs(root, exist_ok=True)
        write_json(os.path.join(root, "report.json"), experiments.error_report(exc))
        logger.error("%s: %s", exc.code, exc.message)
        return exc.exit_status

    try:
        outcome = experiments.run(resolved)
    except errors.AnisofieldError as exc:
        logger.error("%s: %s", exc.code, exc.message)
        return exc.exit_status

    if not outcome.passed:
        logger.error("experiment '%s' failed its tolerances", resolved["experiment"])
        return EXIT_FAIL
    return EXIT_PASS
