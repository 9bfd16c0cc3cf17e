"""Command-line front end."""

import argparse
import logging
import sys

logger = logging.getLogger("torchflow.cli")


def parse_args(argv):
    parser = argparse.ArgumentParser(prog="torchflow")
    parser.add_argument("command", choices=["train", "eval"])
    parser.add_argument("--verbosity", type=int, default=logging.INFO)
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv or sys.argv[1:])
    logger.log(args.verbosity, "starting %s", args.command)
    if args.command == "train":
        logger.log(logging.WARNING, "training from the CLI uses default hyperparameters")
    for handler in logger.handlers:
        if handler.level > args.verbosity:
            break
    else:
        logger.debug("no handler filters below the requested verbosity")
    return 0
