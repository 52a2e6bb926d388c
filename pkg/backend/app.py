import argparse
import logging
import os
import sys
from typing import List, Optional

# Add parent directory to path so all modules can be imported
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backend.config import (
    CONFIG_PATH, DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE, DEFAULT_SCHEDULER_GAMMA,
    DEFAULT_SEED, LOG_FORMAT, LOG_LEVEL,
)
from backend.config_parser import parse_config
from backend.reporter import summary_lines
from backend.runner import run_dataset, run_inference, run_training
from shared.constants import OBSERVATION_KEYS, TaskKind
from shared.exceptions import MeraError
from shared.models import RunConfig
from storage.file_io import read_lines

# Configure logging
logging.basicConfig(level=getattr(logging, LOG_LEVEL), format=LOG_FORMAT)
logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class MeraArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def _gamma(text: str) -> float:
    value = _positive_float(text)
    if value > 1:
        raise argparse.ArgumentTypeError(f"scheduler gamma must be in (0, 1], got {value}")
    return value


def create_parser() -> argparse.ArgumentParser:
    """Command-line interface factory"""
    parser = MeraArgumentParser(prog='mera', description='Skill-based roguelike agent framework')

    mode = parser.add_mutually_exclusive_group(required=True)
    mode.add_argument('--inference', action='store_true', help='play the game with the configured skills')
    mode.add_argument('--create_dataset', action='store_true', help='record trajectories of the agent')
    mode.add_argument('--training', action='store_true', help='train a policy on recorded trajectories')

    parser.add_argument('--observation_keys', nargs='+', choices=OBSERVATION_KEYS,
                        help='observation fields the agent may use')
    parser.add_argument('--keys_to_save', nargs='+', choices=OBSERVATION_KEYS,
                        help='observation fields stored in each trajectory step')
    parser.add_argument('--language_mode', action='store_true',
                        help='add the language description to every saved step')
    parser.add_argument('--filename', help='trajectory file name; the episode index is appended')
    parser.add_argument('--training_alg', default='bc', help='registered training algorithm')
    parser.add_argument('--dataset', help='trajectory file, directory or glob pattern')
    parser.add_argument('--checkpoint', help='policy checkpoint to write (training) or load')
    parser.add_argument('--cuda', dest='cuda', action='store_true', help='request GPU training')
    parser.add_argument('--no_cuda', dest='cuda', action='store_false', help='train on CPU')
    parser.set_defaults(cuda=False)
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED)
    parser.add_argument('--batch_size', type=_positive_int, default=DEFAULT_BATCH_SIZE)
    parser.add_argument('--learning_rate', type=_positive_float, default=DEFAULT_LEARNING_RATE)
    parser.add_argument('--scheduler_gamma', type=_gamma, default=DEFAULT_SCHEDULER_GAMMA)
    parser.add_argument('--epochs', type=_positive_int, default=DEFAULT_EPOCHS)

    parser.add_argument('--task', choices=[kind.value for kind in TaskKind],
                        default=TaskKind.FULL_GAME.value)
    parser.add_argument('--config', default=CONFIG_PATH, help='agent configuration file')
    parser.add_argument('--levels', type=_positive_int, help='dungeon depth of FullGameChallenge')
    parser.add_argument('--max_steps', type=_positive_int, help='turn limit per episode')
    parser.add_argument('--ascend', action='store_true', help='climb back out after the last level')
    parser.add_argument('--parallel', type=_positive_int, default=1, help='worker processes for inference')
    parser.add_argument('--argmax', action='store_true', help='policy skills pick their most likely action')
    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.create_dataset:
        if not args.filename:
            parser.error('--filename is required with --create_dataset')
        if not args.keys_to_save and not args.language_mode:
            parser.error('--keys_to_save (or --language_mode) is required with --create_dataset')
    if args.training and not args.dataset:
        parser.error('--dataset is required with --training')
    if args.task == TaskKind.FULL_GAME.value and args.levels is not None and args.levels < 2:
        parser.error(f"--levels must be >= 2 for {TaskKind.FULL_GAME.value}, got {args.levels}")
    return args


def load_run_config(path: str) -> RunConfig:
    config = parse_config('\n'.join(read_lines(path)))
    logger.info(f"Loaded configuration from {path}")
    return config


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    try:
        if args.training:
            path = run_training(None, args)
            print(f"Checkpoint written to {path}")
        elif args.create_dataset:
            paths = run_dataset(load_run_config(args.config), args)
            print(f"Saved {len(paths)} trajectories")
        else:
            summary = run_inference(load_run_config(args.config), args)
            print(summary_lines(summary))
    except MeraError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
