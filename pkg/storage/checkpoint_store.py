import logging

import numpy as np

from backend.policy import PolicyModel
from shared.constants import Action, CHECKPOINT_FORMAT
from shared.exceptions import CheckpointFormatError
from storage.file_io import atomic_writer, read_lines

logger = logging.getLogger(__name__)


def _floats(values) -> str:
    return ' '.join(repr(float(v)) for v in values)


def dumps(model: PolicyModel) -> str:
    """Header, action space, feature count, one weight row per action, then the bias"""
    lines = [
        CHECKPOINT_FORMAT,
        'actions ' + ' '.join(action.name for action in model.action_space),
        f"features {model.n_features}",
    ]
    lines.extend(_floats(row) for row in model.weights)
    lines.append('bias ' + _floats(model.bias))
    return '\n'.join(lines) + '\n'


def _parse_floats(text: str, expected: int, line_no: int):
    try:
        values = [float(token) for token in text.split()]
    except ValueError as e:
        raise CheckpointFormatError(line_no, str(e))
    if len(values) != expected:
        raise CheckpointFormatError(line_no, f"expected {expected} values, found {len(values)}")
    if not np.all(np.isfinite(values)):
        raise CheckpointFormatError(line_no, 'non-finite value')
    return values


def loads_lines(lines) -> PolicyModel:
    if not lines or lines[0] != CHECKPOINT_FORMAT:
        raise CheckpointFormatError(1, f"expected header {CHECKPOINT_FORMAT!r}")
    if len(lines) < 3 or not lines[1].startswith('actions ') or not lines[2].startswith('features '):
        raise CheckpointFormatError(min(len(lines), 3), 'missing actions or features line')
    try:
        action_space = tuple(Action[name] for name in lines[1].split()[1:])
    except KeyError as e:
        raise CheckpointFormatError(2, f"unknown action {e}")
    try:
        n_features = int(lines[2].split()[1])
    except (IndexError, ValueError) as e:
        raise CheckpointFormatError(3, str(e))

    n_actions = len(action_space)
    if len(lines) != 3 + n_actions + 1:
        raise CheckpointFormatError(len(lines), f"expected {n_actions} weight rows and a bias line")
    weights = [_parse_floats(lines[3 + i], n_features, 4 + i) for i in range(n_actions)]
    bias_line = lines[3 + n_actions]
    if not bias_line.startswith('bias'):
        raise CheckpointFormatError(4 + n_actions, 'missing bias line')
    bias = _parse_floats(bias_line[len('bias'):], n_actions, 4 + n_actions)
    return PolicyModel(np.array(weights, dtype=float).reshape(n_actions, n_features),
                       np.array(bias, dtype=float), action_space)


def save(model: PolicyModel, path: str):
    with atomic_writer(path) as handle:
        handle.write(dumps(model))
    logger.info(f"Checkpoint written to {path}")


def load(path: str) -> PolicyModel:
    return loads_lines(read_lines(path))
