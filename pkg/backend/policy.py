"""
Egocentric featurizer and the linear-softmax movement policy
"""

import random
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from backend.config import CROP_SIZE
from backend.game_whisperer import GameState, decode_map
from backend.rules import apply_rules
from shared.constants import (
    Action, CellKind, CHAR_GLYPHS, GLYPH_CLASSES, GLYPHS, MOVES, OBSERVATION_KEYS, SPECIES,
    SPECIES_NAMES,
)
from shared.exceptions import DimensionMismatch, MissingKeys
from shared.models import BlStats, Observation

N_CLASSES = len(GLYPH_CLASSES)
N_STATS = 3

# glyph -> policy input class
CLASS_TABLE = np.full(64, GLYPH_CLASSES['BLANK'], dtype=np.int64)
for _kind in CellKind:
    if _kind.name in GLYPH_CLASSES:
        CLASS_TABLE[int(_kind)] = GLYPH_CLASSES[_kind.name]
for _name in ('AGENT', 'PET', 'FOOD', 'GOLD', 'KEY'):
    CLASS_TABLE[GLYPHS[_name]] = GLYPH_CLASSES[_name]
for _index, _species in enumerate(SPECIES_NAMES):
    _info = SPECIES[_species]
    _hostile = _info['hostile'] and not _info['passive']
    CLASS_TABLE[GLYPHS['MONSTER_BASE'] + _index] = GLYPH_CLASSES['HOSTILE' if _hostile else 'HARMLESS']

_CHAR_TO_GLYPH = np.zeros(128, dtype=np.int64)
for _code, _glyph in CHAR_GLYPHS.items():
    _CHAR_TO_GLYPH[_code] = _glyph


def feature_size(crop: int = CROP_SIZE) -> int:
    return crop * crop * N_CLASSES + N_STATS


def _crop_classes(glyphs: np.ndarray, center: Tuple[int, int], crop: int) -> np.ndarray:
    half = crop // 2
    padded = np.pad(CLASS_TABLE[glyphs], half, constant_values=GLYPH_CLASSES['OUT_OF_BOUNDS'])
    r, c = center[0] + half, center[1] + half
    return padded[r - half:r + half + 1, c - half:c + half + 1]


def featurize(obs: Observation, keys=OBSERVATION_KEYS, crop: int = CROP_SIZE) -> np.ndarray:
    """One-hot crop of glyph classes around the agent plus normalized hp, hunger and depth"""
    return featurize_parts(decode_map(obs, keys), obs.blstats, crop)


def featurize_parts(glyphs: np.ndarray, stats: BlStats, crop: int = CROP_SIZE) -> np.ndarray:
    classes = _crop_classes(np.asarray(glyphs, dtype=np.int64), stats.pos, crop)
    one_hot = np.zeros((crop * crop, N_CLASSES))
    one_hot[np.arange(crop * crop), classes.ravel()] = 1.0
    status = np.clip([stats.hp / max(stats.max_hp, 1), int(stats.hunger) / 4.0, stats.depth / 10.0],
                     0.0, 1.0)
    return np.concatenate([one_hot.ravel(), status])


def featurize_fields(fields: Dict[str, Any], crop: int = CROP_SIZE) -> np.ndarray:
    """Features from a recorded trajectory step"""
    if 'blstats' not in fields or not ('glyphs' in fields or 'chars' in fields):
        missing = {'blstats'} - set(fields)
        if 'glyphs' not in fields and 'chars' not in fields:
            missing.add('glyphs')
        raise MissingKeys(missing)
    if 'glyphs' in fields:
        glyphs = np.asarray(fields['glyphs'], dtype=np.int64)
    else:
        glyphs = _CHAR_TO_GLYPH[np.asarray(fields['chars'], dtype=np.int64)]
    return featurize_parts(glyphs, BlStats.from_vector(fields['blstats']), crop)


@dataclass(eq=False)
class PolicyModel:
    """Linear softmax policy over a fixed action space"""
    weights: np.ndarray
    bias: np.ndarray
    action_space: Tuple[Action, ...] = MOVES

    @classmethod
    def zeros(cls, n_features: int = None, action_space: Sequence[Action] = MOVES) -> 'PolicyModel':
        n_features = feature_size() if n_features is None else n_features
        action_space = tuple(Action(a) for a in action_space)
        return cls(np.zeros((len(action_space), n_features)), np.zeros(len(action_space)), action_space)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> 'PolicyModel':
        return PolicyModel(self.weights.copy(), self.bias.copy(), self.action_space)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolicyModel):
            return NotImplemented
        return (self.action_space == other.action_space
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.bias, other.bias))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def policy_forward(model: PolicyModel, features: np.ndarray) -> np.ndarray:
    """softmax(W f + b)"""
    features = np.asarray(features, dtype=float)
    if features.shape[-1] != model.n_features:
        raise DimensionMismatch(model.n_features, features.shape[-1])
    return softmax(features @ model.weights.T + model.bias)


def sample_index(probs: np.ndarray, rng: random.Random) -> int:
    """Inverse-CDF draw from a discrete distribution"""
    threshold = rng.random()
    cumulative = np.cumsum(probs)
    index = int(np.searchsorted(cumulative, threshold * cumulative[-1], side='right'))
    return min(index, len(probs) - 1)


def choose_action(model: PolicyModel, state: GameState, rng: random.Random, rules=None,
                  argmax: bool = False) -> Action:
    """Argmax or sampled action from the (optionally rule-shaped) policy distribution"""
    probs = policy_forward(model, featurize(state.current_obs, state.keys))
    if rules:
        probs = apply_rules(state, probs, rules, model.action_space)
    index = int(np.argmax(probs)) if argmax else sample_index(probs, rng)
    return model.action_space[index]


def action_index(model: PolicyModel, action: Action) -> Optional[int]:
    try:
        return model.action_space.index(Action(action))
    except ValueError:
        return None
