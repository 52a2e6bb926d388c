"""
Symbolic rules that mask or boost the action distribution of a policy
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from backend.config import RULE_BOOST
from backend.dungeon_walker import octile
from backend.game_whisperer import GameState, find_entities
from shared.constants import Action, CellKind, EntityKind, MOVE_DELTAS
from shared.models import Position

logger = logging.getLogger(__name__)

Condition = Callable[[GameState, Action], bool]


class RuleEffect(str, Enum):
    MASK = 'mask'
    BOOST = 'boost'


@dataclass(frozen=True)
class Rule:
    name: str
    condition: Condition
    effect: RuleEffect
    beta: float = RULE_BOOST

    def __post_init__(self):
        if self.effect == RuleEffect.BOOST and not (np.isfinite(self.beta) and self.beta > 1):
            raise ValueError(f"Boost factor must be finite and > 1, got {self.beta}")


def _target(state: GameState, action: Action) -> Optional[Position]:
    if action not in MOVE_DELTAS or state.position is None:
        return None
    dr, dc = MOVE_DELTAS[action]
    return state.position[0] + dr, state.position[1] + dc


def hits_stone(state: GameState, action: Action) -> bool:
    """Move(x, y) with Stone(y) and AreClose(x, y): walking into rock or wall"""
    cell = _target(state, action)
    if cell is None:
        return False
    if not state.in_bounds(cell):
        return True
    return state.known_map[cell] in (CellKind.STONE, CellKind.WALL)


def attacks_enemy(state: GameState, action: Action) -> bool:
    cell = _target(state, action)
    return cell is not None and cell in {e.position for e in state.hostiles}


def approaches_key(state: GameState, action: Action) -> bool:
    """Move that brings the agent closer to the nearest visible key"""
    cell = _target(state, action)
    keys = find_entities(state, EntityKind.KEY)
    if cell is None or not keys:
        return False
    before = min(octile(state.position, key) for key in keys)
    after = min(octile(cell, key) for key in keys)
    return after < before - 1e-9


def repeats_last_action(state: GameState, action: Action) -> bool:
    return state.last_action is not None and action == state.last_action


def default_rules(beta: float = RULE_BOOST) -> List[Rule]:
    return [
        Rule('do_not_hit_stone', hits_stone, RuleEffect.MASK),
        Rule('attack_enemies', attacks_enemy, RuleEffect.BOOST, beta),
        Rule('move_to_key', approaches_key, RuleEffect.BOOST, beta),
        Rule('do_not_repeat_action', repeats_last_action, RuleEffect.MASK),
    ]


def apply_rules(state: GameState, dist: Sequence[float], rules: Sequence[Rule],
                action_space: Sequence[Action]) -> np.ndarray:
    """Mask and boost in rule order, renormalize once; all-zero mass falls back to uniform"""
    probs = np.array(dist, dtype=float)
    stone = np.zeros(len(action_space), dtype=bool)
    for rule in rules:
        matches = np.array([bool(rule.condition(state, action)) for action in action_space])
        if not matches.any():
            continue
        if rule.effect == RuleEffect.MASK:
            probs[matches] = 0.0
            if rule.name == 'do_not_hit_stone':
                stone |= matches
        else:
            probs[matches] *= rule.beta

    total = probs.sum()
    if total > 0:
        return probs / total
    allowed = ~stone if (~stone).any() else np.ones(len(action_space), dtype=bool)
    logger.debug("Rules masked every action, falling back to uniform")
    return allowed / allowed.sum()
