from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from backend.game_whisperer import GameState, refine
from backend.level_generator import level_from_ascii
from backend.rogue_env import RogueEnv
from backend.rules import (
    Rule, RuleEffect, apply_rules, approaches_key, attacks_enemy, default_rules, hits_stone,
    repeats_last_action,
)
from shared.constants import Action, MOVES, TaskKind
from shared.models import TaskSpec

FOUR = (Action.N, Action.E, Action.S, Action.W)


def state_of(rows, last_action=None):
    env = RogueEnv()
    state = refine(GameState.empty(), env.reset(TaskSpec(TaskKind.FULL_GAME, 50, levels=2),
                                                level=level_from_ascii(rows)))
    return replace(state, last_action=last_action)


ROOM = state_of(['-----', '-...-', '-.@.-', '-...-', '-----'])


def only(action):
    return lambda state, candidate: candidate == action


def test_mask_renormalizes():
    rules = [Rule('no_north', only(Action.N), RuleEffect.MASK)]
    probs = apply_rules(ROOM, np.full(4, 0.25), rules, FOUR)
    assert np.allclose(probs, [0, 1 / 3, 1 / 3, 1 / 3])


def test_boost_renormalizes():
    rules = [Rule('go_north', only(Action.N), RuleEffect.BOOST, 2.0)]
    probs = apply_rules(ROOM, np.full(4, 0.25), rules, FOUR)
    assert np.allclose(probs, [2 / 5, 1 / 5, 1 / 5, 1 / 5])


def test_boost_factor_must_exceed_one():
    with pytest.raises(ValueError):
        Rule('flat', only(Action.N), RuleEffect.BOOST, 1.0)
    with pytest.raises(ValueError):
        Rule('huge', only(Action.N), RuleEffect.BOOST, float('inf'))


def test_default_rules_in_a_tight_spot():
    state = state_of(['-----', '-.`.-', '-.@j-', '-...-', '-----'], last_action=Action.W)
    probs = dict(zip(MOVES, apply_rules(state, np.full(8, 1 / 8), default_rules(), MOVES)))

    assert probs[Action.N] == 0
    assert probs[Action.W] == 0
    assert np.isclose(probs[Action.E], 2 / 7)
    for move in (Action.NE, Action.SE, Action.S, Action.SW, Action.NW):
        assert np.isclose(probs[move], 1 / 7)


def test_predicates():
    state = state_of(['------', '-.`..-', '-.@j.-', '-..(.-', '------'], last_action=Action.S)

    assert hits_stone(state, Action.N)
    assert not hits_stone(state, Action.S)
    assert not hits_stone(state, Action.SEARCH)
    assert attacks_enemy(state, Action.E)
    assert not attacks_enemy(state, Action.W)
    assert approaches_key(state, Action.SE)
    assert approaches_key(state, Action.S)
    assert not approaches_key(state, Action.W)
    assert repeats_last_action(state, Action.S)
    assert not repeats_last_action(state, Action.N)


def test_everything_masked_falls_back_to_non_stone_moves():
    state = state_of(['-----', '-.@.-', '-----'], last_action=Action.E)
    rules = default_rules() + [Rule('no_west', only(Action.W), RuleEffect.MASK)]
    probs = dict(zip(MOVES, apply_rules(state, np.full(8, 1 / 8), rules, MOVES)))

    assert probs[Action.E] == probs[Action.W] == 0.5
    assert sum(probs.values()) == 1


def test_boxed_in_falls_back_to_uniform():
    state = state_of(['---', '-@-', '---'])
    probs = apply_rules(state, np.full(8, 1 / 8), default_rules(), MOVES)
    assert np.allclose(probs, 1 / 8)


distributions = st.lists(st.floats(0.01, 1.0), min_size=8, max_size=8)


@given(raw=distributions, beta=st.floats(1.01, 100.0))
def test_boost_keeps_a_unique_argmax(raw, beta):
    dist = np.array(raw) / np.sum(raw)
    best = int(np.argmax(dist))
    if np.sum(dist == dist[best]) > 1:
        return
    rules = [Rule('favor', only(MOVES[best]), RuleEffect.BOOST, beta)]

    assert int(np.argmax(apply_rules(ROOM, dist, rules, MOVES))) == best


@given(raw=distributions, masked=st.sets(st.sampled_from(MOVES), min_size=1, max_size=7))
def test_masked_actions_get_nothing(raw, masked):
    dist = np.array(raw) / np.sum(raw)
    rules = [Rule('drop', lambda state, action: action in masked, RuleEffect.MASK)]
    probs = apply_rules(ROOM, dist, rules, MOVES)

    assert abs(probs.sum() - 1) < 1e-9
    for action, p in zip(MOVES, probs):
        if action in masked:
            assert p == 0
