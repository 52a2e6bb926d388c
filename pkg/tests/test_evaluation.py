import numpy as np
import pytest

from backend.evaluation import (
    EpsilonGreedyPolicy, ModelPolicy, UniformPolicy, evaluate, evaluate_policy,
    random_walk_baseline,
)
from backend.game_whisperer import GameState, refine
from backend.policy import PolicyModel, feature_size
from backend.rogue_env import RogueEnv
from shared.constants import MOVES, TaskKind
from shared.models import TaskSpec

ROOM_TASK = TaskSpec(TaskKind.ROOM_5X5, max_steps=99, seed=0)


def random_model(seed=0):
    rng = np.random.default_rng(seed)
    return PolicyModel(rng.normal(scale=0.1, size=(8, feature_size())), np.zeros(8))


def test_greedy_policy_solves_the_room():
    result = evaluate_policy(EpsilonGreedyPolicy(0.0), ROOM_TASK, 20, argmax=True)

    assert result.success_rate == 1.0
    assert result.successes == result.episodes == 20
    assert result.mean_steps <= 4


@pytest.mark.slow
def test_random_walk_fails_sometimes():
    result = random_walk_baseline(ROOM_TASK, 100)
    assert 0.0 < result.success_rate < 1.0


def test_argmax_evaluation_is_deterministic():
    model = random_model()
    first = evaluate(model, ROOM_TASK, 3)
    second = evaluate(model, ROOM_TASK, 3)

    assert first == second
    assert first.episodes == 3


def test_sampled_evaluation_is_repeatable_per_seed():
    model = random_model(1)
    assert evaluate(model, ROOM_TASK, 2, mode='sample') == evaluate(model, ROOM_TASK, 2, mode='sample')


def test_evaluation_arguments():
    with pytest.raises(ValueError):
        evaluate(random_model(), ROOM_TASK, 0)
    with pytest.raises(ValueError):
        evaluate(random_model(), ROOM_TASK, 1, mode='greedy')
    with pytest.raises(ValueError):
        evaluate_policy(UniformPolicy(), ROOM_TASK, 0)
    with pytest.raises(ValueError):
        EpsilonGreedyPolicy(1.5)


def test_policies_produce_distributions(room_task):
    state = refine(GameState.empty(), RogueEnv().reset(room_task))
    for policy in (UniformPolicy(), EpsilonGreedyPolicy(0.3), ModelPolicy(random_model())):
        probs = policy.distribution(state)
        assert probs.shape == (8,)
        assert abs(probs.sum() - 1) < 1e-9


def test_greedy_policy_points_at_the_stairs(room_task):
    env = RogueEnv()
    state = refine(GameState.empty(), env.reset(room_task))
    policy = EpsilonGreedyPolicy(0.2)
    probs = policy.distribution(state)
    best = MOVES[int(np.argmax(probs))]

    assert EpsilonGreedyPolicy.target(state) == env.level.stairs_down
    assert np.isclose(probs.max(), 0.8 + 0.2 / 8)
    assert env.step(best).observation.blstats.turn == 1
