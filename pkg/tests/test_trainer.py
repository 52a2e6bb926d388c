import math

import numpy as np
import pytest

from backend.policy import PolicyModel, feature_size, policy_forward
from backend.trainer import (
    BCTrainer, Standardizer, bc_train, build_pairs, cross_entropy, cross_entropy_grad, curvature,
    get_trainer, gradient_check,
)
from shared.constants import Action, CellKind, GLYPHS, Hunger, MOVES, MOVE_DELTAS
from shared.exceptions import ActionOutOfSpace, EmptyDataset, MissingKeys, UnknownTrainer
from shared.models import BlStats, TrainConfig, TrajectoryRecord, TrajectoryStep

CENTER = (3, 3)


def fields_with_stairs(move):
    """7x7 floor with the agent in the middle and the stairs one step in the move's direction"""
    glyphs = np.full((7, 7), int(CellKind.FLOOR))
    glyphs[CENTER] = GLYPHS['AGENT']
    dr, dc = MOVE_DELTAS[move]
    glyphs[CENTER[0] + dr, CENTER[1] + dc] = int(CellKind.STAIRS_DOWN)
    stats = BlStats(hp=20, max_hp=20, hunger=Hunger.NOT_HUNGRY, depth=1, gold=0, turn=0, score=0,
                    pos=CENTER)
    return {'blstats': stats.to_vector(), 'glyphs': glyphs.tolist()}


def trajectory(pairs, episode_id=0):
    traj = TrajectoryRecord(episode_id=episode_id, seed=0, keys=('blstats', 'glyphs'))
    for fields, action in pairs:
        traj.steps.append(TrajectoryStep(fields=fields, action=action))
    return traj


def test_empty_dataset():
    with pytest.raises(EmptyDataset):
        bc_train([], TrainConfig())
    with pytest.raises(EmptyDataset):
        bc_train([trajectory([])], TrainConfig())


def test_action_outside_the_space():
    with pytest.raises(ActionOutOfSpace):
        bc_train([trajectory([(fields_with_stairs(Action.N), Action.SEARCH)])], TrainConfig())


def test_steps_need_map_and_stats():
    traj = TrajectoryRecord(episode_id=0, seed=0, keys=('message',),
                            steps=[TrajectoryStep(fields={'message': ''}, action=Action.N)])
    with pytest.raises(MissingKeys):
        bc_train([traj], TrainConfig())


def test_untrained_loss_is_log_of_action_count():
    dataset = [trajectory([(fields_with_stairs(Action.E), Action.E)] * 10)]
    result = bc_train(dataset, TrainConfig(epochs=1))

    assert math.isclose(result.initial_loss, math.log(8), abs_tol=1e-12)
    assert result.losses[0] < result.initial_loss


def test_single_pair_is_learned():
    fields = fields_with_stairs(Action.SW)
    result = bc_train([trajectory([(fields, Action.SW)])], TrainConfig(epochs=5, learning_rate=0.5))
    features, _ = build_pairs([trajectory([(fields, Action.SW)])])

    probs = policy_forward(result.model, features[0])
    assert MOVES[int(np.argmax(probs))] == Action.SW
    assert len(result.losses) == 5


def test_separable_data_is_fit():
    pairs = [(fields_with_stairs(move), move) for move in MOVES] * 4
    dataset = [trajectory(pairs[i::3], episode_id=i) for i in range(3)]
    result = bc_train(dataset, TrainConfig(epochs=50, batch_size=8, learning_rate=0.5, seed=3))

    features, labels = build_pairs(dataset)
    predicted = np.argmax(policy_forward(result.model, features), axis=1)
    assert np.mean(predicted == labels) >= 0.99


def test_rare_cues_beat_the_majority_move():
    pairs = [(fields_with_stairs(Action.N), Action.N)] * 40
    pairs += [(fields_with_stairs(move), move) for move in MOVES if move != Action.N]
    result = bc_train([trajectory(pairs)], TrainConfig(epochs=5, seed=0))

    for move in MOVES:
        features, _ = build_pairs([trajectory([(fields_with_stairs(move), move)])])
        assert MOVES[int(np.argmax(policy_forward(result.model, features[0])))] == move


def test_standardized_model_keeps_raw_logits():
    rng = np.random.default_rng(4)
    features = rng.integers(0, 2, size=(20, 6)).astype(float)
    features[:, 2] = 1.0
    scaler = Standardizer.fit(features)
    model = PolicyModel(rng.normal(size=(8, 6)), rng.normal(size=8))

    standard = scaler.to_standard(model)
    assert np.allclose(scaler.transform(features) @ standard.weights.T + standard.bias,
                       features @ model.weights.T + model.bias)
    back = scaler.to_raw(standard)
    assert np.allclose(back.weights, model.weights)
    assert np.allclose(back.bias, model.bias)


def test_curvature_is_the_top_eigenvalue():
    rng = np.random.default_rng(5)
    features = rng.normal(size=(50, 4))
    expected = np.linalg.eigvalsh(features.T @ features / 50).max()

    assert math.isclose(curvature(features, iterations=200), expected, rel_tol=1e-4)
    assert curvature(np.zeros((3, 4))) == 0.0


def test_scheduler_decays_geometrically():
    config = TrainConfig(epochs=4, learning_rate=0.4, scheduler_gamma=0.5)
    result = bc_train([trajectory([(fields_with_stairs(Action.N), Action.N)])], config)

    assert result.learning_rates == [0.4, 0.2, 0.1, 0.05]
    assert [config.learning_rate_at(e) for e in range(1, 5)] == [0.4 * 0.5 ** (e - 1) for e in range(1, 5)]


def test_training_is_deterministic_for_a_seed():
    pairs = [(fields_with_stairs(move), move) for move in MOVES] * 2
    config = TrainConfig(epochs=3, batch_size=4, seed=11)

    first = bc_train([trajectory(pairs)], config)
    second = bc_train([trajectory(pairs)], config)

    assert first.model == second.model
    assert first.losses == second.losses


def test_recollect_rounds_grow_the_dataset():
    rounds = []

    def recollect(model, round_no):
        rounds.append(round_no)
        return [trajectory([(fields_with_stairs(Action.S), Action.S)], episode_id=round_no)]

    trainer = BCTrainer(recollect=recollect, rounds=3)
    result = trainer.train([trajectory([(fields_with_stairs(Action.N), Action.N)])],
                           TrainConfig(epochs=2))

    assert rounds == [2, 3]
    assert len(result.losses) == 6


@pytest.mark.parametrize('config', [dict(epochs=0), dict(batch_size=0), dict(learning_rate=0),
                                    dict(scheduler_gamma=0), dict(scheduler_gamma=1.5)])
def test_train_config_bounds(config):
    with pytest.raises(ValueError):
        TrainConfig(**config)


def test_trainer_lookup():
    assert isinstance(get_trainer('bc'), BCTrainer)
    with pytest.raises(UnknownTrainer):
        get_trainer('dagger')


def test_gradient_check_on_zero_model():
    rng = np.random.default_rng(0)
    features = rng.uniform(0.1, 1.0, size=feature_size())
    assert gradient_check(PolicyModel.zeros(), features, Action.E) < 1e-5


def test_gradient_check_on_random_models():
    rng = np.random.default_rng(1)
    for trial in range(100):
        model = PolicyModel(rng.normal(scale=0.3, size=(8, 10)), rng.normal(scale=0.3, size=8))
        features = rng.uniform(0.1, 1.0, size=10)
        target = MOVES[trial % 8]
        assert gradient_check(model, features, target) < 1e-4


def test_bias_gradient_is_probability_minus_one():
    rng = np.random.default_rng(2)
    model = PolicyModel(rng.normal(size=(8, 6)), rng.normal(size=8))
    features = rng.uniform(size=(1, 6))
    _, grad_b = cross_entropy_grad(model, features, np.array([3]))
    probs = policy_forward(model, features[0])

    assert math.isclose(grad_b[3], probs[3] - 1, abs_tol=1e-12)
    assert math.isclose(cross_entropy(model, features, np.array([3])), -math.log(probs[3]),
                        rel_tol=1e-9)
