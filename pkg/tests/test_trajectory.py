import pytest

from backend.level_generator import level_from_ascii
from backend.rogue_env import RogueEnv
from backend.skill_core import run_episode
from backend.skills import build_default_registry
from backend.trajectory import TrajectoryRecorder, new_trajectory, normalize_keys, record_step
from shared.constants import Action, TaskKind
from shared.exceptions import InvalidValue, KeyMismatch
from shared.models import TaskSpec

PRIORITIES = ['Fight', 'Gold', 'StairsDescend', 'ExploreClosest', 'Unseen', 'RandomWalk']


def first_obs():
    env = RogueEnv()
    return env.reset(TaskSpec(TaskKind.FULL_GAME, 50, levels=2),
                     level=level_from_ascii(['------', '-.@>.-', '------']))


def test_keys_are_sorted_and_deduplicated():
    assert normalize_keys(['message', 'blstats', 'message']) == ('blstats', 'message')


@pytest.mark.parametrize('keys', [[], ['pixels'], ['glyphs', 'inventory']])
def test_bad_key_sets(keys):
    with pytest.raises(InvalidValue):
        normalize_keys(keys)


def test_single_key_step():
    traj = record_step(new_trajectory(0, 0, ['blstats']), first_obs(), Action.E, ['blstats'])

    assert len(traj) == 1
    assert list(traj.steps[0].fields) == ['blstats']
    assert traj.steps[0].fields['blstats'][:2] == [1, 2]
    assert traj.steps[0].action == Action.E


def test_grid_and_language_together():
    keys = ['language', 'glyphs']
    traj = record_step(new_trajectory(0, 0, keys), first_obs(), Action.E, keys)
    fields = traj.steps[0].fields

    assert sorted(fields) == ['glyphs', 'language']
    assert len(fields['glyphs']) == 3
    assert 'a staircase down adjacent east.' in fields['language']


def test_other_keys_are_rejected():
    traj = new_trajectory(0, 0, ['blstats'])
    with pytest.raises(KeyMismatch):
        record_step(traj, first_obs(), Action.E, ['blstats', 'message'])
    assert len(traj) == 0


def test_recording_labels_every_turn(full_task):
    traj = new_trajectory(7, full_task.seed, ['blstats', 'message'])
    executed = []

    def consumed_actions(state, action, payload, result, consumed):
        if consumed:
            executed.append(action)

    stats = run_episode(full_task, PRIORITIES, 200, build_default_registry(),
                        observers=[TrajectoryRecorder(traj), consumed_actions])

    assert len(traj) == stats.turns
    assert [step.action for step in traj.steps] == executed


def test_recorded_state_precedes_the_action(full_task):
    traj = new_trajectory(0, full_task.seed, ['blstats'])
    run_episode(full_task, PRIORITIES, 50, build_default_registry(),
                observers=[TrajectoryRecorder(traj)])

    turns = [step.fields['blstats'][7] for step in traj.steps]
    assert turns == list(range(len(turns)))
