import json

import pytest

from backend.rogue_env import RogueEnv
from backend.trajectory import new_trajectory, record_step
from shared.constants import ACTION_SET, Action, OBSERVATION_KEYS, TRAJECTORY_FORMAT, TaskKind
from shared.exceptions import StorageError, TrajectoryFormatError
from shared.models import TaskSpec
from storage import trajectory_store


def recorded(n_steps, keys=('blstats', 'message'), seed=2):
    env = RogueEnv()
    obs = env.reset(TaskSpec(TaskKind.FULL_GAME, max_steps=5000, seed=seed, levels=2))
    traj = new_trajectory(1, seed, keys)
    actions = [Action.E, Action.SEARCH, Action.S, Action.W, Action.N]
    for i in range(n_steps):
        action = actions[i % len(actions)]
        record_step(traj, obs, action, traj.keys)
        if not env.done:
            obs = env.step(action).observation
    return traj


def test_three_step_round_trip(tmp_path):
    traj = recorded(3)
    path = str(tmp_path / 'episode.jsonl')
    trajectory_store.save(traj, path)

    assert trajectory_store.load(path) == traj


def test_header_and_step_lines(tmp_path):
    path = tmp_path / 'episode.jsonl'
    trajectory_store.save(recorded(2), str(path))
    lines = path.read_text().splitlines()

    header = json.loads(lines[0])
    assert header == {'format': TRAJECTORY_FORMAT, 'episode_id': 1, 'seed': 2,
                      'keys': ['blstats', 'message']}
    assert len(lines) == 3
    assert json.loads(lines[1])['action'] == 'E'
    assert lines[1].index('"blstats"') < lines[1].index('"message"')


def test_long_trajectory_saves_byte_identical(tmp_path):
    traj = recorded(1000, keys=OBSERVATION_KEYS)
    first, second = tmp_path / 'a.jsonl', tmp_path / 'b.jsonl'
    trajectory_store.save(traj, str(first))
    trajectory_store.save(trajectory_store.load(str(first)), str(second))

    assert first.read_bytes() == second.read_bytes()


def test_truncated_file_names_the_line(tmp_path):
    path = tmp_path / 'episode.jsonl'
    trajectory_store.save(recorded(3), str(path))
    text = path.read_text()
    path.write_text(text[:len(text) - 20])

    with pytest.raises(TrajectoryFormatError) as excinfo:
        trajectory_store.load(str(path))
    assert excinfo.value.line_no == 4


def test_invalid_utf8_names_the_line(tmp_path):
    path = tmp_path / 'episode.jsonl'
    trajectory_store.save(recorded(3), str(path))
    lines = path.read_bytes().splitlines(keepends=True)
    lines[1] = b'\xff\xfe' + lines[1]
    path.write_bytes(b''.join(lines))

    with pytest.raises(TrajectoryFormatError) as excinfo:
        trajectory_store.load(str(path))
    assert excinfo.value.line_no == 2


def test_wrong_format_version():
    header = json.dumps({'format': 'other-9', 'episode_id': 0, 'seed': 0, 'keys': ['message']})
    with pytest.raises(TrajectoryFormatError) as excinfo:
        trajectory_store.loads_lines([header])
    assert excinfo.value.line_no == 1


def test_empty_input():
    with pytest.raises(TrajectoryFormatError):
        trajectory_store.loads_lines([])


def test_step_keys_must_match_header():
    header = json.dumps({'format': TRAJECTORY_FORMAT, 'episode_id': 0, 'seed': 0,
                         'keys': ['message']})
    step = json.dumps({'action': 'E', 'fields': {'blstats': [0] * 10}})

    with pytest.raises(TrajectoryFormatError) as excinfo:
        trajectory_store.loads_lines([header, step])
    assert excinfo.value.line_no == 2


def test_unknown_action_name():
    header = json.dumps({'format': TRAJECTORY_FORMAT, 'episode_id': 0, 'seed': 0,
                         'keys': ['message']})
    step = json.dumps({'action': 'FLY', 'fields': {'message': ''}})

    with pytest.raises(TrajectoryFormatError):
        trajectory_store.loads_lines([header, step])


def test_missing_file_is_a_storage_error(tmp_path):
    with pytest.raises(StorageError):
        trajectory_store.load(str(tmp_path / 'missing.jsonl'))


def test_every_action_survives_the_file(tmp_path):
    env = RogueEnv()
    obs = env.reset(TaskSpec(TaskKind.FULL_GAME, max_steps=50, levels=2))
    traj = new_trajectory(0, 0, ['message'])
    for action in sorted(ACTION_SET):
        record_step(traj, obs, action, traj.keys)
    path = str(tmp_path / 'actions.jsonl')
    trajectory_store.save(traj, path)

    assert [step.action for step in trajectory_store.load(path).steps] == sorted(ACTION_SET)
