"""End-to-end checks over many seeded episodes; run with `pytest -m slow`"""

import io
import itertools
import math
import random
import statistics

import pytest

from backend.app import parse_args
from backend.dungeon_walker import astar, dijkstra, edge_cost, octile, path_cost
from backend.evaluation import EpsilonGreedyPolicy, evaluate, evaluate_policy, random_walk_baseline
from backend.rules import default_rules
from backend.runner import run_dataset, run_inference
from backend.skill_core import run_episode
from backend.skills import build_default_registry
from backend.trainer import bc_train
from backend.trajectory import TrajectoryRecorder, new_trajectory
from shared.constants import OBSERVATION_KEYS, TaskKind
from shared.models import RunConfig, TaskSpec, TrainConfig
from storage import trajectory_store

pytestmark = pytest.mark.slow

FULL_STACK = ["Pray", "Eat", "Elbereth", "Run", "Break", "Fight", "Gold", "StairsDescend",
              "StairsAscend", "ExploreClosest", "Horizon", "Unseen", "HiddenRoom", "HiddenCorridor"]
HELD_OUT_SEED = 10_000
EXPERT_EPISODES = 1000


def test_astar_is_optimal_on_random_maps():
    solved = 0
    for seed in range(200):
        rng = random.Random(seed)
        blocked = {(r, c) for r in range(30) for c in range(30) if rng.random() < 0.3}
        free = [(r, c) for r in range(30) for c in range(30) if (r, c) not in blocked]
        start, goal = rng.sample(free, 2)

        def walkable(cell):
            return 0 <= cell[0] < 30 and 0 <= cell[1] < 30 and cell not in blocked

        path = astar(walkable, start, goal)
        distances, _ = dijkstra(walkable, start)
        if goal not in distances:
            assert path is None
            continue
        solved += 1
        assert path.cost == path_cost(path.steps)
        assert math.isclose(path.cost, distances[goal], abs_tol=1e-9)
    assert solved > 0


def test_octile_consistency_on_random_triples():
    rng = random.Random(7)
    violations = 0
    for _ in range(10_000):
        u = (rng.randint(0, 60), rng.randint(0, 60))
        goal = (rng.randint(0, 60), rng.randint(0, 60))
        dr, dc = rng.choice([(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)])
        v = (u[0] + dr, u[1] + dc)
        violations += octile(u, goal) > edge_cost(u, v) + octile(v, goal) + 1e-9
    assert violations == 0


def test_cloned_policy_solves_held_out_rooms():
    registry = build_default_registry()
    task = TaskSpec(TaskKind.ROOM_5X5, max_steps=99)
    dataset = []
    for seed in range(EXPERT_EPISODES):
        traj = new_trajectory(seed, seed, ('blstats', 'glyphs'))
        run_episode(task.with_seed(seed), ['ExploreClosest', 'Unseen'], task.max_steps, registry,
                    observers=[TrajectoryRecorder(traj)])
        dataset.append(traj)

    model = bc_train(dataset, TrainConfig(epochs=5, batch_size=16, learning_rate=1.0, seed=0)).model
    held_out = task.with_seed(HELD_OUT_SEED)
    cloned = evaluate(model, held_out, 100)
    baseline = random_walk_baseline(held_out, 100)

    assert cloned.successes >= 95
    assert cloned.successes > baseline.successes


def test_rules_help_a_mediocre_policy():
    task = TaskSpec(TaskKind.KEY_ROOM_S5, max_steps=150)
    policy = EpsilonGreedyPolicy(0.3)

    plain = evaluate_policy(policy, task, 500)
    ruled = evaluate_policy(policy, task, 500, rules=default_rules(2.0))

    print(f"success without rules {plain.success_rate:.3f}, with rules {ruled.success_rate:.3f}")
    assert ruled.success_rate > plain.success_rate


def test_skill_stack_beats_random_walk_on_the_full_game():
    task = TaskSpec(TaskKind.FULL_GAME, max_steps=5000, levels=5)
    registry = build_default_registry()
    stack = [run_episode(task.with_seed(seed), FULL_STACK, task.max_steps, registry) for seed in range(100)]
    walk = [run_episode(task.with_seed(seed), ['RandomWalk'], task.max_steps, registry) for seed in range(100)]

    stack_median = statistics.median(stats.score for stats in stack)
    walk_median = statistics.median(stats.score for stats in walk)
    assert stack_median >= 5 * walk_median
    assert stack_median > 0
    assert statistics.median(stats.max_depth for stats in stack) >= 2


def test_runs_are_reproducible(tmp_path):
    run_config = RunConfig(FULL_STACK, fast_mode=True, attempts=3)
    reports = []
    for _ in range(2):
        out = io.StringIO()
        args = parse_args(['--inference', '--max_steps', '800', '--seed', '5'])
        summary = run_inference(run_config, args, out)
        reports.append((summary, out.getvalue()))
    assert reports[0] == reports[1]

    files = []
    for name in ('first', 'second'):
        args = parse_args(['--create_dataset', '--max_steps', '800', '--seed', '5',
                           '--filename', str(tmp_path / name / 'run.trj'),
                           '--keys_to_save', *OBSERVATION_KEYS])
        files.append([(tmp_path / name / f"run_{i}.trj").read_bytes()
                      for i, _ in enumerate(run_dataset(run_config, args))])
    assert files[0] == files[1]


def test_trajectory_round_trips_for_every_key_set():
    key_sets = [keys for size in range(1, len(OBSERVATION_KEYS) + 1)
                for keys in itertools.combinations(OBSERVATION_KEYS, size)]
    registry = build_default_registry()
    priorities = ['Fight', 'Gold', 'StairsDescend', 'ExploreClosest', 'Unseen', 'RandomWalk']
    task = TaskSpec(TaskKind.FULL_GAME, max_steps=200, levels=3)

    for episode in range(50):
        keys = key_sets[episode % len(key_sets)]
        traj = new_trajectory(episode, episode, keys)
        stats = run_episode(task.with_seed(episode), priorities, task.max_steps, registry,
                            observers=[TrajectoryRecorder(traj)])

        text = trajectory_store.dumps(traj)
        assert trajectory_store.dumps(trajectory_store.loads_lines(text.splitlines())) == text
        assert len(traj) == stats.turns
