"""
The three run modes: play (inference), record trajectories (dataset) and train
"""

import glob
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, TextIO

from backend import config
from backend.config_parser import skill_params_of
from backend.game_whisperer import GameState
from backend.renderer import render_ascii
from backend.reporter import fast_mode_report, summarize
from backend.rules import default_rules
from backend.skill_core import SkillRegistry, run_episode
from backend.skills import PolicySkill, build_default_registry
from backend.trainer import get_trainer
from backend.trajectory import TrajectoryRecorder, new_trajectory, normalize_keys
from shared.constants import OBSERVATION_KEYS, TaskKind
from shared.exceptions import InvalidValue, StorageError
from shared.models import EpisodeStats, InferenceSummary, LiveStats, RunConfig, TaskSpec, TrainConfig
from storage import checkpoint_store, trajectory_store

logger = logging.getLogger(__name__)

POLICY_SKILLS = ('NeuralWalk', 'BCWalk')


def build_task(args) -> TaskSpec:
    """TaskSpec from --task, --max_steps, --levels and --seed"""
    kind = TaskKind(args.task)
    max_steps = args.max_steps or config.MAX_STEPS[kind.value]
    if kind == TaskKind.FULL_GAME:
        levels = args.levels or config.FULL_GAME_LEVELS
    else:
        levels = 1
    return TaskSpec(kind=kind, max_steps=max_steps, seed=args.seed, levels=levels,
                    ascend=bool(getattr(args, 'ascend', False)))


def observation_keys(args) -> tuple:
    return normalize_keys(args.observation_keys or OBSERVATION_KEYS)


def build_registry(run_config: RunConfig, checkpoint: Optional[str] = None,
                   argmax: bool = False) -> SkillRegistry:
    """Catalog with the config's skill_params; policy skills get the checkpoint when one is given"""
    registry = build_default_registry(skill_params_of(run_config))
    wanted = [name for name in POLICY_SKILLS if name in run_config.skill_priority_list]
    if wanted and checkpoint and os.path.exists(checkpoint):
        model = checkpoint_store.load(checkpoint)
        for name in wanted:
            skill: PolicySkill = registry.resolve(name)
            skill.attach(model, rules=default_rules() if name == 'NeuralWalk' else None, argmax=argmax)
        logger.info(f"Loaded policy checkpoint {checkpoint} for {', '.join(wanted)}")
    elif wanted:
        logger.warning(f"No checkpoint available, {', '.join(wanted)} will never plan")
    return registry


def warn_unplannable(registry: SkillRegistry, priorities: Sequence[str], keys: Sequence[str]) -> List[str]:
    """Skills that can never plan with the given observation keys"""
    blank = GameState.empty(keys)
    blocked = [name for name in priorities if not registry.resolve(name).available(blank)]
    if blocked:
        logger.warning(f"Observation keys {list(keys)} leave these skills unplannable: {', '.join(blocked)}")
    return blocked


class TurnPrinter:
    """Step observer writing the map each turn, or the fast-mode report line"""

    def __init__(self, out: TextIO, fast_mode: bool, history: List[EpisodeStats]):
        self.out = out
        self.fast_mode = fast_mode
        self.history = history

    def __call__(self, state, action, payload, result, consumed):
        stats = result.observation.blstats
        if self.fast_mode:
            self.out.write('\r' + fast_mode_report(self.history, LiveStats(stats.score, stats.turn)))
        else:
            self.out.write(render_ascii(result.observation) + '\n\n')
        self.out.flush()


def _play_one(task: TaskSpec, run_config: RunConfig, keys: tuple, checkpoint: Optional[str],
              argmax: bool) -> EpisodeStats:
    """Process-pool worker: rebuilds its own registry"""
    registry = build_registry(run_config, checkpoint, argmax)
    return run_episode(task, run_config.skill_priority_list, task.max_steps, registry, keys)


def run_inference(run_config: RunConfig, args, out: TextIO = sys.stdout) -> InferenceSummary:
    task = build_task(args)
    keys = observation_keys(args)
    registry = build_registry(run_config, args.checkpoint, args.argmax)
    warn_unplannable(registry, run_config.skill_priority_list, keys)
    tasks = [task.with_seed(task.seed + i) for i in range(run_config.attempts)]

    parallel = max(1, getattr(args, 'parallel', 1) or 1)
    if parallel > 1:
        logger.info(f"Playing {len(tasks)} episodes on {parallel} processes")
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(_play_one, t, run_config, keys, args.checkpoint, args.argmax)
                       for t in tasks]
            history = [future.result() for future in futures]
        if run_config.fast_mode:
            last = history[-1]
            out.write('\r' + fast_mode_report(history, LiveStats(last.score, last.turns)) + '\n')
    else:
        history: List[EpisodeStats] = []
        printer = TurnPrinter(out, run_config.fast_mode, history)
        for episode in tasks:
            history.append(run_episode(episode, run_config.skill_priority_list, episode.max_steps,
                                       registry, keys, observers=[printer]))
        if run_config.fast_mode:
            out.write('\n')

    summary = summarize(history)
    logger.info(f"Played {len(history)} episodes: mean={summary.mean_score:.2f} "
                f"median={summary.median_score:.2f}")
    return summary


def episode_path(filename: str, index: int) -> str:
    """'runs/expert.trj', 3 -> 'runs/expert_3.trj'"""
    stem, suffix = os.path.splitext(filename)
    return f"{stem}_{index}{suffix}"


def run_dataset(run_config: RunConfig, args) -> List[str]:
    """Play attempts episodes and save one trajectory file per episode"""
    if not args.filename:
        raise InvalidValue('filename', 'required with --create_dataset')
    save_keys = list(args.keys_to_save or [])
    if args.language_mode:
        save_keys.append('language')
    save_keys = normalize_keys(save_keys)

    task = build_task(args)
    keys = observation_keys(args)
    registry = build_registry(run_config, args.checkpoint, args.argmax)
    warn_unplannable(registry, run_config.skill_priority_list, keys)

    paths = []
    for i in range(run_config.attempts):
        episode = task.with_seed(task.seed + i)
        traj = new_trajectory(i, episode.seed, save_keys)
        stats = run_episode(episode, run_config.skill_priority_list, episode.max_steps, registry, keys,
                            observers=[TrajectoryRecorder(traj)])
        path = episode_path(args.filename, i)
        trajectory_store.save(traj, path)
        logger.info(f"Episode {i}: {len(traj)} steps, score={stats.score}, saved to {path}")
        paths.append(path)
    return paths


def dataset_files(pattern: str) -> List[str]:
    """A file, every file in a directory, or a glob pattern"""
    if os.path.isfile(pattern):
        return [pattern]
    if os.path.isdir(pattern):
        files = sorted(os.path.join(pattern, name) for name in os.listdir(pattern)
                       if os.path.isfile(os.path.join(pattern, name)))
    else:
        files = sorted(glob.glob(pattern))
    if not files:
        raise StorageError(f"No trajectory files found at {pattern}")
    return files


def run_training(run_config: Optional[RunConfig], args, out: TextIO = sys.stdout) -> str:
    """Train the --training_alg policy on --dataset and write the checkpoint; run_config is not consulted"""
    if not args.dataset:
        raise InvalidValue('dataset', 'required with --training')
    if args.cuda:
        logger.warning("CUDA requested but this trainer is CPU-only, training on CPU")

    trainer = get_trainer(args.training_alg)
    dataset = [trajectory_store.load(path) for path in dataset_files(args.dataset)]
    train_config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                               learning_rate=args.learning_rate, scheduler_gamma=args.scheduler_gamma,
                               seed=args.seed)
    logger.info(f"Training {args.training_alg} on {len(dataset)} trajectories")
    result = trainer.train(dataset, train_config)
    for epoch, loss in enumerate(result.losses, start=1):
        out.write(f"Epoch {epoch}: loss {loss:.6f}\n")

    path = args.checkpoint or config.DEFAULT_CHECKPOINT_PATH
    checkpoint_store.save(result.model, path)
    return path
