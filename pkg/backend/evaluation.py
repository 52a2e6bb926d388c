"""
Policy evaluation on seeded task batches, plus baseline policies
"""

import logging
import statistics
from typing import Optional, Sequence

import numpy as np

from backend.dungeon_walker import octile
from backend.game_whisperer import GameState, refine
from backend.policy import PolicyModel, featurize, policy_forward, sample_index
from backend.rogue_env import RogueEnv
from backend.rules import Rule, apply_rules
from backend.skill_core import SkillRegistry, run_episode
from backend.skills import PolicySkill, SkillParams
from shared.constants import Action, CellKind, DOOR_CELLS, EndReason, MOVES, MOVE_DELTAS
from shared.models import EvaluationResult, Position, TaskSpec
from shared.seeding import rng_stream

logger = logging.getLogger(__name__)


class Policy:
    """Anything that maps a game state to a distribution over its action space"""
    action_space: Sequence[Action] = MOVES

    def distribution(self, state: GameState) -> np.ndarray:
        raise NotImplementedError


class ModelPolicy(Policy):
    def __init__(self, model: PolicyModel):
        self.model = model
        self.action_space = model.action_space

    def distribution(self, state: GameState) -> np.ndarray:
        return policy_forward(self.model, featurize(state.current_obs, state.keys))


class UniformPolicy(Policy):
    def distribution(self, state: GameState) -> np.ndarray:
        return np.full(len(self.action_space), 1.0 / len(self.action_space))


class EpsilonGreedyPolicy(Policy):
    """Heads for the nearest visible staircase (else door) with probability 1 - epsilon"""

    def __init__(self, epsilon: float = 0.3):
        if not 0 <= epsilon <= 1:
            raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
        self.epsilon = epsilon

    @staticmethod
    def target(state: GameState) -> Optional[Position]:
        visible = state.visible_mask()
        for kinds in ((CellKind.STAIRS_DOWN,), tuple(DOOR_CELLS)):
            cells = [(int(r), int(c)) for r, c in np.argwhere(
                visible & np.isin(state.known_map, [int(k) for k in kinds]))]
            if cells:
                return min(cells, key=lambda cell: (round(octile(state.position, cell), 9), cell))
        return None

    def distribution(self, state: GameState) -> np.ndarray:
        size = len(self.action_space)
        probs = np.full(size, self.epsilon / size)
        goal = self.target(state)
        if goal is None:
            return np.full(size, 1.0 / size)
        best, best_distance = 0, None
        for i, move in enumerate(self.action_space):
            dr, dc = MOVE_DELTAS[move]
            distance = octile((state.position[0] + dr, state.position[1] + dc), goal)
            if best_distance is None or distance < best_distance - 1e-9:
                best, best_distance = i, distance
        probs[best] += 1.0 - self.epsilon
        return probs


def evaluate_policy(policy: Policy, task: TaskSpec, n: int, rules: Optional[Sequence[Rule]] = None,
                    argmax: bool = False) -> EvaluationResult:
    """Run n episodes on seeds task.seed .. task.seed + n - 1"""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    successes, steps, scores = 0, [], []
    env = RogueEnv()
    for offset in range(n):
        episode = task.with_seed(task.seed + offset)
        rng = rng_stream(episode.seed, 'agent')
        state = refine(GameState.empty(), env.reset(episode))
        while not env.done:
            probs = policy.distribution(state)
            if rules:
                probs = apply_rules(state, probs, rules, policy.action_space)
            index = int(np.argmax(probs)) if argmax else sample_index(probs, rng)
            action = policy.action_space[index]
            result = env.step(action)
            state = refine(state, result.observation, action)
        successes += env.reason == EndReason.GOAL
        steps.append(env.turn)
        scores.append(env.score)

    result = EvaluationResult(success_rate=successes / n, mean_steps=statistics.fmean(steps),
                              mean_score=statistics.fmean(scores), successes=successes, episodes=n)
    logger.info(f"Evaluated {n} episodes on {task.kind.value}: success_rate={result.success_rate:.3f}")
    return result


def evaluate(model: PolicyModel, task: TaskSpec, n: int, rules: Optional[Sequence[Rule]] = None,
             mode: str = 'argmax', skill_name: str = 'BCWalk') -> EvaluationResult:
    """Play n seeded episodes with the model driving the policy skill alone"""
    if mode not in ('argmax', 'sample'):
        raise ValueError(f"mode must be 'argmax' or 'sample', got {mode!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    skill = PolicySkill(skill_name, SkillParams(), model=model, rules=rules, argmax=mode == 'argmax')
    registry = SkillRegistry([skill])
    episodes = [run_episode(task.with_seed(task.seed + offset), [skill_name], task.max_steps, registry)
                for offset in range(n)]
    successes = sum(1 for stats in episodes if stats.end_reason == EndReason.GOAL)
    return EvaluationResult(success_rate=successes / n,
                            mean_steps=statistics.fmean(stats.turns for stats in episodes),
                            mean_score=statistics.fmean(stats.score for stats in episodes),
                            successes=successes, episodes=n)


def random_walk_baseline(task: TaskSpec, n: int) -> EvaluationResult:
    return evaluate_policy(UniformPolicy(), task, n)
