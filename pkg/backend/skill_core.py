import logging
import random
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from backend.config import (
    FALLBACK_LIMIT, FALLBACK_SEARCHES, INTERRUPT_HP_DROP, MAX_PLAN_ACTIONS, SEARCH_CAP,
)
from backend.dungeon_walker import chebyshev
from backend.game_whisperer import GameState, expand_atomic, refine
from backend.rogue_env import RogueEnv
from shared.constants import (
    Action, CellKind, DELTA_TO_MOVE, EndReason, EntityKind, MOVES, MOVE_DELTAS, OBSERVATION_KEYS,
    OutcomeStatus, WALKABLE_CELLS,
)
from shared.exceptions import DuplicateName, UnknownSkill
from shared.models import EpisodeStats, LevelMap, Outcome, Plan, StepResult, TaskSpec
from shared.seeding import rng_stream

logger = logging.getLogger(__name__)

# observer(state_before, action, payload, result, turn_consumed)
StepObserver = Callable[[GameState, Action, Optional[str], StepResult, bool], None]


class EnvironmentHandle:
    """The agent's grip on a running episode: submit actions, read the refreshed state"""

    def __init__(self, env: RogueEnv, state: GameState, rng: random.Random,
                 observers: Iterable[StepObserver] = ()):
        self.env = env
        self.state = state
        self.rng = rng
        self.observers: List[StepObserver] = list(observers)
        self.actions = 0

    @property
    def done(self) -> bool:
        return self.env.done

    def act(self, action: Action, payload: Optional[str] = None) -> StepResult:
        before = self.state
        turn_before = self.env.turn
        result = self.env.step(action, payload)
        self.actions += 1
        consumed = result.observation.blstats.turn > turn_before
        for observer in self.observers:
            observer(before, action, payload, result, consumed)
        self.state = refine(before, result.observation, action)
        return result


class SafetyMonitor:
    """Flags a new adjacent hostile or a large hp drop since execution started"""

    def __init__(self, state: GameState, hp_drop: float = INTERRUPT_HP_DROP):
        self.hp_drop = hp_drop
        self.start_hp = state.blstats.hp if state.blstats is not None else None
        self.adjacent = self._adjacent_hostiles(state)

    @staticmethod
    def _adjacent_hostiles(state: GameState):
        if state.position is None:
            return set()
        return {e.position for e in state.hostiles if chebyshev(e.position, state.position) == 1}

    def triggered(self, state: GameState) -> bool:
        if self._adjacent_hostiles(state) - self.adjacent:
            return True
        if self.start_hp is not None and state.blstats is not None:
            return state.blstats.hp < (1 - self.hp_drop) * self.start_hp
        return False


class Skill(ABC):
    """A named strategy: plan() checks preconditions without acting, execute() acts.

    required_keys names the observation capabilities the skill reads
    ('map', 'blstats', 'message'); without them the skill never plans.
    """
    name = ''
    required_keys = frozenset({'map'})

    def __init__(self, params=None):
        self.params = params

    def available(self, state: GameState) -> bool:
        return all(state.exposes(key) for key in self.required_keys)

    def plan(self, state: GameState) -> Optional[Plan]:
        if state.position is None or not self.available(state):
            return None
        return self._plan(state)

    @abstractmethod
    def _plan(self, state: GameState) -> Optional[Plan]:
        ...

    @abstractmethod
    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        ...

    def _outcome(self, status: OutcomeStatus, handle: EnvironmentHandle, start: int) -> Outcome:
        return Outcome(status=status, actions_taken=handle.actions - start)


class CommandSkill(Skill):
    """Runs a fixed action sequence (an atomic command) carried by the plan payload"""

    def commands(self, plan: Plan) -> Sequence[Tuple[Action, Optional[str]]]:
        return expand_atomic(plan.payload)

    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        start = handle.actions
        for action, payload in self.commands(plan):
            if handle.done:
                break
            handle.act(action, payload)
        return self._outcome(OutcomeStatus.COMPLETED, handle, start)


class ReachSkill(Skill):
    """Walks a planned path (opening doors on the way), then issues its final commands"""
    final_commands: Tuple[Action, ...] = ()

    def still_valid(self, plan: Plan, state: GameState) -> bool:
        return True

    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        start = handle.actions
        status = self.follow(plan, handle, SafetyMonitor(handle.state, self._hp_drop()), start)
        if status is not None:
            return self._outcome(status, handle, start)
        for action in self.final_commands:
            if handle.done:
                break
            handle.act(action)
        return self._outcome(OutcomeStatus.COMPLETED, handle, start)

    def _hp_drop(self) -> float:
        return getattr(self.params, 'interrupt_hp_drop', INTERRUPT_HP_DROP)

    def _action_cap(self) -> int:
        return getattr(self.params, 'max_plan_actions', MAX_PLAN_ACTIONS)

    def follow(self, plan: Plan, handle: EnvironmentHandle, monitor: SafetyMonitor,
               start: int) -> Optional[OutcomeStatus]:
        """Walk plan.path; returns a status to stop with, or None once the end is reached"""
        if plan.path is None:
            return None
        for target in plan.path.steps[1:]:
            if handle.done:
                return OutcomeStatus.COMPLETED
            state = handle.state
            if not self.still_valid(plan, state):
                return OutcomeStatus.FAILED
            here = state.position
            delta = (target[0] - here[0], target[1] - here[1])
            if delta not in DELTA_TO_MOVE:
                return OutcomeStatus.FAILED
            move = DELTA_TO_MOVE[delta]

            kind = state.known_map[target]
            needed = 2 if kind in (CellKind.DOOR_CLOSED, CellKind.DOOR_LOCKED) else 1
            if handle.actions - start + needed > self._action_cap():
                return OutcomeStatus.INTERRUPTED
            if kind == CellKind.DOOR_CLOSED:
                handle.act(Action.OPEN, move)
            elif kind == CellKind.DOOR_LOCKED:
                # bumping with the key unlocks; the next move walks through
                handle.act(move)
            if not handle.done:
                handle.act(move)
            if handle.done:
                return OutcomeStatus.COMPLETED
            if handle.state.position != target:
                return OutcomeStatus.FAILED
            if monitor.triggered(handle.state) or handle.actions - start >= self._action_cap():
                return OutcomeStatus.INTERRUPTED
        if not self.still_valid(plan, handle.state):
            return OutcomeStatus.FAILED
        return None


class HiddenSkill(ReachSkill):
    """Walks next to a suspicious cell and searches it until found or the cap is hit"""

    def _search_cap(self) -> int:
        return getattr(self.params, 'search_cap', SEARCH_CAP)

    def revealed(self, plan: Plan, state: GameState, kind_before: CellKind) -> bool:
        return state.known_map[plan.payload] != kind_before

    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        start = handle.actions
        monitor = SafetyMonitor(handle.state, self._hp_drop())
        status = self.follow(plan, handle, monitor, start)
        if status is not None:
            return self._outcome(status, handle, start)
        suspect = plan.payload
        kind_before = handle.state.known_map[suspect]
        while not handle.done and handle.state.search_count[suspect] < self._search_cap():
            handle.act(Action.SEARCH)
            if self.revealed(plan, handle.state, kind_before):
                break
            if monitor.triggered(handle.state):
                return self._outcome(OutcomeStatus.INTERRUPTED, handle, start)
            if handle.actions - start >= self._action_cap():
                break
        return self._outcome(OutcomeStatus.COMPLETED, handle, start)


class SkillRegistry:
    """Name -> skill lookup used by priority lists"""

    def __init__(self, skills: Iterable[Skill] = ()):
        self._skills: Dict[str, Skill] = {}
        for skill in skills:
            self.register(skill)

    def register(self, skill: Skill) -> 'SkillRegistry':
        if skill.name in self._skills:
            raise DuplicateName(skill.name)
        self._skills[skill.name] = skill
        return self

    def resolve(self, name: str) -> Skill:
        try:
            return self._skills[name]
        except KeyError:
            raise UnknownSkill(name)

    def names(self) -> List[str]:
        return list(self._skills)

    def __contains__(self, name: str) -> bool:
        return name in self._skills


def register_skill(skill: Skill, registry: Optional[SkillRegistry] = None) -> SkillRegistry:
    registry = registry if registry is not None else SkillRegistry()
    return registry.register(skill)


def plan_next(state: GameState, priorities: Sequence[str],
              registry: SkillRegistry) -> Optional[Tuple[Skill, Plan]]:
    """First skill in priority order whose planning succeeds"""
    skills = [registry.resolve(name) for name in priorities]
    for skill in skills:
        plan = skill.plan(state)
        if plan is not None:
            logger.debug(f"Planned {skill.name} target={plan.target}")
            return skill, plan
    return None


def random_legal_move(state: GameState, rng: random.Random) -> Action:
    """Uniform choice among moves into known passable, unoccupied cells (all moves if none)"""
    if state.position is None:
        return rng.choice(list(MOVES))
    occupied = {e.position for e in state.entities
                if e.kind == EntityKind.MONSTER and not (e.hostile and not e.passive)}
    legal = []
    for move in MOVES:
        dr, dc = MOVE_DELTAS[move]
        cell = (state.position[0] + dr, state.position[1] + dc)
        if state.in_bounds(cell) and state.known_map[cell] in WALKABLE_CELLS and cell not in occupied:
            legal.append(move)
    return rng.choice(legal or list(MOVES))


def run_episode(task: TaskSpec, priorities: Sequence[str], max_steps: int,
                registry: SkillRegistry, keys=OBSERVATION_KEYS,
                observers: Iterable[StepObserver] = (), level: Optional[LevelMap] = None,
                env: Optional[RogueEnv] = None) -> EpisodeStats:
    """Refine, plan, execute until the episode ends"""
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    if task.max_steps != max_steps:
        task = replace(task, max_steps=max_steps)
    for name in priorities:
        registry.resolve(name)

    env = env if env is not None else RogueEnv()
    observation = env.reset(task, level=level)
    state = refine(GameState.empty(keys), observation, keys=keys)
    handle = EnvironmentHandle(env, state, rng_stream(task.seed, 'agent'), observers)
    skill_counts: Counter = Counter()
    fallbacks = 0
    failed = False
    logger.info(f"Episode start: task={task.kind.value} seed={task.seed}")

    while not env.done:
        chosen = plan_next(handle.state, priorities, registry)
        if chosen is not None:
            skill, plan = chosen
            skill_counts[skill.name] += 1
            outcome = skill.execute(plan, handle)
            if outcome.actions_taken > 0:
                fallbacks = 0
                continue
        if env.done:
            break
        fallbacks += 1
        if fallbacks > FALLBACK_LIMIT:
            logger.warning(f"No skill made progress for {FALLBACK_LIMIT} iterations, giving up")
            failed = True
            break
        if (fallbacks - 1) % (FALLBACK_SEARCHES + 1) < FALLBACK_SEARCHES:
            handle.act(Action.SEARCH)
        else:
            handle.act(random_legal_move(handle.state, handle.rng))

    reason = env.reason if env.done else EndReason.FAILED
    stats = EpisodeStats(score=env.score, turns=env.turn, max_depth=env.counters.max_depth,
                         end_reason=reason, skill_counts=dict(skill_counts), seed=task.seed,
                         actions=env.actions)
    logger.info(f"Episode end: seed={task.seed} reason={reason.value} score={stats.score} "
                f"turns={stats.turns}{' (fallback exhausted)' if failed else ''}")
    return stats
