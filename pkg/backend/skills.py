"""
Skill catalog: danger handling, fighting, resources, navigation, hidden features, policies
"""

import logging
from dataclasses import dataclass, fields
from typing import Any, Dict, List, Optional

import numpy as np

from backend import config
from backend.dungeon_walker import (
    chebyshev, closest_reachable, distance_map, farthest_reachable, frontier_mask, frontier_targets,
    octile, walkable_for,
)
from backend.game_whisperer import GameState, find_entities
from backend.policy import choose_action
from backend.skill_core import (
    CommandSkill, EnvironmentHandle, HiddenSkill, ReachSkill, SafetyMonitor, Skill, SkillRegistry,
    random_legal_move,
)
from shared.constants import (
    Action, AtomicCommand, CellKind, DOOR_CELLS, EntityKind, Hunger, MOVES, MOVE_DELTAS,
    OutcomeStatus, WALKABLE_CELLS,
)
from shared.exceptions import InvalidValue, NoLegalMove
from shared.models import Outcome, Plan, Position

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SkillParams:
    """Skill thresholds; the config file's skill_params object overrides fields by name"""
    pray_hp_fraction: float = config.PRAY_HP_FRACTION
    prayer_timeout: int = config.PRAYER_TIMEOUT
    run_distance: int = config.RUN_DISTANCE
    run_hp_fraction: float = config.RUN_HP_FRACTION
    break_hp_fraction: float = config.BREAK_HP_FRACTION
    break_max_rests: int = config.BREAK_MAX_RESTS
    search_cap: int = config.SEARCH_CAP
    elbereth_turns: int = config.ELBERETH_TURNS
    max_plan_actions: int = config.MAX_PLAN_ACTIONS
    interrupt_hp_drop: float = config.INTERRUPT_HP_DROP

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'SkillParams':
        known = {f.name: f.type for f in fields(cls)}
        parsed = {}
        for key, value in values.items():
            if key not in known:
                raise InvalidValue(f"skill_params.{key}", "unknown parameter")
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
                raise InvalidValue(f"skill_params.{key}", f"expected a non-negative number, got {value!r}")
            parsed[key] = int(value) if known[key] in (int, 'int') else float(value)
        return cls(**parsed)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _step(cell: Position, move: Action) -> Position:
    dr, dc = MOVE_DELTAS[move]
    return cell[0] + dr, cell[1] + dc


def _entity_still_at(state: GameState, plan: Plan, kind: EntityKind) -> bool:
    # the agent's glyph hides whatever lies underfoot
    if state.position == plan.target:
        return True
    return plan.target in find_entities(state, kind)


# ---------------------------------------------------------------- danger handling

class PraySkill(CommandSkill):
    name = 'Pray'
    required_keys = frozenset({'blstats'})

    def _plan(self, state: GameState) -> Optional[Plan]:
        stats = state.blstats
        in_trouble = (stats.hp < stats.max_hp * self.params.pray_hp_fraction
                      or stats.hunger in (Hunger.WEAK, Hunger.FAINTING))
        timed_out = (stats.last_prayer_turn is None
                     or stats.turn - stats.last_prayer_turn > self.params.prayer_timeout)
        if in_trouble and timed_out:
            return Plan(self.name, payload=AtomicCommand.PRAY_CONFIRMED)
        return None


class EatSkill(ReachSkill):
    name = 'Eat'
    required_keys = frozenset({'map', 'blstats'})
    final_commands = (Action.EAT,)

    def _plan(self, state: GameState) -> Optional[Plan]:
        if state.blstats.hunger < Hunger.HUNGRY:
            return None
        found = closest_reachable(state, find_entities(state, EntityKind.FOOD))
        if found is None:
            return None
        target, path = found
        return Plan(self.name, target=target, path=path)

    def still_valid(self, plan: Plan, state: GameState) -> bool:
        return _entity_still_at(state, plan, EntityKind.FOOD)


class ElberethSkill(CommandSkill):
    name = 'Elbereth'
    required_keys = frozenset({'map', 'blstats'})

    def _plan(self, state: GameState) -> Optional[Plan]:
        threat = state.threat
        if not (threat.adjacent_hostiles >= 2 or threat.strongest_adjacent_hp > state.blstats.hp):
            return None
        if state.elbereth is not None:
            where, turn = state.elbereth
            if where == state.position and state.blstats.turn - turn <= self.params.elbereth_turns:
                return None
        return Plan(self.name, target=state.position, payload=AtomicCommand.ENGRAVE_ELBERETH)


def flee_step(state: GameState) -> Action:
    """Legal move maximizing the minimum octile distance to the visible hostiles"""
    hostiles = [e.position for e in state.hostiles]
    if not hostiles:
        raise NoLegalMove("no hostile in view")
    blocked = {e.position for e in state.entities if e.kind == EntityKind.MONSTER}
    best_move, best_value = None, -1.0
    for move in MOVES:
        cell = _step(state.position, move)
        if not state.in_bounds(cell) or state.known_map[cell] not in WALKABLE_CELLS or cell in blocked:
            continue
        value = min(octile(cell, h) for h in hostiles)
        if value > best_value + 1e-9:
            best_move, best_value = move, value
    if best_move is None:
        raise NoLegalMove("agent is cornered")
    return best_move


class RunSkill(Skill):
    name = 'Run'
    required_keys = frozenset({'map', 'blstats'})

    def _plan(self, state: GameState) -> Optional[Plan]:
        stats = state.blstats
        close = [e for e in state.hostiles
                 if chebyshev(e.position, state.position) <= self.params.run_distance]
        if not close or stats.hp >= stats.max_hp * self.params.run_hp_fraction:
            return None
        try:
            move = flee_step(state)
        except NoLegalMove:
            return None
        return Plan(self.name, target=_step(state.position, move), payload=move)

    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        handle.act(plan.payload)
        return Outcome(OutcomeStatus.COMPLETED, 1)


class BreakSkill(Skill):
    """Rests in place while nothing hostile is in view"""
    name = 'Break'
    required_keys = frozenset({'map', 'blstats'})

    def _plan(self, state: GameState) -> Optional[Plan]:
        stats = state.blstats
        if stats.hp < self.params.break_hp_fraction * stats.max_hp and not state.hostiles:
            return Plan(self.name, target=state.position, payload=Action.SEARCH)
        return None

    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        start = handle.actions
        monitor = SafetyMonitor(handle.state, self.params.interrupt_hp_drop)
        for _ in range(self.params.break_max_rests):
            if handle.done:
                break
            handle.act(Action.SEARCH)
            state = handle.state
            if state.hostiles or monitor.triggered(state):
                return self._outcome(OutcomeStatus.INTERRUPTED, handle, start)
            if state.blstats.hp >= self.params.break_hp_fraction * state.blstats.max_hp:
                break
        return self._outcome(OutcomeStatus.COMPLETED, handle, start)


class FightSkill(Skill):
    name = 'Fight'

    def _plan(self, state: GameState) -> Optional[Plan]:
        # pets and passive monsters are never targets
        targets = sorted(e.position for e in state.hostiles
                         if chebyshev(e.position, state.position) == 1)
        if not targets:
            return None
        target = targets[0]
        move = next(m for m in MOVES if _step(state.position, m) == target)
        return Plan(self.name, target=target, payload=move)

    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        if plan.target not in [e.position for e in handle.state.hostiles]:
            return Outcome(OutcomeStatus.FAILED, 0)
        handle.act(plan.payload)
        return Outcome(OutcomeStatus.COMPLETED, 1)


# ---------------------------------------------------------------- resources and stairs

class GoldSkill(ReachSkill):
    name = 'Gold'
    final_commands = (Action.PICKUP,)

    def _plan(self, state: GameState) -> Optional[Plan]:
        found = closest_reachable(state, find_entities(state, EntityKind.GOLD))
        if found is None:
            return None
        return Plan(self.name, target=found[0], path=found[1])

    def still_valid(self, plan: Plan, state: GameState) -> bool:
        return _entity_still_at(state, plan, EntityKind.GOLD)


class StairsDescendSkill(ReachSkill):
    name = 'StairsDescend'
    final_commands = (Action.DESCEND,)

    def _plan(self, state: GameState) -> Optional[Plan]:
        if state.stairs_down_pos is None or state.ascending:
            return None
        found = closest_reachable(state, [state.stairs_down_pos])
        if found is None:
            return None
        return Plan(self.name, target=found[0], path=found[1])


class StairsAscendSkill(ReachSkill):
    name = 'StairsAscend'
    final_commands = (Action.ASCEND,)

    def _plan(self, state: GameState) -> Optional[Plan]:
        if state.stairs_up_pos is None or not state.ascending:
            return None
        found = closest_reachable(state, [state.stairs_up_pos])
        if found is None:
            return None
        return Plan(self.name, target=found[0], path=found[1])


# ---------------------------------------------------------------- exploration

def exploration_targets(state: GameState) -> List[Position]:
    """Unvisited doors, corridor cells next to a door, and the down staircase"""
    known = state.known_map
    doors = np.isin(known, [int(kind) for kind in DOOR_CELLS])
    near_door = np.zeros(known.shape, dtype=bool)
    rows, cols = known.shape
    padded = np.pad(doors, 1, constant_values=False)
    for dr, dc in MOVE_DELTAS.values():
        near_door |= padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]
    entrances = (known == CellKind.CORRIDOR) & near_door
    wanted = (doors | entrances) & ~state.visited
    targets = [(int(r), int(c)) for r, c in np.argwhere(wanted)]
    if state.stairs_down_pos is not None and not state.ascending:
        targets.append(state.stairs_down_pos)
    return [t for t in targets if t != state.position]


class ExploreClosestSkill(ReachSkill):
    name = 'ExploreClosest'

    def _plan(self, state: GameState) -> Optional[Plan]:
        found = closest_reachable(state, exploration_targets(state))
        if found is None:
            return None
        return Plan(self.name, target=found[0], path=found[1])


class HorizonSkill(ReachSkill):
    name = 'Horizon'

    def _plan(self, state: GameState) -> Optional[Plan]:
        targets = [t for t in frontier_targets(state) if t != state.position]
        found = farthest_reachable(state, targets)
        if found is None:
            return None
        return Plan(self.name, target=found[0], path=found[1])


class UnseenSkill(ReachSkill):
    name = 'Unseen'

    def _plan(self, state: GameState) -> Optional[Plan]:
        targets = [t for t in frontier_targets(state) if t != state.position]
        found = closest_reachable(state, targets)
        if found is None:
            return None
        return Plan(self.name, target=found[0], path=found[1])


def _reachable_frontier(state: GameState) -> bool:
    distances, _ = distance_map(state)
    return any(tuple(cell) in distances for cell in map(tuple, np.argwhere(frontier_mask(state))))


def dead_end_walls(state: GameState, cap: int) -> Dict[Position, Position]:
    """Room wall cells worth searching, mapped to the floor cell to search them from.

    Only offered once no frontier is reachable; the wall must face unexplored,
    in-bounds space and still be under the search cap.
    """
    if _reachable_frontier(state):
        return {}
    known, explored = state.known_map, state.explored
    spots: Dict[Position, Position] = {}
    for r, c in np.argwhere(known == CellKind.WALL):
        wall = (int(r), int(c))
        if state.search_count[wall] >= cap:
            continue
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            inside, outside = (wall[0] - dr, wall[1] - dc), (wall[0] + dr, wall[1] + dc)
            if (state.in_bounds(inside) and state.in_bounds(outside)
                    and known[inside] == CellKind.FLOOR and not explored[outside]):
                spots[wall] = inside
                break
    return spots


def dead_end_corridors(state: GameState, cap: int) -> List[Position]:
    """Fully seen corridor cells with a single passable neighbour, still under the search cap"""
    walkable = walkable_for(state)
    ends = []
    for r, c in np.argwhere(state.known_map == CellKind.CORRIDOR):
        cell = (int(r), int(c))
        if state.search_count[cell] >= cap:
            continue
        around = [_step(cell, m) for m in MOVES]
        if not all(state.explored[n] for n in around if state.in_bounds(n)):
            continue
        if sum(1 for n in around if walkable(n)) == 1:
            ends.append(cell)
    return ends


class HiddenRoomSkill(HiddenSkill):
    name = 'HiddenRoom'

    def _plan(self, state: GameState) -> Optional[Plan]:
        spots = dead_end_walls(state, self.params.search_cap)
        if not spots:
            return None
        found = closest_reachable(state, sorted(set(spots.values())))
        if found is None:
            return None
        stand, path = found
        suspect = min(wall for wall, floor in spots.items() if floor == stand)
        return Plan(self.name, target=stand, path=path, payload=suspect)


class HiddenCorridorSkill(HiddenSkill):
    name = 'HiddenCorridor'

    def _plan(self, state: GameState) -> Optional[Plan]:
        found = closest_reachable(state, dead_end_corridors(state, self.params.search_cap))
        if found is None:
            return None
        return Plan(self.name, target=found[0], path=found[1], payload=found[0])

    def revealed(self, plan: Plan, state: GameState, kind_before: CellKind) -> bool:
        # the end stops being a dead end once a passage opens next to it
        walkable = walkable_for(state)
        return sum(1 for m in MOVES if walkable(_step(plan.payload, m))) > 1


# ---------------------------------------------------------------- random and learned movement

class RandomWalkSkill(Skill):
    name = 'RandomWalk'
    required_keys = frozenset()

    def plan(self, state: GameState) -> Optional[Plan]:
        return Plan(self.name)

    def _plan(self, state: GameState) -> Optional[Plan]:
        return Plan(self.name)

    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        handle.act(random_legal_move(handle.state, handle.rng))
        return Outcome(OutcomeStatus.COMPLETED, 1)


class PolicySkill(Skill):
    """One move drawn from an attached policy, optionally shaped by rules"""
    required_keys = frozenset({'map', 'blstats'})

    def __init__(self, name: str, params=None, model=None, rules=None, argmax: bool = False):
        super().__init__(params)
        self.name = name
        self.model = model
        self.rules = rules
        self.argmax = argmax

    def attach(self, model, rules=None, argmax: Optional[bool] = None) -> 'PolicySkill':
        self.model = model
        self.rules = rules
        if argmax is not None:
            self.argmax = argmax
        return self

    def _plan(self, state: GameState) -> Optional[Plan]:
        if self.model is None:
            return None
        return Plan(self.name)

    def execute(self, plan: Plan, handle: EnvironmentHandle) -> Outcome:
        action = choose_action(self.model, handle.state, handle.rng, rules=self.rules,
                               argmax=self.argmax)
        handle.act(action)
        return Outcome(OutcomeStatus.COMPLETED, 1)


SKILL_CLASSES = (
    PraySkill, EatSkill, ElberethSkill, RunSkill, BreakSkill, FightSkill, GoldSkill,
    StairsDescendSkill, StairsAscendSkill, ExploreClosestSkill, HorizonSkill, UnseenSkill,
    HiddenRoomSkill, HiddenCorridorSkill, RandomWalkSkill,
)


def build_default_registry(params: Optional[SkillParams] = None) -> SkillRegistry:
    params = params or SkillParams()
    registry = SkillRegistry(cls(params) for cls in SKILL_CLASSES)
    registry.register(PolicySkill('NeuralWalk', params))
    registry.register(PolicySkill('BCWalk', params))
    return registry


_DEFAULT_REGISTRY: Optional[SkillRegistry] = None


def default_registry() -> SkillRegistry:
    global _DEFAULT_REGISTRY
    if _DEFAULT_REGISTRY is None:
        _DEFAULT_REGISTRY = build_default_registry()
    return _DEFAULT_REGISTRY


def plan_skill(name: str, state: GameState, registry: Optional[SkillRegistry] = None) -> Optional[Plan]:
    return (registry or default_registry()).resolve(name).plan(state)


def execute_skill(plan: Plan, handle: EnvironmentHandle,
                  registry: Optional[SkillRegistry] = None) -> Outcome:
    return (registry or default_registry()).resolve(plan.skill_name).execute(plan, handle)
