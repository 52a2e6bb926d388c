import copy
import logging
from typing import Dict, List, Optional

import numpy as np

from backend.config import (
    ACTION_BUDGET_FACTOR, AGENT_DAMAGE, AGENT_MAX_HP, ELBERETH_TURNS, HUNGER_INTERVAL,
    MONSTER_SIGHT, PRAYER_TIMEOUT, REST_REGEN_TURNS, SCORE_DEPTH_BONUS, SCORE_EXPLORE_DIVISOR,
    SCORE_KILL_BONUS, SEARCH_REVEAL_CHANCE,
)
from backend.level_generator import generate_level
from shared.constants import (
    ACTION_SET, Action, CellKind, DISGUISES, EndReason, EntityKind, GLYPH_CHARS, GLYPHS,
    Hunger, HUNGER_MESSAGES, MESSAGES, MOVES, MOVE_DELTAS, SPECIES, SPECIES_NAMES, WALKABLE_CELLS,
)
from shared.exceptions import EpisodeFinished, IllegalAction
from shared.models import (
    BlStats, Entity, LevelMap, Observation, Position, ScoreCounters, ScoreEvent, StepResult, TaskSpec,
)
from shared.seeding import rng_stream

logger = logging.getLogger(__name__)

# glyph -> display character code
CHAR_TABLE = np.zeros(64, dtype=np.uint8)
for _glyph, _char in GLYPH_CHARS.items():
    CHAR_TABLE[int(_glyph)] = ord(_char)

SEARCH_REVEALS = {
    CellKind.HIDDEN_CORRIDOR: (CellKind.CORRIDOR, 'FIND_PASSAGE'),
    CellKind.HIDDEN_DOOR: (CellKind.DOOR_CLOSED, 'FIND_DOOR'),
}


def compute_score(counters: ScoreCounters) -> int:
    return (counters.gold
            + SCORE_DEPTH_BONUS * (counters.max_depth - 1)
            + SCORE_KILL_BONUS * counters.kills
            + counters.cells_explored // SCORE_EXPLORE_DIVISOR)


def replay_counters(events: List[ScoreEvent]) -> ScoreCounters:
    """Rebuild the episode counters from its event log"""
    counters = ScoreCounters()
    for event in events:
        if event.kind == 'gold':
            counters.gold += event.amount
        elif event.kind == 'depth':
            counters.max_depth += event.amount
        elif event.kind == 'kill':
            counters.kills += event.amount
        elif event.kind == 'explore':
            counters.cells_explored += event.amount
    return counters


def chebyshev(a: Position, b: Position) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def entity_glyph(entity: Entity) -> int:
    if entity.kind == EntityKind.MONSTER:
        return GLYPHS['MONSTER_BASE'] + SPECIES_NAMES.index(entity.species)
    return GLYPHS[entity.kind.name]


class RogueEnv:
    """Turn-based dungeon simulator.

    One instance runs one episode at a time and is not thread-safe; separate
    instances share nothing and can run in parallel.
    """

    def __init__(self):
        self.task: Optional[TaskSpec] = None
        self._done = True
        self._reason: Optional[EndReason] = None

    # ------------------------------------------------------------------ episode

    def reset(self, task: TaskSpec, level: Optional[LevelMap] = None) -> Observation:
        """Start a fresh episode; a hand-built level replaces depth 1 when given"""
        self.task = task
        self._levels: Dict[int, LevelMap] = {}
        if level is not None:
            self._levels[level.depth] = copy.deepcopy(level)
        self._combat_rng = rng_stream(task.seed, 'combat')
        self._search_rng = rng_stream(task.seed, 'search')
        self._monster_rng = rng_stream(task.seed, 'monsters')

        self.depth = level.depth if level is not None else 1
        self.level = self._load_level(self.depth)
        self.position = self.level.spawn
        self.hp = self.max_hp = AGENT_MAX_HP
        self.hunger = Hunger.NOT_HUNGRY
        self._hunger_clock = 0
        self._rest_turns = 0
        self.turn = 0
        self.actions = 0
        self.counters = ScoreCounters(max_depth=self.depth)
        self.events: List[ScoreEvent] = []
        self.last_prayer_turn: Optional[int] = None
        self.has_key = False
        self._engraving: Optional[tuple] = None
        self._ward_until = -1
        self._ascent_active = False
        self._visited = set()
        self._messages: List[str] = []
        self._done = False
        self._reason = None
        self._reward = 0.0

        self._visit(self.position)
        self._arrival_messages(self.position)
        logger.debug(f"Episode reset: task={task.kind.value} seed={task.seed}")
        return self._observe()

    @property
    def done(self) -> bool:
        return self._done

    @property
    def reason(self) -> Optional[EndReason]:
        return self._reason

    @property
    def score(self) -> int:
        return compute_score(self.counters)

    def step(self, action, payload: Optional[str] = None) -> StepResult:
        """Apply one agent action, then the world's turn"""
        if self._done:
            raise EpisodeFinished(self._reason)
        try:
            action = Action(action)
        except ValueError:
            raise IllegalAction(action)
        if action not in ACTION_SET:
            raise IllegalAction(action)

        self.actions += 1
        self._messages = []
        self._reward = 0.0
        consumed = self._apply(action, payload)
        if consumed:
            self.turn += 1
            if not self._done:
                self._advance_hunger()
                self._regenerate(action)
                self._monsters_act()
            if not self._done and self.hp <= 0:
                self.hp = 0
                self._messages.append(MESSAGES['DIE'])
                self._finish(EndReason.DEATH)

        if not self._done and (self.turn >= self.task.max_steps
                               or self.actions >= ACTION_BUDGET_FACTOR * self.task.max_steps):
            self._finish(EndReason.STEP_LIMIT)

        info = {'reason': self._reason} if self._done else {}
        return StepResult(observation=self._observe(), reward=self._reward, done=self._done, info=info)

    def _finish(self, reason: EndReason, reward: float = 0.0):
        self._done = True
        self._reason = reason
        self._reward = reward
        logger.debug(f"Episode finished: {reason.value} at turn {self.turn}")

    # ------------------------------------------------------------------ actions

    def _apply(self, action: Action, payload: Optional[str]) -> bool:
        if action in MOVE_DELTAS:
            return self._move(action)
        handler = {
            Action.SEARCH: self._search,
            Action.EAT: self._eat,
            Action.PRAY: self._pray,
            Action.ENGRAVE: lambda: self._engrave(payload),
            Action.DESCEND: self._descend,
            Action.ASCEND: self._ascend,
            Action.OPEN: lambda: self._open(payload),
            Action.PICKUP: self._pickup,
            Action.WAIT: lambda: True,
        }[action]
        return handler()

    def _move(self, action: Action) -> bool:
        target = self._offset(self.position, action)
        if not self._in_bounds(target):
            self._messages.append(MESSAGES['WALL'])
            return False
        kind = self.level.grid[target]
        if kind in (CellKind.WALL, CellKind.HIDDEN_DOOR):
            self._messages.append(MESSAGES['WALL'])
            return False
        if kind in (CellKind.STONE, CellKind.HIDDEN_CORRIDOR):
            self._messages.append(MESSAGES['STONE'])
            return False
        if kind == CellKind.DOOR_CLOSED:
            self._messages.append(MESSAGES['DOOR_CLOSED'])
            return False
        if kind == CellKind.DOOR_LOCKED:
            if not self.has_key:
                self._messages.append(MESSAGES['DOOR_LOCKED'])
                return False
            self._unlock(target)
            return True

        occupant = self._creature_at(target)
        if occupant is not None:
            if occupant.kind == EntityKind.PET:
                occupant.position = self.position
                self._messages.append(MESSAGES['SWAP_PET'])
            elif occupant.hostile:
                self._attack(occupant)
                return True
            else:
                self._messages.append(MESSAGES['IN_THE_WAY'].format(species=occupant.species))
                return True

        self.position = target
        self._visit(target)
        self._arrival_messages(target)
        if self.task.is_goal_task and kind == CellKind.STAIRS_DOWN:
            self._messages.append(MESSAGES['GOAL'])
            self._finish(EndReason.GOAL, reward=1.0)
        return True

    def _attack(self, monster: Entity):
        monster.hp -= self._combat_rng.randint(*AGENT_DAMAGE)
        if monster.hp <= 0:
            self.level.entities.remove(monster)
            self.counters.kills += 1
            self._log_event('kill', 1)
            self._messages.append(MESSAGES['KILL'].format(species=monster.species))
        else:
            self._messages.append(MESSAGES['HIT'].format(species=monster.species))
        # fighting scuffs the engraving underfoot
        if self._engraving == (self.depth, self.position):
            self._engraving = None

    def _search(self) -> bool:
        for move in MOVES:
            cell = self._offset(self.position, move)
            if not self._in_bounds(cell):
                continue
            kind = CellKind(self.level.grid[cell])
            if kind in SEARCH_REVEALS and self._search_rng.random() < SEARCH_REVEAL_CHANCE:
                revealed, message = SEARCH_REVEALS[kind]
                self.level.grid[cell] = revealed
                self._messages.append(MESSAGES[message])
        return True

    def _eat(self) -> bool:
        food = self._item_at(self.position, EntityKind.FOOD)
        if food is None:
            self._messages.append(MESSAGES['NOTHING_TO_EAT'])
            return True
        self.level.entities.remove(food)
        self.hunger = Hunger.NOT_HUNGRY
        self._hunger_clock = 0
        self._messages.append(MESSAGES['EAT'])
        return True

    def _pray(self) -> bool:
        if self.last_prayer_turn is None or self.turn - self.last_prayer_turn > PRAYER_TIMEOUT:
            self.hp = self.max_hp
            if self.hunger >= Hunger.HUNGRY:
                self.hunger = Hunger.NOT_HUNGRY
                self._hunger_clock = 0
            self._messages.append(MESSAGES['PRAY_OK'])
        else:
            self._messages.append(MESSAGES['PRAY_FAIL'])
        self.last_prayer_turn = self.turn
        return True

    def _engrave(self, text: Optional[str]) -> bool:
        if text == 'Elbereth':
            self._engraving = (self.depth, self.position)
            self._ward_until = self.turn + 1 + ELBERETH_TURNS
            self._messages.append(MESSAGES['ENGRAVE_ELBERETH'])
        else:
            self._engraving = None
            self._messages.append(MESSAGES['ENGRAVE_OTHER'])
        return True

    def _descend(self) -> bool:
        if self.task.is_goal_task or self.level.grid[self.position] != CellKind.STAIRS_DOWN:
            self._messages.append(MESSAGES['CANT_DESCEND'])
            return True
        self._change_level(self.depth + 1, arrive_on='up')
        self._messages.append(MESSAGES['DESCEND'])
        if self.depth > self.counters.max_depth:
            self.counters.max_depth = self.depth
            self._log_event('depth', 1)
        if self.task.ascend and self.depth == self.task.levels and not self._ascent_active:
            self._ascent_active = True
            self._messages.append(MESSAGES['SURFACE_PULL'])
        self._arrival_messages(self.position)
        return True

    def _ascend(self) -> bool:
        if self.level.grid[self.position] != CellKind.STAIRS_UP:
            self._messages.append(MESSAGES['CANT_ASCEND'])
            return True
        if self.depth == 1:
            self._messages.append(MESSAGES['ASCENDED'])
            self._finish(EndReason.ASCENDED, reward=1.0 if self._ascent_active else 0.0)
            return True
        self._change_level(self.depth - 1, arrive_on='down')
        self._messages.append(MESSAGES['ASCEND'])
        self._arrival_messages(self.position)
        return True

    def _open(self, direction: Optional[Action]) -> bool:
        moves = MOVES if direction is None else (Action(direction),)
        for move in moves:
            cell = self._offset(self.position, move)
            if not self._in_bounds(cell):
                continue
            kind = self.level.grid[cell]
            if kind == CellKind.DOOR_CLOSED:
                self.level.grid[cell] = CellKind.DOOR_OPEN
                self._messages.append(MESSAGES['DOOR_OPENS'])
                return True
            if kind == CellKind.DOOR_LOCKED:
                if self.has_key:
                    self._unlock(cell)
                else:
                    self._messages.append(MESSAGES['DOOR_LOCKED'])
                return True
        self._messages.append(MESSAGES['NO_DOOR'])
        return True

    def _unlock(self, cell: Position):
        self.level.grid[cell] = CellKind.DOOR_OPEN
        self.has_key = False
        self._messages.append(MESSAGES['DOOR_UNLOCKED'])

    def _pickup(self) -> bool:
        gold = self._item_at(self.position, EntityKind.GOLD)
        if gold is None:
            self._messages.append(MESSAGES['NOTHING_TO_PICK'])
            return True
        self.level.entities.remove(gold)
        self.counters.gold += gold.amount
        self._log_event('gold', gold.amount)
        self._messages.append(MESSAGES['PICK_GOLD'].format(amount=gold.amount))
        return True

    # ------------------------------------------------------------------ world turn

    def _advance_hunger(self):
        self._hunger_clock += 1
        if self._hunger_clock % HUNGER_INTERVAL == 0 and self.hunger < Hunger.FAINTING:
            self.hunger = Hunger(self.hunger + 1)
            if self.hunger in HUNGER_MESSAGES:
                self._messages.append(HUNGER_MESSAGES[self.hunger])
        if self.hunger == Hunger.FAINTING:
            self.hp -= 1

    def _regenerate(self, action: Action):
        if action not in (Action.SEARCH, Action.WAIT):
            self._rest_turns = 0
            return
        self._rest_turns += 1
        if self._rest_turns % REST_REGEN_TURNS == 0 and self.hp < self.max_hp:
            self.hp += 1

    def _ward_active(self) -> bool:
        return self._engraving == (self.depth, self.position) and self.turn <= self._ward_until

    def _monsters_act(self):
        visible = self.visible_mask()
        warded = self._ward_active()
        creatures = sorted((e for e in self.level.entities
                            if e.kind in (EntityKind.MONSTER, EntityKind.PET)), key=lambda e: e.id)
        for creature in creatures:
            if self.hp <= 0:
                break
            if creature.kind == EntityKind.PET:
                self._pet_act(creature, visible)
                continue
            if not creature.hostile or creature.passive:
                continue
            distance = chebyshev(creature.position, self.position)
            if distance > MONSTER_SIGHT or not visible[creature.position]:
                continue
            if distance == 1 and not warded:
                self.hp -= self._combat_rng.randint(1, SPECIES[creature.species]['damage'])
                self._messages.append(MESSAGES['MONSTER_HITS'].format(species=creature.species))
            elif distance == 1:
                step = self._monster_step(creature, away=True)
                if step is not None:
                    creature.position = step
                    self._messages.append(MESSAGES['MONSTER_FLEES'].format(species=creature.species))
            else:
                step = self._monster_step(creature, away=False, keep_clear=warded)
                if step is not None:
                    creature.position = step

    def _monster_step(self, creature: Entity, away: bool, keep_clear: bool = False) -> Optional[Position]:
        """Greedy one-cell move toward (or away from) the agent, or None to stay"""
        best, best_value = None, _octile(creature.position, self.position)
        for move in MOVES:
            cell = self._offset(creature.position, move)
            if not self._free_for_creature(cell):
                continue
            if (away or keep_clear) and chebyshev(cell, self.position) <= 1:
                continue
            value = _octile(cell, self.position)
            if (away and value > best_value) or (not away and value < best_value):
                best, best_value = cell, value
        return best

    def _pet_act(self, pet: Entity, visible: np.ndarray):
        if chebyshev(pet.position, self.position) > 2:
            step = self._monster_step(pet, away=False)
        else:
            options = [cell for cell in (self._offset(pet.position, m) for m in MOVES)
                       if self._free_for_creature(cell)]
            step = self._monster_rng.choice(options + [None]) if options else None
        if step is None:
            return
        pet.position = step
        food = self._item_at(step, EntityKind.FOOD)
        if food is not None:
            self.level.entities.remove(food)
            if visible[step]:
                self._messages.append(MESSAGES['PET_EATS'])

    def _free_for_creature(self, cell: Position) -> bool:
        return (self._in_bounds(cell) and self.level.grid[cell] in WALKABLE_CELLS
                and cell != self.position and self._creature_at(cell) is None)

    # ------------------------------------------------------------------ levels

    def _load_level(self, depth: int) -> LevelMap:
        if depth not in self._levels:
            self._levels[depth] = generate_level(self.task.seed, depth, self.task)
        return self._levels[depth]

    def _change_level(self, depth: int, arrive_on: str):
        self.depth = depth
        self.level = self._load_level(depth)
        self.position = self.level.stairs_up if arrive_on == 'up' else self.level.stairs_down
        blocker = self._creature_at(self.position)
        if blocker is not None:
            # displaced to the nearest free cell the agent is not standing on
            for move in MOVES:
                cell = self._offset(self.position, move)
                if self._free_for_creature(cell):
                    blocker.position = cell
                    break
        self._visit(self.position)

    def _visit(self, cell: Position):
        key = (self.depth, cell)
        if key not in self._visited:
            self._visited.add(key)
            self.counters.cells_explored += 1
            self._log_event('explore', 1)

    def _log_event(self, kind: str, amount: int):
        self.events.append(ScoreEvent(turn=self.turn, kind=kind, amount=amount))

    def _arrival_messages(self, cell: Position):
        kind = self.level.grid[cell]
        if kind == CellKind.STAIRS_DOWN and not self.task.is_goal_task:
            self._messages.append(MESSAGES['STAIRS_DOWN_HERE'])
        elif kind == CellKind.STAIRS_UP:
            self._messages.append(MESSAGES['STAIRS_UP_HERE'])
        key = self._item_at(cell, EntityKind.KEY)
        if key is not None:
            self.level.entities.remove(key)
            self.has_key = True
            self._messages.append(MESSAGES['PICK_KEY'])
        gold = self._item_at(cell, EntityKind.GOLD)
        if gold is not None:
            self._messages.append(MESSAGES['SEE_GOLD'].format(amount=gold.amount))
        if self._item_at(cell, EntityKind.FOOD) is not None:
            self._messages.append(MESSAGES['SEE_FOOD'])

    # ------------------------------------------------------------------ observation

    def visible_mask(self) -> np.ndarray:
        """Lit rooms containing the agent plus everything within one step"""
        mask = np.zeros(self.level.shape, dtype=bool)
        for box in self.level.rooms:
            if box.contains(self.position):
                mask[box.top:box.bottom + 1, box.left:box.right + 1] = True
        r, c = self.position
        mask[max(0, r - 1):r + 2, max(0, c - 1):c + 2] = True
        return mask

    def _observe(self) -> Observation:
        mask = self.visible_mask()
        terrain = self.level.grid.astype(np.int16)
        for hidden, disguise in DISGUISES.items():
            terrain[terrain == hidden] = disguise
        glyphs = np.where(mask, terrain, CellKind.BLANK).astype(np.int16)
        # items first so creatures are drawn on top of them
        for entity in sorted(self.level.entities,
                             key=lambda e: (e.kind in (EntityKind.MONSTER, EntityKind.PET), e.id)):
            if mask[entity.position]:
                glyphs[entity.position] = entity_glyph(entity)
        glyphs[self.position] = GLYPHS['AGENT']

        blstats = BlStats(hp=max(self.hp, 0), max_hp=self.max_hp, hunger=self.hunger,
                          depth=self.depth, gold=self.counters.gold, turn=self.turn,
                          score=self.score, pos=self.position,
                          last_prayer_turn=self.last_prayer_turn)
        return Observation(glyphs=glyphs, chars=CHAR_TABLE[glyphs], message=' '.join(self._messages),
                           blstats=blstats)

    # ------------------------------------------------------------------ helpers

    def _in_bounds(self, cell: Position) -> bool:
        rows, cols = self.level.shape
        return 0 <= cell[0] < rows and 0 <= cell[1] < cols

    @staticmethod
    def _offset(cell: Position, move: Action) -> Position:
        dr, dc = MOVE_DELTAS[move]
        return cell[0] + dr, cell[1] + dc

    def _creature_at(self, cell: Position) -> Optional[Entity]:
        for entity in self.level.entities:
            if entity.position == cell and entity.kind in (EntityKind.MONSTER, EntityKind.PET):
                return entity
        return None

    def _item_at(self, cell: Position, kind: EntityKind) -> Optional[Entity]:
        for entity in self.level.entities:
            if entity.position == cell and entity.kind == kind:
                return entity
        return None


def _octile(a: Position, b: Position) -> float:
    dy, dx = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(dx, dy) + (2 ** 0.5 - 1) * min(dx, dy)
