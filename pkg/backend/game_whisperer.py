import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from shared.constants import (
    Action, AtomicCommand, CellKind, CHAR_GLYPHS, EntityKind, GLYPHS, MESSAGES, OBSERVATION_KEYS,
    SPECIES, SPECIES_NAMES,
)
from shared.exceptions import DimensionMismatch
from shared.models import BlStats, EntityView, Observation, Position, ThreatSummary

logger = logging.getLogger(__name__)

# (action, payload) sequence behind each atomic command
ATOMIC_EXPANSIONS = {
    AtomicCommand.PRAY_CONFIRMED: ((Action.PRAY, None),),
    AtomicCommand.ENGRAVE_ELBERETH: ((Action.ENGRAVE, 'Elbereth'),),
    AtomicCommand.EAT_NEAREST: ((Action.EAT, None),),
    AtomicCommand.DESCEND_HERE: ((Action.DESCEND, None),),
    AtomicCommand.ASCEND_HERE: ((Action.ASCEND, None),),
    AtomicCommand.OPEN_ADJACENT_DOOR: ((Action.OPEN, None),),
}

ENTITY_GLYPHS = {
    GLYPHS['PET']: EntityKind.PET,
    GLYPHS['FOOD']: EntityKind.FOOD,
    GLYPHS['GOLD']: EntityKind.GOLD,
    GLYPHS['KEY']: EntityKind.KEY,
}

_CHAR_LOOKUP = np.zeros(128, dtype=np.int16)
for _code, _glyph in CHAR_GLYPHS.items():
    _CHAR_LOOKUP[_code] = _glyph

_GRID_FIELDS = ('explored', 'known_map', 'search_count', 'visited')


def expand_atomic(cmd: AtomicCommand) -> List[Tuple[Action, Optional[str]]]:
    return list(ATOMIC_EXPANSIONS[AtomicCommand(cmd)])


@dataclass(eq=False)
class GameState:
    """Accumulated world model of the agent for the current level"""
    current_obs: Optional[Observation]
    explored: np.ndarray
    known_map: np.ndarray
    search_count: np.ndarray
    visited: np.ndarray
    entities: List[EntityView] = field(default_factory=list)
    last_action: Optional[Action] = None
    threat: ThreatSummary = ThreatSummary()
    stairs_down_pos: Optional[Position] = None
    stairs_up_pos: Optional[Position] = None
    position: Optional[Position] = None
    blstats: Optional[BlStats] = None
    depth: int = 1
    has_key: bool = False
    elbereth: Optional[Tuple[Position, int]] = None
    ascending: bool = False
    stairs_memory: Dict[int, Tuple[Optional[Position], Optional[Position]]] = field(default_factory=dict)
    keys: FrozenSet[str] = frozenset(OBSERVATION_KEYS)
    cache: Dict[str, Any] = field(default_factory=dict, repr=False)

    @classmethod
    def empty(cls, keys=OBSERVATION_KEYS) -> 'GameState':
        blank = np.zeros((0, 0), dtype=bool)
        return cls(current_obs=None, explored=blank, known_map=np.zeros((0, 0), dtype=np.int8),
                   search_count=np.zeros((0, 0), dtype=np.int32), visited=blank.copy(),
                   keys=frozenset(keys))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.explored.shape

    @property
    def has_map(self) -> bool:
        return 'glyphs' in self.keys or 'chars' in self.keys

    def exposes(self, capability: str) -> bool:
        """Whether the observation keys give access to 'map', 'blstats' or 'message'"""
        if capability == 'map':
            return self.has_map
        return capability in self.keys

    @property
    def hostiles(self) -> List[EntityView]:
        return [e for e in self.entities if e.kind == EntityKind.MONSTER and e.hostile and not e.passive]

    def visible_mask(self) -> np.ndarray:
        if self.current_obs is None or not self.has_map:
            return np.zeros(self.shape, dtype=bool)
        return decode_map(self.current_obs, self.keys) != CellKind.BLANK

    def in_bounds(self, cell: Position) -> bool:
        rows, cols = self.shape
        return 0 <= cell[0] < rows and 0 <= cell[1] < cols

    def __eq__(self, other) -> bool:
        if not isinstance(other, GameState):
            return NotImplemented
        if any(not np.array_equal(getattr(self, name), getattr(other, name)) for name in _GRID_FIELDS):
            return False
        same_obs = (self.current_obs is None and other.current_obs is None) or (
            self.current_obs is not None and self.current_obs == other.current_obs)
        return same_obs and all(
            getattr(self, name) == getattr(other, name)
            for name in ('entities', 'last_action', 'threat', 'stairs_down_pos', 'stairs_up_pos',
                         'position', 'blstats', 'depth', 'has_key', 'elbereth', 'ascending',
                         'stairs_memory', 'keys'))


def decode_map(obs: Observation, keys=OBSERVATION_KEYS) -> np.ndarray:
    """Glyph grid from the exposed keys; falls back to decoding the display characters"""
    if 'glyphs' in keys:
        return obs.glyphs
    if 'chars' in keys:
        return _CHAR_LOOKUP[obs.chars]
    return np.zeros(obs.glyphs.shape, dtype=np.int16)


def entity_view(glyph: int, cell: Position) -> Optional[EntityView]:
    if glyph in ENTITY_GLYPHS:
        return EntityView(kind=ENTITY_GLYPHS[glyph], position=cell, glyph=glyph)
    index = glyph - GLYPHS['MONSTER_BASE']
    if 0 <= index < len(SPECIES_NAMES):
        species = SPECIES_NAMES[index]
        info = SPECIES[species]
        return EntityView(kind=EntityKind.MONSTER, position=cell, glyph=glyph, species=species,
                          hostile=info['hostile'], passive=info['passive'])
    return None


def refine(prev: GameState, obs: Observation, action: Optional[Action] = None,
           keys=None) -> GameState:
    """Merge one observation into the accumulated state.

    Pass the action that produced obs so search counts and last_action follow it.
    """
    keys = frozenset(keys) if keys is not None else prev.keys
    blstats = obs.blstats if 'blstats' in keys else None
    message = obs.message if 'message' in keys else ''
    glyphs = decode_map(obs, keys)
    has_map = 'glyphs' in keys or 'chars' in keys

    depth = blstats.depth if blstats is not None else prev.depth
    fresh = prev.current_obs is None or depth != prev.depth
    if not fresh and prev.shape != glyphs.shape:
        raise DimensionMismatch(prev.shape, glyphs.shape)

    stairs_memory = dict(prev.stairs_memory)
    if fresh:
        if prev.current_obs is not None:
            stairs_memory[prev.depth] = (prev.stairs_down_pos, prev.stairs_up_pos)
        explored = np.zeros(glyphs.shape, dtype=bool)
        known_map = np.zeros(glyphs.shape, dtype=np.int8)
        search_count = np.zeros(glyphs.shape, dtype=np.int32)
        visited = np.zeros(glyphs.shape, dtype=bool)
        stairs_down, stairs_up = stairs_memory.get(depth, (None, None))
        elbereth = None
    else:
        explored = prev.explored.copy()
        known_map = prev.known_map.copy()
        search_count = prev.search_count.copy()
        visited = prev.visited.copy()
        stairs_down, stairs_up = prev.stairs_down_pos, prev.stairs_up_pos
        elbereth = prev.elbereth

    position = _agent_position(glyphs) if has_map else None
    if position is None and blstats is not None:
        position = blstats.pos

    entities = []
    if has_map:
        visible = glyphs != CellKind.BLANK
        explored |= visible
        terrain = np.where(glyphs < GLYPHS['AGENT'], glyphs, 0)
        known_map[visible & (terrain > 0)] = terrain[visible & (terrain > 0)]
        for r, c in np.argwhere(glyphs >= GLYPHS['AGENT']):
            cell = (int(r), int(c))
            if known_map[cell] == CellKind.BLANK:
                known_map[cell] = CellKind.FLOOR
            view = entity_view(int(glyphs[cell]), cell)
            if view is not None:
                entities.append(view)
        entities.sort(key=lambda e: (e.position, e.kind.value))

    if position is not None and known_map.size:
        if MESSAGES['STAIRS_DOWN_HERE'] in message:
            known_map[position] = CellKind.STAIRS_DOWN
        elif MESSAGES['STAIRS_UP_HERE'] in message:
            known_map[position] = CellKind.STAIRS_UP
        visited[position] = True
        if action == Action.SEARCH:
            r, c = position
            search_count[max(0, r - 1):r + 2, max(0, c - 1):c + 2] += 1

    for cell in map(tuple, np.argwhere(known_map == CellKind.STAIRS_DOWN)):
        stairs_down = (int(cell[0]), int(cell[1]))
    for cell in map(tuple, np.argwhere(known_map == CellKind.STAIRS_UP)):
        stairs_up = (int(cell[0]), int(cell[1]))

    has_key = prev.has_key
    if MESSAGES['PICK_KEY'] in message:
        has_key = True
    if MESSAGES['DOOR_UNLOCKED'] in message:
        has_key = False
    if MESSAGES['ENGRAVE_ELBERETH'] in message and position is not None:
        turn = blstats.turn if blstats is not None else 0
        elbereth = (position, turn)
    ascending = prev.ascending or MESSAGES['SURFACE_PULL'] in message

    return GameState(
        current_obs=obs,
        explored=explored,
        known_map=known_map,
        search_count=search_count,
        visited=visited,
        entities=entities,
        last_action=action if action is not None else prev.last_action,
        threat=_threat(entities, position),
        stairs_down_pos=stairs_down,
        stairs_up_pos=stairs_up,
        position=position,
        blstats=blstats,
        depth=depth,
        has_key=has_key,
        elbereth=elbereth,
        ascending=ascending,
        stairs_memory=stairs_memory,
        keys=keys,
    )


def find_entities(state: GameState, kind: EntityKind) -> List[Position]:
    return sorted(e.position for e in state.entities if e.kind == EntityKind(kind))


def _agent_position(glyphs: np.ndarray) -> Optional[Position]:
    cells = np.argwhere(glyphs == GLYPHS['AGENT'])
    if not len(cells):
        return None
    return int(cells[0][0]), int(cells[0][1])


def _threat(entities: List[EntityView], position: Optional[Position]) -> ThreatSummary:
    if position is None:
        return ThreatSummary()
    adjacent = [e for e in entities
                if e.kind == EntityKind.MONSTER and e.hostile and not e.passive
                and max(abs(e.position[0] - position[0]), abs(e.position[1] - position[1])) == 1]
    strongest = max((SPECIES[e.species]['hp'] for e in adjacent), default=0)
    return ThreatSummary(adjacent_hostiles=len(adjacent), strongest_adjacent_hp=strongest)
