import math
from typing import List, Optional, Tuple

from backend.game_whisperer import GameState, entity_view
from shared.constants import CellKind, EntityKind, GLYPHS
from shared.models import Observation, Position

FEATURE_NAMES = {
    CellKind.STAIRS_DOWN: 'staircase down',
    CellKind.STAIRS_UP: 'staircase up',
    CellKind.DOOR_CLOSED: 'closed door',
    CellKind.DOOR_OPEN: 'open door',
    CellKind.DOOR_LOCKED: 'locked door',
}

ENTITY_NAMES = {
    EntityKind.PET: 'little dog',
    EntityKind.FOOD: 'food ration',
    EntityKind.GOLD: 'pile of gold',
    EntityKind.KEY: 'key',
}

# counter-clockwise from east, 45 degrees each
COMPASS = ('east', 'northeast', 'north', 'northwest', 'west', 'southwest', 'south', 'southeast')


def proximity(distance: int) -> str:
    if distance <= 1:
        return 'adjacent'
    if distance <= 2:
        return 'very near'
    if distance <= 5:
        return 'near'
    return 'far'


def direction(origin: Position, cell: Position) -> str:
    angle = math.degrees(math.atan2(origin[0] - cell[0], cell[1] - origin[1]))
    return COMPASS[int(round(angle / 45.0)) % 8]


def with_article(name: str) -> str:
    return f"{'an' if name[0] in 'aeiou' else 'a'} {name}"


def _describe(glyph: int, cell: Position) -> Optional[str]:
    if glyph in FEATURE_NAMES:
        return FEATURE_NAMES[glyph]
    view = entity_view(glyph, cell)
    if view is None:
        return None
    return view.species if view.kind == EntityKind.MONSTER else ENTITY_NAMES[view.kind]


def to_language(obs: Observation, state: Optional[GameState] = None) -> str:
    """Text rendering: message, one sentence per visible feature, then a status sentence"""
    origin = obs.blstats.pos
    found: List[Tuple[int, Position, str]] = []
    rows, cols = obs.glyphs.shape
    for r in range(rows):
        for c in range(cols):
            glyph = int(obs.glyphs[r, c])
            if glyph == GLYPHS['AGENT']:
                continue
            name = _describe(glyph, (r, c))
            if name is not None:
                found.append((max(abs(r - origin[0]), abs(c - origin[1])), (r, c), name))

    lines = [obs.message] if obs.message else []
    for distance, cell, name in sorted(found):
        lines.append(f"{with_article(name)} {proximity(distance)} {direction(origin, cell)}.")

    stats = obs.blstats
    status = (f"You have {stats.hp} of {stats.max_hp} hit points, hunger {stats.hunger_name}, "
              f"dungeon level {stats.depth}, {stats.gold} gold, turn {stats.turn}, score {stats.score}.")
    if state is not None and state.has_key:
        status += " You carry a key."
    lines.append(status)
    return '\n'.join(lines)
