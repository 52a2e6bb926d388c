import logging
import random
from typing import Dict, List, Optional, Sequence

import numpy as np

from backend.config import (
    LEVEL_ROWS, LEVEL_COLS, ROOM_ATTEMPTS, MAX_ROOMS, ROOM_MIN_HEIGHT, ROOM_MAX_HEIGHT,
    ROOM_MIN_WIDTH, ROOM_MAX_WIDTH, HIDDEN_DOOR_CHANCE, HIDDEN_CORRIDOR_CHANCE,
    CLOSED_DOOR_CHANCE, GOLD_CHANCE,
)
from shared.constants import CellKind, EntityKind, MOVES, MOVE_DELTAS, PET_SPECIES, SPECIES, TaskKind
from shared.models import Entity, LevelMap, Position, RoomBox, TaskSpec
from shared.seeding import rng_stream

logger = logging.getLogger(__name__)

ULTIMATE_SPECIES = ('newt', 'jackal', 'sewer rat', 'goblin')


def generate_level(seed: int, depth: int, params: TaskSpec) -> LevelMap:
    """Build the level for (seed, depth, task). Same inputs give the same level."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")

    rng = rng_stream(seed, f"level:{params.kind.value}:{depth}")
    if params.kind == TaskKind.ROOM_5X5:
        return _room_level(rng, size=5, monsters=0)
    if params.kind == TaskKind.ROOM_ULTIMATE_15X15:
        return _room_level(rng, size=15, monsters=3)
    if params.kind == TaskKind.KEY_ROOM_S5:
        return _key_room_level(rng)
    return DungeonBuilder(rng, depth, params).build()


def _room_level(rng: random.Random, size: int, monsters: int) -> LevelMap:
    grid = np.full((size + 2, size + 2), CellKind.WALL, dtype=np.int8)
    box = RoomBox(0, 0, size + 1, size + 1)
    for r, c in box.interior():
        grid[r, c] = CellKind.FLOOR

    spawn, goal = rng.sample(box.interior(), 2)
    grid[goal] = CellKind.STAIRS_DOWN

    entities = []
    free = [cell for cell in box.interior()
            if cell not in (spawn, goal) and _chebyshev(cell, spawn) > 2]
    for index, cell in enumerate(rng.sample(free, min(monsters, len(free)))):
        entities.append(_monster(1000 + index, rng.choice(ULTIMATE_SPECIES), cell))

    return LevelMap(depth=1, grid=grid, rooms=[box], spawn=spawn, entities=entities,
                    stairs_down=goal)


def _key_room_level(rng: random.Random) -> LevelMap:
    """Outer 5x5 room holding the key, inner 3x5 room behind a locked door holding the goal"""
    grid = np.full((7, 11), CellKind.WALL, dtype=np.int8)
    outer = RoomBox(0, 0, 6, 6)
    inner = RoomBox(0, 6, 6, 10)
    for r, c in outer.interior() + inner.interior():
        grid[r, c] = CellKind.FLOOR

    door = (rng.randint(1, 5), 6)
    grid[door] = CellKind.DOOR_LOCKED
    spawn, key = rng.sample(outer.interior(), 2)
    goal = rng.choice(inner.interior())
    grid[goal] = CellKind.STAIRS_DOWN

    entities = [Entity(id=1000, kind=EntityKind.KEY, position=key)]
    return LevelMap(depth=1, grid=grid, rooms=[outer, inner], spawn=spawn, entities=entities,
                    stairs_down=goal)


class DungeonBuilder:
    """Rooms joined by corridors, with stairs, items and monsters"""

    def __init__(self, rng: random.Random, depth: int, params: TaskSpec,
                 rows: int = LEVEL_ROWS, cols: int = LEVEL_COLS):
        self.rng = rng
        self.depth = depth
        self.params = params
        self.rows = rows
        self.cols = cols
        self.grid = np.full((rows, cols), CellKind.STONE, dtype=np.int8)
        self.rooms: List[RoomBox] = []
        self.entities: List[Entity] = []
        self._occupied = set()

    def build(self) -> LevelMap:
        self._place_rooms()
        ordered = sorted(self.rooms, key=lambda box: (box.left, box.top))
        for first, second in zip(ordered, ordered[1:]):
            self._join(first, second)
        if len(ordered) > 2 and self.rng.random() < 0.5:
            i = self.rng.randrange(len(ordered) - 2)
            self._join(ordered[i], ordered[i + 2])

        stairs_up = stairs_down = None
        if self.depth > 1 or self.params.ascend:
            stairs_up = self._pick_cell(self.rooms)
            self.grid[stairs_up] = CellKind.STAIRS_UP
        if self.depth < self.params.levels:
            others = [box for box in self.rooms
                      if stairs_up is None or not box.contains(stairs_up)]
            stairs_down = self._pick_cell(others or self.rooms)
            self.grid[stairs_down] = CellKind.STAIRS_DOWN

        spawn = stairs_up if stairs_up is not None else self._pick_cell(self.rooms)

        self._populate(spawn)
        logger.debug(f"Generated depth {self.depth}: {len(self.rooms)} rooms, "
                     f"{len(self.entities)} entities")
        return LevelMap(depth=self.depth, grid=self.grid, rooms=self.rooms, spawn=spawn,
                        entities=self.entities, stairs_down=stairs_down, stairs_up=stairs_up)

    def _place_rooms(self):
        for _ in range(ROOM_ATTEMPTS):
            if len(self.rooms) >= MAX_ROOMS:
                break
            height = self.rng.randint(ROOM_MIN_HEIGHT, ROOM_MAX_HEIGHT)
            width = self.rng.randint(ROOM_MIN_WIDTH, ROOM_MAX_WIDTH)
            top = self.rng.randint(1, self.rows - height - 3)
            left = self.rng.randint(1, self.cols - width - 3)
            box = RoomBox(top, left, top + height + 1, left + width + 1)
            if any(self._too_close(box, other) for other in self.rooms):
                continue
            self.rooms.append(box)
            self.grid[box.top:box.bottom + 1, box.left:box.right + 1] = CellKind.WALL
            self.grid[box.top + 1:box.bottom, box.left + 1:box.right] = CellKind.FLOOR

    @staticmethod
    def _too_close(a: RoomBox, b: RoomBox, margin: int = 3) -> bool:
        return not (a.right + margin <= b.left or b.right + margin <= a.left
                    or a.bottom + margin <= b.top or b.bottom + margin <= a.top)

    def _join(self, a: RoomBox, b: RoomBox):
        rng = self.rng
        if a.right + 3 <= b.left or b.right + 3 <= a.left:
            if b.right < a.left:
                a, b = b, a
            door_a = (rng.randint(a.top + 1, a.bottom - 1), a.right)
            door_b = (rng.randint(b.top + 1, b.bottom - 1), b.left)
            start, end = (door_a[0], door_a[1] + 1), (door_b[0], door_b[1] - 1)
            mid = rng.randint(start[1], end[1])
            route = (_line(start, (start[0], mid)) + _line((start[0], mid), (end[0], mid))
                     + _line((end[0], mid), end))
        else:
            if b.bottom < a.top:
                a, b = b, a
            door_a = (a.bottom, rng.randint(a.left + 1, a.right - 1))
            door_b = (b.top, rng.randint(b.left + 1, b.right - 1))
            start, end = (door_a[0] + 1, door_a[1]), (door_b[0] - 1, door_b[1])
            mid = rng.randint(start[0], end[0])
            route = (_line(start, (mid, start[1])) + _line((mid, start[1]), (mid, end[1]))
                     + _line((mid, end[1]), end))

        for door in (door_a, door_b):
            if self.grid[door] == CellKind.WALL:
                self.grid[door] = self._door_kind()

        carved = []
        for cell in route:
            kind = self.grid[cell]
            if kind == CellKind.STONE:
                self.grid[cell] = CellKind.CORRIDOR
                carved.append(cell)
            elif kind == CellKind.WALL:
                # corridor cuts through another room: leave a doorway
                self.grid[cell] = CellKind.DOOR_OPEN

        if len(carved) >= 3 and rng.random() < HIDDEN_CORRIDOR_CHANCE:
            self.grid[rng.choice(carved[1:-1])] = CellKind.HIDDEN_CORRIDOR

    def _door_kind(self) -> CellKind:
        roll = self.rng.random()
        if roll < HIDDEN_DOOR_CHANCE:
            return CellKind.HIDDEN_DOOR
        if roll < HIDDEN_DOOR_CHANCE + CLOSED_DOOR_CHANCE:
            return CellKind.DOOR_CLOSED
        return CellKind.DOOR_OPEN

    def _free_cell(self, box: RoomBox, avoid: Optional[Position] = None,
                   min_distance: int = 0) -> Optional[Position]:
        cells = [cell for cell in box.interior()
                 if cell not in self._occupied and self.grid[cell] == CellKind.FLOOR
                 and (avoid is None or _chebyshev(cell, avoid) > min_distance)]
        return self.rng.choice(cells) if cells else None

    def _pick_cell(self, boxes: List[RoomBox]) -> Position:
        """Reserve a free floor cell, trying the boxes in random order"""
        order = list(boxes)
        self.rng.shuffle(order)
        for box in order:
            cell = self._free_cell(box)
            if cell is not None:
                self._occupied.add(cell)
                return cell
        raise RuntimeError("No free floor cell left on the level")

    def _populate(self, spawn: Position):
        rng = self.rng
        next_id = self.depth * 1000

        for box in self.rooms:
            if rng.random() < GOLD_CHANCE:
                cell = self._free_cell(box)
                if cell is not None:
                    amount = rng.randint(5, 10 + 15 * self.depth)
                    self._add(Entity(id=next_id, kind=EntityKind.GOLD, position=cell, amount=amount))
                    next_id += 1

        for _ in range(rng.randint(1, 2)):
            cell = self._free_cell(rng.choice(self.rooms))
            if cell is not None:
                self._add(Entity(id=next_id, kind=EntityKind.FOOD, position=cell))
                next_id += 1

        eligible = [name for name, info in SPECIES.items() if info['min_depth'] <= self.depth]
        for _ in range(2 + self.depth):
            cell = self._free_cell(rng.choice(self.rooms), avoid=spawn, min_distance=4)
            if cell is not None:
                self._add(_monster(next_id, rng.choice(eligible), cell))
                next_id += 1

        if self.depth == 1:
            for move in MOVES:
                dr, dc = MOVE_DELTAS[move]
                cell = (spawn[0] + dr, spawn[1] + dc)
                if self.grid[cell] == CellKind.FLOOR and cell not in self._occupied:
                    self._add(Entity(id=next_id, kind=EntityKind.PET, position=cell,
                                     species=PET_SPECIES, hp=6))
                    break

    def _add(self, entity: Entity):
        self.entities.append(entity)
        self._occupied.add(entity.position)


def _monster(entity_id: int, species: str, cell: Position) -> Entity:
    info = SPECIES[species]
    return Entity(id=entity_id, kind=EntityKind.MONSTER, position=cell, species=species,
                  hp=info['hp'], hostile=info['hostile'], passive=info['passive'])


def _line(a: Position, b: Position) -> List[Position]:
    """Straight orthogonal run from a to b inclusive"""
    (r0, c0), (r1, c1) = a, b
    if r0 == r1:
        step = 1 if c1 >= c0 else -1
        return [(r0, c) for c in range(c0, c1 + step, step)]
    step = 1 if r1 >= r0 else -1
    return [(r, c0) for r in range(r0, r1 + step, step)]


def _chebyshev(a: Position, b: Position) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


ASCII_TERRAIN = {
    '.': CellKind.FLOOR,
    '-': CellKind.WALL,
    '`': CellKind.STONE,
    ' ': CellKind.STONE,
    '#': CellKind.CORRIDOR,
    '+': CellKind.DOOR_CLOSED,
    '|': CellKind.DOOR_OPEN,
    '=': CellKind.DOOR_LOCKED,
    '>': CellKind.STAIRS_DOWN,
    '<': CellKind.STAIRS_UP,
    'S': CellKind.HIDDEN_CORRIDOR,
    'H': CellKind.HIDDEN_DOOR,
}

ASCII_ITEMS = {'$': EntityKind.GOLD, '%': EntityKind.FOOD, '(': EntityKind.KEY}


def level_from_ascii(rows: Sequence[str], depth: int = 1, rooms: Optional[List[RoomBox]] = None,
                     gold_amount: int = 10) -> LevelMap:
    """Hand-drawn level; '@' marks the spawn, 'd' the pet, species letters monsters.

    Without explicit rooms the whole map counts as one lit room.
    """
    species_by_char: Dict[str, str] = {info['char']: name for name, info in SPECIES.items()}
    height, width = len(rows), max(len(row) for row in rows)
    grid = np.full((height, width), CellKind.STONE, dtype=np.int8)
    entities = []
    spawn = None
    for r, row in enumerate(rows):
        for c, char in enumerate(row):
            cell = (r, c)
            entity_id = 1000 * depth + len(entities)
            if char in ASCII_TERRAIN:
                grid[cell] = ASCII_TERRAIN[char]
                continue
            grid[cell] = CellKind.FLOOR
            if char == '@':
                spawn = cell
            elif char in ASCII_ITEMS:
                kind = ASCII_ITEMS[char]
                entities.append(Entity(id=entity_id, kind=kind, position=cell,
                                       amount=gold_amount if kind == EntityKind.GOLD else 0))
            elif char == 'd':
                entities.append(Entity(id=entity_id, kind=EntityKind.PET, position=cell,
                                       species=PET_SPECIES, hp=6))
            elif char in species_by_char:
                entities.append(_monster(entity_id, species_by_char[char], cell))
            else:
                raise ValueError(f"Unknown map character {char!r} at {cell}")
    if spawn is None:
        raise ValueError("Map has no '@' spawn")

    stairs_down = _find(grid, CellKind.STAIRS_DOWN)
    stairs_up = _find(grid, CellKind.STAIRS_UP)
    rooms = rooms if rooms is not None else [RoomBox(0, 0, height - 1, width - 1)]
    return LevelMap(depth=depth, grid=grid, rooms=rooms, spawn=spawn, entities=entities,
                    stairs_down=stairs_down, stairs_up=stairs_up)


def _find(grid: np.ndarray, kind: CellKind) -> Optional[Position]:
    cells = np.argwhere(grid == kind)
    return (int(cells[0][0]), int(cells[0][1])) if len(cells) else None
