"""
A* navigation and exploration targets over the agent's known map
"""

import heapq
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from backend.config import NAV_METRIC
from backend.game_whisperer import GameState
from shared.constants import CellKind, EntityKind, MOVES, MOVE_DELTAS, WALKABLE_CELLS
from shared.exceptions import InvalidStart
from shared.models import Path, Position

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2)

Walkable = Callable[[Position], bool]

# closed doors count as passable while planning; the executing skill opens them
PLANNING_CELLS = WALKABLE_CELLS | {CellKind.DOOR_CLOSED}


def octile(a: Position, b: Position) -> float:
    dx, dy = abs(a[1] - b[1]), abs(a[0] - b[0])
    return max(dx, dy) + (SQRT2 - 1) * min(dx, dy)


def chebyshev(a: Position, b: Position) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def edge_cost(u: Position, v: Position, metric: str = NAV_METRIC) -> float:
    if metric == 'turn':
        return 1.0
    return SQRT2 if u[0] != v[0] and u[1] != v[1] else 1.0


def heuristic(a: Position, b: Position, metric: str = NAV_METRIC) -> float:
    return chebyshev(a, b) if metric == 'turn' else octile(a, b)


def path_cost(steps: Sequence[Position], metric: str = NAV_METRIC) -> float:
    """Cost of a step sequence, summed as cardinal count plus diagonal count times its weight"""
    if metric == 'turn':
        return float(len(steps) - 1)
    diagonal = sum(1 for u, v in zip(steps, steps[1:]) if u[0] != v[0] and u[1] != v[1])
    return (len(steps) - 1 - diagonal) + diagonal * SQRT2


def neighbors(cell: Position) -> List[Position]:
    """8-adjacent cells in compass order"""
    return [(cell[0] + MOVE_DELTAS[m][0], cell[1] + MOVE_DELTAS[m][1]) for m in MOVES]


def astar(walkable: Walkable, start: Position, goal: Position,
          metric: str = NAV_METRIC) -> Optional[Path]:
    """Minimum-cost path from start to goal, or None if the goal cannot be reached.

    The walkable predicate must reject out-of-bounds cells. Ties in f are broken
    by larger g first, then by (row, col).
    """
    if not walkable(start):
        raise InvalidStart(start)
    if not walkable(goal):
        return None

    open_set = [(heuristic(start, goal, metric), 0.0, start[0], start[1])]
    came_from: Dict[Position, Position] = {}
    g_score = {start: 0.0}
    closed = set()

    while open_set:
        _, neg_g, row, col = heapq.heappop(open_set)
        current = (row, col)
        if current in closed:
            continue
        if current == goal:
            return _build_path(came_from, goal, metric)
        closed.add(current)

        for neighbor in neighbors(current):
            if neighbor in closed or not walkable(neighbor):
                continue
            tentative = g_score[current] + edge_cost(current, neighbor, metric)
            if tentative < g_score.get(neighbor, math.inf):
                came_from[neighbor] = current
                g_score[neighbor] = tentative
                f = tentative + heuristic(neighbor, goal, metric)
                heapq.heappush(open_set, (f, -tentative, neighbor[0], neighbor[1]))
    return None


def dijkstra(walkable: Walkable, start: Position,
             metric: str = NAV_METRIC) -> Tuple[Dict[Position, float], Dict[Position, Position]]:
    """Distances and parent links from start to every reachable cell"""
    if not walkable(start):
        raise InvalidStart(start)
    distances = {start: 0.0}
    came_from: Dict[Position, Position] = {}
    queue = [(0.0, start[0], start[1])]
    done = set()
    while queue:
        dist, row, col = heapq.heappop(queue)
        current = (row, col)
        if current in done:
            continue
        done.add(current)
        for neighbor in neighbors(current):
            if neighbor in done or not walkable(neighbor):
                continue
            candidate = dist + edge_cost(current, neighbor, metric)
            if candidate < distances.get(neighbor, math.inf):
                distances[neighbor] = candidate
                came_from[neighbor] = current
                heapq.heappush(queue, (candidate, neighbor[0], neighbor[1]))
    return distances, came_from


def _build_path(came_from: Dict[Position, Position], goal: Position, metric: str) -> Path:
    steps = [goal]
    while steps[-1] in came_from:
        steps.append(came_from[steps[-1]])
    steps.reverse()
    return Path(steps=tuple(steps), cost=path_cost(steps, metric))


def walkable_for(state: GameState) -> Walkable:
    """Planning walkability on the state's known map"""
    known = state.known_map
    rows, cols = known.shape
    passable = set(PLANNING_CELLS)
    if state.has_key:
        passable.add(CellKind.DOOR_LOCKED)
    blocked = {e.position for e in state.entities if e.kind == EntityKind.MONSTER}

    def walkable(cell: Position) -> bool:
        r, c = cell
        if not (0 <= r < rows and 0 <= c < cols):
            return False
        return known[r, c] in passable and cell not in blocked

    return walkable


def distance_map(state: GameState, metric: str = NAV_METRIC):
    """Dijkstra from the agent over the known map, memoized on the state"""
    key = f"dijkstra:{metric}"
    if key not in state.cache:
        walkable = walkable_for(state)
        if state.position is None or not walkable(state.position):
            state.cache[key] = ({}, {})
        else:
            state.cache[key] = dijkstra(walkable, state.position, metric)
    return state.cache[key]


def closest_reachable(state: GameState, targets: Sequence[Position],
                      metric: str = NAV_METRIC) -> Optional[Tuple[Position, Path]]:
    """Reachable target with the lowest path cost, ties by (row, col)"""
    distances, came_from = distance_map(state, metric)
    reachable = [t for t in targets if t in distances]
    if not reachable:
        return None
    best = min(reachable, key=lambda t: (round(distances[t], 9), t))
    return best, _build_path(came_from, best, metric)


def farthest_reachable(state: GameState, targets: Sequence[Position],
                       metric: str = NAV_METRIC) -> Optional[Tuple[Position, Path]]:
    distances, came_from = distance_map(state, metric)
    reachable = [t for t in targets if t in distances]
    if not reachable:
        return None
    best = min(reachable, key=lambda t: (-round(distances[t], 9), t))
    return best, _build_path(came_from, best, metric)


def frontier_mask(state: GameState) -> np.ndarray:
    """Explored walkable cells with at least one unexplored in-bounds neighbour.

    A closed door is plannable but never a frontier cell.
    """
    explored = state.explored
    if explored.size == 0:
        return explored.copy()
    padded = np.pad(~explored, 1, constant_values=False)
    rows, cols = explored.shape
    touches_unknown = np.zeros(explored.shape, dtype=bool)
    for dr, dc in MOVE_DELTAS.values():
        touches_unknown |= padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]
    walkable = np.isin(state.known_map, [int(kind) for kind in WALKABLE_CELLS])
    return explored & walkable & touches_unknown


def frontier_targets(state: GameState) -> List[Position]:
    """Frontier cells sorted by octile distance from the agent, then (row, col)"""
    cells = [(int(r), int(c)) for r, c in np.argwhere(frontier_mask(state))]
    origin = state.position or (0, 0)
    return sorted(cells, key=lambda cell: (round(octile(origin, cell), 9), cell))
