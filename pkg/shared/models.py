from dataclasses import dataclass, field
from typing import Optional, List, Dict, Any, Tuple

import numpy as np

from shared.constants import (
    Action, CellKind, EndReason, EntityKind, Hunger, HUNGER_NAMES, OutcomeStatus, TaskKind,
)

Position = Tuple[int, int]


@dataclass(frozen=True)
class TaskSpec:
    """Which environment to build, how long an episode may last and its seed"""
    kind: TaskKind
    max_steps: int
    seed: int = 0
    levels: int = 1
    ascend: bool = False

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.kind == TaskKind.FULL_GAME and self.levels < 2:
            raise ValueError(f"FullGameChallenge needs at least 2 levels, got {self.levels}")

    @property
    def is_goal_task(self) -> bool:
        return self.kind != TaskKind.FULL_GAME

    def with_seed(self, seed: int) -> 'TaskSpec':
        return TaskSpec(self.kind, self.max_steps, seed, self.levels, self.ascend)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'max_steps': self.max_steps,
            'seed': self.seed,
            'levels': self.levels,
            'ascend': self.ascend
        }


@dataclass
class Entity:
    """A monster, pet or item living on a level"""
    id: int
    kind: EntityKind
    position: Position
    species: Optional[str] = None
    hp: int = 0
    hostile: bool = False
    passive: bool = False
    amount: int = 0


@dataclass(frozen=True)
class RoomBox:
    """Room bounds including its wall ring"""
    top: int
    left: int
    bottom: int
    right: int

    def contains(self, pos: Position) -> bool:
        return self.top <= pos[0] <= self.bottom and self.left <= pos[1] <= self.right

    def interior(self) -> List[Position]:
        return [(r, c) for r in range(self.top + 1, self.bottom)
                for c in range(self.left + 1, self.right)]


@dataclass
class LevelMap:
    depth: int
    grid: np.ndarray
    rooms: List[RoomBox]
    spawn: Position
    entities: List[Entity] = field(default_factory=list)
    stairs_down: Optional[Position] = None
    stairs_up: Optional[Position] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    def count(self, kind: CellKind) -> int:
        return int(np.count_nonzero(self.grid == kind))


@dataclass(frozen=True)
class BlStats:
    """Bottom-line statistics"""
    hp: int
    max_hp: int
    hunger: Hunger
    depth: int
    gold: int
    turn: int
    score: int
    pos: Position
    last_prayer_turn: Optional[int] = None

    def to_vector(self) -> List[int]:
        last = -1 if self.last_prayer_turn is None else self.last_prayer_turn
        return [self.pos[0], self.pos[1], self.hp, self.max_hp, int(self.hunger),
                self.depth, self.gold, self.turn, self.score, last]

    @classmethod
    def from_vector(cls, vector) -> 'BlStats':
        row, col, hp, max_hp, hunger, depth, gold, turn, score, last = (int(v) for v in vector)
        return cls(hp=hp, max_hp=max_hp, hunger=Hunger(hunger), depth=depth, gold=gold,
                   turn=turn, score=score, pos=(row, col),
                   last_prayer_turn=None if last < 0 else last)

    @property
    def hunger_name(self) -> str:
        return HUNGER_NAMES[self.hunger]


@dataclass(frozen=True, eq=False)
class Observation:
    glyphs: np.ndarray
    chars: np.ndarray
    message: str
    blstats: BlStats

    @property
    def shape(self) -> Tuple[int, int]:
        return self.glyphs.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, Observation):
            return NotImplemented
        return (np.array_equal(self.glyphs, other.glyphs)
                and np.array_equal(self.chars, other.chars)
                and self.message == other.message
                and self.blstats == other.blstats)


@dataclass(frozen=True, eq=False)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: Dict[str, Any]

    @property
    def reason(self) -> Optional[EndReason]:
        return self.info.get('reason')

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepResult):
            return NotImplemented
        return (self.observation == other.observation and self.reward == other.reward
                and self.done == other.done and self.info == other.info)


@dataclass
class ScoreCounters:
    gold: int = 0
    max_depth: int = 1
    kills: int = 0
    cells_explored: int = 0


@dataclass(frozen=True)
class ScoreEvent:
    """One score-relevant event, logged in turn order"""
    turn: int
    kind: str
    amount: int


@dataclass(frozen=True)
class ThreatSummary:
    adjacent_hostiles: int = 0
    strongest_adjacent_hp: int = 0


@dataclass(frozen=True)
class EntityView:
    """What the observer can tell about an entity from its glyph"""
    kind: EntityKind
    position: Position
    glyph: int
    species: Optional[str] = None
    hostile: bool = False
    passive: bool = False


@dataclass(frozen=True)
class Path:
    steps: Tuple[Position, ...]
    cost: float

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def start(self) -> Position:
        return self.steps[0]

    @property
    def goal(self) -> Position:
        return self.steps[-1]


@dataclass(frozen=True)
class Plan:
    skill_name: str
    target: Optional[Position] = None
    path: Optional[Path] = None
    payload: Any = None


@dataclass(frozen=True)
class Outcome:
    status: OutcomeStatus
    actions_taken: int


@dataclass
class EpisodeStats:
    """Summary of one finished episode"""
    score: int
    turns: int
    max_depth: int
    end_reason: EndReason
    skill_counts: Dict[str, int] = field(default_factory=dict)
    seed: int = 0
    actions: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'score': self.score,
            'turns': self.turns,
            'actions': self.actions,
            'max_depth': self.max_depth,
            'end_reason': self.end_reason.value,
            'skill_counts': dict(sorted(self.skill_counts.items()))
        }


@dataclass
class TrajectoryStep:
    fields: Dict[str, Any]
    action: Action


@dataclass
class TrajectoryRecord:
    """Ordered state-action pairs of one episode"""
    episode_id: int
    seed: int
    keys: Tuple[str, ...]
    steps: List[TrajectoryStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def pairs(self):
        for step in self.steps:
            yield step.fields, step.action


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 32
    learning_rate: float = 0.5
    scheduler_gamma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 < self.scheduler_gamma <= 1:
            raise ValueError(f"scheduler_gamma must be in (0, 1], got {self.scheduler_gamma}")

    def learning_rate_at(self, epoch: int) -> float:
        """Learning rate used during the given 1-based epoch"""
        return self.learning_rate * self.scheduler_gamma ** (epoch - 1)


@dataclass
class RunConfig:
    skill_priority_list: List[str]
    fast_mode: bool = False
    attempts: int = 1
    skill_params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'skill_priority_list': list(self.skill_priority_list),
            'fast_mode': 'on' if self.fast_mode else 'off',
            'attempts': self.attempts
        }
        if self.skill_params:
            data['skill_params'] = dict(self.skill_params)
        return data


@dataclass
class InferenceSummary:
    episodes: List[EpisodeStats]
    mean_score: float
    median_score: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'episodes': [episode.to_dict() for episode in self.episodes],
            'scores': [episode.score for episode in self.episodes],
            'mean_score': self.mean_score,
            'median_score': self.median_score
        }


@dataclass(frozen=True)
class EvaluationResult:
    success_rate: float
    mean_steps: float
    mean_score: float
    successes: int = 0
    episodes: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'success_rate': self.success_rate,
            'mean_steps': self.mean_steps,
            'mean_score': self.mean_score,
            'successes': self.successes,
            'episodes': self.episodes
        }


@dataclass(frozen=True)
class LiveStats:
    """Running numbers of the game in progress"""
    score: int = 0
    turns: int = 0
