import logging
from typing import Any, Dict, Iterable, Optional

from backend.game_whisperer import GameState
from backend.language_wrapper import to_language
from shared.constants import Action, OBSERVATION_KEYS
from shared.exceptions import InvalidValue, KeyMismatch
from shared.models import Observation, StepResult, TrajectoryRecord, TrajectoryStep

logger = logging.getLogger(__name__)


def normalize_keys(keys: Iterable[str]) -> tuple:
    """Sorted, de-duplicated observation key set; rejects empty or unknown keys"""
    keys = tuple(sorted(set(keys)))
    if not keys:
        raise InvalidValue('keys_to_save', 'at least one observation key is required')
    unknown = [key for key in keys if key not in OBSERVATION_KEYS]
    if unknown:
        raise InvalidValue('keys_to_save', f"unknown observation keys {unknown}")
    return keys


def new_trajectory(episode_id: int, seed: int, keys: Iterable[str]) -> TrajectoryRecord:
    return TrajectoryRecord(episode_id=episode_id, seed=seed, keys=normalize_keys(keys))


def observation_fields(obs: Observation, keys: Iterable[str],
                       state: Optional[GameState] = None) -> Dict[str, Any]:
    """The selected observation fields as plain JSON-ready values"""
    fields: Dict[str, Any] = {}
    for key in keys:
        if key == 'glyphs':
            fields[key] = obs.glyphs.astype(int).tolist()
        elif key == 'chars':
            fields[key] = obs.chars.astype(int).tolist()
        elif key == 'message':
            fields[key] = obs.message
        elif key == 'blstats':
            fields[key] = obs.blstats.to_vector()
        elif key == 'language':
            fields[key] = to_language(obs, state)
    return fields


def record_step(traj: TrajectoryRecord, obs: Observation, action: Action, keys: Iterable[str],
                state: Optional[GameState] = None) -> TrajectoryRecord:
    """Append one (state, action) pair holding exactly the trajectory's keys"""
    keys = tuple(sorted(set(keys)))
    if keys != traj.keys:
        raise KeyMismatch(traj.keys, keys)
    traj.steps.append(TrajectoryStep(fields=observation_fields(obs, keys, state), action=Action(action)))
    return traj


class TrajectoryRecorder:
    """Step observer that labels each turn-consuming action with the observation it answered"""

    def __init__(self, traj: TrajectoryRecord):
        self.traj = traj

    def __call__(self, state: GameState, action: Action, payload: Optional[str],
                 result: StepResult, consumed: bool):
        if consumed:
            record_step(self.traj, state.current_obs, action, self.traj.keys, state)
