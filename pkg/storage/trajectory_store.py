import json
import logging

from shared.constants import Action, TRAJECTORY_FORMAT
from shared.exceptions import TrajectoryFormatError
from shared.models import TrajectoryRecord, TrajectoryStep
from storage.file_io import atomic_writer, read_byte_lines

logger = logging.getLogger(__name__)


def _dump(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(',', ':'))


def dumps(traj: TrajectoryRecord) -> str:
    """One header line, then one line per step"""
    header = {
        'format': TRAJECTORY_FORMAT,
        'episode_id': traj.episode_id,
        'seed': traj.seed,
        'keys': list(traj.keys)
    }
    lines = [_dump(header)]
    for step in traj.steps:
        lines.append(_dump({'action': step.action.name, 'fields': step.fields}))
    return '\n'.join(lines) + '\n'


def _text(line) -> str:
    return line.decode('utf-8') if isinstance(line, bytes) else line


def loads_lines(lines) -> TrajectoryRecord:
    """Parse str or undecoded bytes lines; bad UTF-8 is reported with its line number"""
    if not lines:
        raise TrajectoryFormatError(1, 'missing header')
    try:
        header = json.loads(_text(lines[0]))
        if header.get('format') != TRAJECTORY_FORMAT:
            raise TrajectoryFormatError(1, f"unsupported format {header.get('format')!r}")
        traj = TrajectoryRecord(episode_id=int(header['episode_id']), seed=int(header['seed']),
                                keys=tuple(header['keys']))
    except TrajectoryFormatError:
        raise
    except (ValueError, KeyError, TypeError, AttributeError) as e:
        raise TrajectoryFormatError(1, f"bad header: {e}")

    for line_no, line in enumerate(lines[1:], start=2):
        try:
            record = json.loads(_text(line))
            action = Action[record['action']]
            fields = record['fields']
        except (ValueError, KeyError, TypeError) as e:
            raise TrajectoryFormatError(line_no, f"bad step: {e}")
        if not isinstance(fields, dict) or tuple(sorted(fields)) != traj.keys:
            raise TrajectoryFormatError(line_no, f"step keys differ from header keys {list(traj.keys)}")
        traj.steps.append(TrajectoryStep(fields=fields, action=action))
    return traj


def save(traj: TrajectoryRecord, path: str):
    with atomic_writer(path) as handle:
        handle.write(dumps(traj))
    logger.debug(f"Saved {len(traj)} steps to {path}")


def load(path: str) -> TrajectoryRecord:
    return loads_lines(read_byte_lines(path))
