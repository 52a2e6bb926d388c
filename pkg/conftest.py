import os
import sys

import pytest

# Make the project packages importable from the tests
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from backend.level_generator import level_from_ascii
from shared.constants import TaskKind
from shared.models import TaskSpec


@pytest.fixture
def full_task():
    return TaskSpec(TaskKind.FULL_GAME, max_steps=500, seed=3, levels=3)


@pytest.fixture
def room_task():
    return TaskSpec(TaskKind.ROOM_5X5, max_steps=100, seed=1)


@pytest.fixture
def open_room():
    """7x9 lit room, agent in the middle"""
    return level_from_ascii([
        '---------',
        '-.......-',
        '-.......-',
        '-...@...-',
        '-.......-',
        '-.......-',
        '---------',
    ])
