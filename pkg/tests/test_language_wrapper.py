import numpy as np

from backend.game_whisperer import GameState, refine
from backend.language_wrapper import direction, proximity, to_language, with_article
from backend.level_generator import level_from_ascii
from backend.rogue_env import CHAR_TABLE, RogueEnv
from shared.constants import Action, CellKind, GLYPHS, Hunger, TaskKind
from shared.models import BlStats, Observation, TaskSpec

STATUS = ('You have 20 of 20 hit points, hunger NotHungry, dungeon level 1, 0 gold, '
          'turn 0, score 0.')


def make_obs(glyphs, pos, message=''):
    glyphs = np.asarray(glyphs, dtype=np.int16)
    stats = BlStats(hp=20, max_hp=20, hunger=Hunger.NOT_HUNGRY, depth=1, gold=0, turn=0, score=0,
                    pos=pos)
    return Observation(glyphs=glyphs, chars=CHAR_TABLE[glyphs], message=message, blstats=stats)


def test_empty_field_gives_message_and_status():
    obs = make_obs(np.zeros((3, 3)), (1, 1), message='Hello.')
    assert to_language(obs) == 'Hello.\n' + STATUS


def test_no_message_line_when_silent():
    assert to_language(make_obs(np.zeros((2, 2)), (0, 0))) == STATUS


def test_staircase_three_cells_east():
    env = RogueEnv()
    obs = env.reset(TaskSpec(TaskKind.FULL_GAME, 50, levels=2),
                    level=level_from_ascii(['-------', '-@..>.-', '-------']))
    assert 'a staircase down near east.' in to_language(obs).split('\n')


def test_features_sorted_by_distance():
    row = [GLYPHS['AGENT'], CellKind.DOOR_CLOSED, CellKind.FLOOR, CellKind.STAIRS_DOWN,
           CellKind.FLOOR, CellKind.FLOOR, CellKind.FLOOR, CellKind.FLOOR, GLYPHS['GOLD']]
    lines = to_language(make_obs([row], (0, 0))).split('\n')

    assert lines == [
        'a closed door adjacent east.',
        'a staircase down near east.',
        'a pile of gold far east.',
        STATUS,
    ]


def test_monsters_and_articles():
    grid = np.full((3, 3), CellKind.FLOOR)
    grid[1, 1] = GLYPHS['AGENT']
    grid[0, 1] = GLYPHS['MONSTER_BASE']
    grid[2, 2] = CellKind.DOOR_OPEN
    lines = to_language(make_obs(grid, (1, 1))).split('\n')

    assert lines[:2] == ['a newt adjacent north.', 'an open door adjacent southeast.']


def test_proximity_buckets():
    assert [proximity(d) for d in (1, 2, 3, 5, 6)] == ['adjacent', 'very near', 'near', 'near', 'far']


def test_compass_directions():
    origin = (5, 5)
    assert direction(origin, (4, 5)) == 'north'
    assert direction(origin, (5, 6)) == 'east'
    assert direction(origin, (4, 6)) == 'northeast'
    assert direction(origin, (6, 4)) == 'southwest'
    assert direction(origin, (5, 0)) == 'west'


def test_article_choice():
    assert with_article('open door') == 'an open door'
    assert with_article('key') == 'a key'


def test_key_carrying_is_mentioned():
    env = RogueEnv()
    level = level_from_ascii(['------', '-@(..-', '------'])
    state = refine(GameState.empty(), env.reset(TaskSpec(TaskKind.FULL_GAME, 50, levels=2),
                                                level=level))
    obs = env.step(Action.E).observation
    state = refine(state, obs, Action.E)

    assert to_language(obs, state).endswith('You carry a key.')


def test_rendering_is_pure(full_task):
    obs = RogueEnv().reset(full_task)
    assert to_language(obs) == to_language(obs)
    assert to_language(obs) == to_language(RogueEnv().reset(full_task))
