from enum import Enum, IntEnum


class CellKind(IntEnum):
    """Terrain codes. BLANK marks a cell that is not currently in view."""
    BLANK = 0
    FLOOR = 1
    WALL = 2
    STONE = 3
    CORRIDOR = 4
    DOOR_CLOSED = 5
    DOOR_OPEN = 6
    DOOR_LOCKED = 7
    STAIRS_DOWN = 8
    STAIRS_UP = 9
    HIDDEN_CORRIDOR = 10
    HIDDEN_DOOR = 11


class Action(IntEnum):
    N = 0
    NE = 1
    E = 2
    SE = 3
    S = 4
    SW = 5
    W = 6
    NW = 7
    SEARCH = 8
    EAT = 9
    PRAY = 10
    ENGRAVE = 11
    DESCEND = 12
    ASCEND = 13
    OPEN = 14
    PICKUP = 15
    WAIT = 16


class Hunger(IntEnum):
    SATIATED = 0
    NOT_HUNGRY = 1
    HUNGRY = 2
    WEAK = 3
    FAINTING = 4


class EntityKind(str, Enum):
    MONSTER = 'monster'
    FOOD = 'food'
    GOLD = 'gold'
    KEY = 'key'
    PET = 'pet'


class TaskKind(str, Enum):
    ROOM_5X5 = 'Room5x5'
    KEY_ROOM_S5 = 'KeyRoomS5'
    ROOM_ULTIMATE_15X15 = 'RoomUltimate15x15'
    FULL_GAME = 'FullGameChallenge'


class EndReason(str, Enum):
    GOAL = 'Goal'
    DEATH = 'Death'
    STEP_LIMIT = 'StepLimit'
    ASCENDED = 'Ascended'
    FAILED = 'Failed'


class OutcomeStatus(str, Enum):
    COMPLETED = 'Completed'
    INTERRUPTED = 'Interrupted'
    FAILED = 'Failed'


class AtomicCommand(str, Enum):
    PRAY_CONFIRMED = 'PrayConfirmed'
    ENGRAVE_ELBERETH = 'EngraveElbereth'
    EAT_NEAREST = 'EatNearest'
    DESCEND_HERE = 'DescendHere'
    ASCEND_HERE = 'AscendHere'
    OPEN_ADJACENT_DOOR = 'OpenAdjacentDoor'


# Compass moves in tie-break order, with (d_row, d_col) offsets
MOVES = (Action.N, Action.NE, Action.E, Action.SE, Action.S, Action.SW, Action.W, Action.NW)

MOVE_DELTAS = {
    Action.N: (-1, 0),
    Action.NE: (-1, 1),
    Action.E: (0, 1),
    Action.SE: (1, 1),
    Action.S: (1, 0),
    Action.SW: (1, -1),
    Action.W: (0, -1),
    Action.NW: (-1, -1),
}

DELTA_TO_MOVE = {delta: move for move, delta in MOVE_DELTAS.items()}

COMMANDS = (
    Action.SEARCH, Action.EAT, Action.PRAY, Action.ENGRAVE, Action.DESCEND,
    Action.ASCEND, Action.OPEN, Action.PICKUP, Action.WAIT,
)

ACTION_SET = frozenset(MOVES + COMMANDS)

# Glyph codes: terrain uses the CellKind values, entities start at 20
GLYPHS = {
    'AGENT': 20,
    'PET': 21,
    'FOOD': 22,
    'GOLD': 23,
    'KEY': 24,
    'MONSTER_BASE': 40,
}

# Monster species: glyph offset is the table order
SPECIES = {
    'newt': {'char': 'n', 'hp': 2, 'damage': 1, 'min_depth': 1, 'hostile': True, 'passive': False},
    'jackal': {'char': 'j', 'hp': 3, 'damage': 2, 'min_depth': 1, 'hostile': True, 'passive': False},
    'sewer rat': {'char': 'r', 'hp': 4, 'damage': 2, 'min_depth': 1, 'hostile': True, 'passive': False},
    'lichen': {'char': 'F', 'hp': 4, 'damage': 0, 'min_depth': 1, 'hostile': True, 'passive': True},
    'gnome': {'char': 'G', 'hp': 5, 'damage': 2, 'min_depth': 1, 'hostile': False, 'passive': False},
    'goblin': {'char': 'o', 'hp': 6, 'damage': 3, 'min_depth': 2, 'hostile': True, 'passive': False},
    'floating eye': {'char': 'e', 'hp': 5, 'damage': 0, 'min_depth': 2, 'hostile': True, 'passive': True},
    'giant ant': {'char': 'a', 'hp': 8, 'damage': 4, 'min_depth': 3, 'hostile': True, 'passive': False},
    'hill orc': {'char': 'O', 'hp': 10, 'damage': 4, 'min_depth': 3, 'hostile': True, 'passive': False},
}

SPECIES_NAMES = tuple(SPECIES)

PET_SPECIES = 'little dog'

# Display characters, one distinct character per glyph
GLYPH_CHARS = {
    CellKind.BLANK: ' ',
    CellKind.FLOOR: '.',
    CellKind.WALL: '-',
    CellKind.STONE: '`',
    CellKind.CORRIDOR: '#',
    CellKind.DOOR_CLOSED: '+',
    CellKind.DOOR_OPEN: '|',
    CellKind.DOOR_LOCKED: '=',
    CellKind.STAIRS_DOWN: '>',
    CellKind.STAIRS_UP: '<',
    GLYPHS['AGENT']: '@',
    GLYPHS['PET']: 'd',
    GLYPHS['FOOD']: '%',
    GLYPHS['GOLD']: '$',
    GLYPHS['KEY']: '(',
}
for _index, _name in enumerate(SPECIES_NAMES):
    GLYPH_CHARS[GLYPHS['MONSTER_BASE'] + _index] = SPECIES[_name]['char']

CHAR_GLYPHS = {ord(char): int(glyph) for glyph, char in GLYPH_CHARS.items()}

# Hidden terrain as the observer sees it
DISGUISES = {
    CellKind.HIDDEN_CORRIDOR: CellKind.STONE,
    CellKind.HIDDEN_DOOR: CellKind.WALL,
}

WALKABLE_CELLS = frozenset({
    CellKind.FLOOR, CellKind.CORRIDOR, CellKind.DOOR_OPEN,
    CellKind.STAIRS_DOWN, CellKind.STAIRS_UP,
})

DOOR_CELLS = frozenset({CellKind.DOOR_CLOSED, CellKind.DOOR_OPEN, CellKind.DOOR_LOCKED})

# Closed set of messages the simulator emits
MESSAGES = {
    'WALL': "It's a wall.",
    'STONE': "It's solid stone.",
    'DOOR_CLOSED': 'The door is closed.',
    'DOOR_LOCKED': 'This door is locked.',
    'DOOR_OPENS': 'The door opens.',
    'DOOR_UNLOCKED': 'You unlock and open the door.',
    'NO_DOOR': 'You see no door there.',
    'STAIRS_DOWN_HERE': 'There is a staircase down here.',
    'STAIRS_UP_HERE': 'There is a staircase up here.',
    'SEE_GOLD': 'You see here {amount} gold pieces.',
    'SEE_FOOD': 'You see here a food ration.',
    'PICK_KEY': 'You pick up a key.',
    'PICK_GOLD': '{amount} gold pieces.',
    'NOTHING_TO_PICK': 'There is nothing here to pick up.',
    'EAT': 'This food is delicious!',
    'NOTHING_TO_EAT': "You don't have anything to eat.",
    'PRAY_OK': 'You feel a hopeful feeling.',
    'PRAY_FAIL': 'You feel that Mera is displeased.',
    'ENGRAVE_ELBERETH': 'You engrave Elbereth into the floor.',
    'ENGRAVE_OTHER': 'You write in the dust with your fingertip.',
    'FIND_PASSAGE': 'You find a hidden passage.',
    'FIND_DOOR': 'You find a hidden door.',
    'HIT': 'You hit the {species}.',
    'KILL': 'You kill the {species}!',
    'MONSTER_HITS': 'The {species} hits!',
    'MONSTER_FLEES': 'The {species} turns to flee.',
    'IN_THE_WAY': 'You stop. The {species} is in your way.',
    'SWAP_PET': 'You swap places with your little dog.',
    'PET_EATS': 'Your little dog eats a food ration.',
    'DESCEND': 'You descend the staircase.',
    'ASCEND': 'You climb up the stairs.',
    'CANT_DESCEND': "You can't go down here.",
    'CANT_ASCEND': "You can't go up here.",
    'SURFACE_PULL': 'You feel the pull of the surface.',
    'HUNGRY': 'You are beginning to feel hungry.',
    'WEAK': 'You feel weak now.',
    'FAINTING': 'You faint from lack of food.',
    'DIE': 'You die...',
    'GOAL': 'You reach the staircase. Well done!',
    'ASCENDED': 'You escape the dungeon!',
}

HUNGER_MESSAGES = {
    Hunger.HUNGRY: MESSAGES['HUNGRY'],
    Hunger.WEAK: MESSAGES['WEAK'],
    Hunger.FAINTING: MESSAGES['FAINTING'],
}

HUNGER_NAMES = {
    Hunger.SATIATED: 'Satiated',
    Hunger.NOT_HUNGRY: 'NotHungry',
    Hunger.HUNGRY: 'Hungry',
    Hunger.WEAK: 'Weak',
    Hunger.FAINTING: 'Fainting',
}

# Skill catalog names, in the sample configuration's priority order
SKILL_NAMES = (
    'Pray', 'Eat', 'Elbereth', 'Run', 'Break', 'Fight', 'Gold',
    'StairsDescend', 'StairsAscend', 'ExploreClosest', 'Horizon', 'Unseen',
    'HiddenRoom', 'HiddenCorridor', 'RandomWalk', 'NeuralWalk', 'BCWalk',
)

OBSERVATION_KEYS = ('blstats', 'chars', 'glyphs', 'language', 'message')

# Policy input classes for the egocentric crop
GLYPH_CLASSES = {
    'OUT_OF_BOUNDS': 0,
    'BLANK': 1,
    'FLOOR': 2,
    'WALL': 3,
    'STONE': 4,
    'CORRIDOR': 5,
    'DOOR_CLOSED': 6,
    'DOOR_OPEN': 7,
    'DOOR_LOCKED': 8,
    'STAIRS_DOWN': 9,
    'STAIRS_UP': 10,
    'AGENT': 11,
    'PET': 12,
    'FOOD': 13,
    'GOLD': 14,
    'KEY': 15,
    'HOSTILE': 16,
    'HARMLESS': 17,
}

TRAJECTORY_FORMAT = 'meratrj-1'
CHECKPOINT_FORMAT = 'merapol-1'
