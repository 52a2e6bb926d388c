import os

from dotenv import load_dotenv

load_dotenv()

# Base directory of the application (backend folder)
BASE_DIR = os.path.dirname(os.path.abspath(__file__))

# Agent configuration file (skill priority list, fast mode, attempts)
CONFIG_PATH = os.getenv('MERA_CONFIG_PATH', os.path.join(BASE_DIR, '..', 'config.json'))

# Logging configuration
LOG_LEVEL = os.getenv('MERA_LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

DEFAULT_SEED = int(os.getenv('MERA_SEED', '0'))

# Dungeon geometry
LEVEL_ROWS = 21
LEVEL_COLS = 50
ROOM_ATTEMPTS = 200
MAX_ROOMS = 8
ROOM_MIN_HEIGHT, ROOM_MAX_HEIGHT = 3, 5
ROOM_MIN_WIDTH, ROOM_MAX_WIDTH = 4, 10
HIDDEN_DOOR_CHANCE = 0.08
HIDDEN_CORRIDOR_CHANCE = 0.08
CLOSED_DOOR_CHANCE = 0.3
GOLD_CHANCE = 0.4
FULL_GAME_LEVELS = 5

# Task step limits
MAX_STEPS = {
    'Room5x5': 100,
    'KeyRoomS5': 150,
    'RoomUltimate15x15': 300,
    'FullGameChallenge': 5000,
}

# Episodes also end once this many actions per allowed turn were submitted
ACTION_BUDGET_FACTOR = 2

# Character and survival
AGENT_MAX_HP = 20
AGENT_DAMAGE = (2, 5)
HUNGER_INTERVAL = 200
REST_REGEN_TURNS = 5
PRAYER_TIMEOUT = 900
ELBERETH_TURNS = 5
SEARCH_REVEAL_CHANCE = 1 / 3
MONSTER_SIGHT = 8

# Score weights
SCORE_DEPTH_BONUS = 50
SCORE_KILL_BONUS = 20
SCORE_EXPLORE_DIVISOR = 10

# Navigation metric: "octile" (diagonals cost sqrt 2) or "turn" (all moves cost 1)
NAV_METRIC = os.getenv('MERA_NAV_METRIC', 'octile')

# Skill thresholds (overridable through the config file's skill_params)
PRAY_HP_FRACTION = 1 / 3
RUN_DISTANCE = 3
RUN_HP_FRACTION = 0.5
BREAK_HP_FRACTION = 0.6
BREAK_MAX_RESTS = 20
SEARCH_CAP = 12
MAX_PLAN_ACTIONS = 200
INTERRUPT_HP_DROP = 0.3

# Agent loop fallback
FALLBACK_SEARCHES = 10
FALLBACK_LIMIT = 50

# Policy and training
CROP_SIZE = 9
RULE_BOOST = 2.0
DEFAULT_EPOCHS = 5
DEFAULT_BATCH_SIZE = 32
DEFAULT_LEARNING_RATE = 0.5
DEFAULT_SCHEDULER_GAMMA = 1.0
GRAD_CHECK_STEP = 1e-5
GRAD_CHECK_FLOOR = 1e-8
CURVATURE_ITERATIONS = 50
SCALE_FLOOR = 1e-8

# Output files
DEFAULT_CHECKPOINT_PATH = os.getenv('MERA_CHECKPOINT_PATH', 'model.merapol')
