class MeraError(Exception):
    """Base class for every error raised by the framework"""


class GameError(MeraError):
    pass


class EpisodeFinished(GameError):
    def __init__(self, reason=None):
        super().__init__(f"Episode already finished ({reason})" if reason else "Episode already finished")
        self.reason = reason


class IllegalAction(GameError):
    def __init__(self, action):
        super().__init__(f"Action not in the action set: {action!r}")
        self.action = action


class StateError(MeraError):
    pass


class DimensionMismatch(StateError):
    def __init__(self, expected, actual):
        super().__init__(f"Dimension mismatch: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class NavigationError(MeraError):
    pass


class InvalidStart(NavigationError):
    def __init__(self, start):
        super().__init__(f"Start cell {start} is not walkable")
        self.start = start


class NoLegalMove(NavigationError):
    pass


class SkillError(MeraError):
    pass


class UnknownSkill(SkillError):
    def __init__(self, name):
        super().__init__(f"Unknown skill: {name}")
        self.name = name


class DuplicateName(SkillError):
    def __init__(self, name):
        super().__init__(f"Skill already registered: {name}")
        self.name = name


class TrajectoryError(MeraError):
    pass


class KeyMismatch(TrajectoryError):
    def __init__(self, expected, actual):
        super().__init__(f"Observation keys {sorted(actual)} differ from trajectory keys {sorted(expected)}")
        self.expected = expected
        self.actual = actual


class TrajectoryFormatError(TrajectoryError):
    def __init__(self, line_no, detail):
        super().__init__(f"Malformed trajectory at line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


class StorageError(MeraError):
    pass


class TrainingError(MeraError):
    pass


class EmptyDataset(TrainingError):
    def __init__(self):
        super().__init__("Dataset contains no state-action pairs")


class ActionOutOfSpace(TrainingError):
    def __init__(self, action):
        super().__init__(f"Action {action!r} is outside the policy action space")
        self.action = action


class MissingKeys(TrainingError):
    def __init__(self, missing):
        super().__init__(f"Dataset steps are missing keys: {sorted(missing)}")
        self.missing = missing


class UnknownTrainer(TrainingError):
    def __init__(self, name):
        super().__init__(f"Unknown training algorithm: {name}")
        self.name = name


class CheckpointFormatError(TrainingError):
    def __init__(self, line_no, detail):
        super().__init__(f"Malformed checkpoint at line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


class ConfigError(MeraError):
    pass


class MalformedJson(ConfigError):
    def __init__(self, detail):
        super().__init__(f"Malformed JSON: {detail}")
        self.detail = detail


class UnknownSkillName(ConfigError):
    def __init__(self, skill):
        super().__init__(f"Unknown skill name in skill_priority_list: {skill}")
        self.skill = skill


class InvalidValue(ConfigError):
    def __init__(self, key, detail):
        super().__init__(f"Invalid value for '{key}': {detail}")
        self.key = key
        self.detail = detail
