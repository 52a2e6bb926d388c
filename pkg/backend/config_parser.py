import json
import logging
from typing import Any, Dict, Iterable, Optional

from backend.skills import SkillParams
from shared.constants import SKILL_NAMES
from shared.exceptions import InvalidValue, MalformedJson, UnknownSkillName
from shared.models import RunConfig

logger = logging.getLogger(__name__)

CONFIG_KEYS = ('skill_priority_list', 'fast_mode', 'attempts', 'skill_params')
FAST_MODE_VALUES = {'on': True, 'off': False}


class ConfigParser:
    """Parse the agent's JSON configuration into a RunConfig"""

    def __init__(self, skill_names: Optional[Iterable[str]] = None):
        self.skill_names = frozenset(SKILL_NAMES if skill_names is None else skill_names)

    def parse(self, text: str) -> RunConfig:
        try:
            data = json.loads(text)
        except (TypeError, ValueError) as e:
            raise MalformedJson(str(e))
        if not isinstance(data, dict):
            raise MalformedJson(f"top level must be an object, got {type(data).__name__}")

        unknown = [key for key in data if key not in CONFIG_KEYS]
        if unknown:
            raise InvalidValue(unknown[0], 'unknown configuration key')

        skill_params = self._parse_skill_params(data.get('skill_params', {}))
        config = RunConfig(
            skill_priority_list=self._parse_priorities(data),
            fast_mode=self._parse_fast_mode(data.get('fast_mode', 'off')),
            attempts=self._parse_attempts(data.get('attempts', 1)),
            skill_params=skill_params
        )
        logger.debug(f"Parsed config: {len(config.skill_priority_list)} skills, "
                     f"fast_mode={config.fast_mode}, attempts={config.attempts}")
        return config

    def _parse_priorities(self, data: Dict[str, Any]):
        if 'skill_priority_list' not in data:
            raise InvalidValue('skill_priority_list', 'missing')
        names = data['skill_priority_list']
        if not isinstance(names, list) or not names:
            raise InvalidValue('skill_priority_list', 'expected a non-empty list of skill names')
        seen = set()
        for name in names:
            if not isinstance(name, str):
                raise InvalidValue('skill_priority_list', f"skill names must be strings, got {name!r}")
            if name not in self.skill_names:
                raise UnknownSkillName(name)
            if name in seen:
                raise InvalidValue('skill_priority_list', f"duplicate skill {name}")
            seen.add(name)
        return list(names)

    @staticmethod
    def _parse_fast_mode(value: Any) -> bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.strip().lower() in FAST_MODE_VALUES:
            return FAST_MODE_VALUES[value.strip().lower()]
        raise InvalidValue('fast_mode', f"expected 'on' or 'off', got {value!r}")

    @staticmethod
    def _parse_attempts(value: Any) -> int:
        # "5" and 5 are both accepted
        if isinstance(value, bool):
            raise InvalidValue('attempts', f"expected a positive integer, got {value!r}")
        if isinstance(value, str) and value.strip().isdigit():
            value = int(value.strip())
        if not isinstance(value, int) or value < 1:
            raise InvalidValue('attempts', f"expected a positive integer, got {value!r}")
        return value

    @staticmethod
    def _parse_skill_params(value: Any) -> Dict[str, Any]:
        if not isinstance(value, dict):
            raise InvalidValue('skill_params', 'expected an object')
        SkillParams.from_dict(value)
        return dict(value)


def parse_config(text: str) -> RunConfig:
    return ConfigParser().parse(text)


def serialize_config(config: RunConfig) -> str:
    return json.dumps(config.to_dict(), indent=4) + '\n'


def skill_params_of(config: RunConfig) -> SkillParams:
    return SkillParams.from_dict(config.skill_params)
