import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, List, Optional

import tomli

from spherot.common import paths
from spherot.core.err import MissingConfigurationField, InvalidConfiguration

log = logging.getLogger(__name__)


class Config:

    def __init__(self, field_path: str, data: Mapping):
        self.field_path = field_path
        self._data = data

    def get(self, key: str, default: Any = None) -> Any:
        value = self._data.get(key, default)
        return self._convert_value(f"{self.field_path}.{key}", value)

    def get_float(self, key: str, default: Optional[float] = None) -> Optional[float]:
        value = self.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidConfiguration(f"`{self.field_path}.{key}` must be a number, not {type(value).__name__}")
        return float(value)

    def get_list(self, key: str) -> List:
        value = self._data.get(key)
        if value is None:
            return []
        if isinstance(value, str):
            raise InvalidConfiguration(f"`{self.field_path}.{key}` must be a list, not a string")
        if not isinstance(value, Iterable):
            raise InvalidConfiguration(f"`{self.field_path}.{key}` must be iterable")
        return [self._convert_value(f"{self.field_path}.{key}[{i}]", item) for i, item in enumerate(value)]

    def __getitem__(self, key: str) -> Any:
        if key not in self._data:
            raise MissingConfigurationField(f"{self.field_path}.{key}")
        return self._convert_value(f"{self.field_path}.{key}", self._data[key])

    def keys(self):
        return self._data.keys()

    def _convert_value(self, field_path: str, value: Any) -> Any:
        if isinstance(value, Mapping):
            return Config(field_path, value)
        if isinstance(value, Iterable) and not isinstance(value, str):
            return [self._convert_value(f"{field_path}[{i}]", item) for i, item in enumerate(value)]

        return value

    def __iter__(self):
        raise InvalidConfiguration(f"`{self.field_path}` configuration field must be iterable")

    def __repr__(self):
        return f"Config('{self.field_path}', {self._data})"


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds shared by the toolkit. Every one of them is a floating-point proxy for an exact
    condition (equality of atoms, zero reduced cost, vanishing divisor...)."""
    atom: float = 1e-12
    projection: float = 1e-10
    pivot: float = 1e-12
    uniqueness: float = 1e-10
    orthogonality: float = 1e-7
    antipodal: float = 1e-9
    singular: float = 1e-9
    negative_weight: float = 1e-9
    series: float = 1e-9
    equidistance: float = 1e-10

    @classmethod
    def from_config(cls, config: Optional[Config]) -> 'Tolerances':
        if config is None:
            return cls()
        known = {f.name for f in fields(cls)}
        for key in config.keys():
            if key not in known:
                raise InvalidConfiguration(f"Unknown tolerance `{config.field_path}.{key}`, supported: {sorted(known)}")
        values = {key: config.get_float(key) for key in config.keys()}
        for key, value in values.items():
            if value <= 0:
                raise InvalidConfiguration(f"`{config.field_path}.{key}` must be positive")
        return replace(cls(), **values)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Profile:
    tolerances: Tolerances = DEFAULT_TOLERANCES
    defaults: Optional[Config] = None

    def default(self, key, fallback):
        if self.defaults is None:
            return fallback
        return self.defaults.get(key, fallback)


def resolve_profile_file(file) -> Path:
    """A path with a directory part (or existing in the working directory) is used as is,
    a bare file name is looked up in the config search path."""
    path = Path(paths.expand_user(str(file)))
    if path.exists() or path.parent != Path('.'):
        return path
    return paths.lookup_file_in_config_path(path.name)


def load_profile(file=None) -> Profile:
    if file is None:
        return Profile()

    profile_file = resolve_profile_file(file)
    log.info(f"[loading_profile_file] file=[{profile_file}]")
    try:
        with open(profile_file, 'rb') as f:
            data = tomli.load(f)
    except FileNotFoundError as e:
        raise InvalidConfiguration(f"Profile file `{profile_file}` not found") from e
    except tomli.TOMLDecodeError as e:
        raise InvalidConfiguration(f"Profile file `{profile_file}` is not valid TOML: {e}") from e

    config = Config('profile', data)
    tolerance = config.get('tolerance')
    defaults = config.get('defaults')
    for section, value in (('tolerance', tolerance), ('defaults', defaults)):
        if value is not None and not isinstance(value, Config):
            raise InvalidConfiguration(f"`profile.{section}` must be a table")

    return Profile(Tolerances.from_config(tolerance), defaults)
