"""Configuration loading built on dataclass-wizard.

Configuration classes are frozen dataclasses declared with `configclass` whose fields come from
`configfield`. A `ConfigWizard` subclass can be built from a dict, from a JSON / TOML / YAML file, and
from environment variables named `TABLESCOUT_<SECTION>_<KEY>`.
"""

import json
import logging
import os
import tomllib
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, TextIO, Tuple

import yaml
from dataclass_wizard import JSONWizard, LoadMeta, YAMLWizard, errors, fromdict, json_field
from dataclass_wizard.models import JSONField
from dataclass_wizard.utils.string_conv import to_camel_case

configclass = dataclass(frozen=True)
ENV_BASE = "TABLESCOUT"
_LOGGER = logging.getLogger(__name__)


class ConfigError(ValueError):
    """The configuration file exists but cannot be used."""


def configfield(name: str, *, env: bool = True, env_name: Optional[str] = None, help_txt: str = "", **kwargs: Any) -> JSONField:
    """Create a dataclass field whose file key is the camelCase form of `name`.

    :param name: snake_case field name.
    :param env: whether the value may come from an environment variable.
    :param env_name: explicit environment variable name, overriding the generated one.
    :param help_txt: one-line description shown by `describe`.
    :param kwargs: forwarded to `dataclass_wizard.json_field` (default, default_factory, ...).
    """
    if not isinstance(name, str):
        raise TypeError("Provided name must be a string.")
    meta = kwargs.get("metadata", {})
    meta["env"] = env
    meta["env_name"] = env_name
    meta["help"] = help_txt
    kwargs["metadata"] = meta
    return json_field(to_camel_case(name), **kwargs)


class ConfigWizard(JSONWizard, YAMLWizard):  # type: ignore[misc] # dataclass-wizard doesn't provide stubs
    """Read configuration from a dict, a JSON/TOML/YAML file and environment variables."""

    @classmethod
    def envvars(
        cls,
        env_parent: Optional[str] = None,
        json_parent: Optional[Tuple[str, ...]] = None,
    ) -> List[Tuple[str, Tuple[str, ...], type]]:
        """List (environment variable, path in the config tree, type) for every leaf value."""
        env_parent = env_parent or ""
        json_parent = json_parent or ()
        output = []

        for _, val in cls.__dataclass_fields__.items():  # pylint: disable=no-member
            jsonname = val.json.keys[0]
            envname = jsonname.upper()
            full_envname = val.metadata.get("env_name") or f"{ENV_BASE}{env_parent}_{envname}"

            if hasattr(val.type, "envvars"):
                output += val.type.envvars(env_parent=f"{env_parent}_{envname}", json_parent=json_parent + (jsonname,))
            elif val.metadata.get("env", True):
                output.append((full_envname, json_parent + (jsonname,), val.type))

        return output

    @classmethod
    def describe(cls, indent: int = 0) -> List[str]:
        """Render `key: default  # help (ENV)` lines for the whole tree."""
        lines = []
        for _, val in cls.__dataclass_fields__.items():  # pylint: disable=no-member
            jsonname = val.json.keys[0]
            pad = " " * indent
            if hasattr(val.type, "describe"):
                lines.append(f"{pad}{jsonname}:")
                lines += val.type.describe(indent + 2)
            else:
                lines.append(f"{pad}{jsonname}: {val.default!r}  # {val.metadata.get('help', '')}")
        return lines

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConfigWizard":
        """Build the configuration from `data`, filling gaps from environment variables."""
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("Configuration data is not a dictionary.")

        for var_name, conf_path, var_type in cls.envvars():
            var_value = os.environ.get(var_name)
            if var_value:
                var_value = try_json_load(var_value)
                update_dict(data, conf_path, var_value, overwrite=True)
                _LOGGER.debug("Found EnvVar Config - %s:%s = %s", var_name, str(var_type), repr(var_value))

        LoadMeta(key_transform="CAMEL").bind_to(cls)
        return fromdict(cls, data)  # type: ignore[no-any-return]

    @classmethod
    def from_file(cls, filepath: str) -> "ConfigWizard":
        """Load the configuration file at `filepath` (JSON, TOML or YAML)."""
        try:
            with open(filepath, encoding="utf-8") as file:
                data = read_config(file)
        except FileNotFoundError as err:
            raise ConfigError(f"The configuration file {filepath} cannot be found.") from err
        except PermissionError as err:
            raise ConfigError(f"Permission denied when reading the configuration file {filepath}.") from err
        except ValueError as err:
            raise ConfigError(f"Configuration file {filepath} must be valid JSON, TOML or YAML:\n{err}") from err

        try:
            return cls.from_dict(data or {})
        except (errors.MissingFields, errors.ParseError) as err:
            raise ConfigError(f"Invalid configuration in {filepath}:\n{err}") from err


def read_config(stream: TextIO) -> Dict[str, Any]:
    """Parse a config file without knowing its format: JSON first, then TOML, then YAML.

    :raises ValueError: with every parser's complaint when none of them accepts the text.
    """
    text = stream.read()
    if not text.strip():
        return {}
    problems: Dict[str, Exception] = {}

    try:
        return json.loads(text)
    except ValueError as err:
        problems["JSON"] = err

    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        problems["TOML"] = err

    try:
        data = yaml.safe_load(text)
    except yaml.error.YAMLError as err:
        problems["YAML"] = err
    else:
        if isinstance(data, dict):
            return data
        problems["YAML"] = ValueError("top level is not a mapping")

    raise ValueError("\n\n".join(f"{key} Parser Errors:\n{val}" for key, val in problems.items()))


def try_json_load(value: str) -> Any:
    """Parse `value` as JSON when possible (so "8" becomes 8), else return it unchanged."""
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def update_dict(data: Dict[str, Any], path: Tuple[str, ...], value: Any, overwrite: bool = False) -> None:
    """Set `value` at `path` inside nested dict `data`, creating intermediate dicts."""
    target = data
    for key in path[:-1]:
        if not isinstance(target.get(key), dict):
            target[key] = {}
        target = target[key]
    if overwrite or path[-1] not in target:
        target[path[-1]] = value
