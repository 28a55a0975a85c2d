"""
Run configuration from a TOML file named by ``PUBCITE_CONFIG``.

Top-level keys apply to every command that has a matching option accepting
the value; a table named after a command overrides them for that command.
The result is used as click's ``default_map``, so explicit flags always win.
"""

import logging

from pathlib import Path
from typing import Any, Mapping, Optional

import click

from .errors import ConfigError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)

CONFIG_ENV = "PUBCITE_CONFIG"


def _param_name(key: str) -> str:
    return key.strip().replace("-", "_")


def load_config(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"Invalid config file {path}: {exc}") from exc


def _options(command: click.Command) -> dict[str, click.Parameter]:
    return {
        param.name: param
        for param in command.params
        if isinstance(param, click.Option) and param.name
    }


def _shaped(param: click.Parameter, value: Any) -> Any:
    if param.multiple and not isinstance(value, list):
        return [value]
    return value


def _rejection(param: click.Parameter, value: Any) -> Optional[str]:
    """
    Return click's complaint about ``value`` for ``param``, or ``None`` when
    the option accepts it.
    """
    values = value if param.multiple else [value]
    try:
        for item in values:
            param.type.convert(item, param, None)
    except click.BadParameter as exc:
        return exc.format_message()
    return None


def default_map(
    config: Mapping[str, Any], commands: Mapping[str, click.Command]
) -> dict[str, dict[str, Any]]:
    """
    Build click's ``default_map`` from a loaded config file.

    Usage:

    >>> from pubcite.config import default_map
    >>> from pubcite.main import cli
    >>> default_map({"format": "json"}, cli.commands)["summary"]
    {'format': 'json'}
    """
    options = {name: _options(command) for name, command in commands.items()}

    for key, value in config.items():
        if key in commands and not isinstance(value, dict):
            raise ConfigError(f"Config entry [{key}] must be a table")
        if isinstance(value, dict) and key not in commands:
            logger.warning("Ignoring unknown config section [%s]", key)

    defaults: dict[str, dict[str, Any]] = {name: {} for name in sorted(commands)}

    for key, value in config.items():
        if isinstance(value, dict) or key in commands:
            continue
        name = _param_name(key)
        takers = [command for command in options if name in options[command]]
        if not takers:
            logger.warning("Ignoring unknown config key %r", key)
            continue

        complaints = {}
        for command in takers:
            param = options[command][name]
            shaped = _shaped(param, value)
            if (complaint := _rejection(param, shaped)) is None:
                defaults[command][name] = shaped
            else:
                complaints[command] = complaint
        if len(complaints) == len(takers):
            raise ConfigError(f"Config key {key!r}: {complaints[takers[0]]}")
        for command, complaint in complaints.items():
            logger.debug("Config key %r not used by %s: %s", key, command, complaint)

    for command in sorted(commands):
        for key, value in config.get(command, {}).items():
            name = _param_name(key)
            param = options[command].get(name)
            if param is None:
                logger.warning("Ignoring unknown config key %r in [%s]", key, command)
                continue
            defaults[command][name] = _shaped(param, value)

    return defaults
