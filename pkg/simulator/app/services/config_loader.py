"""Experiment config files.

Format: `[section]` headers and `key = value` lines. `#` or `;` start a
comment, either on its own line or after whitespace following a value.
Values stay strings until pydantic validates them against ExperimentConfig,
so every type/range error can be reported with the dotted key and the line
it came from.
"""

import logging
import re
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

from pydantic import ValidationError

from app.core.errors import ConfigError
from app.schemas.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

RawConfig = Dict[str, Dict[str, str]]
LineIndex = Dict[str, Optional[int]]

# a comment after a value needs whitespace before the marker
INLINE_COMMENT = re.compile(r"\s[#;]")


def read_config_text(text: str) -> Tuple[RawConfig, LineIndex]:
    """Split config text into {section: {key: value}} plus a dotted-key -> line index"""
    raw: RawConfig = {}
    lines: LineIndex = {}
    section: Optional[str] = None

    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]") or len(stripped) < 3:
                raise ConfigError(stripped, "malformed section header", number)
            section = stripped[1:-1].strip()
            if section in raw:
                raise ConfigError(section, "section appears twice", number)
            raw[section] = {}
            lines[section] = number
            continue
        if "=" not in stripped:
            raise ConfigError(stripped, "expected 'key = value'", number)
        key, value = (part.strip() for part in stripped.split("=", 1))
        value = INLINE_COMMENT.split(value, maxsplit=1)[0].strip()
        if section is None:
            raise ConfigError(key, "key outside of any [section]", number)
        dotted = f"{section}.{key}"
        if key in raw[section]:
            raise ConfigError(dotted, "key appears twice", number)
        raw[section][key] = value
        lines[dotted] = number
    return raw, lines


def apply_overrides(raw: RawConfig, lines: LineIndex, overrides: Iterable[str]) -> None:
    """Apply `section.key=value` strings in order; later ones win"""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like section.key=value")
        dotted, value = (part.strip() for part in item.split("=", 1))
        section, _, key = dotted.partition(".")
        if not section or not key or "." in key:
            raise ConfigError(dotted, "override key must look like section.key")
        raw.setdefault(section, {})[key] = value
        lines[dotted] = None
        lines.setdefault(section, None)


def _error_key(loc: Tuple) -> str:
    return ".".join(str(part) for part in loc[:2])


def _as_config_error(exc: ValidationError, lines: LineIndex, fallback: str) -> ConfigError:
    first = exc.errors()[0]
    key = _error_key(first["loc"]) or fallback
    message = first["msg"]
    if key not in lines and "." in key:
        # a whole-section validator points at the section header
        key_line = lines.get(key.split(".")[0])
    else:
        key_line = lines.get(key)
    return ConfigError(key, message, key_line)


def build_config(raw: RawConfig, lines: LineIndex) -> ExperimentConfig:
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise _as_config_error(e, lines, "config") from None
    # cross-section rules (whole number of steps, pid.h == sim.h) live on SimConfig
    try:
        config.simulation()
    except ValidationError as e:
        message = e.errors()[0]["msg"]
        key = _horizon_key(message)
        raise ConfigError(key, message, lines.get(key, lines.get("sim"))) from None
    return config


def _horizon_key(message: str) -> str:
    if "duration" in message:
        return "sim.duration"
    if "pid.h" in message:
        return "sim.h"
    return "sim"


def parse_config(path: Optional[Path], overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Load and fully validate an experiment config.

    path None means "no file": every value takes its default. Overrides
    are applied after the file, so they win over it.
    """
    overrides = list(overrides)
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(str(path), f"cannot read config file: {e.strerror or e}") from None
    raw, lines = read_config_text(text)
    apply_overrides(raw, lines, overrides)
    config = build_config(raw, lines)
    logger.debug(f"Loaded config from {path or 'defaults'} with {len(overrides)} overrides")
    return config


def render_section(name: str, values: Dict[str, object], comment: Optional[str] = None) -> str:
    """One `[name]` block in the same format read_config_text accepts"""
    out = []
    if comment:
        out.append(f"# {comment}")
    out.append(f"[{name}]")
    out.extend(f"{key} = {value:.6g}" if isinstance(value, float) else f"{key} = {value}"
               for key, value in values.items())
    return "\n".join(out) + "\n"
