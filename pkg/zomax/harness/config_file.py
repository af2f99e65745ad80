"""INI experiment files.

    [experiment]            name, output_dir
    [problem]               kind and constructor parameters
    [solver]                variant, h1, h2, iterations, seeds, ...
    [oracle] [metric] [diagnostics] [mvi]
    [variant.NAME]          dotted overrides such as ``oracle.scheme = central``

Relative ``dataset`` and ``candidate`` paths are resolved against the file's directory.
"""

from __future__ import annotations

import configparser
import copy
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import ValidationError

from zomax.errors import ConfigFileError
from zomax.schemas import ExperimentConfig

logger = logging.getLogger(__name__)

SECTIONS = ("problem", "solver", "oracle", "metric", "diagnostics", "mvi")
OVERRIDABLE = ("solver", "oracle", "metric")
VARIANT_PREFIX = "variant."
PATH_KEYS = {("problem", "dataset"), ("mvi", "candidate")}

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


@dataclass(frozen=True)
class LoadedConfig:
    path: Path
    base: ExperimentConfig
    variants: dict[str, ExperimentConfig] = field(default_factory=dict)


def _line_index(text: str) -> dict[tuple[str, str], int]:
    index: dict[tuple[str, str], int] = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_RE.match(line)
        if header:
            section = header.group(1).strip()
            index[(section, "")] = number
            continue
        key = _KEY_RE.match(line)
        if key:
            index.setdefault((section, key.group(1).strip().lower()), number)
    return index


def _parse(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.ParsingError as exc:
        line = getattr(exc, "lineno", None) or (exc.errors[0][0] if exc.errors else None)
        raise ConfigFileError(f"{source}: malformed line", line=line) from exc
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigFileError(f"{source}: {exc.message}", line=line) from exc
    return parser


def _resolve_paths(raw: dict, base_dir: Path) -> None:
    for section, key in PATH_KEYS:
        value = raw.get(section, {}).get(key)
        if value is None or value.strip() == "run":
            continue
        path = Path(value.strip()).expanduser()
        raw[section][key] = str(path if path.is_absolute() else base_dir / path)


def _validate(raw: dict, lines: dict[tuple[str, str], int], section_of=None) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = [str(part) for part in error["loc"]]
        section = loc[0] if len(loc) > 1 else "experiment"
        key = loc[1] if len(loc) > 1 else (loc[0] if loc else "")
        where = section_of(section, key) if section_of else (section, key)
        line = lines.get(where) or lines.get((where[0], ""))
        raise ConfigFileError(error["msg"], line=line, field=".".join(loc)) from exc


def load_experiment(path: Path | str) -> LoadedConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigFileError(f"config file not found: {path}") from exc
    parser = _parse(text, str(path))
    lines = _line_index(text)

    raw: dict = {}
    variant_sections: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        values = dict(parser[section])
        if section == "experiment":
            raw.update(values)
        elif section in SECTIONS:
            raw[section] = values
        elif section.startswith(VARIANT_PREFIX) and section != VARIANT_PREFIX:
            variant_sections[section[len(VARIANT_PREFIX) :]] = values
        else:
            raise ConfigFileError(f"unknown section [{section}]", line=lines.get((section, "")))
    _resolve_paths(raw, path.parent)
    base = _validate(raw, lines)

    variants = {}
    for name, overrides in variant_sections.items():
        header = f"{VARIANT_PREFIX}{name}"
        merged = copy.deepcopy(raw)
        for dotted, value in overrides.items():
            section, _, key = dotted.partition(".")
            if section not in OVERRIDABLE or not key:
                raise ConfigFileError(
                    "variants may only override solver, oracle and metric keys",
                    line=lines.get((header, dotted)),
                    field=f"{header}.{dotted}",
                )
            merged.setdefault(section, {})[key] = value

        def section_of(section: str, key: str, header=header) -> tuple[str, str]:
            return header, f"{section}.{key}"

        variants[name] = _validate(merged, lines, section_of)
    logger.debug("loaded %s with %d variant(s)", path, len(variants))
    return LoadedConfig(path=path, base=base, variants=variants)
