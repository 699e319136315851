"""Flat text configs for the scenario runner.

The format is one `section.key = value` assignment per line, UTF-8,
with '#' starting a comment anywhere on the line.  It stays this flat
on purpose: golden configs diff line by line, and every parse error can
point at the offending line number.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping

from .errors import ConfigError

__all__ = ["RawConfig", "load_config", "parse_config", "config_hash",
           "coerce"]


@dataclass(frozen=True)
class RawConfig:
    """Parsed key/value pairs plus enough provenance to hash and report."""

    entries: Mapping[str, str]
    lines: Mapping[str, int]          # key -> 1-based source line
    text: str
    path: str = "<memory>"

    @property
    def digest(self) -> str:
        return config_hash(self.text)

    def consume(self, key: str, default: str | None = None) -> str | None:
        return self.entries.get(key, default)

    def line_of(self, key: str) -> int | None:
        return self.lines.get(key)


def parse_config(text: str, path: str = "<memory>") -> RawConfig:
    entries: dict[str, str] = {}
    lines: dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'section.key = value', got {raw.strip()!r}",
                              line=no)
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key or "." not in key:
            raise ConfigError(f"keys are dotted 'section.key' names, got {key!r}",
                              line=no)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line "
                              f"{lines[key]})", line=no)
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=no)
        entries[key] = value
        lines[key] = no
    return RawConfig(entries=entries, lines=lines, text=text, path=path)


def load_config(path: str) -> RawConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    return parse_config(text, path=path)


def config_hash(text: str) -> str:
    """Hash of the config bytes, computed the way git hashes a blob."""
    data = text.encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# typed coercion used by the scenario parameter registry -------------------

def coerce(kind: str, raw: str, *, key: str, line: int | None,
           choices: tuple = ()):
    """Turn a raw config string into its declared parameter type.

    ``kind`` is one of int, float, str, ints, floats, choice; list kinds
    split on commas.  Failures carry the source line so the CLI can
    point at the config file.
    """
    def fail(msg: str):
        raise ConfigError(f"{key}: {msg}", line=line)

    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw
        if kind == "ints":
            return tuple(int(p.strip()) for p in raw.split(",") if p.strip())
        if kind == "floats":
            return tuple(float(p.strip()) for p in raw.split(",") if p.strip())
        if kind == "strs":
            return tuple(p.strip() for p in raw.split(",") if p.strip())
    except ValueError:
        fail(f"cannot parse {raw!r} as {kind}")
    if kind == "choice":
        if raw not in choices:
            fail(f"{raw!r} is not one of {', '.join(choices)}")
        return raw
    fail(f"unknown parameter kind {kind!r}")
