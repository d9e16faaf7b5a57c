"""Coercion of string options (config files, CLI overrides) onto dataclass fields."""
from dataclasses import fields

from .errors import ConfigError

_CASTS = {int: int, float: float, str: str, "int": int, "float": float, "str": str}


def build(cls, mapping, aliases=None, what="option"):
    aliases = aliases or {}
    types = {f.name: f.type for f in fields(cls)}
    kwargs = {}
    for key, raw in mapping.items():
        key = key.strip().replace("-", "_")
        key = aliases.get(key, key)
        if key not in types:
            raise ConfigError(f"unknown {what} {key!r}")
        cast = _CASTS[types[key]]
        try:
            kwargs[key] = cast(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return cls(**kwargs)
