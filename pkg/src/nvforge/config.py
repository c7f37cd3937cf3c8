"""Key-value run-configuration files.

Format: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines are ignored.  Keys use the same names as the CLI flags (dashes or
underscores, unit suffixes included, e.g. ``tau-s = 1e-6``).  Unknown and
duplicate keys are rejected; command-line flags override file values.
"""

from __future__ import annotations

from pathlib import Path


class ConfigError(ValueError):
    """A configuration file or flag set is invalid."""


def parse_config_file(path: Path) -> dict[str, str]:
    """Parse a config file into normalized {key: raw-string-value}."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_").lower()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def resolve_options(
    flag_values: dict,
    file_values: dict[str, str],
    spec: dict[str, tuple],
) -> dict:
    """Merge defaults, config-file values, and explicit flags.

    ``spec`` maps option name -> (type, default).  Precedence: flag over
    file over default.  Unknown file keys raise :class:`ConfigError`.
    """
    unknown = set(file_values) - set(spec)
    if unknown:
        raise ConfigError(
            f"unknown config key(s): {', '.join(sorted(unknown))}; "
            f"accepted keys: {', '.join(sorted(spec))}"
        )
    resolved = {}
    for name, (typ, default) in spec.items():
        if flag_values.get(name) is not None:
            resolved[name] = flag_values[name]
        elif name in file_values:
            try:
                resolved[name] = _convert(typ, file_values[name])
            except ValueError as exc:
                raise ConfigError(f"config key {name!r}: {exc}") from exc
        else:
            resolved[name] = default
    return resolved


def _convert(typ, raw: str):
    if typ is bool:
        lowered = raw.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"expected boolean, got {raw!r}")
    return typ(raw)
