"""Flat key=value run configuration.

Every CLI run is fully determined by a subcommand name, a parameter mapping,
and a seed.  Configs round-trip through a plain text format ("key = value"
per line, ``#`` comments) so a run can be replayed byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path


def parse_kv_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def format_kv(params: dict[str, str]) -> str:
    return "".join(f"{k} = {params[k]}\n" for k in sorted(params))


@dataclass
class ExperimentConfig:
    """A named run: subcommand plus its string-typed parameters."""

    subcommand: str
    params: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path, subcommand: str) -> "ExperimentConfig":
        params = parse_kv_text(Path(path).read_text(encoding="utf-8"))
        declared = params.pop("subcommand", subcommand)
        if declared != subcommand:
            raise ValueError(
                f"config file targets subcommand {declared!r}, running {subcommand!r}"
            )
        return cls(subcommand=subcommand, params=params)

    def to_file(self, path: str | Path) -> None:
        text = f"subcommand = {self.subcommand}\n" + format_kv(self.params)
        Path(path).write_text(text, encoding="utf-8")

    def merged(self, overrides: dict[str, str | None]) -> "ExperimentConfig":
        """New config with non-None overrides taking precedence."""
        params = dict(self.params)
        for key, value in overrides.items():
            if value is not None:
                params[key] = str(value)
        return ExperimentConfig(subcommand=self.subcommand, params=params)

    def require_known(self, allowed: set[str]) -> None:
        unknown = set(self.params) - allowed
        if unknown:
            raise ValueError(
                f"unknown config keys for {self.subcommand!r}: {sorted(unknown)}"
            )

    # typed getters; missing keys fall back to the given default

    def get_str(self, key: str, default: str | None = None) -> str:
        value = self.params.get(key, default)
        if value is None:
            raise ValueError(f"missing required config key {key!r}")
        return value

    def get_int(self, key: str, default: int | None = None) -> int:
        raw = self.params.get(key)
        if raw is None:
            if default is None:
                raise ValueError(f"missing required config key {key!r}")
            return default
        try:
            return int(raw)
        except ValueError as exc:
            raise ValueError(f"config key {key!r} must be an integer, got {raw!r}") from exc

    def get_float(self, key: str, default: float | None = None) -> float:
        raw = self.params.get(key)
        if raw is None:
            if default is None:
                raise ValueError(f"missing required config key {key!r}")
            return default
        try:
            return float(Fraction(raw))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"config key {key!r} must be numeric, got {raw!r}") from exc

    def get_fraction(self, key: str, default: Fraction | None = None) -> Fraction:
        raw = self.params.get(key)
        if raw is None:
            if default is None:
                raise ValueError(f"missing required config key {key!r}")
            return default
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"config key {key!r} must be a fraction, got {raw!r}") from exc

    def get_bool(self, key: str, default: bool) -> bool:
        raw = self.params.get(key)
        if raw is None:
            return default
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"config key {key!r} must be boolean-like, got {raw!r}")
