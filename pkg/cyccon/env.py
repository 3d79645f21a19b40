from __future__ import annotations

import os
from pathlib import Path
from typing import Any

from cyccon.settings import CycconSettings

# Environment variable -> CycconSettings field
ENV_FIELDS: dict[str, str] = {
    "CYCCON_PRECISION": "precision",
    "CYCCON_MAX_COUPLING_VARIABLES": "max_coupling_variables",
    "CYCCON_ORACLE_MAX_RANK": "oracle_max_rank",
    "CYCCON_GRID_SPACING": "grid_spacing",
    "CYCCON_MAX_GRID_POINTS": "max_grid_points",
    "CYCCON_ALPHA": "alpha",
}


def _unquote(value: str) -> str:
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def parse_env_text(text: str) -> dict[str, str]:
    """KEY=VALUE pairs of a .env file; blank lines, '#' comments and lines without '=' are skipped."""
    pairs: dict[str, str] = {}
    for line in (raw.strip() for raw in text.splitlines()):
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        if key:
            pairs[key] = _unquote(value.strip())
    return pairs


def load_env_file(path: str | Path = ".env") -> None:
    """Copy a .env file into ``os.environ``. Variables already set to a non-empty value win."""
    p = Path(path)
    if not p.is_file():
        return
    for key, value in parse_env_text(p.read_text(encoding="utf-8")).items():
        if os.environ.get(key):
            continue
        os.environ[key] = value


def settings_from_env(**overrides: Any) -> CycconSettings:
    """
    Build settings from ``CYCCON_*`` variables, then apply explicit overrides.
    Overrides whose value is None are ignored (unset CLI flags).
    """
    kw: dict[str, Any] = {}
    for env_key, field in ENV_FIELDS.items():
        raw = os.environ.get(env_key)
        if raw is not None and raw.strip() != "":
            kw[field] = raw.strip()
    for field, value in overrides.items():
        if value is not None:
            kw[field] = value
    return CycconSettings(**kw)
