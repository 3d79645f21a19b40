from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pytest

from cyccon.model import ContextMoments, CyclicSystem, system_to_json

F = Fraction


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-size sweeps")


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def make_system(
    corrs: Sequence[object],
    means: Sequence[tuple[object, object]] | None = None,
) -> CyclicSystem:
    """Cyclic system with the given correlations; means default to 0."""
    n = len(corrs)
    pairs = means if means is not None else [(0, 0)] * n
    contexts = tuple(
        ContextMoments(e_ii=a, e_next=b, corr=c) for c, (a, b) in zip(corrs, pairs)
    )
    return CyclicSystem(labels=tuple(f"q{i}" for i in range(1, n + 1)), contexts=contexts)


@pytest.fixture
def system() -> Callable[..., CyclicSystem]:
    return make_system


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20160301)


@pytest.fixture
def write_system(tmp_path: Path) -> Callable[[CyclicSystem, str], Path]:
    def _write(sys_: CyclicSystem, name: str = "system.json") -> Path:
        path = tmp_path / name
        path.write_text(system_to_json(sys_), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[object, str], Path]:
    def _write(obj: object, name: str) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(obj), encoding="utf-8")
        return path

    return _write


def random_vector(rng: np.random.Generator, n: int, den: int = 1000) -> list[Fraction]:
    return [Fraction(int(v), den) for v in rng.integers(-den, den + 1, size=n)]


# Published point estimates of the rank-5 photon experiment.
LAPKIEWICZ_CORRS = [F("-0.805"), F("-0.804"), F("-0.709"), F("-0.810"), F("-0.766")]
LAPKIEWICZ_DELTAS = [F("-0.036"), F("-0.004"), F("0.006"), F("-0.020"), F("-0.006")]
