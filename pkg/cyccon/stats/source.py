from __future__ import annotations

from abc import ABC, abstractmethod

from pydantic import BaseModel, ConfigDict, Field

from cyccon.model import CyclicSystem
from cyccon.stats.moments import EstimatedMoment, MomentTerms


class MarginalPair(BaseModel):
    """The two estimated means of one connection, <R_i^i> and <R_i^(i-1)>."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    connection: int = Field(description="1-based property index i.")
    here: EstimatedMoment
    before: EstimatedMoment


# ---------------------------------------------------------------------------
# Abstract dataset every embedded moment source must subclass
# ---------------------------------------------------------------------------


class MomentDataset(ABC):
    """
    Base class for embedded moment datasets.

    To add a new dataset:

    1. Create ``cyccon/datasets/<name>.py``
    2. Subclass :class:`MomentDataset`
    3. Decorate with ``@register_dataset("<name>")``
    4. Add ``from cyccon.datasets import <name> as _<name>``
       to ``cyccon/datasets/__init__.py`` so the decorator runs at import.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Short slug used by ``analyze --demo``."""
        ...

    @property
    @abstractmethod
    def df(self) -> int:
        """Degrees of freedom of every embedded estimate."""
        ...

    @abstractmethod
    def terms(self) -> MomentTerms:
        """The 2n estimated terms (corr_i, Δ_i)."""
        ...

    def marginals(self) -> list[MarginalPair]:
        """Connection marginals available for consistency t-tests (may be empty)."""
        return []

    @abstractmethod
    def point_system(self) -> CyclicSystem:
        """A CyclicSystem reproducing the point estimates."""
        ...


# ---------------------------------------------------------------------------
# Dataset registry
# ---------------------------------------------------------------------------

DATASET_REGISTRY: dict[str, type[MomentDataset]] = {}


def register_dataset(name: str):
    """Class decorator that registers a :class:`MomentDataset` subclass."""

    def _decorator(cls: type[MomentDataset]) -> type[MomentDataset]:
        DATASET_REGISTRY[name] = cls
        return cls

    return _decorator


def get_dataset(name: str) -> MomentDataset:
    cls = DATASET_REGISTRY[name]
    return cls()


def list_datasets() -> list[str]:
    return sorted(DATASET_REGISTRY)
