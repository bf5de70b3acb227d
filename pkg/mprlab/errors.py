"""Exception hierarchy shared by the analysis, simulation and PHY modules."""
from __future__ import annotations

from typing import Any, List, Optional, Sequence

import numpy as np


class MprLabError(Exception):
    """Base class for every error raised by mprlab."""


class DomainError(MprLabError, ValueError):
    """A precondition was violated.

    The message always names the violated condition (for example ``"r > 1"``)
    so the CLI can echo it as a single-line diagnostic.
    """

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        self.detail = detail
        msg = f"precondition {condition!r} violated"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)

    def __reduce__(self):
        return type(self), (self.condition, self.detail)


class NoSteadyStateError(DomainError):
    """The backoff chain has no steady state (r * p_c >= 1)."""


class SearchSpaceError(DomainError):
    """Exhaustive enumeration would exceed the candidate budget."""


class UnderdeterminedError(DomainError):
    """More sources than receive antennas."""


class RankDeficiencyError(MprLabError, np.linalg.LinAlgError):
    """A matrix that must be inverted is numerically rank deficient."""

    def __init__(self, what: str, condition_number: float):
        self.what = what
        self.condition_number = condition_number
        super().__init__(f"{what} is rank deficient (condition number {condition_number:.3g})")

    def __reduce__(self):
        return type(self), (self.what, self.condition_number)


class ConfigError(MprLabError):
    """Malformed scenario configuration."""


class SweepError(MprLabError):
    """One or more runs of a batch failed.

    ``results`` keeps the batch order with ``None`` at failed indices and
    ``errors`` maps each failed index to its exception.
    """

    def __init__(self, results: Sequence[Optional[Any]], errors: dict):
        self.results: List[Optional[Any]] = list(results)
        self.errors = dict(errors)
        failed = ", ".join(str(i) for i in sorted(self.errors))
        super().__init__(f"{len(self.errors)} of {len(self.results)} runs failed (indices: {failed})")


__all__ = [
    "MprLabError",
    "DomainError",
    "NoSteadyStateError",
    "SearchSpaceError",
    "UnderdeterminedError",
    "RankDeficiencyError",
    "ConfigError",
    "SweepError",
]
