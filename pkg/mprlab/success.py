"""Packet success models P_M(k).

P_M(k) is the probability that one of k simultaneous packets survives when the
receiver can separate up to M of them. Every model here satisfies

- P_M(k) >= P_M(k') for k <= k'   (more interferers never help)
- P_M(k) >= P_M'(k) for M >= M'   (more capability never hurts)
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

from .errors import DomainError


@dataclass(frozen=True)
class SuccessModel:
    """Ideal MPR channel: every packet survives iff k <= M."""

    name: ClassVar[str] = "ideal"

    def p_success(self, k: int, M: int) -> float:
        return 1.0 if 1 <= k <= M else 0.0

    def __call__(self, k: int, M: int) -> float:
        return self.p_success(k, M)

    @property
    def is_ideal(self) -> bool:
        return type(self) is SuccessModel

    def check_monotone(self, M_max: int, tol: float = 1e-12) -> bool:
        """Verify both monotonicity conditions on the grid 1 <= k, M <= M_max + 1."""
        top = M_max + 1
        for M in range(1, top + 1):
            for k in range(1, top + 1):
                p = self.p_success(k, M)
                if not -tol <= p <= 1 + tol:
                    return False
                if k > 1 and p > self.p_success(k - 1, M) + tol:
                    return False
                if M > 1 and p < self.p_success(k, M - 1) - tol:
                    return False
        return True


@dataclass(frozen=True)
class FixedErrorSuccess(SuccessModel):
    """Constant packet error rate epsilon inside the capability region."""

    name: ClassVar[str] = "fixed-error"
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise DomainError("0 <= epsilon < 1", f"epsilon = {self.epsilon}")

    def p_success(self, k: int, M: int) -> float:
        return 1.0 - self.epsilon if 1 <= k <= M else 0.0


@dataclass(frozen=True)
class LoadDependentSuccess(SuccessModel):
    """Error rate that grows with the number of co-scheduled packets.

    P_M(k) = (1 - epsilon) * (1 + spread * (M - k) / M) / (1 + spread) for k <= M.
    A fully loaded receiver always sees (1 - epsilon) / (1 + spread), whatever M.
    """

    name: ClassVar[str] = "load-dependent"
    epsilon: float = 0.0
    spread: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise DomainError("0 <= epsilon < 1", f"epsilon = {self.epsilon}")
        if not self.spread >= 0.0:
            raise DomainError("spread >= 0", f"spread = {self.spread}")

    def p_success(self, k: int, M: int) -> float:
        if not 1 <= k <= M:
            return 0.0
        return (1.0 - self.epsilon) * (1.0 + self.spread * (M - k) / M) / (1.0 + self.spread)


IDEAL = SuccessModel()


def success_model(name: str = "ideal", epsilon: float = 0.0, spread: float = 0.1) -> SuccessModel:
    """Build a success model from its config name."""
    key = name.strip().lower()
    if key == "ideal":
        return IDEAL
    if key in ("fixed-error", "epsilon"):
        return FixedErrorSuccess(epsilon=epsilon)
    if key == "load-dependent":
        return LoadDependentSuccess(epsilon=epsilon, spread=spread)
    raise DomainError("success in {ideal, fixed-error, load-dependent}", f"got {name!r}")


__all__ = [
    "SuccessModel",
    "FixedErrorSuccess",
    "LoadDependentSuccess",
    "IDEAL",
    "success_model",
]
