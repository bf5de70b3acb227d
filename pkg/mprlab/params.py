"""Domain types shared by the analytic, backoff and simulation modules.

All types are frozen dataclasses that validate themselves on construction and
raise :class:`~mprlab.errors.DomainError` naming the violated condition.
Times are in seconds, rates in bits/second, sizes in bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

from .errors import DomainError


class AccessMode(Enum):
    """How backoff slots are priced in time."""

    NON_CARRIER_SENSING = "aloha"
    BASIC = "basic"
    RTS_CTS = "rts-cts"

    @classmethod
    def parse(cls, name: str) -> "AccessMode":
        key = name.strip().lower().replace("_", "-")
        aliases = {
            "aloha": cls.NON_CARRIER_SENSING,
            "non-carrier-sensing": cls.NON_CARRIER_SENSING,
            "basic": cls.BASIC,
            "basic-access": cls.BASIC,
            "rts-cts": cls.RTS_CTS,
            "rtscts": cls.RTS_CTS,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DomainError("mode in {aloha, basic, rts-cts}", f"got {name!r}") from None

    @property
    def carrier_sensing(self) -> bool:
        return self is not AccessMode.NON_CARRIER_SENSING


@dataclass(frozen=True)
class NetworkParams:
    """Station population N, MPR capability M, data rate R and payload L."""

    N: int
    M: int
    R: float
    L: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError("N >= 1", f"N = {self.N}")
        if int(self.M) != self.M or self.M < 1:
            raise DomainError("M >= 1", f"M = {self.M}")
        if not self.R > 0:
            raise DomainError("R > 0", f"R = {self.R}")
        if not self.L > 0:
            raise DomainError("L > 0", f"L = {self.L}")

    @property
    def payload_airtime(self) -> float:
        return self.L / self.R


@dataclass(frozen=True)
class MacTimingParams:
    """Airtimes of the MAC/PHY building blocks used in the slot-duration formulas."""

    sigma: float
    header: float
    sifs: float
    difs: float
    delta: float
    ack: float
    rts: float
    cts: float

    def __post_init__(self):
        for name in ("sigma", "header", "sifs", "difs", "delta", "ack", "rts", "cts"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} >= 0", f"{name} = {getattr(self, name)}")


@dataclass(frozen=True)
class SlotDurations:
    """Lengths of idle, collision and success backoff slots."""

    t_idle: float
    t_coll: float
    t_succ: float

    def __post_init__(self):
        for name in ("t_idle", "t_coll", "t_succ"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} > 0", f"{name} = {getattr(self, name)}")

    @classmethod
    def equal(cls, slot: float) -> "SlotDurations":
        return cls(slot, slot, slot)

    @property
    def is_equal(self) -> bool:
        return self.t_idle == self.t_coll == self.t_succ


@dataclass(frozen=True)
class BackoffParams:
    """Exponential backoff: window W_i = r**i * w0 after i failures."""

    r: float
    w0: int

    def __post_init__(self):
        if not self.r > 1:
            raise DomainError("r > 1", f"r = {self.r}")
        if int(self.w0) != self.w0 or self.w0 < 2:
            raise DomainError("w0 >= 2", f"w0 = {self.w0}")


@dataclass(frozen=True)
class Binomial:
    """Finite population: X ~ Bin(N, p_t)."""

    N: int
    p_t: float

    def __post_init__(self):
        if self.N < 0:
            raise DomainError("N >= 0", f"N = {self.N}")
        if not 0.0 <= self.p_t <= 1.0:
            raise DomainError("0 <= p_t <= 1", f"p_t = {self.p_t}")


@dataclass(frozen=True)
class Poisson:
    """Infinite population: X ~ Poisson(rate)."""

    rate: float

    def __post_init__(self):
        if not self.rate >= 0:
            raise DomainError("lambda >= 0", f"lambda = {self.rate}")


AttemptModel = Union[Binomial, Poisson]


@dataclass(frozen=True)
class FrameTiming:
    """Frame sizes and PHY rates from which MAC airtimes are derived.

    Control frames cost ``phy_overhead + bits / basic_rate``; the header of a
    data frame costs ``phy_overhead + mac_header_bits / data_rate``.
    Defaults are the IEEE 802.11g values used throughout the analysis.
    """

    payload_bits: int = 8184
    mac_header_bits: int = 272
    phy_overhead: float = 26e-6
    ack_bits: int = 112
    rts_bits: int = 160
    cts_bits: int = 112
    basic_rate: float = 6e6
    data_rate: float = 54e6
    slot_time: float = 9e-6
    sifs: float = 10e-6
    delta: float = 1e-6
    address_bits: int = 48

    def __post_init__(self):
        if not self.basic_rate > 0:
            raise DomainError("basic_rate > 0", f"basic_rate = {self.basic_rate}")
        if not self.data_rate > 0:
            raise DomainError("data_rate > 0", f"data_rate = {self.data_rate}")

    @property
    def difs(self) -> float:
        # Not part of the frame table; standard DIFS = SIFS + 2 slots.
        return self.sifs + 2 * self.slot_time

    def control_airtime(self, bits: float) -> float:
        return self.phy_overhead + bits / self.basic_rate

    def mac_timing(self, M: int = 1, mpr_frames: bool = False) -> MacTimingParams:
        """Airtimes for capability M; ``mpr_frames`` adds M-1 receiver addresses to CTS and ACK."""
        extra = self.address_bits * (M - 1) if mpr_frames else 0
        return MacTimingParams(
            sigma=self.slot_time,
            header=self.phy_overhead + self.mac_header_bits / self.data_rate,
            sifs=self.sifs,
            difs=self.difs,
            delta=self.delta,
            ack=self.control_airtime(self.ack_bits + extra),
            rts=self.control_airtime(self.rts_bits),
            cts=self.control_airtime(self.cts_bits + extra),
        )

    def network(self, N: int = 50, M: int = 1) -> NetworkParams:
        return NetworkParams(N=N, M=M, R=self.data_rate, L=self.payload_bits)


__all__ = [
    "AccessMode",
    "NetworkParams",
    "MacTimingParams",
    "SlotDurations",
    "BackoffParams",
    "Binomial",
    "Poisson",
    "AttemptModel",
    "FrameTiming",
]
