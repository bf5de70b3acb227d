"""Multi-antenna signal model and linear multiuser detection.

A receiver with M_ant antennas observes K simultaneous packets over N_sym
symbol periods::

    Y = H X + W

H is M_ant x K (Rayleigh, unit-variance complex Gaussian entries), X is K x N_sym
over a finite alphabet and W is complex Gaussian noise of total variance eta per
entry.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError, RankDeficiencyError, UnderdeterminedError

log = logging.getLogger(__name__)

CONDITION_LIMIT = 1e8
SOURCE_THRESHOLD = 0.1
_SYMBOL_TOL = 1e-9


@dataclass(frozen=True)
class Alphabet:
    """Finite constellation with unit average energy."""

    name: str
    symbols: Tuple[complex, ...]

    def __post_init__(self):
        if not self.symbols:
            raise DomainError("alphabet non-empty", self.name)
        energy = float(np.mean(np.abs(np.asarray(self.symbols, complex)) ** 2))
        if abs(energy - 1.0) > 1e-9:
            raise DomainError("unit average energy", f"{self.name}: {energy:g}")

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.symbols, complex)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def symmetries(self) -> Tuple[complex, ...]:
        """Unit-modulus multipliers g with g * alphabet == alphabet (as sets)."""
        pts = self.points
        found = []
        for s in pts:
            if abs(pts[0]) == 0 or abs(abs(s) - abs(pts[0])) > _SYMBOL_TOL:
                continue
            g = s / pts[0]
            mapped = g * pts
            if all(np.min(np.abs(pts - m)) < 1e-9 for m in mapped):
                if not any(abs(g - h) < 1e-9 for h in found):
                    found.append(complex(g))
        return tuple(found)

    def indices(self, values: np.ndarray) -> np.ndarray:
        """Index of the nearest alphabet point for every entry."""
        v = np.asarray(values, complex)
        return np.argmin(np.abs(v[..., None] - self.points) ** 2, axis=-1)


BPSK = Alphabet("bpsk", (1 + 0j, -1 + 0j))
QPSK = Alphabet(
    "qpsk",
    tuple(complex(a, b) / math.sqrt(2) for a, b in ((1, 1), (-1, 1), (-1, -1), (1, -1))),
)
ALPHABETS = {"bpsk": BPSK, "qpsk": QPSK}


def alphabet(name: str) -> Alphabet:
    try:
        return ALPHABETS[name.strip().lower()]
    except KeyError:
        raise DomainError("alphabet in {bpsk, qpsk}", f"got {name!r}") from None


@dataclass(frozen=True, eq=False)
class SignalBlock:
    H: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    noise_var: float
    alphabet: Alphabet = BPSK

    @property
    def M_ant(self) -> int:
        return self.Y.shape[0]

    @property
    def K(self) -> int:
        return self.X.shape[0]

    @property
    def N_sym(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Detected symbols; ``residual`` is the squared Frobenius norm of Y - H_hat X_hat."""

    X_hat: np.ndarray
    H_hat: Optional[np.ndarray]
    residual: float
    symbol_errors: Optional[int] = None
    iterations: int = 0
    converged: bool = True
    history: Tuple[float, ...] = field(default=())


def snr_to_noise_var(snr_db: float) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return 10.0 ** (-snr_db / 10.0)


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize(
    M_ant: int,
    K: int,
    N_sym: int,
    alphabet: Alphabet = BPSK,
    snr_db: float = math.inf,
    seed: Optional[int] = None,
    *,
    allow_underdetermined: bool = False,
) -> SignalBlock:
    """Random block Y = H X + W; ``snr_db = inf`` switches the noise off."""
    if M_ant < 1:
        raise DomainError("M_ant >= 1", f"M_ant = {M_ant}")
    if K < 0:
        raise DomainError("K >= 0", f"K = {K}")
    if N_sym < 1:
        raise DomainError("N_sym >= 1", f"N_sym = {N_sym}")
    if K > M_ant and not allow_underdetermined:
        raise UnderdeterminedError("K <= M_ant", f"K = {K}, M_ant = {M_ant}")

    rng = np.random.default_rng(seed)
    H = complex_gaussian(rng, (M_ant, K))
    X = alphabet.points[rng.integers(0, alphabet.size, size=(K, N_sym))]
    eta = snr_to_noise_var(snr_db)
    Y = H @ X
    if eta > 0:
        Y = Y + complex_gaussian(rng, (M_ant, N_sym), eta)
    return SignalBlock(H=H, X=X, Y=Y, noise_var=eta, alphabet=alphabet)


def quantize(values: np.ndarray, alphabet: Alphabet = BPSK) -> np.ndarray:
    """Map every entry to the nearest alphabet point."""
    return alphabet.points[alphabet.indices(values)]


def symbol_errors(X_hat: np.ndarray, X_true: np.ndarray) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(X_hat) - np.asarray(X_true)) > 1e-6))


def symbol_error_rate(X_hat: np.ndarray, X_true: np.ndarray) -> float:
    X_true = np.asarray(X_true)
    if X_true.size == 0:
        return 0.0
    return symbol_errors(X_hat, X_true) / X_true.size


def checked_pinv(A: np.ndarray, what: str = "channel matrix") -> np.ndarray:
    """Pseudo-inverse, refusing matrices whose condition number exceeds 1e8."""
    s = np.linalg.svd(A, compute_uv=False)
    cond = math.inf if s.size == 0 or s[-1] == 0 else float(s[0] / s[-1])
    if not cond <= CONDITION_LIMIT:
        raise RankDeficiencyError(what, cond)
    return np.linalg.pinv(A)


def fit_channel(Y: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Least-squares channel for known symbols: H = Y X^+."""
    return Y @ np.linalg.pinv(X)


def orthogonal_projector(X: np.ndarray) -> np.ndarray:
    """Projector onto the orthogonal complement of the row space of X (N_sym x N_sym)."""
    X = np.asarray(X, complex)
    return np.eye(X.shape[1], dtype=complex) - np.linalg.pinv(X) @ X


def projection_residual(Y: np.ndarray, X: np.ndarray) -> float:
    """||Y P_perp(X)||_F^2, the model misfit after the best channel for X."""
    return float(np.linalg.norm(Y @ orthogonal_projector(X)) ** 2)


def fit_residual(Y: np.ndarray, H: np.ndarray, X: np.ndarray) -> float:
    return float(np.linalg.norm(Y - H @ X) ** 2)


def _decide(block: SignalBlock, stat: np.ndarray) -> DetectionResult:
    X_hat = quantize(stat, block.alphabet)
    return DetectionResult(
        X_hat=X_hat,
        H_hat=block.H,
        residual=fit_residual(block.Y, block.H, X_hat),
        symbol_errors=symbol_errors(X_hat, block.X),
    )


def zf_detect(block: SignalBlock) -> DetectionResult:
    """Zero-forcing: quantize H^+ Y."""
    if block.K == 0:
        return _decide(block, np.zeros((0, block.N_sym), complex))
    return _decide(block, checked_pinv(block.H) @ block.Y)


def mmse_detect(block: SignalBlock) -> DetectionResult:
    """Linear MMSE: quantize (H^H H + eta I)^-1 H^H Y; pseudo-inverse when eta = 0."""
    H, Y, eta = block.H, block.Y, block.noise_var
    if block.K == 0:
        return _decide(block, np.zeros((0, block.N_sym), complex))
    if eta == 0:
        stat = np.linalg.pinv(H) @ Y
    else:
        Hh = H.conj().T
        stat = np.linalg.solve(Hh @ H + eta * np.eye(block.K), Hh @ Y)
    return _decide(block, stat)


def estimate_source_count(Y: np.ndarray, threshold: Optional[float] = None) -> int:
    """Number of singular values of Y above ``threshold`` times the largest.

    With no threshold, a numerically rank-deficient Y (noiseless, fewer sources
    than antennas) is counted with the round-off tolerance of
    ``numpy.linalg.matrix_rank``; a full-rank Y is noisy and uses
    ``SOURCE_THRESHOLD``.
    """
    Y = np.asarray(Y)
    if Y.size == 0:
        return 0
    s = np.linalg.svd(Y, compute_uv=False)
    if s[0] == 0:
        return 0
    if threshold is None:
        rank = int(np.linalg.matrix_rank(Y))
        if rank < min(Y.shape):
            return rank
        threshold = SOURCE_THRESHOLD
    return int(np.count_nonzero(s > threshold * s[0]))


__all__ = [
    "Alphabet",
    "BPSK",
    "QPSK",
    "ALPHABETS",
    "alphabet",
    "SignalBlock",
    "DetectionResult",
    "CONDITION_LIMIT",
    "snr_to_noise_var",
    "complex_gaussian",
    "synthesize",
    "quantize",
    "symbol_errors",
    "symbol_error_rate",
    "checked_pinv",
    "fit_channel",
    "orthogonal_projector",
    "projection_residual",
    "fit_residual",
    "zf_detect",
    "mmse_detect",
    "estimate_source_count",
]
