"""Blind finite-alphabet detection: joint channel and symbol estimation from Y alone.

For fixed symbols X the best channel is H = Y X^+, which leaves the misfit
||Y P_perp(X)||_F^2. Blind detection minimizes that over X with entries in the
alphabet, either by enumeration or by iterative least squares with projection
(ILSP). X is identifiable only up to row permutation and per-row alphabet
symmetry, so results are returned in a canonical form.
"""
from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, SearchSpaceError
from .phy import (
    BPSK,
    Alphabet,
    DetectionResult,
    complex_gaussian,
    fit_channel,
    fit_residual,
    quantize,
)

log = logging.getLogger(__name__)

MAX_CANDIDATES = 2 ** 24
ILSP_RESTARTS = 8
ILSP_MAX_ITER = 100
_CHUNK = 1 << 14
_RANK_TOL = 1e-9


def canonicalize(
    X_hat: np.ndarray, H_hat: Optional[np.ndarray], alphabet: Alphabet = BPSK
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Rotate each row so it starts with the first alphabet symbol, then sort rows.

    H_hat columns are rotated and permuted alongside so H_hat X_hat is unchanged.
    """
    X = np.array(X_hat, complex, copy=True)
    H = None if H_hat is None else np.array(H_hat, complex, copy=True)
    if X.shape[0] == 0 or X.shape[1] == 0:
        return X, H

    first = alphabet.points[0]
    for i in range(X.shape[0]):
        for g in alphabet.symmetries:
            if abs(g * X[i, 0] - first) < 1e-6:
                X[i] = quantize(g * X[i], alphabet)
                if H is not None:
                    H[:, i] = H[:, i] / g
                break

    keys = [tuple(row) for row in alphabet.indices(X).tolist()]
    order = sorted(range(X.shape[0]), key=lambda i: keys[i])
    X = X[order]
    if H is not None:
        H = H[:, order]
    return X, H


def align_ambiguity(
    X_hat: np.ndarray, X_true: np.ndarray, alphabet: Alphabet = BPSK
) -> Tuple[np.ndarray, int]:
    """Row permutation and per-row symmetry of X_hat closest to X_true in Hamming distance."""
    X_hat = np.asarray(X_hat, complex)
    X_true = np.asarray(X_true, complex)
    if X_hat.shape != X_true.shape:
        raise DomainError("matching shapes", f"{X_hat.shape} vs {X_true.shape}")
    K = X_hat.shape[0]
    if K == 0:
        return X_hat.copy(), 0

    syms = alphabet.symmetries
    # cost[i, j, s]: errors when row i of X_hat, scaled by symmetry s, plays row j
    cost = np.empty((K, K, len(syms)), dtype=np.int64)
    for s, g in enumerate(syms):
        scaled = quantize(g * X_hat, alphabet)
        for i in range(K):
            cost[i, :, s] = np.count_nonzero(np.abs(scaled[i] - X_true) > 1e-6, axis=1)

    best = cost.min(axis=2)
    rows, cols = linear_sum_assignment(best)
    aligned = np.empty_like(X_hat)
    for i, j in zip(rows, cols):
        g = syms[int(np.argmin(cost[i, j]))]
        aligned[j] = quantize(g * X_hat[i], alphabet)
    return aligned, int(best[rows, cols].sum())


def _candidates(start: int, stop: int, K: int, N_sym: int, alphabet: Alphabet) -> np.ndarray:
    q = alphabet.size
    idx = np.arange(start, stop, dtype=np.int64)
    weights = q ** np.arange(K * N_sym, dtype=np.int64)
    digits = (idx[:, None] // weights) % q
    return alphabet.points[digits].reshape(-1, K, N_sym)


def blind_detect_exhaustive(
    Y: np.ndarray,
    K: int,
    alphabet: Alphabet = BPSK,
    *,
    max_candidates: int = MAX_CANDIDATES,
    truth: Optional[np.ndarray] = None,
) -> DetectionResult:
    """Global minimizer of ||Y P_perp(X)||_F^2 over full-row-rank alphabet matrices."""
    Y = np.asarray(Y, complex)
    N_sym = Y.shape[1]
    if K < 1:
        raise DomainError("K >= 1", f"K = {K}")
    if N_sym < K:
        raise DomainError("N_sym >= K", f"N_sym = {N_sym}, K = {K}")
    total = alphabet.size ** (K * N_sym)
    if total > max_candidates:
        raise SearchSpaceError(
            f"|alphabet|^(K*N_sym) <= {max_candidates}", f"{alphabet.size}^{K * N_sym} candidates"
        )

    energy = float(np.linalg.norm(Y) ** 2)
    best_obj, best_X = np.inf, None
    for start in range(0, total, _CHUNK):
        X = _candidates(start, min(start + _CHUNK, total), K, N_sym, alphabet)
        Xh = np.conj(np.swapaxes(X, 1, 2))
        G = X @ Xh
        C = Y[None] @ Xh
        full_rank = np.linalg.eigvalsh(G)[:, 0] > _RANK_TOL * N_sym
        G = np.where(full_rank[:, None, None], G, np.eye(K))
        # ||Y||^2 - tr(C G^-1 C^H) is the misfit left after the best channel
        Z = np.linalg.solve(G, np.conj(np.swapaxes(C, 1, 2)))
        fitted = np.einsum("bmk,bkm->b", C, Z).real
        obj = np.where(full_rank, energy - fitted, np.inf)
        i = int(np.argmin(obj))
        if obj[i] < best_obj:
            best_obj, best_X = float(obj[i]), X[i]

    if best_X is None:
        raise DomainError("a full-row-rank candidate exists", f"K = {K}, N_sym = {N_sym}")
    H_hat = fit_channel(Y, best_X)
    X_hat, H_hat = canonicalize(best_X, H_hat, alphabet)
    log.debug("exhaustive search over %d candidates: objective %.6g", total, best_obj)
    return DetectionResult(
        X_hat=X_hat,
        H_hat=H_hat,
        residual=fit_residual(Y, H_hat, X_hat),
        symbol_errors=None if truth is None else align_ambiguity(X_hat, truth, alphabet)[1],
        iterations=1,
    )


def _ilsp_run(
    Y: np.ndarray, H: np.ndarray, alphabet: Alphabet, max_iter: int
) -> Tuple[np.ndarray, np.ndarray, List[float], int, bool]:
    K = H.shape[1]
    floor = 1e-20 * max(float(np.linalg.norm(Y) ** 2), 1.0)
    X_prev = None
    best_X = best_H = None
    history: List[float] = []
    for it in range(1, max_iter + 1):
        X = quantize(np.linalg.pinv(H) @ Y, alphabet)
        if np.linalg.matrix_rank(X) < K:
            if best_X is None:
                best_X, best_H = X, fit_channel(Y, X)
                history.append(fit_residual(Y, best_H, X))
            return best_X, best_H, history, it, False
        H_new = fit_channel(Y, X)
        obj = fit_residual(Y, H_new, X)
        if history and obj > history[-1]:
            # keep the misfit non-increasing: stop at the previous iterate
            return best_X, best_H, history, it, False
        history.append(obj)
        best_X, best_H = X, H_new
        if obj <= floor or (X_prev is not None and np.array_equal(X, X_prev)):
            return X, H_new, history, it, True
        X_prev, H = X, H_new
    return best_X, best_H, history, max_iter, False


def blind_detect_ilsp(
    Y: np.ndarray,
    K: int,
    alphabet: Alphabet = BPSK,
    max_iter: int = ILSP_MAX_ITER,
    init_seed: Optional[int] = None,
    *,
    restarts: int = ILSP_RESTARTS,
    H_init: Optional[np.ndarray] = None,
    truth: Optional[np.ndarray] = None,
) -> DetectionResult:
    """Iterative least squares with projection, best of ``restarts`` random channel starts.

    With ``H_init`` a single run starts from that channel.
    """
    Y = np.asarray(Y, complex)
    M_ant = Y.shape[0]
    if K < 1:
        raise DomainError("K >= 1", f"K = {K}")
    if K > M_ant:
        raise DomainError("K <= M_ant", f"K = {K}, M_ant = {M_ant}")
    if max_iter < 1 or restarts < 1:
        raise DomainError("max_iter >= 1 and restarts >= 1", f"max_iter = {max_iter}, restarts = {restarts}")

    rng = np.random.default_rng(init_seed)
    starts = [np.asarray(H_init, complex)] if H_init is not None else [
        complex_gaussian(rng, (M_ant, K)) for _ in range(restarts)
    ]

    best = None
    for H0 in starts:
        X, H, history, iterations, converged = _ilsp_run(Y, H0, alphabet, max_iter)
        if best is None or history[-1] < best[2][-1]:
            best = (X, H, history, iterations, converged)

    X, H, history, iterations, converged = best
    if not converged:
        log.warning("ILSP stopped after %d iterations without reaching a fixed point", iterations)
    X_hat, H_hat = canonicalize(X, H, alphabet)
    return DetectionResult(
        X_hat=X_hat,
        H_hat=H_hat,
        residual=history[-1],
        symbol_errors=None if truth is None else align_ambiguity(X_hat, truth, alphabet)[1],
        iterations=iterations,
        converged=converged,
        history=tuple(history),
    )


__all__ = [
    "MAX_CANDIDATES",
    "ILSP_RESTARTS",
    "canonicalize",
    "align_ambiguity",
    "blind_detect_exhaustive",
    "blind_detect_ilsp",
]
