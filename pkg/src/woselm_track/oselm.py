"""Online-sequential ELM: the unweighted recursive least-squares baseline."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


class SingularGramError(np.linalg.LinAlgError):
    pass


@dataclass
class OselmState:
    G: np.ndarray       # inverse Gram accumulator (H^T H)^-1
    beta: np.ndarray
    n_seen: int


def oselm_init(H0, T0, ridge: float | None = None) -> OselmState:
    """``G = (H0^T H0)^-1`` and ``beta = G H0^T T0``.

    ``ridge`` adds ``ridge * I`` to the Gram matrix; without it a rank-deficient
    initial chunk raises :class:`SingularGramError`.
    """
    H0 = np.asarray(H0, dtype=np.float64)
    T0 = np.asarray(T0, dtype=np.float64)
    if H0.shape[0] != T0.shape[0]:
        raise ValueError("H0 and T0 row counts differ")
    L = H0.shape[1]
    gram = H0.T @ H0
    if ridge:
        gram = gram + ridge * np.eye(L)
    ev = np.linalg.eigvalsh(gram)
    if ev[0] <= ev[-1] * L * np.finfo(float).eps:
        raise SingularGramError("initial Gram matrix is singular; supply more samples "
                                "than hidden nodes or enable the ridge stabiliser")
    G = np.linalg.solve(gram, np.eye(L))
    G = 0.5 * (G + G.T)
    return OselmState(G=G, beta=G @ H0.T @ T0, n_seen=H0.shape[0])


def oselm_update(state: OselmState, H, T) -> OselmState:
    """Absorb one chunk with the Woodbury form of the inverse-Gram update."""
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    G0, beta0 = state.G, state.beta
    if H.shape[1] != G0.shape[0]:
        raise ValueError(f"chunk has {H.shape[1]} hidden columns, state has {G0.shape[0]}")
    if H.shape[0] != T.shape[0]:
        raise ValueError("H and T row counts differ")
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(T))):
        raise ValueError("non-finite input")
    GH = G0 @ H.T                                   # (L, n)
    S = np.eye(H.shape[0]) + H @ GH
    G1 = G0 - GH @ np.linalg.solve(S, GH.T)
    if not np.all(np.isfinite(G1)):
        raise FloatingPointError("non-finite inverse Gram; problem is ill-conditioned")
    asym = np.max(np.abs(G1 - G1.T))
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(G1))):
        log.warning("inverse Gram asymmetry %.3g before symmetrising; "
                    "chunk is ill-conditioned", asym)
    G1 = 0.5 * (G1 + G1.T)
    beta1 = beta0 + G1 @ H.T @ (T - H @ beta0)
    if not np.all(np.isfinite(beta1)):
        raise FloatingPointError("non-finite output weights; problem is ill-conditioned")
    return OselmState(G=G1, beta=beta1, n_seen=state.n_seen + H.shape[0])
