"""Weighted online-sequential ELM with per-chunk cost-sensitive weights.

Every chunk carries a diagonal weight matrix built from its own class counts:
the positive class gets ``N / (P + N)`` and the negative class ``P / (P + N)``,
so the minority class receives the larger weight. The weights enter through
``A = sqrt(W) H`` and ``B = sqrt(W) T``.

The recursion keeps the regularised weighted Gram matrix

    K_1 = K_0 + R + A^T A,    R = I / 2C (``accumulate``) or 0 (``fixed``)

and updates the output weights with a forgetting factor ``rho``:

    beta_1 = K_1^-1 [K_1 beta_0 - rho (R + A^T A) beta_0 + A^T B]

With ``rho = 1`` and ``fixed`` regularisation this is the exact recursive
solution of the weighted ridge problem over all chunks seen so far.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import elm
from .elm import POSITIVE

log = logging.getLogger(__name__)

REGULARIZER_MODES = ("accumulate", "fixed")
RHO_MODES = ("paper", "unit", "fixed")
SYMMETRY_TOL = 1e-10

MAGIC = b"WOSELM\x00\x00"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ClassWeights:
    w_pos: float
    w_neg: float


@dataclass
class WoselmState:
    K: np.ndarray
    beta: np.ndarray
    C: float
    s_pos: int
    s_neg: int
    regularizer_mode: str = "accumulate"
    rho_mode: str = "paper"
    rho_value: float = 1.0        # used when rho_mode == "fixed"
    last_rho: float = float("nan")
    last_rho_raw: float = float("nan")

    @property
    def n_hidden(self) -> int:
        return self.K.shape[0]

    def to_bytes(self) -> bytes:
        return dumps(self)


def weights_for_batch(P: int, N: int) -> ClassWeights:
    if P < 1 or N < 1:
        raise ValueError(f"both classes must be present (P={P}, N={N})")
    return ClassWeights(w_pos=N / (P + N), w_neg=P / (P + N))


def build_weight_matrix(labels, cw: ClassWeights) -> np.ndarray:
    """Diagonal of the per-sample weight matrix."""
    labels = np.asarray(labels)
    return np.where(labels == POSITIVE, cw.w_pos, cw.w_neg).astype(np.float64)


def forgetting_factor(S_P: int, S_N: int, P: int, N: int) -> float:
    """``|S_P / S_N - P / N|`` evaluated literally."""
    if S_N < 1 or N < 1:
        raise ZeroDivisionError("negative counts must be >= 1")
    return abs(S_P / S_N - P / N)


def _counts(labels) -> tuple[int, int]:
    labels = np.asarray(labels)
    P = int(np.count_nonzero(labels == POSITIVE))
    return P, int(labels.size - P)


def _split(H, T, labels, cw: ClassWeights):
    sw = np.sqrt(build_weight_matrix(labels, cw))
    return H * sw[:, None], T * sw[:, None]


def _factor(K):
    try:
        return cho_factor(K, lower=True)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("Gram accumulator is not positive definite") from exc


def woselm_init(H0, T0, labels, C: float, regularizer_mode: str = "accumulate",
                rho_mode: str = "paper", rho_value: float = 1.0) -> WoselmState:
    """``K_0 = I / 2C + A_0^T A_0`` and ``beta_0 = K_0^-1 A_0^T B_0``."""
    H0 = np.asarray(H0, dtype=np.float64)
    T0 = np.asarray(T0, dtype=np.float64)
    if C <= 0:
        raise ValueError("C must be positive")
    if regularizer_mode not in REGULARIZER_MODES:
        raise ValueError(f"unknown regularizer_mode {regularizer_mode!r}")
    if rho_mode not in RHO_MODES:
        raise ValueError(f"unknown rho_mode {rho_mode!r}")
    if not (np.all(np.isfinite(H0)) and np.all(np.isfinite(T0))):
        raise ValueError("non-finite input")
    P, N = _counts(labels)
    cw = weights_for_batch(P, N)
    A, B = _split(H0, T0, labels, cw)
    L = H0.shape[1]
    K0 = np.eye(L) / (2.0 * C) + A.T @ A
    beta0 = cho_solve(_factor(K0), A.T @ B)
    return WoselmState(K=K0, beta=beta0, C=float(C), s_pos=P, s_neg=N,
                       regularizer_mode=regularizer_mode, rho_mode=rho_mode,
                       rho_value=float(rho_value))


def chunk_rho(state: WoselmState, P: int, N: int) -> tuple[float, float]:
    """Forgetting factor for a chunk as ``(clamped, raw)``."""
    if state.rho_mode == "unit":
        raw = 1.0
    elif state.rho_mode == "fixed":
        raw = state.rho_value
    elif N >= 1:
        raw = forgetting_factor(state.s_pos, state.s_neg, P, N)
    else:
        # ratio undefined without negatives; use the exact recursion
        raw = 1.0
    return min(max(raw, 0.0), 1.0), raw


def woselm_update(state: WoselmState, H, T, labels) -> WoselmState:
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    L = state.n_hidden
    if H.shape[1] != L:
        raise ValueError(f"chunk has {H.shape[1]} hidden columns, state has {L}")
    if H.shape[0] != T.shape[0] or T.shape[1] != state.beta.shape[1]:
        raise ValueError("chunk targets do not match")
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(T))):
        raise ValueError("non-finite input")
    P, N = _counts(labels)
    if P == 0 or N == 0:
        log.warning("single-category chunk (P=%d, N=%d); using neutral weights", P, N)
        cw = ClassWeights(0.5, 0.5)
    else:
        cw = weights_for_batch(P, N)
    rho, rho_raw = chunk_rho(state, P, N)
    if rho != rho_raw:
        log.debug("forgetting factor %.6g clamped to %.6g", rho_raw, rho)

    A, B = _split(H, T, labels, cw)
    AtA = A.T @ A
    # regulariser injected into K by this chunk; the forgetting term removes
    # exactly what was added so that rho = 1 recovers K_0 beta_0
    reg = 1.0 / (2.0 * state.C) if state.regularizer_mode == "accumulate" else 0.0
    K0, beta0 = state.K, state.beta
    K1 = K0 + AtA
    K1[np.diag_indices(L)] += reg
    asym = np.max(np.abs(K1 - K1.T))
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(K1))):
        raise FloatingPointError(f"Gram accumulator drifted from symmetry ({asym:.3g})")
    K1 = 0.5 * (K1 + K1.T)

    rhs = K1 @ beta0 - rho * (reg * beta0 + AtA @ beta0) + A.T @ B
    beta1 = cho_solve(_factor(K1), rhs)
    if not np.all(np.isfinite(beta1)):
        raise FloatingPointError("non-finite output weights")
    return replace(state, K=K1, beta=beta1, s_pos=state.s_pos + P, s_neg=state.s_neg + N,
                   last_rho=rho, last_rho_raw=rho_raw)


def predict(state: WoselmState, layer: elm.HiddenLayer, X):
    return elm.predict(layer, state.beta, X)


# -- serialisation ---------------------------------------------------------
# Little-endian layout, fields in declaration order:
#   magic[8] version:u32 n_hidden:u32 m:u32
#   K: n_hidden*n_hidden f64 (row-major)   beta: n_hidden*m f64 (row-major)
#   C:f64 s_pos:u64 s_neg:u64 regularizer_mode:u8 rho_mode:u8 rho_value:f64
#   last_rho:f64 last_rho_raw:f64

_HEAD = struct.Struct("<8sIII")
_TAIL = struct.Struct("<dQQBBddd")


def dumps(state: WoselmState) -> bytes:
    L, m = state.beta.shape
    return b"".join([
        _HEAD.pack(MAGIC, FORMAT_VERSION, L, m),
        np.ascontiguousarray(state.K, dtype="<f8").tobytes(),
        np.ascontiguousarray(state.beta, dtype="<f8").tobytes(),
        _TAIL.pack(state.C, state.s_pos, state.s_neg,
                   REGULARIZER_MODES.index(state.regularizer_mode),
                   RHO_MODES.index(state.rho_mode), state.rho_value,
                   state.last_rho, state.last_rho_raw),
    ])


def loads(blob: bytes) -> WoselmState:
    magic, version, L, m = _HEAD.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ValueError("not a WOSELM state blob")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported state format version {version}")
    off = _HEAD.size
    K = np.frombuffer(blob, dtype="<f8", count=L * L, offset=off).reshape(L, L).copy()
    off += 8 * L * L
    beta = np.frombuffer(blob, dtype="<f8", count=L * m, offset=off).reshape(L, m).copy()
    off += 8 * L * m
    if len(blob) != off + _TAIL.size:
        raise ValueError("truncated or oversized state blob")
    C, sp, sn, reg, rho_mode, rho_value, last, last_raw = _TAIL.unpack_from(blob, off)
    return WoselmState(K=K, beta=beta, C=C, s_pos=sp, s_neg=sn,
                       regularizer_mode=REGULARIZER_MODES[reg], rho_mode=RHO_MODES[rho_mode],
                       rho_value=rho_value, last_rho=last, last_rho_raw=last_raw)
