"""Scalar-message quaternary BP for stabilizer codes.

Every message on an edge (m, n) is a single likelihood difference: the
variable-to-check ``d_mn`` says how much more likely E_n commutes with S_mn
than anticommutes, and the check-to-variable ``delta_mn`` is the signed
product of the other incoming ``d`` values.  Only the variable node ever
touches 4-vectors.

The normalized variant raises the collapsed (commute, anticommute) pair of
each outgoing variable message to the power ``1/alpha_v`` before
renormalizing; ``alpha_v = 1`` is the plain decoder.

Hot loops are numba kernels operating on the edge layout of
:class:`~scalarbp.pauli_core.CheckMatrix`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np

from .outcome import DecodeOutcome, IterationRecord, exclusive_products
from .pauli_core import ANTICOMMUTE, CheckMatrix, PauliString

SCHEDULES = ("parallel", "serial")

_ANTI = ANTICOMMUTE.astype(np.int64)


@dataclass(frozen=True)
class DecoderConfig:
    schedule: str = "parallel"
    alpha_v: float = 1.0
    max_iter: int = 100
    clamp_eps: float = 1e-12
    serial_order: Optional[Sequence[int]] = None
    normalize_r: bool = False
    trace: bool = False

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if not self.alpha_v > 0:
            raise ValueError("alpha_v must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 <= self.clamp_eps < 0.5:
            raise ValueError("clamp_eps must be in [0, 0.5)")
        if self.normalize_r:
            # TODO(normalize-r): r-message normalization variant; only q-messages are normalized for now.
            raise NotImplementedError("normalization of check-to-variable messages is not implemented")


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _init_d(priors, edge_var, edge_pauli, eps, d):
    for e in range(edge_var.size):
        n = edge_var[e]
        q0 = priors[n, 0] + priors[n, edge_pauli[e]]
        q1 = 0.0
        for w in range(1, 4):
            if w != edge_pauli[e]:
                q1 += priors[n, w]
        d[e] = min(max(q0 - q1, 2.0 * eps - 1.0), 1.0 - 2.0 * eps)


@numba.njit(cache=True, nogil=True)
def _check_all(d, delta, lo, hi, sign):
    acc = sign
    for e in range(lo, hi):
        delta[e] = acc
        acc *= d[e]
    acc = 1.0
    for e in range(hi - 1, lo - 1, -1):
        delta[e] *= acc
        acc *= d[e]


@numba.njit(cache=True, nogil=True)
def _check_one(d, delta, lo, hi, target, sign):
    acc = sign
    for e in range(lo, hi):
        if e != target:
            acc *= d[e]
    delta[target] = acc


@numba.njit(cache=True, nogil=True)
def _var_update(n, d, delta, priors, edge_pauli, var_ptr, var_edges, anti, inv_alpha, eps, work):
    lo, hi = var_ptr[n], var_ptr[n + 1]
    k = hi - lo
    # work[i, w]: prefix product for the i-th incident edge, then times suffix
    for w in range(4):
        acc = priors[n, w]
        for i in range(k):
            work[i, w] = acc
            e = var_edges[lo + i]
            if anti[w, edge_pauli[e]]:
                acc *= 0.5 * (1.0 - delta[e])
            else:
                acc *= 0.5 * (1.0 + delta[e])
        acc = 1.0
        for i in range(k - 1, -1, -1):
            work[i, w] *= acc
            e = var_edges[lo + i]
            if anti[w, edge_pauli[e]]:
                acc *= 0.5 * (1.0 - delta[e])
            else:
                acc *= 0.5 * (1.0 + delta[e])
    for i in range(k):
        e = var_edges[lo + i]
        s = edge_pauli[e]
        q0 = work[i, 0] + work[i, s]
        q1 = work[i, 1] + work[i, 2] + work[i, 3] - work[i, s]
        tot = q0 + q1
        if tot > 0.0:
            q0 /= tot
            q1 /= tot
        else:
            q0 = 0.5
            q1 = 0.5
        if inv_alpha != 1.0:
            q0 = q0 ** inv_alpha
            q1 = q1 ** inv_alpha
            tot = q0 + q1
            q0 /= tot
            q1 /= tot
        # clamping q0, q1 to [eps, 1-eps] bounds |d| by 1-2eps
        d[e] = min(max(q0 - q1, 2.0 * eps - 1.0), 1.0 - 2.0 * eps)


@numba.njit(cache=True, nogil=True)
def _parallel_iteration(d, delta, signs, priors, check_ptr, edge_pauli, var_ptr, var_edges,
                        anti, inv_alpha, eps, work):
    for m in range(signs.size):
        _check_all(d, delta, check_ptr[m], check_ptr[m + 1], signs[m])
    for n in range(var_ptr.size - 1):
        _var_update(n, d, delta, priors, edge_pauli, var_ptr, var_edges, anti, inv_alpha, eps, work)


@numba.njit(cache=True, nogil=True)
def _serial_iteration(d, delta, signs, priors, check_ptr, edge_check, edge_pauli, var_ptr, var_edges,
                      order, anti, inv_alpha, eps, work):
    for n in order:
        for j in range(var_ptr[n], var_ptr[n + 1]):
            e = var_edges[j]
            m = edge_check[e]
            _check_one(d, delta, check_ptr[m], check_ptr[m + 1], e, signs[m])
        _var_update(n, d, delta, priors, edge_pauli, var_ptr, var_edges, anti, inv_alpha, eps, work)


@numba.njit(cache=True, nogil=True)
def _hard_decision(delta, priors, edge_pauli, var_ptr, var_edges, anti, gamma, est):
    for n in range(var_ptr.size - 1):
        for w in range(4):
            acc = priors[n, w]
            for j in range(var_ptr[n], var_ptr[n + 1]):
                e = var_edges[j]
                if anti[w, edge_pauli[e]]:
                    acc *= 0.5 * (1.0 - delta[e])
                else:
                    acc *= 0.5 * (1.0 + delta[e])
            gamma[n, w] = acc
        best = 0
        for w in range(1, 4):
            if gamma[n, w] > gamma[n, best]:
                best = w
        est[n] = best


@numba.njit(cache=True, nogil=True)
def _mismatches(est, z, check_ptr, edge_var, edge_pauli, anti):
    count = 0
    for m in range(z.size):
        parity = 0
        for e in range(check_ptr[m], check_ptr[m + 1]):
            parity ^= anti[est[edge_var[e]], edge_pauli[e]]
        if parity != z[m]:
            count += 1
    return count


# ---------------------------------------------------------------------------
# step-level API
# ---------------------------------------------------------------------------

@dataclass
class ScalarMessageState:
    """Per-edge scalars and per-variable working products for one decode."""

    S: CheckMatrix
    priors: np.ndarray
    d: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray

    def r_pairs(self) -> np.ndarray:
        """(E, 2) array of check-to-variable pairs ((1+delta)/2, (1-delta)/2)."""
        return np.stack([(1.0 + self.delta) / 2.0, (1.0 - self.delta) / 2.0], axis=1)

    def marginals(self) -> np.ndarray:
        tot = self.gamma.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.gamma / tot
        out[~(tot[:, 0] > 0)] = 0.25
        return out


def check_priors(S: CheckMatrix, priors) -> np.ndarray:
    p = np.ascontiguousarray(priors, dtype=float)
    if p.shape != (S.num_qubits, 4):
        raise ValueError(f"priors must have shape ({S.num_qubits}, 4), got {p.shape}")
    if (p < 0).any() or not np.allclose(p.sum(axis=1), 1.0, atol=1e-12, rtol=0):
        raise ValueError("each prior must be a nonnegative 4-vector summing to 1")
    return p


def init_messages(S: CheckMatrix, priors, clamp_eps: float = 1e-12) -> ScalarMessageState:
    """d_mn from the prior mass of {I, S_mn} minus the rest; delta starts at 0."""
    p = check_priors(S, priors)
    d = np.empty(S.num_edges)
    _init_d(p, S.edge_var, S.edge_pauli, clamp_eps, d)
    return ScalarMessageState(S, p, d, np.zeros(S.num_edges), np.empty((S.num_qubits, 4)))


def horizontal_scalar(m: int, state: ScalarMessageState, z_m: int) -> None:
    S = state.S
    _check_all(state.d, state.delta, S.check_ptr[m], S.check_ptr[m + 1], -1.0 if z_m else 1.0)


def horizontal_check_counted(d_values: Sequence[float], z_m: int) -> tuple[list[float], int]:
    """Pure-Python check-node update that also reports its multiplication count."""
    return exclusive_products(list(d_values), start=-1.0 if z_m else 1.0)


def _work_buffer(S: CheckMatrix) -> np.ndarray:
    return np.empty((max(int(S.column_weights().max(initial=0)), 1), 4))


def vertical_scalar(n: int, state: ScalarMessageState, alpha_v: float = 1.0, clamp_eps: float = 1e-12) -> None:
    S = state.S
    _var_update(n, state.d, state.delta, state.priors, S.edge_pauli, S.var_ptr, S.var_edges,
                _ANTI, 1.0 / alpha_v, clamp_eps, _work_buffer(S))


def run_iteration(state: ScalarMessageState, z, schedule: str = "parallel", alpha_v: float = 1.0,
                  clamp_eps: float = 1e-12, order: Sequence[int] | None = None) -> None:
    """One full iteration without the halting test."""
    S = state.S
    signs = np.where(np.asarray(z) == 1, -1.0, 1.0)
    work = _work_buffer(S)
    if schedule == "parallel":
        _parallel_iteration(state.d, state.delta, signs, state.priors, S.check_ptr, S.edge_pauli,
                            S.var_ptr, S.var_edges, _ANTI, 1.0 / alpha_v, clamp_eps, work)
    elif schedule == "serial":
        order = np.arange(S.num_qubits, dtype=np.int64) if order is None else np.asarray(order, dtype=np.int64)
        _serial_iteration(state.d, state.delta, signs, state.priors, S.check_ptr, S.edge_check, S.edge_pauli,
                          S.var_ptr, S.var_edges, order, _ANTI, 1.0 / alpha_v, clamp_eps, work)
    else:
        raise ValueError(f"unknown schedule {schedule!r}")


def hard_decision(state: ScalarMessageState) -> PauliString:
    """Argmax of the per-variable posteriors, ties broken I < X < Y < Z."""
    S = state.S
    est = np.empty(S.num_qubits, dtype=np.int64)
    _hard_decision(state.delta, state.priors, S.edge_pauli, S.var_ptr, S.var_edges, _ANTI, state.gamma, est)
    return PauliString(est)


# ---------------------------------------------------------------------------
# decoder
# ---------------------------------------------------------------------------

class ScalarBp4Decoder:
    """Reusable decoder bound to one check matrix and configuration.

    Not safe to share across threads during a decode; make one per thread.
    """

    def __init__(self, S: CheckMatrix, config: DecoderConfig | None = None):
        self.S = S
        self.config = config or DecoderConfig()
        self._work = _work_buffer(S)
        if self.config.serial_order is None:
            self._order = np.arange(S.num_qubits, dtype=np.int64)
        else:
            order = np.asarray(self.config.serial_order, dtype=np.int64)
            if sorted(order.tolist()) != list(range(S.num_qubits)):
                raise ValueError("serial_order must be a permutation of the qubits")
            self._order = order

    def decode(self, z, priors) -> DecodeOutcome:
        S, cfg = self.S, self.config
        z = np.ascontiguousarray(z, dtype=np.int64)
        if z.shape != (S.num_checks,):
            raise ValueError(f"syndrome length {z.size} != {S.num_checks}")
        state = init_messages(S, priors, cfg.clamp_eps)
        signs = np.where(z == 1, -1.0, 1.0)
        inv_alpha = 1.0 / cfg.alpha_v
        est = np.empty(S.num_qubits, dtype=np.int64)
        records = []
        for it in range(1, cfg.max_iter + 1):
            if cfg.schedule == "parallel":
                _parallel_iteration(state.d, state.delta, signs, state.priors, S.check_ptr, S.edge_pauli,
                                    S.var_ptr, S.var_edges, _ANTI, inv_alpha, cfg.clamp_eps, self._work)
            else:
                _serial_iteration(state.d, state.delta, signs, state.priors, S.check_ptr, S.edge_check,
                                  S.edge_pauli, S.var_ptr, S.var_edges, self._order, _ANTI, inv_alpha,
                                  cfg.clamp_eps, self._work)
            _hard_decision(state.delta, state.priors, S.edge_pauli, S.var_ptr, S.var_edges, _ANTI,
                           state.gamma, est)
            mismatches = _mismatches(est, z, S.check_ptr, S.edge_var, S.edge_pauli, _ANTI)
            if cfg.trace:
                records.append(IterationRecord(it, PauliString(est), mismatches, state.marginals()))
            if mismatches == 0:
                return DecodeOutcome(PauliString(est), True, it, state.marginals(), records)
        return DecodeOutcome(PauliString(est), False, cfg.max_iter, state.marginals(), records)


def decode(S: CheckMatrix, z, priors, config: DecoderConfig | None = None) -> DecodeOutcome:
    return ScalarBp4Decoder(S, config).decode(z, priors)


def depolarizing_priors(n: int, epsilon: float) -> np.ndarray:
    """(N, 4) priors (1-eps, eps/3, eps/3, eps/3) in I, X, Y, Z order."""
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must be in [0, 1)")
    return np.tile([1.0 - epsilon, epsilon / 3, epsilon / 3, epsilon / 3], (n, 1))
