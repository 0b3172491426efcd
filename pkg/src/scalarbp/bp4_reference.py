"""Conventional quaternary BP with length-4 vector messages.

Check-node messages are computed by brute-force enumeration of every Pauli
assignment on the check's support.  This is slow on purpose: it is the
correctness oracle for the scalar decoder and shares no message arithmetic
with it.
"""

from __future__ import annotations

import itertools

import numpy as np

from .outcome import DecodeOutcome, IterationRecord
from .pauli_core import ANTICOMMUTE, CheckMatrix, PauliString, syndrome

MAX_ROW_WEIGHT = 12
_BLOCK_DIGITS = 7


def _assignments(k: int):
    """Yield blocks of all 4**k assignments as (rows, k) uint8 arrays."""
    inner = min(k, _BLOCK_DIGITS)
    base = np.indices((4,) * inner, dtype=np.uint8).reshape(inner, -1).T
    for head in itertools.product(range(4), repeat=k - inner):
        if head:
            block = np.empty((base.shape[0], k), dtype=np.uint8)
            block[:, :k - inner] = head
            block[:, k - inner:] = base
            yield block
        else:
            yield base


def horizontal_vector(q_in: np.ndarray, paulis, z_m: int) -> np.ndarray:
    """Enumerate r_mn^W for one check.

    ``q_in`` is the (k, 4) array of incoming q_{mn'} vectors in the check's
    variable order and ``paulis`` the non-identity entries S_mn on its
    support.  Row ``i`` of the result is r_{m n_i}, unnormalized.
    """
    q_in = np.asarray(q_in, dtype=float)
    paulis = np.asarray(paulis, dtype=np.uint8)
    k = paulis.size
    if q_in.shape != (k, 4):
        raise ValueError(f"q_in must have shape ({k}, 4)")
    if k > MAX_ROW_WEIGHT:
        raise ValueError(f"row weight {k} exceeds enumeration bound {MAX_ROW_WEIGHT}")
    r = np.zeros((k, 4))
    cols = np.arange(k)
    for A in _assignments(k):
        parity = ANTICOMMUTE[A, paulis].sum(axis=1) & 1
        A = A[parity == z_m]
        Q = q_in[cols, A]
        for i in range(k):
            others = np.prod(np.delete(Q, i, axis=1), axis=1)
            r[i] += np.bincount(A[:, i], weights=others, minlength=4)
    return r


def collapse(vec: np.ndarray, pauli: int) -> tuple[float, float]:
    """Normalized (commuting, anticommuting) mass of a 4-vector w.r.t. ``pauli``."""
    anti = ANTICOMMUTE[np.arange(4), pauli].astype(bool)
    c0, c1 = float(vec[~anti].sum()), float(vec[anti].sum())
    s = c0 + c1
    return c0 / s, c1 / s


class VectorBp4:
    """Vector-message message state over one check matrix."""

    def __init__(self, S: CheckMatrix, z, priors):
        self.S = S
        self.z = np.asarray(z, dtype=np.uint8)
        self.p = np.asarray(priors, dtype=float)
        if self.z.shape != (S.num_checks,):
            raise ValueError(f"syndrome length {self.z.size} != {S.num_checks}")
        if self.p.shape != (S.num_qubits, 4):
            raise ValueError(f"priors must have shape ({S.num_qubits}, 4)")
        weights = S.row_weights()
        if weights.max(initial=0) > MAX_ROW_WEIGHT:
            raise ValueError(f"row weight {weights.max()} exceeds enumeration bound {MAX_ROW_WEIGHT}")
        self.q = self.p[S.edge_var].copy()
        self.r = np.ones((S.num_edges, 4))
        self.zero_messages = 0

    def horizontal(self, m: int, only_edge: int | None = None) -> None:
        lo, hi = self.S.check_ptr[m], self.S.check_ptr[m + 1]
        r = horizontal_vector(self.q[lo:hi], self.S.edge_pauli[lo:hi], int(self.z[m]))
        dead = r.sum(axis=1) == 0
        if dead.any():
            r[dead] = 1.0
            self.zero_messages += int(dead.sum())
        if only_edge is None:
            self.r[lo:hi] = r
        else:
            self.r[only_edge] = r[only_edge - lo]

    def vertical(self, n: int) -> None:
        edges = self.S.var_edges[self.S.var_ptr[n]:self.S.var_ptr[n + 1]]
        for e in edges:
            q = self.p[n].copy()
            for e2 in edges:
                if e2 != e:
                    q = q * self.r[e2]
            s = q.sum()
            if s > 0:
                self.q[e] = q / s
            else:
                self.q[e] = 0.25
                self.zero_messages += 1

    def marginals(self) -> np.ndarray:
        S = self.S
        out = np.empty((S.num_qubits, 4))
        for n in range(S.num_qubits):
            q = self.p[n].copy()
            for e in S.var_edges[S.var_ptr[n]:S.var_ptr[n + 1]]:
                q = q * self.r[e]
            s = q.sum()
            out[n] = q / s if s > 0 else 0.25
        return out

    def iterate(self, schedule: str = "parallel") -> None:
        S = self.S
        if schedule == "parallel":
            for m in range(S.num_checks):
                self.horizontal(m)
            for n in range(S.num_qubits):
                self.vertical(n)
            return
        for n in range(S.num_qubits):
            for e in S.var_edges[S.var_ptr[n]:S.var_ptr[n + 1]]:
                self.horizontal(int(S.edge_check[e]), only_edge=int(e))
            self.vertical(n)


def decode_bp4_vector(S: CheckMatrix, z, priors, max_iter: int = 100, trace: bool = False,
                      schedule: str = "parallel") -> DecodeOutcome:
    """Vector BP; halts once the estimate reproduces ``z``.

    The serial schedule visits variables in index order, recomputing each
    incoming check message before updating the variable's outgoing ones.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if schedule not in ("parallel", "serial"):
        raise ValueError(f"unknown schedule {schedule!r}")
    state = VectorBp4(S, z, priors)
    records = []
    est = marg = None
    for it in range(1, max_iter + 1):
        state.iterate(schedule)
        marg = state.marginals()
        est = PauliString(np.argmax(marg, axis=1))
        mismatches = int(np.count_nonzero(syndrome(S, est) != state.z))
        if trace:
            records.append(IterationRecord(it, est, mismatches, marg))
        if mismatches == 0:
            return DecodeOutcome(est, True, it, marg, records)
    return DecodeOutcome(est, False, max_iter, marg, records)
