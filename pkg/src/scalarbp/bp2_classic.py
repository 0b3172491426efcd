"""Binary syndrome BP with likelihood-difference and log-likelihood-ratio rules.

Both rules run on the same Tanner-graph layout and the same schedules, so
they can be compared message for message.  This decoder is small-scale by
design (pure Python loops over edges); it is a baseline, not a workhorse.
"""

from __future__ import annotations

import math

import numpy as np

from .outcome import DecodeOutcome, IterationRecord, exclusive_products
from .pauli_core import CheckMatrix

SCHEDULES = ("parallel", "serial")
RULES = ("delta", "llr")

# Saturated likelihood differences keep only ~1e-16 absolute resolution, so the
# clamp bounds the relative precision of 1 - d at ~1e-16 / eps.  The delta and
# LLR rules drift apart on ill-conditioned instances unless eps is large; 1e-4
# keeps them within 1e-9 nearly always and caps LLRs at about 9.2.
DEFAULT_CLAMP = 1e-4


class BinaryCheckMatrix(CheckMatrix):
    """0/1 parity-check matrix; entries equal to 1 are edges."""

    def __post_init__(self):
        H = np.asarray(self.rows)
        if H.size and not np.isin(H, (0, 1)).all():
            raise ValueError("binary check matrix entries must be 0 or 1")
        super().__post_init__()

    @property
    def H(self) -> np.ndarray:
        return self.rows

    def syndrome(self, e) -> np.ndarray:
        e = np.asarray(e, dtype=np.int64)
        if e.size != self.num_qubits:
            raise ValueError(f"error length {e.size} != {self.num_qubits}")
        return ((self.rows.astype(np.int64) @ e) & 1).astype(np.uint8)


def binary_priors(p1, n: int | None = None) -> np.ndarray:
    """Build an (N, 2) array of (p0, p1) from a scalar or per-bit p1."""
    p1 = np.asarray(p1, dtype=float)
    if p1.ndim == 0:
        if n is None:
            raise ValueError("n is required for a scalar prior")
        p1 = np.full(n, float(p1))
    return np.stack([1.0 - p1, p1], axis=1)


# ---------------------------------------------------------------------------
# LLR primitives
# ---------------------------------------------------------------------------

def gallager_f(x):
    """f(x) = ln((e^x + 1) / (e^x - 1)), with f(0) = inf and f(inf) = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.log(np.tanh(x / 2.0))


def boxplus(l2, l3):
    """Check-node combination 2 atanh(tanh(l2/2) tanh(l3/2)); saturates at +-inf."""
    with np.errstate(divide="ignore"):
        out = 2.0 * np.arctanh(np.tanh(np.asarray(l2, float) / 2.0) * np.tanh(np.asarray(l3, float) / 2.0))
    return out if np.ndim(out) else float(out)


def boxplus_sign_f(l2, l3):
    """Same combination in sign-and-magnitude form via Gallager's f."""
    l2, l3 = np.asarray(l2, float), np.asarray(l3, float)
    out = np.sign(l2 * l3) * gallager_f(gallager_f(np.abs(l2)) + gallager_f(np.abs(l3)))
    return out if np.ndim(out) else float(out)


def _f(x: float) -> float:
    """Scalar Gallager f, accurate for large x."""
    if x == 0.0:
        return math.inf
    if math.isinf(x):
        return 0.0
    if x > 700.0:
        return 2.0 * math.exp(-x)
    if x > 1.0:
        return -math.log1p(-2.0 / (math.exp(x) + 1.0))
    return -math.log(math.tanh(x / 2.0))


def _exclusive_sums(values, start=0.0):
    k = len(values)
    prefix = [start] * k
    for i in range(1, k):
        prefix[i] = prefix[i - 1] + values[i - 1]
    suffix = [0.0] * k
    for i in range(k - 2, -1, -1):
        suffix[i] = suffix[i + 1] + values[i + 1]
    return [a + b for a, b in zip(prefix, suffix)]


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


# ---------------------------------------------------------------------------
# Decoder
# ---------------------------------------------------------------------------

class _Bp2:
    def __init__(self, H: BinaryCheckMatrix, z, priors, rule: str, clamp_eps: float):
        self.H = H
        self.z = np.asarray(z, dtype=np.uint8)
        self.p = np.asarray(priors, dtype=float)
        if self.z.shape != (H.num_checks,):
            raise ValueError(f"syndrome length {self.z.size} != {H.num_checks}")
        if self.p.shape != (H.num_qubits, 2):
            raise ValueError(f"priors must have shape ({H.num_qubits}, 2)")
        if rule not in RULES:
            raise ValueError(f"unknown rule {rule!r}")
        if not 0 < clamp_eps < 0.5:
            raise ValueError("clamp_eps must be in (0, 0.5)")
        self.rule = rule
        self.eps = clamp_eps
        self.llr_cap = math.log((1.0 - clamp_eps) / clamp_eps)
        self.check_updates = 0
        self.var_updates = 0
        E = H.num_edges
        self.to_check = np.empty(E)   # d_mn or Lambda_mn
        self.to_var = np.zeros(E)     # delta_mn or lambda_mn
        for n in range(H.num_qubits):
            if rule == "delta":
                cap = 1.0 - 2.0 * self.eps
                init = max(-cap, min(cap, self.p[n, 0] - self.p[n, 1]))
            else:
                init = self._cap(math.log(self.p[n, 0] / self.p[n, 1]) if self.p[n, 1] > 0 else math.inf)
            self.to_check[self._var_slice(n)] = init
        if rule == "llr":
            self.to_var[:] = 0.0

    def _cap(self, llr: float) -> float:
        return max(-self.llr_cap, min(self.llr_cap, llr))

    def _var_slice(self, n):
        H = self.H
        return H.var_edges[H.var_ptr[n]:H.var_ptr[n + 1]]

    def update_check(self, m: int, only_edge: int | None = None) -> None:
        lo, hi = self.H.check_ptr[m], self.H.check_ptr[m + 1]
        if self.rule == "delta":
            out, _ = exclusive_products(list(self.to_check[lo:hi]), start=-1.0 if self.z[m] else 1.0)
        else:
            # sign-and-magnitude form: exclusive sums of f(|L|), exclusive sign products
            vals = self.to_check[lo:hi]
            mags = [_f(abs(v)) for v in vals]
            signs, _ = exclusive_products([-1.0 if v < 0 else 1.0 for v in vals],
                                          start=-1.0 if self.z[m] else 1.0)
            sums = _exclusive_sums(mags)
            out = [s * _f(t) for s, t in zip(signs, sums)]
        # a degree-one check emits an exact 0/1 message; clamp it like any other
        lim = 1.0 - 2.0 * self.eps if self.rule == "delta" else self.llr_cap
        out = [max(-lim, min(lim, v)) for v in out]
        for i, v in enumerate(out):
            e = lo + i
            if only_edge is not None and e != only_edge:
                continue
            self.to_var[e] = v
            self.check_updates += 1

    def _incoming(self, n):
        edges = self._var_slice(n)
        if self.rule == "delta":
            r0 = [(1.0 + self.to_var[e]) / 2.0 for e in edges]
            r1 = [(1.0 - self.to_var[e]) / 2.0 for e in edges]
            return edges, r0, r1
        return edges, [self.to_var[e] for e in edges], None

    def update_var(self, n: int) -> None:
        edges, a, b = self._incoming(n)
        if self.rule == "delta":
            x0, _ = exclusive_products(a, start=self.p[n, 0])
            x1, _ = exclusive_products(b, start=self.p[n, 1])
            cap = 1.0 - 2.0 * self.eps
            for e, q0, q1 in zip(edges, x0, x1):
                s = q0 + q1
                d = (q0 - q1) / s if s > 0 else 0.0
                self.to_check[e] = max(-cap, min(cap, d))
                self.var_updates += 1
        else:
            base = math.log(self.p[n, 0] / self.p[n, 1]) if self.p[n, 1] > 0 else math.inf
            for e, s in zip(edges, _exclusive_sums(a, start=base)):
                self.to_check[e] = self._cap(s)
                self.var_updates += 1

    def posterior(self, n: int) -> tuple[float, float]:
        edges, a, b = self._incoming(n)
        if self.rule == "delta":
            q0, q1 = self.p[n, 0], self.p[n, 1]
            for x, y in zip(a, b):
                q0 *= x
                q1 *= y
            s = q0 + q1
            return (q0 / s, q1 / s) if s > 0 else (0.5, 0.5)
        llr = math.log(self.p[n, 0] / self.p[n, 1]) if self.p[n, 1] > 0 else math.inf
        llr += sum(a)
        if math.isinf(llr):
            return (1.0, 0.0) if llr > 0 else (0.0, 1.0)
        return _sigmoid(llr), _sigmoid(-llr)

    def hard_decision(self):
        post = np.array([self.posterior(n) for n in range(self.H.num_qubits)])
        est = (post[:, 1] > post[:, 0]).astype(np.uint8)
        return est, post


def decode_bp2(H: BinaryCheckMatrix, z, priors, schedule: str = "parallel", max_iter: int = 100,
               rule: str = "delta", clamp_eps: float = DEFAULT_CLAMP, trace: bool = False) -> DecodeOutcome:
    """Binary BP syndrome decoding.

    ``priors`` is an (N, 2) array of (p0, p1).  The parallel schedule updates
    all check messages and then all variable messages; the serial schedule
    visits variables in index order, refreshing each incoming check message
    from the current variable messages before updating the variable.
    Hard decisions prefer 0 on ties.  Message probabilities in both
    directions are clamped to ``[clamp_eps, 1 - clamp_eps]``.
    """
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not isinstance(H, BinaryCheckMatrix):
        H = BinaryCheckMatrix(np.asarray(H))
    state = _Bp2(H, z, priors, rule, clamp_eps)
    records = []
    est = post = None
    for it in range(1, max_iter + 1):
        sweep(state, schedule)
        est, post = state.hard_decision()
        mismatches = int(np.count_nonzero(H.syndrome(est) != state.z))
        if trace:
            records.append(IterationRecord(it, est.copy(), mismatches, post.copy()))
        if mismatches == 0:
            return DecodeOutcome(est, True, it, post, records)
    return DecodeOutcome(est, False, max_iter, post, records)


def sweep(state: _Bp2, schedule: str) -> None:
    H = state.H
    if schedule == "parallel":
        for m in range(H.num_checks):
            state.update_check(m)
        for n in range(H.num_qubits):
            state.update_var(n)
        return
    for n in range(H.num_qubits):
        for e in state._var_slice(n):
            state.update_check(int(H.edge_check[e]), only_edge=int(e))
        state.update_var(n)
