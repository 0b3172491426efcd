"""Bicycle-code construction and a few built-in check matrices."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .pauli_core import CheckMatrix, X, Z, gf2_rank, save_code

DELETIONS = ("random", "min_var", "min_max")

BUILTIN_CODES = {
    "fig2_toy": ["XYI", "ZZY"],
    "five_qubit": ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"],
}


@dataclass(frozen=True)
class BicycleParams:
    n: int = 256
    row_weight: int = 16
    target_checks: int = 224
    deletion: str = "min_var"
    seed: int = 7

    def __post_init__(self):
        n, k, M = self.n, self.row_weight, self.target_checks
        if n < 2 or n % 2:
            raise ValueError(f"n must be a positive even number, got {n}")
        if k < 2 or k % 2:
            raise ValueError(f"row weight must be a positive even number, got {k}")
        if k > n // 2:
            raise ValueError(f"row weight {k} exceeds n/2 = {n // 2}")
        if M < 2 or M % 2 or M > n:
            raise ValueError(f"number of checks must be even and in [2, n], got {M}")
        if self.deletion not in DELETIONS:
            raise ValueError(f"unknown deletion policy {self.deletion!r}")
        if self.n >= 800:
            warnings.warn(f"n = {n}: decoding experiments at this size are long-running", stacklevel=3)


@dataclass(frozen=True)
class CirculantSpec:
    size: int
    support: tuple[int, ...]

    def matrix(self) -> np.ndarray:
        C = np.zeros((self.size, self.size), dtype=np.uint8)
        rows = np.arange(self.size)
        for s in self.support:
            C[rows, (rows + s) % self.size] = 1
        return C


@dataclass
class BicycleCode:
    """A generated bicycle code together with its construction record."""

    params: BicycleParams
    circulant: CirculantSpec
    deleted_rows: list[int]
    H: np.ndarray
    S: CheckMatrix

    @property
    def column_weights(self) -> np.ndarray:
        return self.H.sum(axis=0).astype(np.int64)

    def metadata(self) -> dict:
        ranks = code_rank_and_k(self.S)
        hist = np.bincount(self.column_weights)
        return {
            "params": asdict(self.params),
            "circulant_support": list(self.circulant.support),
            "deleted_rows": self.deleted_rows,
            "rank": ranks[0],
            "k": ranks[1],
            "column_weight_variance": float(np.var(self.column_weights)),
            "column_weight_histogram": {str(w): int(c) for w, c in enumerate(hist) if c},
        }


def _delete_rows(B: np.ndarray, count: int, policy: str, rng: np.random.Generator) -> list[int]:
    if count == 0:
        return []
    if policy == "random":
        return sorted(int(r) for r in rng.choice(B.shape[0], size=count, replace=False))
    alive = np.ones(B.shape[0], dtype=bool)
    Bi = B.astype(np.int64)
    w = Bi.sum(axis=0)
    ncols = B.shape[1]
    deleted = []
    for _ in range(count):
        cand = np.flatnonzero(alive)
        after = w[None, :] - Bi[cand]
        if policy == "min_var":
            # ncols^2 * variance, exact in integers
            score = ncols * (after * after).sum(axis=1) - after.sum(axis=1) ** 2
        else:
            score = after.max(axis=1) - after.min(axis=1)
        r = int(cand[np.argmin(score)])  # argmin returns the first (lowest index) minimum
        alive[r] = False
        w -= Bi[r]
        deleted.append(r)
    return deleted


def build_bicycle(params: BicycleParams) -> BicycleCode:
    """Random circulant C, B = [C | C^T], row deletion, then X and Z copies of the result.

    Circulants commute, so B B^T = C C^T + C^T C = 0 over GF(2) and the X-type
    and Z-type copies of any subset of B's rows commute with each other.
    """
    rng = np.random.default_rng(params.seed)
    half = params.n // 2
    support = tuple(sorted(int(s) for s in rng.choice(half, size=params.row_weight // 2, replace=False)))
    circ = CirculantSpec(half, support)
    C = circ.matrix()
    B = np.concatenate([C, C.T], axis=1)
    deleted = _delete_rows(B, half - params.target_checks // 2, params.deletion, rng)
    keep = np.setdiff1d(np.arange(half), deleted)
    H = B[keep]
    rows = np.concatenate([H * X, H * Z], axis=0).astype(np.uint8)
    S = CheckMatrix(rows)
    try:
        S.validate()
    except ValueError as exc:
        raise RuntimeError(f"bicycle construction produced anticommuting rows: {exc}") from exc
    return BicycleCode(params, circ, deleted, H, S)


def builtin_code(name: str) -> CheckMatrix:
    try:
        rows = BUILTIN_CODES[name]
    except KeyError:
        raise ValueError(f"unknown builtin code {name!r}; choose from {sorted(BUILTIN_CODES)}") from None
    return CheckMatrix.from_strings(rows)


def code_rank_and_k(S: CheckMatrix) -> tuple[int, int]:
    """GF(2) rank of the symplectic rows and the number of logical qubits."""
    rank = gf2_rank(S.symplectic)
    return rank, S.num_qubits - rank


def write_bicycle(code: BicycleCode, path) -> str:
    """Write the code file and its ``.meta.json`` sidecar; return the sidecar path."""
    meta = code.metadata()
    p = code.params
    save_code(code.S, path, comments=[
        f"bicycle n={p.n} row_weight={p.row_weight} checks={p.target_checks} "
        f"deletion={p.deletion} seed={p.seed}",
    ])
    meta_path = f"{path}.meta.json"
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta_path
