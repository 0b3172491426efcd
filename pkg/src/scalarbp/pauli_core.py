"""Pauli strings, the commutation form, check matrices and GF(2) helpers.

Single-qubit Paulis are stored as small integers ``I=0, X=1, Y=2, Z=3``; this
order is also the order used for prior/posterior 4-vectors and for hard
decision tie-breaking.  Phases are never tracked.

The symplectic image of a string of length N is the bit vector
``(x_1..x_N | z_1..z_N)`` with ``I->(0,0), X->(1,0), Z->(0,1), Y->(1,1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

I, X, Y, Z = 0, 1, 2, 3
PAULI_CHARS = "IXYZ"
_CHAR_TO_CODE = {c: i for i, c in enumerate(PAULI_CHARS)}

# ANTICOMMUTE[a, b] == 1 iff a and b are distinct non-identity Paulis.
ANTICOMMUTE = np.array(
    [[0, 0, 0, 0],
     [0, 0, 1, 1],
     [0, 1, 0, 1],
     [0, 1, 1, 0]],
    dtype=np.uint8,
)

_X_BIT = np.array([0, 1, 1, 0], dtype=np.uint8)
_Z_BIT = np.array([0, 0, 1, 1], dtype=np.uint8)
# index by 2*z + x
_FROM_BITS = np.array([I, X, Z, Y], dtype=np.uint8)
# PRODUCT[a, b] is a*b up to phase
PRODUCT = _FROM_BITS[2 * (_Z_BIT[:, None] ^ _Z_BIT[None, :]) + (_X_BIT[:, None] ^ _X_BIT[None, :])]


class CodeFormatError(ValueError):
    """Raised for malformed or invalid code files."""


class PauliString:
    """Fixed-length word over {I, X, Y, Z}."""

    __slots__ = ("_data",)

    def __init__(self, data: Iterable[int] | np.ndarray | str):
        if isinstance(data, str):
            try:
                arr = np.array([_CHAR_TO_CODE[c] for c in data.upper()], dtype=np.uint8)
            except KeyError as exc:
                raise ValueError(f"invalid Pauli character {exc.args[0]!r}") from None
        else:
            arr = np.array(data, dtype=np.int64).reshape(-1)
            if arr.size and (arr.min() < 0 or arr.max() > 3):
                raise ValueError("Pauli codes must be in 0..3")
            arr = arr.astype(np.uint8)
        if arr.size == 0:
            raise ValueError("PauliString must have length >= 1")
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, dtype=np.uint8))

    @property
    def data(self) -> np.ndarray:
        return self._data

    def __len__(self) -> int:
        return self._data.size

    def __getitem__(self, i):
        return int(self._data[i])

    def __mul__(self, other: "PauliString") -> "PauliString":
        if len(self) != len(other):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")
        return PauliString(PRODUCT[self._data, other._data])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return np.array_equal(self._data, other._data)

    def __hash__(self) -> int:
        return hash(self._data.tobytes())

    def __str__(self) -> str:
        return "".join(PAULI_CHARS[v] for v in self._data)

    def __repr__(self) -> str:
        return f"PauliString('{self}')"

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self._data))

    def is_identity(self) -> bool:
        return not self._data.any()


def _as_codes(p) -> np.ndarray:
    if isinstance(p, PauliString):
        return p.data
    if isinstance(p, str):
        return PauliString(p).data
    return np.asarray(p, dtype=np.uint8)


def inner_product(a, b) -> int:
    """Return 0 if ``a`` and ``b`` commute and 1 if they anticommute."""
    a, b = _as_codes(a), _as_codes(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return int(ANTICOMMUTE[a, b].sum() & 1)


def to_symplectic(p) -> np.ndarray:
    """Map a Pauli string to its (x | z) bit vector of length 2N."""
    codes = _as_codes(p)
    return np.concatenate([_X_BIT[codes], _Z_BIT[codes]])


def from_symplectic(v: Sequence[int]) -> PauliString:
    v = np.asarray(v, dtype=np.uint8) & 1
    if v.size % 2:
        raise ValueError("symplectic vector must have even length")
    n = v.size // 2
    return PauliString(_FROM_BITS[2 * v[n:] + v[:n]])


# ---------------------------------------------------------------------------
# GF(2) linear algebra on bit-packed rows (Python ints)
# ---------------------------------------------------------------------------

def _pack(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits.astype(np.uint8)).tobytes(), "big")


class GF2Basis:
    """Echelon basis of a GF(2) row space, reduced so membership is O(rank)."""

    def __init__(self, rows: Iterable[int] = ()):
        self._pivots: dict[int, int] = {}  # pivot bit -> row
        for r in rows:
            self.add(r)

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            row = self._pivots.get(top)
            if row is None:
                return v
            v ^= row
        return 0

    def add(self, v: int) -> bool:
        """Adjoin ``v``; return True if the rank increased."""
        v = self.reduce(v)
        if not v:
            return False
        self._pivots[v.bit_length() - 1] = v
        return True

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2) of a 0/1 matrix."""
    matrix = np.asarray(matrix, dtype=np.uint8) & 1
    return GF2Basis(_pack(row) for row in matrix).rank


# ---------------------------------------------------------------------------
# Check matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CheckMatrix:
    """M x N matrix over {I,X,Y,Z} with Tanner-graph adjacency.

    Edges are numbered check-major: the edges of check ``m`` are
    ``check_ptr[m]:check_ptr[m+1]`` in increasing variable order.  For
    variable ``n`` the incident edge ids are ``var_edges[var_ptr[n]:var_ptr[n+1]]``
    in increasing check order.
    """

    rows: np.ndarray
    edge_check: np.ndarray = field(init=False, repr=False)
    edge_var: np.ndarray = field(init=False, repr=False)
    edge_pauli: np.ndarray = field(init=False, repr=False)
    check_ptr: np.ndarray = field(init=False, repr=False)
    var_ptr: np.ndarray = field(init=False, repr=False)
    var_edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.uint8)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValueError("check matrix must be a non-empty 2-D array")
        if rows.max() > 3:
            raise ValueError("Pauli codes must be in 0..3")
        rows.flags.writeable = False
        m_idx, n_idx = np.nonzero(rows)
        check_ptr = np.zeros(rows.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(m_idx, minlength=rows.shape[0]), out=check_ptr[1:])
        order = np.lexsort((m_idx, n_idx))  # by variable, then check
        var_ptr = np.zeros(rows.shape[1] + 1, dtype=np.int64)
        np.cumsum(np.bincount(n_idx, minlength=rows.shape[1]), out=var_ptr[1:])
        setattr_ = object.__setattr__
        setattr_(self, "rows", rows)
        setattr_(self, "edge_check", m_idx.astype(np.int64))
        setattr_(self, "edge_var", n_idx.astype(np.int64))
        setattr_(self, "edge_pauli", rows[m_idx, n_idx].astype(np.int64))
        setattr_(self, "check_ptr", check_ptr)
        setattr_(self, "var_ptr", var_ptr)
        setattr_(self, "var_edges", order.astype(np.int64))
        for a in (self.edge_check, self.edge_var, self.edge_pauli,
                  self.check_ptr, self.var_ptr, self.var_edges):
            a.flags.writeable = False

    @classmethod
    def from_strings(cls, rows: Sequence[str], validate: bool = True) -> "CheckMatrix":
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise ValueError("rows must have equal length")
        mat = cls(np.stack([PauliString(r).data for r in rows]))
        if validate:
            mat.validate()
        return mat

    @property
    def num_checks(self) -> int:
        return self.rows.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.rows.shape[1]

    @property
    def num_edges(self) -> int:
        return self.edge_var.size

    def row(self, m: int) -> PauliString:
        return PauliString(self.rows[m])

    def check_neighbors(self, m: int) -> np.ndarray:
        """N(m): sorted qubits acted on by row m."""
        return self.edge_var[self.check_ptr[m]:self.check_ptr[m + 1]]

    def var_neighbors(self, n: int) -> np.ndarray:
        """M(n): sorted checks acting on qubit n."""
        return self.edge_check[self.var_edges[self.var_ptr[n]:self.var_ptr[n + 1]]]

    def row_weights(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    def column_weights(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    def commutation_matrix(self) -> np.ndarray:
        """Pairwise inner products of the rows as an M x M 0/1 matrix."""
        sym = self.symplectic.astype(np.int64)
        n = self.num_qubits
        return ((sym[:, :n] @ sym[:, n:].T + sym[:, n:] @ sym[:, :n].T) & 1).astype(np.uint8)

    def validate(self) -> None:
        bad = np.argwhere(np.triu(self.commutation_matrix()))
        if bad.size:
            m1, m2 = bad[0]
            raise CodeFormatError(f"rows {m1} and {m2} anticommute")

    @cached_property
    def symplectic(self) -> np.ndarray:
        return np.concatenate([_X_BIT[self.rows], _Z_BIT[self.rows]], axis=1)

    @cached_property
    def stabilizer_basis(self) -> GF2Basis:
        return GF2Basis(_pack(r) for r in self.symplectic)

    def __str__(self) -> str:
        return "\n".join(str(self.row(m)) for m in range(self.num_checks))


def syndrome(S: CheckMatrix, E) -> np.ndarray:
    """Syndrome bits z_m = <E, S_m>, evaluated on the support of each row only."""
    e = _as_codes(E)
    if e.size != S.num_qubits:
        raise ValueError(f"error length {e.size} != code length {S.num_qubits}")
    anti = ANTICOMMUTE[e[S.edge_var], S.edge_pauli]
    return (np.bincount(S.edge_check, weights=anti, minlength=S.num_checks).astype(np.int64) & 1).astype(np.uint8)


def is_stabilizer_element(S: CheckMatrix, R) -> bool:
    """True iff R is, up to phase, a product of rows of S."""
    r = _as_codes(R)
    if r.size != S.num_qubits:
        raise ValueError(f"length {r.size} != code length {S.num_qubits}")
    if not r.any():
        return True
    return _pack(to_symplectic(r)) in S.stabilizer_basis


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _parse_header(lines) -> tuple[int, int]:
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise CodeFormatError("empty code file") from None
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise CodeFormatError(f"line {lineno}: expected header 'N M', got {header!r}")
    n, m = int(parts[0]), int(parts[1])
    if n < 1 or m < 1:
        raise CodeFormatError(f"line {lineno}: N and M must be positive")
    return n, m


def _parse_rows(text: str, alphabet: str) -> list[str]:
    lines = _content_lines(text)
    n, m = _parse_header(lines)
    rows = []
    for lineno, line in lines:
        if len(line) != n or any(c not in alphabet for c in line):
            raise CodeFormatError(
                f"line {lineno}: expected {n} characters over {{{','.join(alphabet)}}}, got {line!r}")
        rows.append(line)
    if len(rows) != m:
        raise CodeFormatError(f"header declares {m} rows but file has {len(rows)}")
    return rows


def parse_code(text: str) -> CheckMatrix:
    """Parse the ``N M`` + rows text format; rows must pairwise commute."""
    rows = _parse_rows(text, PAULI_CHARS)
    mat = CheckMatrix.from_strings(rows, validate=False)
    mat.validate()
    return mat


def format_code(S: CheckMatrix, comments: Sequence[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"{S.num_qubits} {S.num_checks}")
    out.extend(str(S.row(m)) for m in range(S.num_checks))
    return "\n".join(out) + "\n"


def load_code(path) -> CheckMatrix:
    with open(path) as fh:
        return parse_code(fh.read())


def save_code(S: CheckMatrix, path, comments: Sequence[str] = ()) -> None:
    with open(path, "w") as fh:
        fh.write(format_code(S, comments))


def parse_binary_matrix(text: str) -> np.ndarray:
    rows = _parse_rows(text, "01")
    return np.array([[int(c) for c in r] for r in rows], dtype=np.uint8)


def format_binary_matrix(H: np.ndarray) -> str:
    H = np.asarray(H, dtype=np.uint8)
    lines = [f"{H.shape[1]} {H.shape[0]}"]
    lines.extend("".join(str(int(b)) for b in row) for row in H)
    return "\n".join(lines) + "\n"
