"""Random small instances shared by the equivalence tests."""

import itertools

import numpy as np

from scalarbp.pauli_core import ANTICOMMUTE, CheckMatrix


def random_stabilizer_code(rng, max_n=10, max_weight=6, max_tries=200):
    """Random self-orthogonal check matrix with N <= max_n and row weight <= max_weight.

    Rows are added one at a time: draw a support, then pick uniformly among
    the non-identity fillings of that support that commute with every row so
    far.
    """
    n = int(rng.integers(2, max_n + 1))
    m_target = int(rng.integers(1, n + 1))
    rows = []
    for _ in range(max_tries):
        if len(rows) == m_target:
            break
        w = int(rng.integers(1, min(max_weight, n) + 1))
        support = np.sort(rng.choice(n, size=w, replace=False))
        fills = np.array(list(itertools.product((1, 2, 3), repeat=w)), dtype=np.uint8)
        ok = np.ones(len(fills), dtype=bool)
        for r in rows:
            ok &= (ANTICOMMUTE[fills, r[support]].sum(axis=1) & 1) == 0
        if not ok.any():
            continue
        row = np.zeros(n, dtype=np.uint8)
        row[support] = fills[rng.choice(np.flatnonzero(ok))]
        rows.append(row)
    S = CheckMatrix(np.array(rows))
    S.validate()
    return S


def random_priors(rng, n):
    """Per-qubit 4-vectors, identity-leaning, bounded away from zero."""
    p = rng.dirichlet([4.0, 1.0, 1.0, 1.0], size=n)
    p = 0.98 * p + 0.005
    return p / p.sum(axis=1, keepdims=True)


def random_error(rng, priors):
    return np.array([rng.choice(4, p=row) for row in priors], dtype=np.uint8)
