"""Result records shared by all decoders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


@dataclass
class IterationRecord:
    iteration: int
    estimate: Any
    mismatches: int
    marginals: Optional[np.ndarray] = None


@dataclass
class DecodeOutcome:
    """What a decoder returns.

    ``estimate`` is a :class:`~scalarbp.pauli_core.PauliString` for quaternary
    decoders and a 0/1 array for the binary one.  ``marginals`` holds the
    normalized per-variable posteriors at the final iteration.
    """

    estimate: Any
    converged: bool
    iterations: int
    marginals: Optional[np.ndarray] = None
    trace: list[IterationRecord] = field(default_factory=list)

    def format_trace(self) -> str:
        return "\n".join(f"iter {r.iteration:4d}  mismatches {r.mismatches:4d}  {r.estimate}"
                         for r in self.trace)


def exclusive_products(values, start=1.0):
    """Return ``out[i] = start * prod(values[j] for j != i)`` via prefix/suffix.

    Costs 3k-2 multiplications for k values and never divides, so exact zeros
    are handled correctly.  Also returns the multiplication count.
    """
    k = len(values)
    if k == 0:
        return [], 0
    prefix = [start] * k
    for i in range(1, k):
        prefix[i] = prefix[i - 1] * values[i - 1]
    suffix = [1.0] * k
    for i in range(k - 2, -1, -1):
        suffix[i] = suffix[i + 1] * values[i + 1]
    out = [prefix[i] * suffix[i] for i in range(k)]
    return out, 3 * k - 2
