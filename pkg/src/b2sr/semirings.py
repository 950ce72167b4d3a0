"""Semiring descriptors used by the full-precision kernels.

A semiring here is a named (add, multiply, add-identity) triple over float64.
Matrices are binary, so multiplication only ever sees the stored bit as its
left operand; the min-plus family replaces the bit with a configurable edge
increment so a single kernel serves both hop counting (increment 1) and
label propagation (increment 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_NAMES = ("boolean", "arithmetic", "minplus", "maxtimes")


@dataclass(frozen=True)
class Semiring:
    name: str
    add_identity: float
    edge_increment: float = 0.0

    def __post_init__(self):
        if self.name not in _NAMES:
            raise ValueError(f"unknown semiring {self.name!r}")
        if self.name == "minplus":
            if self.edge_increment not in (0.0, 1.0):
                raise ValueError("min-plus edge increment must be 0 or 1")
        elif self.edge_increment != 0.0:
            raise ValueError(f"{self.name} semiring takes no edge increment")

    def add(self, a: float, b: float) -> float:
        if self.name == "boolean":
            return float(bool(a) or bool(b))
        if self.name == "arithmetic":
            return a + b
        if self.name == "minplus":
            return min(a, b)
        return max(a, b)

    def multiply(self, a: float, b: float) -> float:
        """Combine an edge operand with a vector operand.

        For min-plus the edge operand is ignored; presence of the edge
        contributes ``b + edge_increment``.
        """
        if self.name == "boolean":
            return float(bool(a) and bool(b))
        if self.name == "minplus":
            return b + self.edge_increment
        return a * b


BOOLEAN = Semiring("boolean", 0.0)
ARITHMETIC = Semiring("arithmetic", 0.0)
MAX_TIMES = Semiring("maxtimes", 0.0)


def min_plus(edge_increment: int = 1) -> Semiring:
    """Min-plus semiring; identity is +inf, each traversed edge adds
    ``edge_increment`` (1 for hop counts, 0 for pure label minimums)."""
    return Semiring("minplus", math.inf, float(edge_increment))
