"""The Josephson equation on the torus in slow time.

    dx/dt = (cos x + a + b cos t) / mu

``x`` lives on the universal cover throughout; ``t`` has period 2*pi for
every ``mu``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Params:
    """Bias ``a``, drive amplitude ``b`` and frequency ratio ``mu``."""

    a: float
    b: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"a and b must be finite, got a={self.a}, b={self.b}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be positive and finite, got {self.mu}")

    def with_a(self, a: float) -> "Params":
        return Params(a, self.b, self.mu)

    def with_b(self, b: float) -> "Params":
        return Params(self.a, b, self.mu)


@dataclass(frozen=True)
class State:
    x: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.t)):
            raise ValueError("state must be finite")


def vector_field(s: State, p: Params) -> float:
    return (math.cos(s.x) + p.a + p.b * math.cos(s.t)) / p.mu


def reflect(s: State) -> State:
    """Central symmetry (t, x) -> (-t, -x); the field is invariant under it."""
    return State(-s.x, -s.t)
