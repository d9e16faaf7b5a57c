"""Pairwise surrogates for the AUC indicator and their derivatives.

Each surrogate phi(t) is evaluated on a score difference ``t = s_pos - s_neg``.
All functions accept Python scalars or numpy arrays and work in float64.
"""
from enum import Enum

import numpy as np

from .errors import DomainError


class SurrogateKind(Enum):
    PairwiseLogistic = "pll"
    PairwiseHinge = "phl"
    PairwiseSquared = "psl"
    PairwiseExponential = "pel"

    @classmethod
    def parse(cls, value):
        """Accept a SurrogateKind, its CLI string ("pll", ...) or its member name."""
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            pass
        try:
            return cls[value]
        except KeyError:
            choices = ", ".join(k.value for k in cls)
            raise DomainError(f"unknown surrogate {value!r}; expected one of {choices}") from None

    @property
    def code(self):
        """Integer code used by the compiled kernels."""
        return _CODES[self]


_CODES = {
    SurrogateKind.PairwiseLogistic: 0,
    SurrogateKind.PairwiseHinge: 1,
    SurrogateKind.PairwiseSquared: 2,
    SurrogateKind.PairwiseExponential: 3,
}


def _as_finite(t):
    arr = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("surrogate argument must be finite")
    return arr


def _unwrap(arr, t):
    return float(arr) if np.ndim(t) == 0 else arr


def surrogate_value(kind, t):
    """phi(t) for the given surrogate kind."""
    kind = SurrogateKind.parse(kind)
    x = _as_finite(t)
    if kind is SurrogateKind.PairwiseLogistic:
        # log(1 + exp(-t)) without overflow on either side
        out = np.where(x >= 0, np.log1p(np.exp(-np.abs(x))), -x + np.log1p(np.exp(-np.abs(x))))
    elif kind is SurrogateKind.PairwiseHinge:
        out = np.maximum(0.0, 1.0 - x)
    elif kind is SurrogateKind.PairwiseSquared:
        out = (1.0 - x) ** 2
    else:
        out = np.exp(-x)
    return _unwrap(out, t)


def surrogate_grad(kind, t):
    """dphi/dt. The hinge takes the flat-side subgradient 0 at t = 1."""
    kind = SurrogateKind.parse(kind)
    x = _as_finite(t)
    if kind is SurrogateKind.PairwiseLogistic:
        # -exp(-t) / (1 + exp(-t)) == -sigmoid(-t), evaluated stably
        e = np.exp(-np.abs(x))
        out = np.where(x >= 0, -e / (1.0 + e), -1.0 / (1.0 + e))
    elif kind is SurrogateKind.PairwiseHinge:
        out = np.where(x < 1.0, -1.0, 0.0)
    elif kind is SurrogateKind.PairwiseSquared:
        out = -2.0 * (1.0 - x)
    else:
        out = -np.exp(-x)
    return _unwrap(out, t)
