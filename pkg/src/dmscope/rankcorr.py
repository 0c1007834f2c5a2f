"""Kendall's tau-b for paired series, with tie correction."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import UndefinedTauError


@dataclass(frozen=True)
class PairedSeries:
    a: tuple
    b: tuple

    def __init__(self, a, b):
        a = tuple(float(v) for v in a)
        b = tuple(float(v) for v in b)
        if len(a) != len(b):
            raise ValueError(f"series lengths differ: {len(a)} vs {len(b)}")
        if len(a) < 2:
            raise ValueError("need at least two observations")
        if not all(math.isfinite(v) for v in a + b):
            raise ValueError("series must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __len__(self):
        return len(self.a)


@dataclass(frozen=True)
class TauResult:
    tau: float
    n_c: int
    n_d: int
    n_a: int
    n_b: int
    n_p: int

    def to_dict(self):
        return {"tau": self.tau, "n_c": self.n_c, "n_d": self.n_d,
                "n_a": self.n_a, "n_b": self.n_b, "n_p": self.n_p}


def _finish(n_c, n_d, n_a, n_b, n_p) -> TauResult:
    if n_a == n_p or n_b == n_p:
        raise UndefinedTauError("tau-b is undefined: one series is constant")
    tau = (n_c - n_d) / math.sqrt((n_p - n_a) * (n_p - n_b))
    return TauResult(tau, n_c, n_d, n_a, n_b, n_p)


def kendall_tau(series: PairedSeries, eps: float = 0.0) -> TauResult:
    """Tau-b in O(K log K).

    Values closer than ``eps`` count as ties. Tolerance ties are not
    transitive, so any ``eps > 0`` falls back to the pairwise count.
    """
    if eps > 0:
        return kendall_tau_bruteforce(series, eps)
    k = len(series)
    n_c, n_d, n_a, n_b, _ = kernels.kendall_counts(np.asarray(series.a), np.asarray(series.b))
    return _finish(n_c, n_d, n_a, n_b, k * (k - 1) // 2)


def kendall_tau_bruteforce(series: PairedSeries, eps: float = 0.0) -> TauResult:
    """Reference implementation: classify every unordered pair directly."""
    a, b = series.a, series.b
    k = len(a)
    n_c = n_d = n_a = n_b = 0
    for i in range(k):
        for j in range(i + 1, k):
            da = a[i] - a[j]
            db = b[i] - b[j]
            tie_a = abs(da) <= eps
            tie_b = abs(db) <= eps
            if tie_a:
                n_a += 1
            if tie_b:
                n_b += 1
            if tie_a or tie_b:
                continue
            if (da > 0) == (db > 0):
                n_c += 1
            else:
                n_d += 1
    return _finish(n_c, n_d, n_a, n_b, k * (k - 1) // 2)
