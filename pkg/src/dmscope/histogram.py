"""PSNR histograms on a fixed dB grid, plus the reference-profile file format."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .errors import BinningMismatchError, EmptyInputError

PROFILE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class BinningConfig:
    lo_dB: float = 10.0
    hi_dB: float = 45.0
    width_dB: float = 0.5

    def __post_init__(self):
        for name in ("lo_dB", "hi_dB", "width_dB"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.lo_dB < self.hi_dB:
            raise ValueError("lo_dB must be below hi_dB")
        if not self.width_dB > 0:
            raise ValueError("width_dB must be positive")
        ratio = (self.hi_dB - self.lo_dB) / self.width_dB
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 1:
            raise ValueError(
                f"({self.hi_dB} - {self.lo_dB}) / {self.width_dB} is not a positive integer")

    @property
    def bin_count(self) -> int:
        return int(round((self.hi_dB - self.lo_dB) / self.width_dB))

    def edges(self) -> np.ndarray:
        return self.lo_dB + self.width_dB * np.arange(self.bin_count + 1)

    def centers(self) -> np.ndarray:
        return self.lo_dB + self.width_dB * (np.arange(self.bin_count) + 0.5)

    def to_dict(self):
        return {"lo_dB": self.lo_dB, "hi_dB": self.hi_dB, "width_dB": self.width_dB}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["lo_dB"]), float(d["hi_dB"]), float(d["width_dB"]))

    @classmethod
    def parse(cls, text: str) -> "BinningConfig":
        """Parse ``lo:hi:width``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"binning must be lo:hi:width, got {text!r}")
        return cls(*(float(p) for p in parts))


DEFAULT_BINNING = BinningConfig()


@dataclass(frozen=True, eq=False)
class PerformanceHistogram:
    binning: BinningConfig
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (self.binning.bin_count,):
            raise ValueError(
                f"expected {self.binning.bin_count} counts, got shape {counts.shape}")
        if counts.size and (counts.min() < 0 or np.any(counts != np.round(counts))):
            raise ValueError("counts must be non-negative integers")
        counts = counts.astype(np.int64)
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        return (isinstance(other, PerformanceHistogram) and self.binning == other.binning
                and np.array_equal(self.counts, other.counts))

    __hash__ = None

    def __repr__(self):
        return f"PerformanceHistogram({self.binning}, total={self.total})"


def empty_histogram(binning: BinningConfig = DEFAULT_BINNING) -> PerformanceHistogram:
    return PerformanceHistogram(binning, np.zeros(binning.bin_count, dtype=np.int64))


def build_histogram(scores, binning: BinningConfig = DEFAULT_BINNING) -> PerformanceHistogram:
    """Bin scores by ``floor((v - lo) / width)``, clamping out-of-range scores to the edge bins."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.size == 0:
        raise EmptyInputError("cannot build a histogram from no scores")
    if np.isnan(scores).any():
        raise ValueError("scores contain NaN")
    counts = kernels.bin_counts(scores, binning.lo_dB, binning.width_dB, binning.bin_count)
    return PerformanceHistogram(binning, counts)


def merge(a: PerformanceHistogram, b: PerformanceHistogram) -> PerformanceHistogram:
    if a.binning != b.binning:
        raise BinningMismatchError(f"cannot merge {a.binning} with {b.binning}")
    return PerformanceHistogram(a.binning, a.counts + b.counts)


def normalize_histogram(h: PerformanceHistogram) -> np.ndarray:
    total = h.total
    if total == 0:
        raise EmptyInputError("histogram is empty")
    return h.counts / total


def exact_masses(h: PerformanceHistogram) -> list[Fraction]:
    total = h.total
    if total == 0:
        raise EmptyInputError("histogram is empty")
    return [Fraction(int(c), total) for c in h.counts]


def summary_stats(h: PerformanceHistogram) -> tuple[float, float]:
    """Mass-weighted mean and population standard deviation of bin centers."""
    mass = normalize_histogram(h)
    centers = h.binning.centers()
    mean = float(np.dot(mass, centers))
    var = float(np.dot(mass, (centers - mean) ** 2))
    return mean, math.sqrt(var)


# -- reference profile file ------------------------------------------------------

def profile_to_dict(h: PerformanceHistogram, reconstructor: dict, created_from: dict,
                    calibration: dict | None = None) -> dict:
    return {
        "format_version": PROFILE_FORMAT_VERSION,
        "binning": h.binning.to_dict(),
        "counts": [int(c) for c in h.counts],
        "total": h.total,
        "reconstructor": reconstructor,
        "created_from": created_from,
        "calibration": calibration,
    }


def profile_from_dict(d: dict) -> tuple[PerformanceHistogram, dict, dict, dict | None]:
    version = d.get("format_version")
    if version != PROFILE_FORMAT_VERSION:
        raise ValueError(f"unsupported profile format_version {version!r}")
    h = PerformanceHistogram(BinningConfig.from_dict(d["binning"]),
                             np.asarray(d["counts"], dtype=np.int64))
    if h.total != int(d["total"]):
        raise ValueError(f"profile total {d['total']} does not match counts ({h.total})")
    return h, d["reconstructor"], d.get("created_from") or {}, d.get("calibration")


def histogram_csv(h: PerformanceHistogram) -> str:
    """CSV text with columns ``bin_lo_dB, bin_hi_dB, count, mass``."""
    edges = h.binning.edges()
    total = h.total
    lines = ["bin_lo_dB,bin_hi_dB,count,mass"]
    for k, c in enumerate(h.counts):
        mass = int(c) / total if total else 0.0
        lines.append(f"{float(edges[k])!r},{float(edges[k + 1])!r},{int(c)},{mass!r}")
    return "\n".join(lines) + "\n"


def write_histogram_csv(path, h: PerformanceHistogram) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(histogram_csv(h))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
