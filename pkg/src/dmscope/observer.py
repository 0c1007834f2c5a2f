"""Reference building, calibration and batch evaluation with scope verdicts."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import statistics
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .errors import EmptyInputError, InsufficientBatchError
from .histogram import (DEFAULT_BINNING, BinningConfig, PerformanceHistogram,
                        build_histogram, profile_from_dict, profile_to_dict)
from .metrics import PsnrConfig
from .reconstruction import Reconstructor, from_descriptor, score_corpus
from .transport import dm_metric

IN_SCOPE = "in_scope"
OUT_OF_DOMAIN = "out_of_domain"
UNCALIBRATED = "uncalibrated"

THRESHOLD_FACTOR = 2.0
DEFAULT_MIN_BATCH = 30
FIXED_TIMESTAMP = "1970-01-01T00:00:00+00:00"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def fixed_clock() -> str:
    return FIXED_TIMESTAMP


@dataclass(frozen=True)
class DomainReference:
    histogram: PerformanceHistogram
    reconstructor: Reconstructor
    validation_dm_dB: float | None = None
    threshold_dB: float | None = None
    created_from: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.histogram.total == 0:
            raise EmptyInputError("reference histogram is empty")
        if (self.validation_dm_dB is None) != (self.threshold_dB is None):
            raise ValueError("validation DM and threshold must be set together")

    @property
    def calibrated(self) -> bool:
        return self.threshold_dB is not None

    @property
    def binning(self) -> BinningConfig:
        return self.histogram.binning

    @property
    def reference_id(self) -> str:
        """Content hash of the histogram, binning and reconstructor."""
        payload = json.dumps({
            "binning": self.binning.to_dict(),
            "counts": [int(c) for c in self.histogram.counts],
            "reconstructor": self.reconstructor.describe(),
        }, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        calibration = None
        if self.calibrated:
            calibration = {"validation_dm_dB": self.validation_dm_dB,
                           "threshold_dB": self.threshold_dB}
        return profile_to_dict(self.histogram, self.reconstructor.describe(),
                               self.created_from, calibration)

    @classmethod
    def from_dict(cls, d: dict) -> "DomainReference":
        hist, recon, created_from, calibration = profile_from_dict(d)
        ref = cls(hist, from_descriptor(recon), created_from=created_from)
        if calibration:
            validation = float(calibration["validation_dm_dB"])
            threshold = float(calibration["threshold_dB"])
            if threshold != THRESHOLD_FACTOR * validation:
                raise ValueError("profile threshold is not twice the validation DM")
            ref = dataclasses.replace(ref, validation_dm_dB=validation, threshold_dB=threshold)
        return ref

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path) -> "DomainReference":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class DmReport:
    dm_dB: float
    mean_psnr_dB: float
    stddev_psnr_dB: float
    sample_count: int
    verdict: str
    threshold_dB: float | None
    reference_id: str
    timestamp: str
    target_histogram: PerformanceHistogram = field(repr=False, compare=True)
    window_index: int | None = None

    def to_dict(self) -> dict:
        out = {
            "dm_dB": self.dm_dB,
            "mean_psnr_dB": self.mean_psnr_dB,
            "stddev_psnr_dB": self.stddev_psnr_dB,
            "sample_count": self.sample_count,
            "verdict": self.verdict,
            "threshold_dB": self.threshold_dB,
            "reference_id": self.reference_id,
            "timestamp": self.timestamp,
            "target_histogram": {
                "binning": self.target_histogram.binning.to_dict(),
                "counts": [int(c) for c in self.target_histogram.counts],
                "total": self.target_histogram.total,
            },
        }
        if self.window_index is not None:
            out["window_index"] = self.window_index
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "DmReport":
        th = d["target_histogram"]
        hist = PerformanceHistogram(BinningConfig.from_dict(th["binning"]), th["counts"])
        return cls(
            dm_dB=float(d["dm_dB"]),
            mean_psnr_dB=float(d["mean_psnr_dB"]),
            stddev_psnr_dB=float(d["stddev_psnr_dB"]),
            sample_count=int(d["sample_count"]),
            verdict=d["verdict"],
            threshold_dB=None if d.get("threshold_dB") is None else float(d["threshold_dB"]),
            reference_id=d["reference_id"],
            timestamp=d["timestamp"],
            target_histogram=hist,
            window_index=d.get("window_index"),
        )

    def without_timestamp(self) -> "DmReport":
        return dataclasses.replace(self, timestamp="")

    def summary(self) -> str:
        threshold = "n/a" if self.threshold_dB is None else f"{self.threshold_dB:.2f} dB"
        return (f"DM {self.dm_dB:.2f} dB | threshold {threshold} | "
                f"mean PSNR {self.mean_psnr_dB:.2f} dB | n={self.sample_count} | {self.verdict}")


def verdict_for(dm_dB: float, threshold_dB: float | None) -> str:
    if threshold_dB is None:
        return UNCALIBRATED
    return IN_SCOPE if dm_dB <= threshold_dB else OUT_OF_DOMAIN


def build_reference(images, reconstructor: Reconstructor,
                    binning: BinningConfig = DEFAULT_BINNING, *,
                    cfg: PsnrConfig = PsnrConfig(), created_from: dict | None = None,
                    workers: int | None = None) -> DomainReference:
    """Score the source corpus and keep its PSNR histogram (uncalibrated)."""
    images = list(images)
    if not images:
        raise EmptyInputError("source corpus is empty")
    scores = score_corpus(reconstructor, images, cfg, workers)
    meta = {"count": len(images)}
    meta.update(created_from or {})
    return DomainReference(build_histogram(scores, binning), reconstructor, created_from=meta)


def calibrate(ref: DomainReference, validation_images, *, cfg: PsnrConfig = PsnrConfig(),
              workers: int | None = None) -> DomainReference:
    """Set the scope threshold to twice the DM of an in-domain validation corpus."""
    validation_images = list(validation_images)
    if not validation_images:
        raise EmptyInputError("validation corpus is empty")
    scores = score_corpus(ref.reconstructor, validation_images, cfg, workers)
    dm = dm_metric(ref.histogram, build_histogram(scores, ref.binning)).dm_dB
    return calibrate_from_dm(ref, dm)


def calibrate_from_dm(ref: DomainReference, validation_dm_dB: float) -> DomainReference:
    if not (validation_dm_dB >= 0 and math.isfinite(validation_dm_dB)):
        raise ValueError("validation DM must be a finite non-negative number")
    return dataclasses.replace(ref, validation_dm_dB=validation_dm_dB,
                               threshold_dB=THRESHOLD_FACTOR * validation_dm_dB)


def report_from_scores(ref: DomainReference, scores, *,
                       clock: Callable[[], str] = utc_now,
                       window_index: int | None = None,
                       threshold_dB: float | None = None) -> DmReport:
    """Assemble a report from precomputed PSNR scores.

    ``threshold_dB`` replaces the reference's calibrated threshold for this
    report only.
    """
    threshold = ref.threshold_dB if threshold_dB is None else threshold_dB
    scores = [float(s) for s in scores]
    if not scores:
        raise EmptyInputError("no scores to evaluate")
    target = build_histogram(scores, ref.binning)
    dm = dm_metric(ref.histogram, target).dm_dB
    return DmReport(
        dm_dB=dm,
        mean_psnr_dB=statistics.fmean(scores),
        stddev_psnr_dB=statistics.pstdev(scores),
        sample_count=len(scores),
        verdict=verdict_for(dm, threshold),
        threshold_dB=threshold,
        reference_id=ref.reference_id,
        timestamp=clock(),
        target_histogram=target,
        window_index=window_index,
    )


def evaluate_batch(ref: DomainReference, images, *, min_batch: int = DEFAULT_MIN_BATCH,
                   cfg: PsnrConfig = PsnrConfig(), clock: Callable[[], str] = utc_now,
                   workers: int | None = None,
                   threshold_dB: float | None = None) -> DmReport:
    """Score a target batch with the reference's reconstructor and compare histograms.

    Batches smaller than ``min_batch`` are rejected: a handful of images does
    not pin down a PSNR distribution.
    """
    images = list(images)
    if not images:
        raise EmptyInputError("target corpus is empty")
    if len(images) < min_batch:
        raise InsufficientBatchError(
            f"batch of {len(images)} images is below the minimum of {min_batch}")
    scores = score_corpus(ref.reconstructor, images, cfg, workers)
    return report_from_scores(ref, scores, clock=clock, threshold_dB=threshold_dB)


def sliding_window_observe(ref: DomainReference, stream, window: int, stride: int, *,
                           cfg: PsnrConfig = PsnrConfig(),
                           clock: Callable[[], str] = utc_now,
                           workers: int | None = None,
                           threshold_dB: float | None = None) -> list[DmReport]:
    """One report per complete window position over an image stream.

    Each image is scored once; window reports are assembled from the cached
    scores and equal ``evaluate_batch(ref, window_images, min_batch=window)``.
    """
    if window < 10:
        raise ValueError("window must be at least 10 images")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    stream = list(stream)
    if len(stream) < window:
        raise InsufficientBatchError(
            f"stream of {len(stream)} images is shorter than the window ({window})")
    scores = score_corpus(ref.reconstructor, stream, cfg, workers)
    return [report_from_scores(ref, scores[start:start + window], clock=clock,
                               window_index=w, threshold_dB=threshold_dB)
            for w, start in enumerate(range(0, len(stream) - window + 1, stride))]


def verify_report(ref: DomainReference, report: DmReport) -> bool:
    """Recompute DM and verdict of a stored report against its reference."""
    if report.reference_id != ref.reference_id:
        return False
    dm = dm_metric(ref.histogram, report.target_histogram).dm_dB
    return (dm == report.dm_dB and report.sample_count == report.target_histogram.total
            and verdict_for(dm, ref.threshold_dB) == report.verdict)
