"""Reconstruction quality (PSNR) and segmentation quality (mIoU)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ShapeMismatchError
from .imageio import Image, LabelMap, denormalize_array

DEFAULT_CAP_DB = 99.0


@dataclass(frozen=True)
class PsnrConfig:
    peak: float = 255.0
    cap_dB: float = DEFAULT_CAP_DB

    def __post_init__(self):
        if not self.peak > 0:
            raise ValueError("peak must be positive")


def squared_error_sum(original: Image, reconstruction: Image) -> int:
    """Exact sum of squared 8-bit differences after denormalizing both images."""
    if original.shape != reconstruction.shape:
        raise ShapeMismatchError(
            f"image shapes differ: {original.shape} vs {reconstruction.shape}")
    a = denormalize_array(original.data).astype(np.int64)
    b = denormalize_array(reconstruction.data).astype(np.int64)
    d = a - b
    return int(np.einsum("ijk,ijk->", d, d))


def psnr(original: Image, reconstruction: Image, cfg: PsnrConfig = PsnrConfig()) -> float:
    """Peak signal-to-noise ratio in dB over the 8-bit versions of both images.

    Returns ``cfg.cap_dB`` when the images are identical at 8 bits.
    """
    sse = squared_error_sum(original, reconstruction)
    if sse == 0:
        return float(cfg.cap_dB)
    mse = sse / original.data.size
    return 10.0 * math.log10(cfg.peak * cfg.peak / mse)


class ConfusionAccumulator:
    """Running S x S confusion matrix, rows = ground truth, columns = prediction."""

    def __init__(self, class_count: int):
        if class_count < 1:
            raise ValueError("class_count must be positive")
        self.class_count = class_count
        self.matrix = np.zeros((class_count, class_count), dtype=np.int64)

    def add(self, gt: LabelMap, pred: LabelMap) -> "ConfusionAccumulator":
        if gt.data.shape != pred.data.shape:
            raise ShapeMismatchError(
                f"label map shapes differ: {gt.data.shape} vs {pred.data.shape}")
        if gt.class_count != self.class_count or pred.class_count != self.class_count:
            raise ValueError("label maps were declared with a different class count")
        if np.any(pred.data == pred.ignore_value):
            raise ValueError("predictions must not contain ignore markers")
        keep = gt.valid_mask
        g = gt.data[keep].astype(np.int64)
        p = pred.data[keep].astype(np.int64)
        s = self.class_count
        self.matrix += np.bincount(g * s + p, minlength=s * s).reshape(s, s)
        return self

    def merge(self, other: "ConfusionAccumulator") -> "ConfusionAccumulator":
        if other.class_count != self.class_count:
            raise ValueError("cannot merge accumulators with different class counts")
        out = ConfusionAccumulator(self.class_count)
        out.matrix = self.matrix + other.matrix
        return out

    def copy(self) -> "ConfusionAccumulator":
        out = ConfusionAccumulator(self.class_count)
        out.matrix = self.matrix.copy()
        return out

    @property
    def tp(self):
        return np.diag(self.matrix).copy()

    @property
    def fp(self):
        return self.matrix.sum(axis=0) - np.diag(self.matrix)

    @property
    def fn(self):
        return self.matrix.sum(axis=1) - np.diag(self.matrix)

    def iou(self) -> np.ndarray:
        """Per-class IoU; NaN for classes absent from both ground truth and prediction."""
        tp = self.tp
        union = tp + self.fp + self.fn
        out = np.full(self.class_count, np.nan)
        nz = union > 0
        out[nz] = tp[nz] / union[nz]
        return out

    def __eq__(self, other):
        return (isinstance(other, ConfusionAccumulator)
                and np.array_equal(self.matrix, other.matrix))

    __hash__ = None

    def __repr__(self):
        return f"ConfusionAccumulator(class_count={self.class_count}, pixels={int(self.matrix.sum())})"


def accumulate_confusion(acc: ConfusionAccumulator, gt: LabelMap,
                         pred: LabelMap) -> ConfusionAccumulator:
    return acc.add(gt, pred)


def miou(acc: ConfusionAccumulator) -> float:
    """Mean IoU over classes that occur in ground truth or prediction."""
    ious = acc.iou()
    present = ~np.isnan(ious)
    if not present.any():
        raise EmptyInputError("no class has any labeled or predicted pixel")
    return float(ious[present].mean())


def delta_miou(reference_miou: float, target_miou: float) -> float:
    """Absolute mIoU drop of a target relative to the reference domain.

    Negative when the target outperforms the reference.
    """
    for v in (reference_miou, target_miou):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"mIoU {v} outside [0, 1]")
    return reference_miou - target_miou
