"""Seeded synthetic image and label corpora.

All randomness comes from a counter-based hash keyed by
(seed, stream, image index), so any image can be generated on its own and
results do not depend on platform or evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import derive_key, kernels
from .imageio import LabelMap, RawImage, denormalize, normalize, write_pgm, write_ppm

KINDS = ("gradient", "checker", "noise", "blotch")

# stream tags keep the draws of different purposes independent
_PARAMS, _TEXTURE, _SHIFT_NOISE, _FLIP, _NEWCLASS = range(1, 6)


@dataclass(frozen=True)
class Shift:
    """Global photometric shift, applied as brightness, then blur, then noise.

    ``brightness_offset`` and ``noise_amplitude`` are in normalized units
    (the full intensity range spans 2). ``blur_factor`` is the width of a
    box filter; 1 disables it. Noise is the sum of four hashed uniforms,
    scaled to [-noise_amplitude, noise_amplitude], reflected back into range
    at the ends.
    """

    brightness_offset: float = 0.0
    blur_factor: int = 1
    noise_amplitude: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.brightness_offset <= 1.0:
            raise ValueError("brightness_offset must lie in [-1, 1]")
        if int(self.blur_factor) != self.blur_factor or self.blur_factor < 1:
            raise ValueError("blur_factor must be a positive integer")
        if not 0.0 <= self.noise_amplitude <= 2.0:
            raise ValueError("noise_amplitude must lie in [0, 2]")

    @property
    def is_identity(self):
        return self == Shift()


@dataclass(frozen=True)
class CorpusSpec:
    kind: str
    count: int
    height: int = 64
    width: int = 64
    seed: int = 0
    shift: Shift = field(default_factory=Shift)
    class_count: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.height < 8 or self.width < 8:
            raise ValueError("images must be at least 8x8")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if self.kind == "blotch" and not 2 <= self.class_count <= 254:
            raise ValueError("blotch class_count must lie in [2, 254]")

    @property
    def has_labels(self):
        return self.kind in ("checker", "blotch")


@dataclass
class Corpus:
    spec: CorpusSpec
    images: list
    labels: list | None = None

    def __len__(self):
        return len(self.images)


def _uniforms(seed, stream, index, n):
    return kernels.uniform_field(derive_key(seed, stream, index), 0, n)


def _gradient(spec, index):
    """Oblique ramp per channel with random centre and slope; steep ramps saturate."""
    h, w = spec.height, spec.width
    u = _uniforms(spec.seed, _PARAMS, index, 8)
    theta = 2.0 * math.pi * u[0]
    span = 255.0 * (0.75 + 2.25 * u[1])
    y, x = np.mgrid[0:h, 0:w]
    t = (x / (w - 1) - 0.5) * math.cos(theta) + (y / (h - 1) - 0.5) * math.sin(theta)
    centers = 255.0 * u[2:5]
    out = centers[None, None, :] + span * t[:, :, None]
    return np.clip(out, 0.0, 255.0), None


def _checker(spec, index):
    h, w = spec.height, spec.width
    u = _uniforms(spec.seed, _PARAMS, index, 7)
    block = 2 + int(u[0] * (min(h, w) // 4 - 1))
    y, x = np.mgrid[0:h, 0:w]
    labels = ((y // block) + (x // block)) % 2
    colors = np.floor(256.0 * u[1:7]).reshape(2, 3)
    return colors[labels], LabelMap(labels, 2)


def _noise(spec, index):
    u = _uniforms(spec.seed, _TEXTURE, index, spec.height * spec.width * 3)
    return np.floor(256.0 * u).reshape(spec.height, spec.width, 3), None


def _blotch(spec, index):
    """Nearest-seed regions; region r carries class r and its own flat colour."""
    h, w, s = spec.height, spec.width, spec.class_count
    u = _uniforms(spec.seed, _PARAMS, index, 5 * s)
    sy = u[0:s] * h
    sx = u[s:2 * s] * w
    colors = np.floor(256.0 * u[2 * s:5 * s]).reshape(s, 3)
    y, x = np.mgrid[0:h, 0:w]
    d2 = (y[None] + 0.5 - sy[:, None, None]) ** 2 + (x[None] + 0.5 - sx[:, None, None]) ** 2
    labels = np.argmin(d2, axis=0)
    return colors[labels], LabelMap(labels, s)


_GENERATORS = {"gradient": _gradient, "checker": _checker, "noise": _noise, "blotch": _blotch}


def _box_filter(img, k):
    """Moving average of width ``k`` along both axes; windows truncated at borders."""
    if k <= 1:
        return img
    lo = (k - 1) // 2
    hi = k - 1 - lo
    out = img
    for axis in (0, 1):
        n = out.shape[axis]
        csum = np.cumsum(out, axis=axis)
        csum = np.concatenate([np.zeros_like(np.take(csum, [0], axis=axis)), csum], axis=axis)
        idx = np.arange(n)
        start = np.clip(idx - lo, 0, n)
        stop = np.clip(idx + hi + 1, 0, n)
        window = (np.take(csum, stop, axis=axis) - np.take(csum, start, axis=axis))
        shape = [1, 1, 1]
        shape[axis] = n
        out = window / (stop - start).reshape(shape)
    return out


def apply_shift(levels: np.ndarray, shift: Shift, seed: int, index: int) -> np.ndarray:
    """Apply a shift to an image given as float levels in [0, 255]."""
    if shift.is_identity:
        return levels
    x = levels * 2.0 / 255.0 - 1.0
    if shift.brightness_offset:
        x = np.clip(x + shift.brightness_offset, -1.0, 1.0)
    if shift.blur_factor > 1:
        x = _box_filter(x, shift.blur_factor)
    if shift.noise_amplitude > 0:
        u = _uniforms(seed, _SHIFT_NOISE, index, 4 * x.size).reshape((4,) + x.shape)
        x = _reflect(x + shift.noise_amplitude * (u.sum(axis=0) - 2.0) / 2.0)
    return (x + 1.0) * 255.0 / 2.0


def _reflect(x):
    # mirror at the range ends; clamping would pile mass onto exactly -1 and 1
    x = np.where(x > 1.0, 2.0 - x, x)
    return np.where(x < -1.0, -2.0 - x, x)


def generate_image(spec: CorpusSpec, index: int) -> tuple[RawImage, LabelMap | None]:
    levels, labels = _GENERATORS[spec.kind](spec, index)
    levels = apply_shift(levels, spec.shift, spec.seed, index)
    raw = np.clip(np.floor(levels + 0.5), 0, 255).astype(np.uint8)
    return RawImage(raw), labels


def generate_corpus(spec: CorpusSpec) -> Corpus:
    """Images (and label maps for checker/blotch) for ``spec``; fully deterministic."""
    images = []
    labels = [] if spec.has_labels else None
    for i in range(spec.count):
        raw, lab = generate_image(spec, i)
        images.append(normalize(raw))
        if labels is not None:
            labels.append(lab)
    return Corpus(spec, images, labels)


def perturb_labels(gt: LabelMap, flip_fraction: float, seed: int) -> LabelMap:
    """Reassign roughly ``flip_fraction`` of the labeled pixels to a different class.

    The set of flipped pixels grows monotonically with ``flip_fraction`` for a
    fixed seed, and each flipped pixel's new class does not depend on it.
    """
    if not 0.0 <= flip_fraction <= 1.0:
        raise ValueError("flip_fraction must lie in [0, 1]")
    if flip_fraction == 0.0 or gt.class_count < 2:
        return gt
    n = gt.data.size
    u = kernels.uniform_field(derive_key(seed, _FLIP), 0, n).reshape(gt.data.shape)
    v = kernels.uniform_field(derive_key(seed, _NEWCLASS), 0, n).reshape(gt.data.shape)
    s = gt.class_count
    flip = (u < flip_fraction) & gt.valid_mask
    step = 1 + np.floor(v * (s - 1)).astype(np.int32)
    out = gt.data.copy()
    out[flip] = (gt.data[flip] + step[flip]) % s
    return LabelMap(out, s, gt.ignore_value)


def fill_ignored(pred: LabelMap) -> LabelMap:
    """Replace ignore markers with class 0 so the map can serve as a prediction."""
    data = np.where(pred.data == pred.ignore_value, 0, pred.data)
    return LabelMap(data, pred.class_count, pred.ignore_value)


def write_corpus(corpus: Corpus, directory, pred_flip: float | None = None,
                 pred_seed: int = 0) -> Path:
    """Write ``images/*.ppm`` and, for labeled kinds, ``labels/*.pgm``.

    With ``pred_flip``, also writes ``pred/*.pgm``: ground truth perturbed by
    :func:`perturb_labels`, a stand-in for segmentation output.
    """
    root = Path(directory)
    (root / "images").mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(corpus.images):
        write_ppm(root / "images" / f"img_{i:05d}.ppm", denormalize(img))
    if corpus.labels is not None:
        (root / "labels").mkdir(exist_ok=True)
        for i, lab in enumerate(corpus.labels):
            write_pgm(root / "labels" / f"img_{i:05d}.pgm", lab)
        if pred_flip is not None:
            (root / "pred").mkdir(exist_ok=True)
            for i, lab in enumerate(corpus.labels):
                pred = perturb_labels(lab, pred_flip, derive_key(pred_seed, i))
                write_pgm(root / "pred" / f"img_{i:05d}.pgm", pred)
    return root
