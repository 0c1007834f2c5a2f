"""Deterministic surrogate reconstructors and per-image corpus scoring.

A reconstructor maps an image to a same-shaped image in [-1, 1]. How well
it reconstructs depends on image content, so the distribution of PSNR
scores over a corpus characterizes that corpus's domain.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import derive_key, kernels
from .errors import EmptyInputError
from .imageio import Image, denormalize_array
from .metrics import PsnrConfig, psnr

_NOISE_STREAM = 0x4E4F495345  # "NOISE"


def _from_levels(levels: np.ndarray) -> Image:
    return Image(np.clip(levels * 2.0 / 255.0 - 1.0, -1.0, 1.0))


class Reconstructor:
    kind = "abstract"

    def __call__(self, img: Image) -> Image:
        return self.reconstruct(img)

    def reconstruct(self, img: Image) -> Image:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, "params": self.params()}


@dataclass(frozen=True)
class Identity(Reconstructor):
    kind = "identity"

    def reconstruct(self, img):
        return img


@dataclass(frozen=True)
class Quantize(Reconstructor):
    """Snap each 8-bit value to the nearest of ``levels`` evenly spaced levels on [0, 255]."""

    levels: int
    kind = "quantize"

    def __post_init__(self):
        if int(self.levels) != self.levels or self.levels < 2:
            raise ValueError("quantize needs an integer level count >= 2")

    def reconstruct(self, img):
        step = 255.0 / (self.levels - 1)
        raw = denormalize_array(img.data).astype(np.float64)
        index = np.floor(raw / step + 0.5)
        return _from_levels(index * step)

    def params(self):
        return {"levels": int(self.levels)}


@dataclass(frozen=True)
class BlurResample(Reconstructor):
    """Average each ``factor x factor`` block and paint the average back over it.

    Blocks on the bottom/right border may be smaller; they average only the
    pixels that exist.
    """

    factor: int
    kind = "blur_resample"

    def __post_init__(self):
        if self.factor not in (2, 4, 8):
            raise ValueError("blur_resample factor must be 2, 4 or 8")

    def reconstruct(self, img):
        f = self.factor
        raw = denormalize_array(img.data).astype(np.float64)
        h, w, c = raw.shape
        hb = -(-h // f)
        wb = -(-w // f)
        padded = np.zeros((hb * f, wb * f, c))
        padded[:h, :w] = raw
        weight = np.zeros((hb * f, wb * f, 1))
        weight[:h, :w] = 1.0
        sums = padded.reshape(hb, f, wb, f, c).sum(axis=(1, 3))
        counts = weight.reshape(hb, f, wb, f, 1).sum(axis=(1, 3))
        means = sums / counts
        out = np.repeat(np.repeat(means, f, axis=0), f, axis=1)[:h, :w]
        return _from_levels(out)

    def params(self):
        return {"factor": int(self.factor)}


@dataclass(frozen=True)
class PseudoNoise(Reconstructor):
    """Add a position-hashed offset uniform in [-amplitude, amplitude) and clamp."""

    amplitude: float
    seed: int = 0
    kind = "pseudo_noise"

    def __post_init__(self):
        if not 0.0 < self.amplitude <= 2.0:
            raise ValueError("pseudo_noise amplitude must lie in (0, 2]")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")

    def reconstruct(self, img):
        key = derive_key(_NOISE_STREAM, self.seed)
        u = kernels.uniform_field(key, 0, img.data.size).reshape(img.data.shape)
        return Image(np.clip(img.data + self.amplitude * (2.0 * u - 1.0), -1.0, 1.0))

    def params(self):
        return {"amplitude": float(self.amplitude), "seed": int(self.seed)}


def reconstruct(r: Reconstructor, img: Image) -> Image:
    return r.reconstruct(img)


def from_descriptor(desc: dict) -> Reconstructor:
    kind = desc["kind"]
    params = desc.get("params") or {}
    if kind == "identity":
        return Identity()
    if kind == "quantize":
        return Quantize(int(params["levels"]))
    if kind == "blur_resample":
        return BlurResample(int(params["factor"]))
    if kind == "pseudo_noise":
        return PseudoNoise(float(params["amplitude"]), int(params.get("seed", 0)))
    raise ValueError(f"unknown reconstructor kind {kind!r}")


_ALIASES = {"blur": "blur_resample", "noise": "pseudo_noise"}


def parse_reconstructor(text: str) -> Reconstructor:
    """Parse ``identity``, ``quantize:K``, ``blur_resample:F`` or ``pseudo_noise:A[:SEED]``."""
    kind, *args = text.strip().split(":")
    kind = _ALIASES.get(kind, kind)
    try:
        if kind == "identity" and not args:
            return Identity()
        if kind == "quantize" and len(args) == 1:
            return Quantize(int(args[0]))
        if kind == "blur_resample" and len(args) == 1:
            return BlurResample(int(args[0]))
        if kind == "pseudo_noise" and len(args) in (1, 2):
            seed = int(args[1]) if len(args) == 2 else 0
            return PseudoNoise(float(args[0]), seed)
    except ValueError as exc:
        raise ValueError(f"bad reconstructor {text!r}: {exc}") from exc
    raise ValueError(f"bad reconstructor {text!r}")


def score_corpus(r: Reconstructor, images, cfg: PsnrConfig = PsnrConfig(),
                 workers: int | None = None) -> list[float]:
    """PSNR of every image against its reconstruction, in input order."""
    images = list(images)
    if not images:
        raise EmptyInputError("cannot score an empty corpus")

    def score(img):
        return psnr(img, r.reconstruct(img), cfg)

    if workers is None or workers <= 1 or len(images) == 1:
        return [score(img) for img in images]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(score, images))
