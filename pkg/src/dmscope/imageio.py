"""Loading, validating and normalizing images and label maps."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (CorruptImageError, ImageIOError, LabelRangeError,
                     UnsupportedFormatError)

CHANNELS = 3
IGNORE_LABEL = 255
IMAGE_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm")


def _freeze(arr):
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class RawImage:
    """8-bit image, shape (H, W, 3), dtype uint8."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[2] != CHANNELS:
            raise ValueError(f"expected (H, W, {CHANNELS}) array, got {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if data.dtype != np.uint8:
            if np.any(data < 0) or np.any(data > 255) or np.any(data != np.round(data)):
                raise ValueError("raw intensities must be integers in [0, 255]")
            data = data.astype(np.uint8)
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    def __eq__(self, other):
        return isinstance(other, RawImage) and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Image:
    """Normalized image, shape (H, W, 3), float64 values in [-1, 1]."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != CHANNELS:
            raise ValueError(f"expected (H, W, {CHANNELS}) array, got {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if not np.all((data >= -1.0) & (data <= 1.0)):
            raise ValueError("normalized values must lie in [-1, 1]")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape

    def __eq__(self, other):
        return isinstance(other, Image) and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel class indices ``0 .. class_count-1``; ``ignore_value`` marks unlabeled pixels."""

    data: np.ndarray
    class_count: int
    ignore_value: int = IGNORE_LABEL

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"label map must be a non-empty 2-D array, got {data.shape}")
        if self.class_count < 1:
            raise ValueError("class_count must be positive")
        if not np.issubdtype(data.dtype, np.integer):
            raise ValueError("label map must hold integers")
        data = data.astype(np.int32)
        bad = (data != self.ignore_value) & ((data < 0) | (data >= self.class_count))
        if np.any(bad):
            worst = int(data[bad][0])
            raise LabelRangeError(
                f"class id {worst} outside [0, {self.class_count}) and not the ignore value")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def valid_mask(self):
        return self.data != self.ignore_value

    def __eq__(self, other):
        return (isinstance(other, LabelMap) and self.class_count == other.class_count
                and self.ignore_value == other.ignore_value
                and np.array_equal(self.data, other.data))

    __hash__ = None


def normalize(raw: RawImage) -> Image:
    return Image(raw.data.astype(np.float64) * 2.0 / 255.0 - 1.0)


def denormalize_array(values: np.ndarray) -> np.ndarray:
    """Map normalized values to integer levels, rounding half up and clamping to [0, 255]."""
    scaled = (np.asarray(values, dtype=np.float64) + 1.0) * 255.0 / 2.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def denormalize(img: Image) -> RawImage:
    return RawImage(denormalize_array(img.data))


# -- netpbm ------------------------------------------------------------------

def _read_netpbm(blob: bytes, path) -> tuple[np.ndarray, int]:
    """Decode binary P5/P6. Returns (array, maxval); array is (H, W) or (H, W, 3)."""
    magic = blob[:2]
    channels = {b"P5": 1, b"P6": 3}.get(magic)
    if channels is None:
        raise UnsupportedFormatError(f"{path}: unsupported netpbm variant {magic!r}")
    fields = []
    pos = 2
    n = len(blob)
    while len(fields) < 3:
        while pos < n and blob[pos:pos + 1].isspace():
            pos += 1
        if pos < n and blob[pos:pos + 1] == b"#":
            while pos < n and blob[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not blob[pos:pos + 1].isspace() and blob[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise CorruptImageError(f"{path}: truncated header")
        token = blob[start:pos]
        if not token.isdigit():
            raise CorruptImageError(f"{path}: bad header field {token!r}")
        fields.append(int(token))
    if pos >= n or not blob[pos:pos + 1].isspace():
        raise CorruptImageError(f"{path}: missing separator after header")
    pos += 1
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise CorruptImageError(f"{path}: non-positive dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise UnsupportedFormatError(f"{path}: only 8-bit netpbm is supported (maxval={maxval})")
    expected = width * height * channels
    payload = blob[pos:pos + expected]
    if len(payload) != expected:
        raise CorruptImageError(
            f"{path}: truncated payload ({len(payload)} of {expected} bytes)")
    arr = np.frombuffer(payload, dtype=np.uint8)
    if np.any(arr > maxval):
        raise CorruptImageError(f"{path}: sample exceeds maxval {maxval}")
    shape = (height, width) if channels == 1 else (height, width, 3)
    return arr.reshape(shape).copy(), maxval


def _read_png(path, want_labels: bool) -> np.ndarray:
    from PIL import Image as PILImage, UnidentifiedImageError

    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "P" and not want_labels:
                im = im.convert("RGB")
                mode = "RGB"
            if mode in ("L", "P"):
                return np.asarray(im, dtype=np.uint8).copy()
            if mode == "RGB":
                return np.asarray(im, dtype=np.uint8).copy()
            raise UnsupportedFormatError(
                f"{path}: PNG mode {mode!r} is not 8-bit with 1 or 3 channels")
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"{path}: {exc}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        if isinstance(exc, ImageIOError):
            raise
        raise CorruptImageError(f"{path}: {exc}") from exc


def _read_any(path, want_labels: bool) -> tuple[np.ndarray, int]:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ImageIOError(f"{path}: cannot read file ({exc.strerror or exc})") from exc
    if blob[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path, want_labels), 255
    if blob[:1] == b"P" and blob[1:2].isdigit():
        return _read_netpbm(blob, path)
    raise UnsupportedFormatError(f"{path}: not a PNG or binary netpbm file")


def load_image(path) -> RawImage:
    """Read an 8-bit PNG, PPM (P6) or PGM (P5) file; grayscale is replicated to 3 channels."""
    arr, maxval = _read_any(path, want_labels=False)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    if maxval != 255:
        arr = np.floor(arr.astype(np.float64) * 255.0 / maxval + 0.5).astype(np.uint8)
    return RawImage(arr)


def load_labelmap(path, class_count: int, ignore_value: int = IGNORE_LABEL) -> LabelMap:
    arr, _ = _read_any(path, want_labels=True)
    if arr.ndim != 2:
        raise UnsupportedFormatError(f"{path}: label maps must be single-channel")
    return LabelMap(arr, class_count, ignore_value)


def write_ppm(path, raw: RawImage) -> None:
    header = f"P6\n{raw.width} {raw.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raw.data.tobytes())


def write_pgm(path, labels: LabelMap | np.ndarray) -> None:
    data = labels.data if isinstance(labels, LabelMap) else np.asarray(labels)
    if data.min(initial=0) < 0 or data.max(initial=0) > 255:
        raise ValueError("PGM values must fit in 8 bits")
    h, w = data.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.astype(np.uint8).tobytes())


def list_images(directory) -> list[Path]:
    """Image files in ``directory`` in sorted name order (non-recursive)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageIOError(f"{directory}: not a directory")
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def load_corpus(directory) -> tuple[list[Image], list[tuple[str, str]]]:
    """Load and normalize every image in a directory.

    Returns ``(images, failures)`` where each failure is ``(filename, reason)``.
    A failing file never aborts the load; callers decide what to do.
    """
    images = []
    failures = []
    for path in list_images(directory):
        try:
            images.append(normalize(load_image(path)))
        except ImageIOError as exc:
            failures.append((os.fspath(path.name), str(exc)))
    return images, failures
