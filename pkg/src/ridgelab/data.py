"""Data ingestion and feature construction.

IDX (MNIST) parsing, pixel normalization to [-1, 1], the random Fourier
feature transform, and a small CSV loader with standardization.
"""

from __future__ import annotations

import csv
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    CountMismatchError,
    DimensionMismatchError,
    InvalidInputError,
    ParseError,
    TruncatedFileError,
)
from .linalg import Dataset
from .rng import as_rng

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class LabeledImages:
    """Flattened images with integer digit labels."""

    pixels: np.ndarray
    labels: np.ndarray

    @property
    def count(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RffConfig:
    """Random Fourier feature transform parameters.

    Output dimension is 2 * n_features (real and imaginary parts of
    exp(-i X W) as separate features).
    """

    input_dim: int = 784
    n_features: int = 1000
    kernel_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 1 or self.input_dim < 1:
            raise InvalidInputError("input_dim and n_features must be >= 1")
        if self.kernel_sigma <= 0:
            raise InvalidInputError("kernel_sigma must be > 0")


def _read_idx_header(raw: bytes, expected_magic: int, path) -> tuple[int, list[int]]:
    if len(raw) < 4:
        raise TruncatedFileError(f"{path}: shorter than the 4-byte magic")
    (magic,) = struct.unpack(">i", raw[:4])
    if magic != expected_magic:
        raise BadMagicError(
            f"{path}: magic {magic:#010x}, expected {expected_magic:#010x}"
        )
    ndim = magic & 0xFF
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise TruncatedFileError(f"{path}: truncated dimension fields")
    dims = list(struct.unpack(f">{ndim}i", raw[4:header_len]))
    return header_len, dims


def load_idx(images_path, labels_path) -> LabeledImages:
    """Parse an MNIST-style IDX image/label file pair (raw 0-255 pixels)."""
    images_raw = Path(images_path).read_bytes()
    labels_raw = Path(labels_path).read_bytes()

    offset, dims = _read_idx_header(images_raw, IDX_IMAGES_MAGIC, images_path)
    if len(dims) != 3:
        raise ParseError(f"{images_path}: expected 3 dimensions, got {len(dims)}")
    count, rows, cols = dims
    payload = images_raw[offset:]
    if len(payload) < count * rows * cols:
        raise TruncatedFileError(f"{images_path}: payload shorter than declared")
    pixels = np.frombuffer(payload[: count * rows * cols], dtype=np.uint8)
    pixels = pixels.reshape(count, rows * cols).astype(float)

    offset, dims = _read_idx_header(labels_raw, IDX_LABELS_MAGIC, labels_path)
    if len(dims) != 1:
        raise ParseError(f"{labels_path}: expected 1 dimension, got {len(dims)}")
    (label_count,) = dims
    payload = labels_raw[offset:]
    if len(payload) < label_count:
        raise TruncatedFileError(f"{labels_path}: payload shorter than declared")
    labels = np.frombuffer(payload[:label_count], dtype=np.uint8).astype(int)

    if label_count != count:
        raise CountMismatchError(
            f"{count} images but {label_count} labels"
        )
    return LabeledImages(pixels=pixels, labels=labels)


def write_idx(images_path, labels_path, pixels: np.ndarray, labels: np.ndarray) -> None:
    """Write an IDX file pair; inverse of load_idx for 28x28-style data."""
    pixels = np.asarray(pixels)
    labels = np.asarray(labels)
    count = pixels.shape[0]
    side = int(round(np.sqrt(pixels.shape[1])))
    if side * side != pixels.shape[1]:
        raise InvalidInputError("pixels per image must be a perfect square")
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">iiii", IDX_IMAGES_MAGIC, count, side, side))
        fh.write(pixels.astype(np.uint8).tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">ii", IDX_LABELS_MAGIC, count))
        fh.write(labels.astype(np.uint8).tobytes())


def normalize_pixels(raw: LabeledImages) -> LabeledImages:
    """Map raw intensities 0..255 onto [-1, 1] via v/127.5 - 1."""
    return LabeledImages(pixels=raw.pixels / 127.5 - 1.0, labels=raw.labels)


def sample_rff_matrix(cfg: RffConfig) -> np.ndarray:
    """Draw the (input_dim x n_features) projection with N(0, kernel_sigma^2) entries."""
    rng = as_rng(cfg.seed)
    return cfg.kernel_sigma * rng.standard_normal((cfg.input_dim, cfg.n_features))


def rff_transform(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Real/imaginary parts of exp(-i X W) as 2k feature columns.

    Columns 0..k-1 are cos(XW); columns k..2k-1 are -sin(XW).
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape[1] != w.shape[0]:
        raise DimensionMismatchError(
            f"x has {x.shape[1]} columns but w has {w.shape[0]} rows"
        )
    xw = x @ w
    return np.hstack([np.cos(xw), -np.sin(xw)])


def load_csv(path, response_column: str) -> Dataset:
    """Load a comma-separated file with a header row into a Dataset."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if response_column not in header:
            raise ParseError(f"{path}: missing response column {response_column!r}")
        rows = []
        for i, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"{path}:{i}: ragged row")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"{path}:{i}: non-numeric cell") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    table = np.asarray(rows)
    y_idx = header.index(response_column)
    mask = np.ones(len(header), dtype=bool)
    mask[y_idx] = False
    return Dataset(x=table[:, mask], y=table[:, y_idx])


def standardize(data: Dataset) -> Dataset:
    """Center all variables and scale predictors to unit sample sd (ddof=1).

    Constant columns are centered but left unscaled, with a warning.
    """
    xc = data.x - data.x.mean(axis=0)
    if data.n > 1:
        sd = data.x.std(axis=0, ddof=1)
    else:
        sd = np.zeros(data.p)
    constant = sd == 0
    if constant.any():
        warnings.warn(
            f"{int(constant.sum())} constant column(s) centered but not scaled",
            stacklevel=2,
        )
    scale = np.where(constant, 1.0, sd)
    yc = data.y - data.y.mean()
    y_sd = data.y.std(ddof=1) if data.n > 1 else 0.0
    if y_sd > 0:
        yc = yc / y_sd
    return Dataset(x=xc / scale, y=yc)
