"""Per-pixel motion barcodes, the motion image, and informativeness filters.

A motion barcode is the N-bit vector of one pixel's (or, after pooling, one
superpixel's) motion existence over time.  Summing a pixel's bits gives the
motion image, which drives segmentation.  Barcodes with too little motion
carry no timing information and are filtered out of clip signatures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .video_io import MotionMaskSequence


@dataclass
class MotionBarcode:
    """N-bit motion existence vector with its origin (pixel coords or region label)."""

    bits: np.ndarray
    source_id: object = None
    ones_count: int = field(init=False)

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ValueError(f"bits must be 1-d, got shape {self.bits.shape}")
        if (self.bits > 1).any():
            raise ValueError("bits must be 0 or 1")
        self.ones_count = int(self.bits.sum())

    def __len__(self):
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MotionBarcode):
            return NotImplemented
        return self.source_id == other.source_id and np.array_equal(self.bits, other.bits)


@dataclass
class MotionImage:
    """Per-pixel count of 1-bits across the clip: counts(x, y) = sum_t mask_t(x, y)."""

    width: int
    height: int
    counts: np.ndarray
    frame_count: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if self.counts.shape != (self.height, self.width):
            raise ValueError(
                f"counts shape {self.counts.shape} does not match "
                f"{self.height}x{self.width}")
        if (self.counts < 0).any() or (self.counts > self.frame_count).any():
            raise ValueError("counts must lie in [0, frame_count]")


def compute_motion_image(masks: MotionMaskSequence) -> MotionImage:
    counts = masks.masks.sum(axis=0, dtype=np.int64)
    return MotionImage(masks.width, masks.height, counts, masks.frame_count)


def barcode_at(masks: MotionMaskSequence, x: int, y: int) -> MotionBarcode:
    """The barcode of a single pixel; source_id is the (x, y) pair."""
    if not (0 <= x < masks.width and 0 <= y < masks.height):
        raise ValueError(
            f"pixel ({x}, {y}) out of bounds for {masks.width}x{masks.height}")
    return MotionBarcode(masks.masks[:, y, x].copy(), source_id=(x, y))


def filter_barcodes(barcodes: list, min_motion_fraction: float = 0.1) -> list:
    """Keep barcodes whose ones_count is strictly greater than min_motion_fraction * N."""
    if not 0.0 <= min_motion_fraction <= 1.0:
        raise ValueError(f"min_motion_fraction must be in [0, 1], got {min_motion_fraction}")
    return [b for b in barcodes if b.ones_count > min_motion_fraction * len(b)]


def sufficient_motion(signature_size: int, min_barcodes: int = 100) -> bool:
    """Whether a clip retains enough barcodes to be reliably matchable."""
    return signature_size >= min_barcodes
