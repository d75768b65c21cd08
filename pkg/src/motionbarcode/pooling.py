"""Pooling per-pixel motion into one barcode per superpixel region.

A region's bit for frame t is the majority vote of its pixels' mask values
at t, with exact halves rounding to 1 (the choice that minimizes the summed
Hamming distance to the region's pixel barcodes).  Regions whose pooled
barcode has too little motion are dropped; a clip whose retained set is
small is flagged low-motion but still usable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barcode import MotionBarcode
from .segmentation import SuperpixelLabelMap
from .video_io import MotionMaskSequence


@dataclass
class ClipSignature:
    clip_id: str
    frame_count: int
    barcodes: list
    region_count: int
    low_motion_flag: bool = False

    def __post_init__(self):
        prev = None
        for b in self.barcodes:
            if len(b) != self.frame_count:
                raise ValueError(
                    f"barcode length {len(b)} does not match frame count {self.frame_count}")
            if not isinstance(b.source_id, int):
                raise ValueError("signature barcodes must carry integer region labels")
            if prev is not None and b.source_id <= prev:
                raise ValueError("signature barcodes must be sorted by strictly increasing label")
            prev = b.source_id

    def __len__(self):
        return len(self.barcodes)

    def bit_matrix(self) -> np.ndarray:
        """All retained barcodes stacked as a (K, N) uint8 matrix."""
        if not self.barcodes:
            return np.zeros((0, self.frame_count), dtype=np.uint8)
        return np.stack([b.bits for b in self.barcodes])


def _check_geometry(masks: MotionMaskSequence, labelmap: SuperpixelLabelMap):
    if (masks.width, masks.height) != (labelmap.width, labelmap.height):
        raise ValueError(
            f"mask geometry {masks.width}x{masks.height} does not match "
            f"label map {labelmap.width}x{labelmap.height}")


def pool_superpixel(masks: MotionMaskSequence,
                    labelmap: SuperpixelLabelMap,
                    label: int) -> MotionBarcode:
    _check_geometry(masks, labelmap)
    if not 0 <= label < labelmap.region_count:
        raise ValueError(f"label {label} out of range [0, {labelmap.region_count})")
    pixels = np.flatnonzero(labelmap.labels.ravel() == label)
    votes = masks.masks.reshape(masks.frame_count, -1)[:, pixels].sum(axis=1, dtype=np.int64)
    bits = (2 * votes >= len(pixels)).astype(np.uint8)
    return MotionBarcode(bits, source_id=label)


def pool_all_superpixels(masks: MotionMaskSequence,
                         labelmap: SuperpixelLabelMap) -> np.ndarray:
    """Majority-pool every region at once; returns (region_count, N) uint8."""
    _check_geometry(masks, labelmap)
    flat_labels = labelmap.labels.ravel()
    sizes = np.bincount(flat_labels, minlength=labelmap.region_count)
    flat_masks = masks.masks.reshape(masks.frame_count, -1)
    votes = np.zeros((labelmap.region_count, masks.frame_count), dtype=np.int64)
    for t in range(masks.frame_count):
        votes[:, t] = np.bincount(flat_labels, weights=flat_masks[t],
                                  minlength=labelmap.region_count)
    return (2 * votes >= sizes[:, None]).astype(np.uint8)


def build_signature(masks: MotionMaskSequence,
                    labelmap: SuperpixelLabelMap,
                    min_motion_fraction: float = 0.1,
                    min_barcodes: int = 100) -> ClipSignature:
    if not 0.0 <= min_motion_fraction <= 1.0:
        raise ValueError(f"min_motion_fraction must be in [0, 1], got {min_motion_fraction}")
    if min_barcodes < 0:
        raise ValueError(f"min_barcodes must be >= 0, got {min_barcodes}")
    pooled = pool_all_superpixels(masks, labelmap)
    ones = pooled.sum(axis=1, dtype=np.int64)
    keep = np.flatnonzero(ones > min_motion_fraction * masks.frame_count)
    barcodes = [MotionBarcode(pooled[i], source_id=int(i)) for i in keep]
    return ClipSignature(
        clip_id=masks.clip_id,
        frame_count=masks.frame_count,
        barcodes=barcodes,
        region_count=labelmap.region_count,
        low_motion_flag=len(barcodes) < min_barcodes,
    )


# ---------------------------------------------------------------------------
# Signature files
# ---------------------------------------------------------------------------

_MAGIC = "MBSIG"
_VERSION = "1"


def write_signature(signature: ClipSignature, path) -> None:
    """Text format: header line then one `<label> <bitstring>` line per barcode.

    Header: `MBSIG 1 <clip_id> <N> <K_retained> <region_count> <low_motion:0|1>`.
    Lines end with LF; labels appear in strictly increasing order.
    """
    if any(ch.isspace() for ch in signature.clip_id) or not signature.clip_id:
        raise ValueError(f"clip_id {signature.clip_id!r} is not storable (empty or whitespace)")
    lines = [
        f"{_MAGIC} {_VERSION} {signature.clip_id} {signature.frame_count} "
        f"{len(signature.barcodes)} {signature.region_count} "
        f"{1 if signature.low_motion_flag else 0}"
    ]
    for b in signature.barcodes:
        bitstring = (b.bits + ord("0")).astype(np.uint8).tobytes().decode("ascii")
        lines.append(f"{b.source_id} {bitstring}")
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_signature(path) -> ClipSignature:
    with open(path, "r") as f:
        raw = f.read().split("\n")
    if raw and raw[-1] == "":
        raw.pop()
    if not raw:
        raise ValueError(f"{path}:1: empty signature file")
    head = raw[0].split(" ")
    if len(head) != 7 or head[0] != _MAGIC:
        raise ValueError(f"{path}:1: malformed header {raw[0]!r}")
    if head[1] != _VERSION:
        raise ValueError(f"{path}:1: unsupported version {head[1]!r}")
    clip_id = head[2]
    try:
        frame_count, retained, region_count, flag = (int(v) for v in head[3:7])
    except ValueError:
        raise ValueError(f"{path}:1: non-integer header field in {raw[0]!r}") from None
    if flag not in (0, 1):
        raise ValueError(f"{path}:1: low-motion flag must be 0 or 1, got {flag}")
    if len(raw) - 1 != retained:
        raise ValueError(
            f"{path}: header declares {retained} barcodes but file has {len(raw) - 1}")
    barcodes = []
    prev = None
    for lineno, line in enumerate(raw[1:], start=2):
        parts = line.split(" ")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<label> <bitstring>'")
        try:
            label = int(parts[0])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-integer label {parts[0]!r}") from None
        if label < 0 or label >= region_count:
            raise ValueError(f"{path}:{lineno}: label {label} out of range [0, {region_count})")
        if prev is not None and label <= prev:
            raise ValueError(f"{path}:{lineno}: labels must be strictly increasing")
        prev = label
        if len(parts[1]) != frame_count:
            raise ValueError(
                f"{path}:{lineno}: bitstring length {len(parts[1])} != frame count {frame_count}")
        arr = np.frombuffer(parts[1].encode("ascii"), dtype=np.uint8) - ord("0")
        if (arr > 1).any():
            raise ValueError(f"{path}:{lineno}: bitstring contains characters other than 0/1")
        barcodes.append(MotionBarcode(arr, source_id=label))
    return ClipSignature(clip_id, frame_count, barcodes, region_count, bool(flag))
