"""Grayscale frame and binary motion-mask sequences on disk.

On-disk layout: a clip is a plain-text manifest (one relative PGM path per
line, LF endings, paths resolved against the manifest's directory) plus the
binary (P5) PGM frames it points at.  Masks use the same layout with pixel
values restricted to {0, 255}; in memory they are {0, 1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


# ---------------------------------------------------------------------------
# PGM (binary, P5, maxval 255)
# ---------------------------------------------------------------------------

def read_pgm(path) -> np.ndarray:
    """Read a binary PGM into a (height, width) uint8 array.

    Header comments (# to end of line) are allowed anywhere between tokens.
    """
    path = Path(path)
    data = path.read_bytes()
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(data):
            c = data[pos:pos + 1]
            if c == b"#":
                while pos < len(data) and data[pos:pos + 1] != b"\n":
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {magic!r}, expected b'P5')")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise ValueError(f"{path}: bad PGM header: {exc}") from None
    if width <= 0 or height <= 0:
        raise ValueError(f"{path}: bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval} (only 255)")
    pos += 1  # single whitespace byte after maxval, then the raster
    raster = data[pos:pos + width * height]
    if len(raster) < width * height:
        raise ValueError(f"{path}: truncated raster ({len(raster)} of {width * height} bytes)")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, image: np.ndarray) -> None:
    """Write a (height, width) uint8 array as binary PGM."""
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise ValueError(f"expected 2-d uint8 image, got {image.dtype} with shape {image.shape}")
    h, w = image.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(image.tobytes())


# ---------------------------------------------------------------------------
# Sequence types
# ---------------------------------------------------------------------------

@dataclass
class FrameSequence:
    """Grayscale clip: frames stacked as a (frame_count, height, width) uint8 array."""

    clip_id: str
    frames: np.ndarray

    def __post_init__(self):
        self.frames = np.asarray(self.frames)
        if self.frames.ndim != 3 or self.frames.dtype != np.uint8:
            raise ValueError(
                f"frames must be (n, h, w) uint8, got {self.frames.dtype} shape {self.frames.shape}")
        if self.frame_count < 2:
            raise ValueError(f"frame_count < 2 (got {self.frame_count})")

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    def __eq__(self, other):
        if not isinstance(other, FrameSequence):
            return NotImplemented
        return self.clip_id == other.clip_id and np.array_equal(self.frames, other.frames)


@dataclass
class MotionMaskSequence:
    """Binary motion masks, one per frame, values in {0, 1}."""

    clip_id: str
    masks: np.ndarray

    def __post_init__(self):
        self.masks = np.asarray(self.masks)
        if self.masks.ndim != 3 or self.masks.dtype != np.uint8:
            raise ValueError(
                f"masks must be (n, h, w) uint8, got {self.masks.dtype} shape {self.masks.shape}")
        if self.masks.shape[0] < 1:
            raise ValueError("mask sequence is empty")
        bad = (self.masks > 1)
        if bad.any():
            t = int(np.argwhere(bad.any(axis=(1, 2)))[0, 0])
            raise ValueError(f"non-binary mask at frame {t}: values must be 0 or 1")

    @property
    def frame_count(self) -> int:
        return self.masks.shape[0]

    @property
    def height(self) -> int:
        return self.masks.shape[1]

    @property
    def width(self) -> int:
        return self.masks.shape[2]

    def __eq__(self, other):
        if not isinstance(other, MotionMaskSequence):
            return NotImplemented
        return self.clip_id == other.clip_id and np.array_equal(self.masks, other.masks)


# ---------------------------------------------------------------------------
# Manifest loading / writing
# ---------------------------------------------------------------------------

def _read_manifest_images(manifest_path: Path):
    """Yield (line_number, path, image) for every frame listed in a manifest."""
    try:
        text = manifest_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"{manifest_path}: manifest not found") from None
    except OSError as exc:
        raise ValueError(f"{manifest_path}: cannot read manifest: {exc}") from None
    base = manifest_path.parent
    out = []
    shape = None
    first_line = None
    for lineno, line in enumerate(text.split("\n"), start=1):
        rel = line.strip()
        if not rel:
            continue
        frame_path = base / rel
        try:
            image = read_pgm(frame_path)
        except (OSError, ValueError) as exc:
            raise ValueError(f"{manifest_path}:{lineno}: {exc}") from None
        if shape is None:
            shape = image.shape
            first_line = lineno
        elif image.shape != shape:
            raise ValueError(
                f"{manifest_path}:{lineno}: frame is {image.shape[1]}x{image.shape[0]}, "
                f"expected {shape[1]}x{shape[0]} (from line {first_line})")
        out.append((lineno, frame_path, image))
    if not out:
        raise ValueError(f"{manifest_path}: manifest lists no frames")
    return out


def load_frame_sequence(manifest_path, clip_id: str | None = None) -> FrameSequence:
    """Load a grayscale clip from its manifest.  clip_id defaults to the manifest stem."""
    manifest_path = Path(manifest_path)
    entries = _read_manifest_images(manifest_path)
    if len(entries) < 2:
        raise ValueError(f"{manifest_path}: frame_count < 2 (got {len(entries)})")
    frames = np.stack([img for _, _, img in entries])
    return FrameSequence(clip_id or manifest_path.stem, frames)


def load_mask_sequence(manifest_path, clip_id: str | None = None) -> MotionMaskSequence:
    """Load a binary mask clip.  Frame values must be exactly 0 or 255."""
    manifest_path = Path(manifest_path)
    entries = _read_manifest_images(manifest_path)
    masks = np.empty((len(entries),) + entries[0][2].shape, dtype=np.uint8)
    for t, (lineno, frame_path, img) in enumerate(entries):
        bad = (img != 0) & (img != 255)
        if bad.any():
            raise ValueError(
                f"{manifest_path}:{lineno}: non-binary mask at frame {t} "
                f"({frame_path.name}): values must be 0 or 255")
        masks[t] = img >> 7  # 255 -> 1
    return MotionMaskSequence(clip_id or manifest_path.stem, masks)


def write_mask_sequence(masks: MotionMaskSequence, out_dir) -> Path:
    """Write masks as frame_%06d.pgm (0/255) plus a <clip_id>.txt manifest.

    Returns the manifest path; load_mask_sequence() on it round-trips exactly.
    """
    if not masks.clip_id or any(c.isspace() for c in masks.clip_id) or "/" in masks.clip_id:
        raise ValueError(f"clip_id {masks.clip_id!r} is not filename-safe")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for t in range(masks.frame_count):
        name = f"frame_{t:06d}.pgm"
        write_pgm(out_dir / name, masks.masks[t] * np.uint8(255))
        names.append(name)
    manifest = out_dir / f"{masks.clip_id}.txt"
    with open(manifest, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(names) + "\n")
    return manifest
