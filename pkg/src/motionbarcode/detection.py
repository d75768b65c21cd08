"""Per-pixel motion detection producing binary mask sequences.

Two detectors:

* ``detect_motion`` -- sample-based background subtraction.  Every pixel keeps
  a set of past observations; a pixel is background when enough samples sit
  within an intensity radius of the current value, and background pixels
  stochastically refresh their own sample set and one neighbor's.  All
  randomness is counter-based (keyed on seed, pixel, frame), so results do not
  depend on pixel visiting order.
* ``detect_motion_framediff`` -- absolute frame differencing, as a cheap
  baseline.

Frame 0 has no history, so both emit an all-zero mask for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import lattice_randint, lattice_uniform
from .video_io import FrameSequence, MotionMaskSequence

# 8-neighborhood in raster order, center excluded.
_NEIGHBOR_DX = np.array([-1, 0, 1, -1, 1, -1, 0, 1])
_NEIGHBOR_DY = np.array([-1, -1, -1, 0, 0, 1, 1, 1])

# Stream tags keeping the per-purpose hash lattices disjoint.
_INIT, _SELF_GATE, _SELF_SLOT, _NEIGH_GATE, _NEIGH_PICK, _NEIGH_SLOT = range(6)


@dataclass(frozen=True)
class BackgroundModelParams:
    samples_per_pixel: int = 20
    match_radius: int = 20
    min_matches: int = 2
    subsample_factor: int = 16

    def __post_init__(self):
        if self.min_matches < 1:
            raise ValueError(f"min_matches must be >= 1, got {self.min_matches}")
        if self.samples_per_pixel < self.min_matches:
            raise ValueError(
                f"samples_per_pixel ({self.samples_per_pixel}) must be >= "
                f"min_matches ({self.min_matches})")
        if self.match_radius < 0:
            raise ValueError(f"match_radius must be >= 0, got {self.match_radius}")
        if self.subsample_factor < 1:
            raise ValueError(f"subsample_factor must be >= 1, got {self.subsample_factor}")


def detect_motion(frames: FrameSequence,
                  params: BackgroundModelParams | None = None,
                  seed: int = 0) -> MotionMaskSequence:
    """Sample-based background subtraction over a clip.

    The model bootstraps from frame 0 by drawing each pixel's samples from its
    8-neighborhood (with replacement, coordinates clamped at borders), so the
    frame-0 mask is all zero.  From frame 1 on, a pixel is background when at
    least ``min_matches`` samples lie within ``match_radius`` of its value
    (absolute difference, inclusive); background pixels then refresh a random
    slot of their own set with probability 1/subsample_factor and push their
    value into a random slot of a random 8-neighbor with the same probability.
    Conflicting neighbor writes resolve in raster order, last writer wins.
    """
    if params is None:
        params = BackgroundModelParams()
    n, h, w = frames.frames.shape
    nsamp = params.samples_per_pixel
    masks = np.zeros((n, h, w), dtype=np.uint8)
    yy, xx = np.mgrid[0:h, 0:w]

    f0 = frames.frames[0]
    samples = np.empty((h, w, nsamp), dtype=np.uint8)
    for s in range(nsamp):
        k = lattice_randint(seed, 8, _INIT, xx, yy, s)
        nx = np.clip(xx + _NEIGHBOR_DX[k], 0, w - 1)
        ny = np.clip(yy + _NEIGHBOR_DY[k], 0, h - 1)
        samples[:, :, s] = f0[ny, nx]

    refresh_p = 1.0 / params.subsample_factor
    for t in range(1, n):
        frame = frames.frames[t]
        diffs = np.abs(samples.astype(np.int16) - frame[:, :, None].astype(np.int16))
        background = (diffs <= params.match_radius).sum(axis=2) >= params.min_matches
        masks[t] = ~background

        self_upd = background & (lattice_uniform(seed, _SELF_GATE, xx, yy, t) < refresh_p)
        if self_upd.any():
            slots = lattice_randint(seed, nsamp, _SELF_SLOT, xx, yy, t)
            samples[yy[self_upd], xx[self_upd], slots[self_upd]] = frame[self_upd]

        neigh_upd = background & (lattice_uniform(seed, _NEIGH_GATE, xx, yy, t) < refresh_p)
        if neigh_upd.any():
            k = lattice_randint(seed, 8, _NEIGH_PICK, xx, yy, t)
            slots = lattice_randint(seed, nsamp, _NEIGH_SLOT, xx, yy, t)
            tx = np.clip(xx + _NEIGHBOR_DX[k], 0, w - 1)[neigh_upd]
            ty = np.clip(yy + _NEIGHBOR_DY[k], 0, h - 1)[neigh_upd]
            flat = (ty * w + tx) * nsamp + slots[neigh_upd]
            vals = frame[neigh_upd]
            # np.unique on the reversed writer list finds, per target slot, the
            # last write in raster order.
            targets, first_in_rev = np.unique(flat[::-1], return_index=True)
            samples.reshape(-1)[targets] = vals[len(flat) - 1 - first_in_rev]

    return MotionMaskSequence(frames.clip_id, masks)


def detect_motion_framediff(frames: FrameSequence, threshold: int = 15) -> MotionMaskSequence:
    """Mark pixels whose absolute intensity change since the previous frame exceeds threshold."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    f = frames.frames.astype(np.int16)
    masks = np.zeros(frames.frames.shape, dtype=np.uint8)
    masks[1:] = np.abs(f[1:] - f[:-1]) > threshold
    return MotionMaskSequence(frames.clip_id, masks)
