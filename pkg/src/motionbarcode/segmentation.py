"""SLIC superpixel segmentation of the single-channel motion image.

Local k-means in (intensity, x, y) space: cluster centers start on a regular
grid at spacing S = round(sqrt(w*h/K)), nudged to the lowest-gradient spot in
their 3x3 neighborhood, then pixels are iteratively assigned to the nearest
center within a 2S window under

    D**2 = d_c**2 + (d_s / S)**2 * m**2

with d_c the normalized-intensity difference, d_s the Euclidean pixel
distance, and m the compactness weight.  Counts are normalized to [0, 100]
before clustering.  A final pass re-labels small disconnected fragments into
their largest adjacent region so every output label is 4-connected.

Everything is deterministic: clusters are scanned in ascending index with
strict improvement, so distance ties go to the lower label.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .barcode import MotionImage
from .rng import lattice_hash

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass
class SuperpixelLabelMap:
    width: int
    height: int
    labels: np.ndarray
    region_count: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.shape != (self.height, self.width):
            raise ValueError(
                f"labels shape {self.labels.shape} does not match {self.height}x{self.width}")
        present = np.unique(self.labels)
        if present[0] < 0 or present[-1] >= self.region_count or len(present) != self.region_count:
            raise ValueError(
                f"labels must cover [0, {self.region_count}) with every label used")


def slic_segment(motion_image: MotionImage,
                 target_regions: int = 1000,
                 compactness: float = 10.0,
                 iterations: int = 10) -> SuperpixelLabelMap:
    w, h = motion_image.width, motion_image.height
    if target_regions < 1:
        raise ValueError(f"target_regions must be >= 1, got {target_regions}")
    if target_regions > w * h:
        raise ValueError(f"target_regions {target_regions} exceeds pixel count {w * h}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")

    counts = motion_image.counts.astype(np.float64)
    intensity = counts * (100.0 / max(1.0, counts.max()))
    spacing = max(1, round(np.sqrt(w * h / target_regions)))

    cx, cy = _init_centers(intensity, spacing, w, h)
    ci = intensity[cy.astype(int), cx.astype(int)].copy()
    k = len(cx)

    labels = np.full((h, w), -1, dtype=np.int32)
    dist = np.empty((h, w), dtype=np.float64)
    ratio = (compactness / spacing) ** 2
    for _ in range(iterations):
        dist.fill(np.inf)
        for c in range(k):
            x0 = max(int(round(cx[c])) - spacing, 0)
            x1 = min(int(round(cx[c])) + spacing, w - 1)
            y0 = max(int(round(cy[c])) - spacing, 0)
            y1 = min(int(round(cy[c])) + spacing, h - 1)
            win = intensity[y0:y1 + 1, x0:x1 + 1]
            dx = np.arange(x0, x1 + 1, dtype=np.float64) - cx[c]
            dy = np.arange(y0, y1 + 1, dtype=np.float64) - cy[c]
            d2 = (win - ci[c]) ** 2 + (dy[:, None] ** 2 + dx[None, :] ** 2) * ratio
            closer = d2 < dist[y0:y1 + 1, x0:x1 + 1]
            dist[y0:y1 + 1, x0:x1 + 1][closer] = d2[closer]
            labels[y0:y1 + 1, x0:x1 + 1][closer] = c
        flat = labels.ravel()
        sizes = np.bincount(flat, minlength=k).astype(np.float64)
        occupied = sizes > 0
        xs = np.bincount(flat, weights=np.broadcast_to(np.arange(w, dtype=np.float64), (h, w)).ravel(), minlength=k)
        ys = np.bincount(flat, weights=np.repeat(np.arange(h, dtype=np.float64), w), minlength=k)
        vs = np.bincount(flat, weights=intensity.ravel(), minlength=k)
        cx[occupied] = xs[occupied] / sizes[occupied]
        cy[occupied] = ys[occupied] / sizes[occupied]
        ci[occupied] = vs[occupied] / sizes[occupied]

    labels = _enforce_connectivity(labels, w, h, target_regions)
    return SuperpixelLabelMap(w, h, labels, int(labels.max()) + 1)


def _init_centers(intensity, spacing, w, h):
    """Grid centers at spacing S, each moved to the lowest-gradient spot in its 3x3 box.

    Gradient ties resolve to the first (raster-order) position so the result
    is independent of scan details.
    """
    pad_r = np.minimum(np.arange(w) + 1, w - 1)
    pad_l = np.maximum(np.arange(w) - 1, 0)
    pad_d = np.minimum(np.arange(h) + 1, h - 1)
    pad_u = np.maximum(np.arange(h) - 1, 0)
    gx = intensity[:, pad_r] - intensity[:, pad_l]
    gy = intensity[pad_d, :] - intensity[pad_u, :]
    grad = gx * gx + gy * gy

    xs = np.arange(spacing // 2, w, spacing)
    ys = np.arange(spacing // 2, h, spacing)
    cx, cy = [], []
    for y in ys:
        for x in xs:
            wx0, wx1 = max(x - 1, 0), min(x + 1, w - 1)
            wy0, wy1 = max(y - 1, 0), min(y + 1, h - 1)
            win = grad[wy0:wy1 + 1, wx0:wx1 + 1]
            off = int(np.argmin(win))
            cy.append(wy0 + off // win.shape[1])
            cx.append(wx0 + off % win.shape[1])
    return np.array(cx, dtype=np.float64), np.array(cy, dtype=np.float64)


def _enforce_connectivity(labels, w, h, target_regions):
    """Merge 4-connected fragments smaller than (w*h/K)/4 into their largest neighbor.

    Fragments are visited in raster order of their first pixel; the merge
    target is the adjacent component with the most pixels at that moment
    (ties to the earlier component).  Surviving components are renumbered by
    first raster occurrence.
    """
    min_area = (w * h / target_regions) / 4.0
    comp = np.full((h, w), -1, dtype=np.int64)
    comp_pixels = []
    for lab in np.unique(labels):
        mask = labels == lab
        cc, n = ndimage.label(mask, structure=_FOUR_CONNECTED)
        for c in range(1, n + 1):
            flat_idx = np.flatnonzero((cc == c).ravel())
            comp.ravel()[flat_idx] = len(comp_pixels)
            comp_pixels.append(flat_idx)

    sizes = {i: len(p) for i, p in enumerate(comp_pixels)}
    first = {i: int(p[0]) for i, p in enumerate(comp_pixels)}
    order = sorted(sizes, key=lambda i: first[i])
    flat_comp = comp.ravel()
    for i in order:
        if sizes[i] >= min_area or sizes[i] == 0:
            continue
        pix = np.flatnonzero(flat_comp == i)
        neighbors = set()
        for delta, ok in ((1, (pix + 1) % w != 0), (-1, pix % w != 0),
                          (w, pix + w < w * h), (-w, pix - w >= 0)):
            nb = flat_comp[pix[ok] + delta]
            neighbors.update(int(t) for t in nb[nb != i])
        if not neighbors:
            continue
        target = max(neighbors, key=lambda t: (sizes[t], -first[t]))
        flat_comp[pix] = target
        sizes[target] += sizes[i]
        first[target] = min(first[target], first[i])
        sizes[i] = 0

    # Renumber survivors by first raster occurrence.
    survivors, first_pos = np.unique(flat_comp, return_index=True)
    rank = np.empty(int(survivors.max()) + 1, dtype=np.int32)
    rank[survivors[np.argsort(first_pos)]] = np.arange(len(survivors), dtype=np.int32)
    return rank[comp]


# ---------------------------------------------------------------------------
# Label map interchange
# ---------------------------------------------------------------------------

def save_labelmap_raw(labelmap: SuperpixelLabelMap, path) -> None:
    """Exact interchange: 8-byte header (width, height as u32 LE) then u32 LE labels."""
    with open(path, "wb") as f:
        f.write(struct.pack("<II", labelmap.width, labelmap.height))
        f.write(labelmap.labels.astype("<u4").tobytes())


def load_labelmap_raw(path) -> SuperpixelLabelMap:
    with open(path, "rb") as f:
        header = f.read(8)
        if len(header) < 8:
            raise ValueError(f"{path}: truncated label file header")
        w, h = struct.unpack("<II", header)
        body = f.read(4 * w * h)
    if len(body) < 4 * w * h:
        raise ValueError(f"{path}: truncated label data ({len(body)} of {4 * w * h} bytes)")
    labels = np.frombuffer(body, dtype="<u4").reshape(h, w).astype(np.int32)
    return SuperpixelLabelMap(w, h, labels, int(labels.max()) + 1)


def labelmap_to_pgm_image(labelmap: SuperpixelLabelMap) -> np.ndarray:
    """Lossy 8-bit visualization: labels hashed to gray levels (debug only)."""
    gray = lattice_hash(0, labelmap.labels.astype(np.int64)) % np.uint64(256)
    return gray.astype(np.uint8)
