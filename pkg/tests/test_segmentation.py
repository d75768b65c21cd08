import numpy as np
import pytest
from scipy import ndimage

from motionbarcode.barcode import MotionImage
from motionbarcode.segmentation import (SuperpixelLabelMap, labelmap_to_pgm_image,
                                        load_labelmap_raw, save_labelmap_raw,
                                        slic_segment)

_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _image(counts, frame_count=None):
    counts = np.asarray(counts, dtype=np.int64)
    h, w = counts.shape
    fc = frame_count if frame_count is not None else max(2, int(counts.max()) + 1)
    return MotionImage(w, h, counts, fc)


def test_constant_image_gives_equal_quadrants():
    mi = _image(np.full((16, 16), 5))
    lm = slic_segment(mi, 4)
    assert lm.region_count == 4
    sizes = np.bincount(lm.labels.ravel())
    assert list(sizes) == [64, 64, 64, 64]
    # labels numbered in raster order of first occurrence
    assert lm.labels[0, 0] == 0 and lm.labels[0, 15] == 1
    assert lm.labels[15, 0] == 2 and lm.labels[15, 15] == 3


def test_two_band_image_splits_on_the_boundary():
    counts = np.zeros((8, 16), dtype=np.int64)
    counts[:, 8:] = 50
    lm = slic_segment(_image(counts), 2)
    left = set(np.unique(lm.labels[:, :8]))
    right = set(np.unique(lm.labels[:, 8:]))
    assert left.isdisjoint(right)
    assert left | right == set(range(lm.region_count))


def test_every_region_is_four_connected():
    rng = np.random.default_rng(3)
    counts = (rng.random((40, 60)) * 30).astype(np.int64)
    counts[10:25, 15:40] += 50
    lm = slic_segment(_image(counts), 80)
    for lab in range(lm.region_count):
        _, pieces = ndimage.label(lm.labels == lab, structure=_FOUR)
        assert pieces == 1, f"label {lab} split into {pieces} components"


def test_labels_cover_range_and_region_count_close_to_target():
    rng = np.random.default_rng(4)
    counts = (rng.random((48, 64)) * 100).astype(np.int64)
    lm = slic_segment(_image(counts), 100)
    present = np.unique(lm.labels)
    assert present[0] == 0 and present[-1] == lm.region_count - 1
    assert len(present) == lm.region_count
    assert lm.region_count >= 50


def test_segmentation_is_deterministic():
    rng = np.random.default_rng(5)
    counts = (rng.random((32, 32)) * 80).astype(np.int64)
    a = slic_segment(_image(counts), 40)
    b = slic_segment(_image(counts), 40)
    assert np.array_equal(a.labels, b.labels)


def test_target_region_validation():
    mi = _image(np.zeros((4, 4), dtype=np.int64), frame_count=2)
    with pytest.raises(ValueError):
        slic_segment(mi, 0)
    with pytest.raises(ValueError):
        slic_segment(mi, 17)
    with pytest.raises(ValueError):
        slic_segment(mi, 4, iterations=0)


def test_single_region_and_one_region_per_pixel():
    counts = np.arange(12, dtype=np.int64).reshape(3, 4)
    one = slic_segment(_image(counts), 1)
    assert one.region_count == 1
    assert one.labels.max() == 0


def test_labelmap_raw_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    counts = (rng.random((20, 30)) * 60).astype(np.int64)
    lm = slic_segment(_image(counts), 25)
    path = tmp_path / "labels.bin"
    save_labelmap_raw(lm, path)
    raw = path.read_bytes()
    assert len(raw) == 8 + 4 * 20 * 30
    assert int.from_bytes(raw[0:4], "little") == 30
    assert int.from_bytes(raw[4:8], "little") == 20
    back = load_labelmap_raw(path)
    assert back.width == lm.width and back.height == lm.height
    assert back.region_count == lm.region_count
    assert np.array_equal(back.labels, lm.labels)


def test_labelmap_raw_truncation_errors(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"\x01\x00")
    with pytest.raises(ValueError, match="header"):
        load_labelmap_raw(path)
    path.write_bytes((3).to_bytes(4, "little") + (3).to_bytes(4, "little") + b"\x00" * 8)
    with pytest.raises(ValueError, match="truncated"):
        load_labelmap_raw(path)


def test_labelmap_pgm_is_lossy_debug_view():
    labels = np.array([[0, 0, 1, 1], [0, 0, 1, 1]], dtype=np.int32)
    lm = SuperpixelLabelMap(4, 2, labels, 2)
    img = labelmap_to_pgm_image(lm)
    assert img.dtype == np.uint8
    assert img.shape == (2, 4)
    assert len(np.unique(img[labels == 0])) == 1
    assert len(np.unique(img[labels == 1])) == 1


def test_labelmap_validation():
    with pytest.raises(ValueError):
        SuperpixelLabelMap(3, 2, np.zeros((2, 3), dtype=np.int32), 2)  # label 1 unused
    with pytest.raises(ValueError):
        SuperpixelLabelMap(2, 2, np.zeros((3, 2), dtype=np.int32), 1)  # shape mismatch
