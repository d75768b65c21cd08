import numpy as np
import pytest

from motionbarcode.video_io import (FrameSequence, MotionMaskSequence,
                                    load_frame_sequence, load_mask_sequence,
                                    read_pgm, write_mask_sequence, write_pgm)


def _write_frames(tmp_path, arrays, name="clip"):
    manifest = tmp_path / f"{name}.txt"
    lines = []
    for i, arr in enumerate(arrays):
        p = tmp_path / f"{name}_{i:03d}.pgm"
        write_pgm(p, arr)
        lines.append(p.name)
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(13, 17), dtype=np.uint8)
    path = tmp_path / "img.pgm"
    write_pgm(path, img)
    back = read_pgm(path)
    assert back.dtype == np.uint8
    assert np.array_equal(back, img)


def test_pgm_reads_comments_and_whitespace(tmp_path):
    body = bytes([7, 8, 9, 10, 11, 12])
    raw = b"P5\n# a comment\n3 2\n# another\n255\n" + body
    path = tmp_path / "c.pgm"
    path.write_bytes(raw)
    img = read_pgm(path)
    assert img.shape == (2, 3)
    assert img[0, 0] == 7 and img[1, 2] == 12


def test_pgm_rejects_bad_magic_and_truncation(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P6\n2 2\n255\n0000")
    with pytest.raises(ValueError):
        read_pgm(p)
    p.write_bytes(b"P5\n2 2\n255\n\x00\x00")
    with pytest.raises(ValueError):
        read_pgm(p)


def test_load_frame_sequence(tmp_path):
    rng = np.random.default_rng(1)
    frames = [rng.integers(0, 256, size=(6, 8), dtype=np.uint8) for _ in range(4)]
    manifest = _write_frames(tmp_path, frames)
    seq = load_frame_sequence(manifest)
    assert seq.clip_id == "clip"
    assert seq.frame_count == 4
    assert seq.width == 8 and seq.height == 6
    assert np.array_equal(seq.frames[2], frames[2])


def test_frame_sequence_requires_two_frames(tmp_path):
    manifest = _write_frames(tmp_path, [np.zeros((4, 4), dtype=np.uint8)])
    with pytest.raises(ValueError):
        load_frame_sequence(manifest)


def test_missing_manifest_raises_file_not_found(tmp_path):
    with pytest.raises(FileNotFoundError, match="manifest not found"):
        load_frame_sequence(tmp_path / "absent.txt")


def test_manifest_dimension_mismatch_mentions_line(tmp_path):
    frames = [np.zeros((4, 4), dtype=np.uint8), np.zeros((4, 5), dtype=np.uint8)]
    manifest = _write_frames(tmp_path, frames)
    with pytest.raises(ValueError, match="4x4"):
        load_frame_sequence(manifest)


def test_mask_round_trip_exact(tmp_path):
    rng = np.random.default_rng(2)
    masks = (rng.random((5, 9, 7)) < 0.3).astype(np.uint8)
    seq = MotionMaskSequence("clipA", masks)
    manifest = write_mask_sequence(seq, tmp_path)
    back = load_mask_sequence(manifest)
    assert back == seq
    assert back.clip_id == "clipA"


def test_mask_values_must_be_binary_on_disk(tmp_path):
    img = np.full((3, 3), 7, dtype=np.uint8)
    manifest = _write_frames(tmp_path, [img, img], name="m")
    with pytest.raises(ValueError, match="mask"):
        load_mask_sequence(manifest)


def test_mask_sequence_rejects_nonbinary_array():
    with pytest.raises(ValueError):
        MotionMaskSequence("x", np.full((2, 3, 3), 2, dtype=np.uint8))


def test_frame_sequence_equality():
    a = FrameSequence("c", np.zeros((2, 3, 3), dtype=np.uint8))
    b = FrameSequence("c", np.zeros((2, 3, 3), dtype=np.uint8))
    c = FrameSequence("c", np.ones((2, 3, 3), dtype=np.uint8))
    assert a == b
    assert a != c
