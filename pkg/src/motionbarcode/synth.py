"""Synthetic multi-view corpus generation with exact reproducibility.

A scene is a set of box-shaped actors following closed piecewise-linear
circuits in a shared world plane, alternating move and pause intervals.  A
view renders the scene through an invertible 2x3 affine transform: a pixel
is foreground at frame t when its center, mapped back to world coordinates,
falls inside the box of an actor that is moving at t.  Views can add
rectangular occluders (forced to background) and per-pixel bit-flip noise
keyed on (seed, x, y, t), so the same specs always reproduce bit-identical
masks.

`generate_corpus` builds a retrieval benchmark: each scene is rendered from
several viewpoints whose rotations differ by at least 45 degrees, distractor
scenes get a single view, and the ground truth pairs every view with its
siblings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import lattice_uniform
from .video_io import MotionMaskSequence, write_mask_sequence

_SEGMENT_KINDS = ("move", "pause")


@dataclass(frozen=True)
class Segment:
    kind: str
    frames: int
    vx: float = 0.0
    vy: float = 0.0

    def __post_init__(self):
        if self.kind not in _SEGMENT_KINDS:
            raise ValueError(f"segment kind must be one of {_SEGMENT_KINDS}, got {self.kind!r}")
        if self.frames < 1:
            raise ValueError(f"segment frames must be >= 1, got {self.frames}")
        if self.kind == "pause" and (self.vx != 0.0 or self.vy != 0.0):
            raise ValueError("pause segments cannot carry velocity")


@dataclass
class ActorTrack:
    start_x: float
    start_y: float
    segments: list

    def states(self, duration: int):
        """Start-of-frame positions (duration, 2) and moving flags (duration,)."""
        pos = np.empty((duration, 2), dtype=np.float64)
        moving = np.zeros(duration, dtype=bool)
        x, y = float(self.start_x), float(self.start_y)
        t = 0
        for seg in self.segments:
            for _ in range(seg.frames):
                if t >= duration:
                    return pos, moving
                pos[t] = (x, y)
                moving[t] = seg.kind == "move"
                x += seg.vx
                y += seg.vy
                t += 1
        while t < duration:
            pos[t] = (x, y)
            t += 1
        return pos, moving


@dataclass
class SceneSpec:
    scene_id: str
    width: int
    height: int
    duration: int
    extent_x: float
    extent_y: float
    tracks: list

    def __post_init__(self):
        if self.duration < 2:
            raise ValueError(f"scene duration must be >= 2, got {self.duration}")
        if self.width < 1 or self.height < 1:
            raise ValueError("scene canvas must be at least 1x1")
        if not self.tracks:
            raise ValueError("scene must contain at least one actor")
        if self.extent_x <= 0 or self.extent_y <= 0:
            raise ValueError("actor extent must be positive")


@dataclass
class ViewSpec:
    clip_id: str
    scene_id: str
    transform: np.ndarray
    occluders: list = field(default_factory=list)
    noise_p: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.transform = np.asarray(self.transform, dtype=np.float64)
        if self.transform.shape != (2, 3):
            raise ValueError(f"transform must be 2x3, got {self.transform.shape}")
        det = (self.transform[0, 0] * self.transform[1, 1]
               - self.transform[0, 1] * self.transform[1, 0])
        if abs(det) < 1e-12:
            raise ValueError("view transform is degenerate")
        if not 0.0 <= self.noise_p < 0.5:
            raise ValueError(f"noise_p must be in [0, 0.5), got {self.noise_p}")
        for rect in self.occluders:
            x0, y0, x1, y1 = rect
            if not (0 <= x0 < x1 and 0 <= y0 < y1):
                raise ValueError(f"bad occluder rect {rect}")


def render_view(scene: SceneSpec, view: ViewSpec) -> MotionMaskSequence:
    w, h = scene.width, scene.height
    a = view.transform[:, :2]
    b = view.transform[:, 2]
    inv = np.linalg.inv(a)
    px, py = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    world_x = inv[0, 0] * (px - b[0]) + inv[0, 1] * (py - b[1])
    world_y = inv[1, 0] * (px - b[0]) + inv[1, 1] * (py - b[1])

    states = [track.states(scene.duration) for track in scene.tracks]
    hx, hy = scene.extent_x / 2.0, scene.extent_y / 2.0
    masks = np.zeros((scene.duration, h, w), dtype=np.uint8)
    for t in range(scene.duration):
        frame = masks[t]
        for pos, moving in states:
            if not moving[t]:
                continue
            cx, cy = pos[t]
            inside = (np.abs(world_x - cx) <= hx) & (np.abs(world_y - cy) <= hy)
            frame |= inside.astype(np.uint8)
    for x0, y0, x1, y1 in view.occluders:
        masks[:, y0:y1, x0:x1] = 0
    if view.noise_p > 0.0:
        xx, yy = np.meshgrid(np.arange(w, dtype=np.int64), np.arange(h, dtype=np.int64))
        for t in range(scene.duration):
            flips = lattice_uniform(view.seed, xx, yy, np.int64(t)) < view.noise_p
            masks[t] ^= flips.astype(np.uint8)
    return MotionMaskSequence(view.clip_id, masks)


# ---------------------------------------------------------------------------
# Random scene / view construction
# ---------------------------------------------------------------------------

def _random_track(rng, width, height, duration):
    margin_x, margin_y = 0.15 * width, 0.15 * height
    lo = np.array([margin_x, margin_y])
    hi = np.array([width - margin_x, height - margin_y])
    start = rng.uniform(lo, hi)
    waypoints = [start]
    for _ in range(int(rng.integers(4, 7))):
        nxt = waypoints[-1]
        for _attempt in range(100):
            angle = rng.uniform(0.0, 2.0 * math.pi)
            step = rng.uniform(0.10, 0.22) * min(width, height)
            cand = waypoints[-1] + step * np.array([math.cos(angle), math.sin(angle)])
            if (lo <= cand).all() and (cand <= hi).all():
                nxt = cand
                break
        else:
            nxt = np.clip(cand, lo, hi)
        waypoints.append(nxt)
    waypoints.append(start)  # closed circuit

    speed = rng.uniform(1.2, 1.8)
    segments = []
    first_pause = int(rng.integers(0, 9))
    if first_pause:
        segments.append(Segment("pause", first_pause))
    total = first_pause
    leg = 0
    while total < duration:
        src = waypoints[leg % (len(waypoints) - 1)]
        dst = waypoints[leg % (len(waypoints) - 1) + 1]
        dist = float(np.hypot(*(dst - src)))
        frames = max(2, round(dist / speed))
        vx, vy = (dst - src) / frames
        segments.append(Segment("move", frames, float(vx), float(vy)))
        total += frames
        if rng.random() < 0.5:
            pause = int(rng.integers(3, 11))
            segments.append(Segment("pause", pause))
            total += pause
        leg += 1
    return ActorTrack(float(start[0]), float(start[1]), segments)


def _random_scene(rng, scene_id, width, height, duration, actor_count):
    extent_x = float(rng.uniform(13.0, 18.0))
    extent_y = float(rng.uniform(13.0, 18.0))
    tracks = [_random_track(rng, width, height, duration) for _ in range(actor_count)]
    return SceneSpec(scene_id, width, height, duration, extent_x, extent_y, tracks)


def _rotation_transform(width, height, angle_deg, scale, jitter_x, jitter_y):
    theta = math.radians(angle_deg)
    cx, cy = width / 2.0, height / 2.0
    rot = scale * np.array([[math.cos(theta), -math.sin(theta)],
                            [math.sin(theta), math.cos(theta)]])
    center = np.array([cx, cy])
    offset = center - rot @ center + np.array([jitter_x, jitter_y])
    return np.hstack([rot, offset[:, None]])


def _random_view(rng, clip_id, scene_id, width, height, angle_deg,
                 noise_p, occluder_frac):
    scale = float(rng.uniform(0.75, 0.9))
    jitter_x = float(rng.uniform(-3.0, 3.0))
    jitter_y = float(rng.uniform(-3.0, 3.0))
    transform = _rotation_transform(width, height, angle_deg, scale, jitter_x, jitter_y)
    occluders = []
    if occluder_frac > 0.0:
        # One rectangle flush against a canvas edge (a pillar or ledge at the
        # frame border), never more than occluder_frac of the canvas.
        area = occluder_frac * width * height
        side = int(rng.integers(0, 4))
        if side < 2:   # left / right edge strip
            rh = int(rng.integers(height // 2, height + 1))
            rw = max(1, min(width - 1, int(area / rh)))
            y0 = int(rng.integers(0, height - rh + 1))
            x0 = 0 if side == 0 else width - rw
        else:          # top / bottom edge strip
            rw = int(rng.integers(width // 2, width + 1))
            rh = max(1, min(height - 1, int(area / rw)))
            x0 = int(rng.integers(0, width - rw + 1))
            y0 = 0 if side == 2 else height - rh
        occluders.append((x0, y0, x0 + rw, y0 + rh))
    seed = int(rng.integers(0, 2 ** 62))
    return ViewSpec(clip_id, scene_id, transform, occluders, noise_p, seed)


def _view_angles(rng, count):
    """Evenly spread base angles with jitter small enough to keep any two
    rotations at least 45 degrees apart (mod 360)."""
    if count < 2:
        raise ValueError(f"views_per_scene must be >= 2, got {count}")
    step = 360.0 / count
    if step < 45.0:
        raise ValueError(
            f"views_per_scene {count} cannot keep rotations 45 degrees apart")
    jitter_max = max(0.0, (step - 45.0) / 2.0)
    base = float(rng.uniform(0.0, 360.0))
    return [(base + v * step + float(rng.uniform(-jitter_max, jitter_max))) % 360.0
            for v in range(count)]


@dataclass
class CorpusLayout:
    root: Path
    clip_manifests: dict
    relevance_path: Path
    specs_path: Path
    manifest_list_path: Path


def generate_corpus(out_dir, scenes: int, views_per_scene: int = 2,
                    distractors: int = 0, seed: int = 0, *,
                    width: int = 128, height: int = 96, duration: int = 200,
                    noise_p: float = 0.0, occluder_frac: float = 0.0,
                    actor_count: int = 3) -> CorpusLayout:
    """Render a multi-view benchmark corpus under out_dir.

    Layout: clips/<clip_id>/<clip_id>.txt mask manifests, relevance.txt
    ground truth, specs.txt (full scene/view parameters, exact round-trip),
    manifests.txt listing `<clip_id> <relative manifest path>` per line.
    """
    if scenes < 1:
        raise ValueError(f"scenes must be >= 1, got {scenes}")
    if distractors < 0:
        raise ValueError(f"distractors must be >= 0, got {distractors}")
    if not 0.0 <= occluder_frac < 1.0:
        raise ValueError(f"occluder_frac must be in [0, 1), got {occluder_frac}")
    rng = np.random.default_rng(seed)
    root = Path(out_dir)
    (root / "clips").mkdir(parents=True, exist_ok=True)

    scene_specs = []
    view_specs = []
    for s in range(scenes):
        scene_id = f"scene{s:03d}"
        scene_specs.append(_random_scene(rng, scene_id, width, height, duration, actor_count))
        for v, angle in enumerate(_view_angles(rng, views_per_scene)):
            view_specs.append(_random_view(rng, f"{scene_id}_v{v}", scene_id,
                                           width, height, angle, noise_p, occluder_frac))
    for d in range(distractors):
        scene_id = f"distractor{d:03d}"
        scene_specs.append(_random_scene(rng, scene_id, width, height, duration, actor_count))
        angle = float(rng.uniform(0.0, 360.0))
        view_specs.append(_random_view(rng, scene_id, scene_id, width, height,
                                       angle, noise_p, occluder_frac))

    scene_by_id = {spec.scene_id: spec for spec in scene_specs}
    manifests = {}
    for view in view_specs:
        masks = render_view(scene_by_id[view.scene_id], view)
        clip_dir = root / "clips" / view.clip_id
        clip_dir.mkdir(parents=True, exist_ok=True)
        manifests[view.clip_id] = write_mask_sequence(masks, clip_dir)

    relevance = []
    for s in range(scenes):
        ids = [f"scene{s:03d}_v{v}" for v in range(views_per_scene)]
        for clip_id in ids:
            relevance.append((clip_id, {other for other in ids if other != clip_id}))
    relevance_path = root / "relevance.txt"
    from .retrieval import write_relevance
    write_relevance(relevance, relevance_path)

    specs_path = root / "specs.txt"
    write_scene_specs(specs_path, scene_specs, view_specs)

    manifest_list_path = root / "manifests.txt"
    with open(manifest_list_path, "w", newline="\n") as f:
        for clip_id in sorted(manifests):
            rel = manifests[clip_id].relative_to(root)
            f.write(f"{clip_id} {rel.as_posix()}\n")

    return CorpusLayout(root, manifests, relevance_path, specs_path, manifest_list_path)


# ---------------------------------------------------------------------------
# Spec files (exact round-trip via repr floats)
# ---------------------------------------------------------------------------

def write_scene_specs(path, scenes, views) -> None:
    lines = []
    for scene in scenes:
        lines.append(f"SCENE {scene.scene_id} {scene.width} {scene.height} "
                     f"{scene.duration} {scene.extent_x!r} {scene.extent_y!r}")
        for track in scene.tracks:
            lines.append(f"ACTOR {track.start_x!r} {track.start_y!r}")
            for seg in track.segments:
                lines.append(f"SEG {seg.kind} {seg.frames} {seg.vx!r} {seg.vy!r}")
    for view in views:
        t = view.transform
        vals = " ".join(repr(float(x)) for x in t.ravel())
        lines.append(f"VIEW {view.clip_id} {view.scene_id} {vals} "
                     f"{view.noise_p!r} {view.seed}")
        for x0, y0, x1, y1 in view.occluders:
            lines.append(f"OCC {x0} {y0} {x1} {y1}")
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_scene_specs(path):
    """Parse a specs file back into ([SceneSpec], [ViewSpec])."""
    scenes = []
    views = []
    raw_scenes = []   # (fields, tracks) accumulators
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            tag = parts[0]
            try:
                if tag == "SCENE":
                    sid, w, h, dur, ex, ey = parts[1:]
                    raw_scenes.append(((sid, int(w), int(h), int(dur),
                                        float(ex), float(ey)), []))
                elif tag == "ACTOR":
                    raw_scenes[-1][1].append(ActorTrack(float(parts[1]), float(parts[2]), []))
                elif tag == "SEG":
                    kind, frames, vx, vy = parts[1], int(parts[2]), float(parts[3]), float(parts[4])
                    raw_scenes[-1][1][-1].segments.append(Segment(kind, frames, vx, vy))
                elif tag == "VIEW":
                    clip_id, scene_id = parts[1], parts[2]
                    nums = [float(x) for x in parts[3:9]]
                    transform = np.array(nums, dtype=np.float64).reshape(2, 3)
                    views.append(ViewSpec(clip_id, scene_id, transform, [],
                                          float(parts[9]), int(parts[10])))
                elif tag == "OCC":
                    views[-1].occluders.append(tuple(int(x) for x in parts[1:5]))
                else:
                    raise ValueError(f"unknown record {tag!r}")
            except (IndexError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    for (sid, w, h, dur, ex, ey), tracks in raw_scenes:
        scenes.append(SceneSpec(sid, w, h, dur, ex, ey, tracks))
    return scenes, views
