"""File-level operations composing the core stages.

Each function takes paths plus a PipelineConfig and returns a plain dict of
results, so the HTTP service and the command line share one implementation.
Signatures are stored one file per clip (`<clip_id>.mbsig`) inside a
directory; corpora are directories with `manifests.txt`, `relevance.txt`
and per-clip mask manifests as produced by the generator.
"""

from __future__ import annotations

from pathlib import Path

from .barcode import compute_motion_image
from .config import PipelineConfig
from .detection import BackgroundModelParams, detect_motion, detect_motion_framediff
from .pooling import build_signature, read_signature, write_signature
from .retrieval import (build_index, evaluate, mean_average_precision, query,
                        read_relevance, render_ranking_csv, render_summary_csv,
                        render_sweep_csv, sweep)
from .segmentation import (labelmap_to_pgm_image, save_labelmap_raw, slic_segment)
from .synth import generate_corpus
from .video_io import (load_frame_sequence, load_mask_sequence,
                       write_mask_sequence, write_pgm)


def run_detect(frames_manifest, out_dir, config: PipelineConfig) -> dict:
    frames = load_frame_sequence(frames_manifest)
    if config.detector == "vibe":
        params = BackgroundModelParams(
            samples_per_pixel=config.samples_per_pixel,
            match_radius=config.match_radius,
            min_matches=config.min_matches,
            subsample_factor=config.subsample_factor,
        )
        masks = detect_motion(frames, params=params, seed=config.seed)
    else:
        masks = detect_motion_framediff(frames, threshold=config.diff_threshold)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = write_mask_sequence(masks, out_dir)
    return {
        "mask_manifest": str(manifest),
        "clip_id": masks.clip_id,
        "frame_count": masks.frame_count,
        "width": masks.width,
        "height": masks.height,
    }


def signature_from_masks(masks, config: PipelineConfig):
    """Masks -> motion image -> superpixels -> pooled signature."""
    motion = compute_motion_image(masks)
    labelmap = slic_segment(motion, target_regions=config.target_regions,
                            compactness=config.compactness,
                            iterations=config.slic_iterations)
    signature = build_signature(masks, labelmap,
                                min_motion_fraction=config.min_motion_fraction,
                                min_barcodes=config.min_barcodes)
    return signature, labelmap


def run_signature(mask_manifest, out_path, config: PipelineConfig,
                  labels_out=None, labels_pgm_out=None) -> dict:
    masks = load_mask_sequence(mask_manifest)
    signature, labelmap = signature_from_masks(masks, config)
    out_path = Path(out_path)
    if out_path.suffix == "" and (out_path.is_dir() or not out_path.exists()):
        out_path.mkdir(parents=True, exist_ok=True)
        out_path = out_path / f"{signature.clip_id}.mbsig"
    write_signature(signature, out_path)
    if labels_out is not None:
        save_labelmap_raw(labelmap, labels_out)
    if labels_pgm_out is not None:
        write_pgm(labels_pgm_out, labelmap_to_pgm_image(labelmap))
    return {
        "signature_path": str(out_path),
        "clip_id": signature.clip_id,
        "barcode_count": len(signature),
        "region_count": signature.region_count,
        "low_motion": signature.low_motion_flag,
    }


def load_signature_dir(signatures_dir) -> list:
    paths = sorted(Path(signatures_dir).glob("*.mbsig"))
    if not paths:
        raise ValueError(f"no .mbsig files found in {signatures_dir}")
    return [read_signature(p) for p in paths]


def run_query(signatures_dir, config: PipelineConfig,
              query_id=None, query_path=None) -> dict:
    if (query_id is None) == (query_path is None):
        raise ValueError("provide exactly one of query_id or query_path")
    index = build_index(load_signature_dir(signatures_dir))
    if query_id is not None:
        if query_id not in index.id_lookup:
            raise ValueError(f"query id {query_id!r} not present in index")
        signature = index.entries[index.id_lookup[query_id]]
    else:
        signature = read_signature(query_path)
    ranking = query(index, signature, method=config.method, threshold=config.threshold)
    lines = ["query_id,rank,clip_id,score"]
    for rank, (clip_id, score) in enumerate(ranking, start=1):
        lines.append(f"{signature.clip_id},{rank},{clip_id},{score:.6f}")
    return {
        "query_id": signature.clip_id,
        "ranking": [{"rank": r + 1, "clip_id": cid, "score": score}
                    for r, (cid, score) in enumerate(ranking)],
        "csv": "\n".join(lines) + "\n",
    }


def run_eval(signatures_dir, relevance_path, config: PipelineConfig) -> dict:
    index = build_index(load_signature_dir(signatures_dir))
    relevance = read_relevance(relevance_path)
    results = evaluate(index, relevance, method=config.method, threshold=config.threshold)
    return {
        "mean_ap": mean_average_precision(results),
        "per_query": [{"query_id": r.query_id, "ap": r.average_precision}
                      for r in results],
        "summary_csv": render_summary_csv(results),
        "ranking_csv": render_ranking_csv(results),
    }


def run_sweep(relevance_path, parameter, values, config: PipelineConfig,
              signatures_dir=None, corpus_dir=None) -> dict:
    relevance = read_relevance(relevance_path)
    if parameter == "region_count":
        if corpus_dir is None:
            raise ValueError("region_count sweep requires a corpus directory "
                             "with mask manifests")
        rows = _sweep_region_count(corpus_dir, relevance, values, config)
    else:
        if signatures_dir is None:
            raise ValueError(f"{parameter} sweep requires a signatures directory")
        index = build_index(load_signature_dir(signatures_dir))
        rows = sweep(index, relevance, parameter, values,
                     method=config.method, threshold=config.threshold)
    return {
        "rows": [{"value": v, "mean_ap": m} for v, m in rows],
        "csv": render_sweep_csv(rows, parameter),
    }


def read_corpus_manifests(corpus_dir) -> list:
    """Parse manifests.txt into [(clip_id, absolute manifest path)]."""
    corpus_dir = Path(corpus_dir)
    listing = corpus_dir / "manifests.txt"
    entries = []
    with open(listing, "r") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"{listing}:{lineno}: expected '<clip_id> <path>'")
            entries.append((parts[0], corpus_dir / parts[1]))
    if not entries:
        raise ValueError(f"{listing}: no clips listed")
    return entries


def _sweep_region_count(corpus_dir, relevance, values, config: PipelineConfig):
    entries = read_corpus_manifests(corpus_dir)
    rows = []
    for value in values:
        regions = int(value)
        if regions != value:
            raise ValueError(f"region_count {value} is not an integer")
        if regions < 1:
            raise ValueError(f"region_count must be >= 1, got {regions}")
        cfg = PipelineConfig(**{**config.__dict__, "target_regions": regions})
        signatures = []
        for clip_id, manifest in entries:
            masks = load_mask_sequence(manifest, clip_id=clip_id)
            signature, _ = signature_from_masks(masks, cfg)
            signatures.append(signature)
        index = build_index(signatures)
        results = evaluate(index, relevance, method=cfg.method, threshold=cfg.threshold)
        rows.append((regions, mean_average_precision(results)))
    return rows


def sign_corpus(corpus_dir, out_dir, config: PipelineConfig) -> dict:
    """Build one signature file per corpus clip; returns clip_id -> path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for clip_id, manifest in read_corpus_manifests(corpus_dir):
        masks = load_mask_sequence(manifest, clip_id=clip_id)
        signature, _ = signature_from_masks(masks, config)
        path = out_dir / f"{clip_id}.mbsig"
        write_signature(signature, path)
        paths[clip_id] = str(path)
    return {"signatures_dir": str(out_dir), "signature_paths": paths}


def run_synth(out_dir, scenes, views_per_scene, distractors, seed, *,
              width=128, height=96, duration=200, noise_p=0.0,
              occluder_frac=0.0, actor_count=3) -> dict:
    layout = generate_corpus(out_dir, scenes, views_per_scene, distractors, seed,
                             width=width, height=height, duration=duration,
                             noise_p=noise_p, occluder_frac=occluder_frac,
                             actor_count=actor_count)
    lines = ["clip_id,manifest"]
    for clip_id in sorted(layout.clip_manifests):
        rel = layout.clip_manifests[clip_id].relative_to(layout.root)
        lines.append(f"{clip_id},{rel.as_posix()}")
    return {
        "corpus_dir": str(layout.root),
        "clip_count": len(layout.clip_manifests),
        "relevance_path": str(layout.relevance_path),
        "specs_path": str(layout.specs_path),
        "manifest_list_path": str(layout.manifest_list_path),
        "csv": "\n".join(lines) + "\n",
    }
