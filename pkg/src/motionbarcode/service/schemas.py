"""Request/response models for the HTTP service.

Requests reference data by filesystem path (the service is a thin stateless
wrapper over the pipeline functions) and carry optional overrides for the
pipeline configuration; omitted fields fall back to config-file values and
then to defaults.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class ConfigOverrides(BaseModel):
    config_file: Optional[str] = None
    detector: Optional[str] = None
    diff_threshold: Optional[int] = None
    samples_per_pixel: Optional[int] = None
    match_radius: Optional[int] = None
    min_matches: Optional[int] = None
    subsample_factor: Optional[int] = None
    target_regions: Optional[int] = None
    compactness: Optional[float] = None
    slic_iterations: Optional[int] = None
    min_motion_fraction: Optional[float] = None
    min_barcodes: Optional[int] = None
    method: Optional[str] = None
    threshold: Optional[float] = None
    seed: Optional[int] = None


class DetectRequest(ConfigOverrides):
    frames_manifest: str
    out_dir: str


class DetectResponse(BaseModel):
    mask_manifest: str
    clip_id: str
    frame_count: int
    width: int
    height: int


class SignatureRequest(ConfigOverrides):
    mask_manifest: str
    out_path: str
    labels_out: Optional[str] = None
    labels_pgm_out: Optional[str] = None


class SignatureResponse(BaseModel):
    signature_path: str
    clip_id: str
    barcode_count: int
    region_count: int
    low_motion: bool


class QueryRequest(ConfigOverrides):
    signatures_dir: str
    query_id: Optional[str] = None
    query_path: Optional[str] = None


class RankEntry(BaseModel):
    rank: int
    clip_id: str
    score: float


class QueryResponse(BaseModel):
    query_id: str
    ranking: List[RankEntry]
    csv: str


class EvalRequest(ConfigOverrides):
    signatures_dir: str
    relevance_path: str


class QueryAP(BaseModel):
    query_id: str
    ap: float


class EvalResponse(BaseModel):
    mean_ap: float
    per_query: List[QueryAP]
    summary_csv: str
    ranking_csv: str


class SweepRequest(ConfigOverrides):
    relevance_path: str
    parameter: str
    values: List[float] = Field(min_length=1)
    signatures_dir: Optional[str] = None
    corpus_dir: Optional[str] = None


class SweepRow(BaseModel):
    value: float
    mean_ap: float


class SweepResponse(BaseModel):
    rows: List[SweepRow]
    csv: str


class SynthRequest(BaseModel):
    out_dir: str
    scenes: int
    views_per_scene: int = 2
    distractors: int = 0
    seed: int = 0
    width: int = 128
    height: int = 96
    duration: int = 200
    noise_p: float = 0.0
    occluder_frac: float = 0.0
    actor_count: int = 3


class SynthResponse(BaseModel):
    corpus_dir: str
    clip_count: int
    relevance_path: str
    specs_path: str
    manifest_list_path: str
    csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
