"""Motion-barcode video retrieval.

Binary motion masks are summarized per pixel as temporal barcodes, pooled
over motion-guided superpixels into compact clip signatures, and compared
by barcode correlation to retrieve other views of the same scene.
"""

__version__ = "0.1.0"

from .barcode import (MotionBarcode, MotionImage, barcode_at,
                      compute_motion_image, filter_barcodes, sufficient_motion)
from .config import PipelineConfig, parse_config_file, resolve_config
from .detection import (BackgroundModelParams, detect_motion,
                        detect_motion_framediff)
from .pooling import (ClipSignature, build_signature, pool_all_superpixels,
                      pool_superpixel, read_signature, write_signature)
from .retrieval import (RankedResult, SignatureIndex, average_precision,
                        build_index, evaluate, mean_average_precision, query,
                        read_relevance, sweep, write_relevance)
from .segmentation import (SuperpixelLabelMap, load_labelmap_raw,
                           save_labelmap_raw, slic_segment)
from .similarity import (SimilarityScore, assignment_similarity, correlation,
                         correlation_matrix, heuristic_similarity,
                         max_weight_matching)
from .synth import (ActorTrack, SceneSpec, Segment, ViewSpec, generate_corpus,
                    read_scene_specs, render_view, write_scene_specs)
from .video_io import (FrameSequence, MotionMaskSequence, load_frame_sequence,
                       load_mask_sequence, read_pgm, write_mask_sequence,
                       write_pgm)

__all__ = [
    "__version__",
    "MotionBarcode", "MotionImage", "barcode_at", "compute_motion_image",
    "filter_barcodes", "sufficient_motion",
    "PipelineConfig", "parse_config_file", "resolve_config",
    "BackgroundModelParams", "detect_motion", "detect_motion_framediff",
    "ClipSignature", "build_signature", "pool_all_superpixels",
    "pool_superpixel", "read_signature", "write_signature",
    "RankedResult", "SignatureIndex", "average_precision", "build_index",
    "evaluate", "mean_average_precision", "query", "read_relevance", "sweep",
    "write_relevance",
    "SuperpixelLabelMap", "load_labelmap_raw", "save_labelmap_raw",
    "slic_segment",
    "SimilarityScore", "assignment_similarity", "correlation",
    "correlation_matrix", "heuristic_similarity", "max_weight_matching",
    "ActorTrack", "SceneSpec", "Segment", "ViewSpec", "generate_corpus",
    "read_scene_specs", "render_view", "write_scene_specs",
    "FrameSequence", "MotionMaskSequence", "load_frame_sequence",
    "load_mask_sequence", "read_pgm", "write_mask_sequence", "write_pgm",
]
