"""HTTP service exposing the pipeline over JSON.

Stateless by design: every request names its inputs and outputs by path, so
the service holds no session data and identical requests give identical
results.  Domain errors (bad parameters, malformed files) map to HTTP 400
with the underlying message; missing files map to 404.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import resolve_config
from ..pipeline import (run_detect, run_eval, run_query, run_signature,
                        run_sweep, run_synth)
from .schemas import (DetectRequest, DetectResponse, EvalRequest, EvalResponse,
                      HealthResponse, QueryRequest, QueryResponse,
                      SignatureRequest, SignatureResponse, SweepRequest,
                      SweepResponse, SynthRequest, SynthResponse)

_CONFIG_KEYS = (
    "detector", "diff_threshold", "samples_per_pixel", "match_radius",
    "min_matches", "subsample_factor", "target_regions", "compactness",
    "slic_iterations", "min_motion_fraction", "min_barcodes", "method",
    "threshold", "seed",
)


def _request_config(req):
    overrides = {key: getattr(req, key) for key in _CONFIG_KEYS}
    return resolve_config(file_path=req.config_file, flag_overrides=overrides)


def create_app() -> FastAPI:
    app = FastAPI(title="motionbarcode", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    async def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/detect", response_model=DetectResponse)
    async def detect(req: DetectRequest):
        result = run_detect(req.frames_manifest, req.out_dir, _request_config(req))
        return DetectResponse(**result)

    @app.post("/signature", response_model=SignatureResponse)
    async def signature(req: SignatureRequest):
        result = run_signature(req.mask_manifest, req.out_path, _request_config(req),
                               labels_out=req.labels_out,
                               labels_pgm_out=req.labels_pgm_out)
        return SignatureResponse(**result)

    @app.post("/query", response_model=QueryResponse)
    async def query(req: QueryRequest):
        result = run_query(req.signatures_dir, _request_config(req),
                           query_id=req.query_id, query_path=req.query_path)
        return QueryResponse(**result)

    @app.post("/eval", response_model=EvalResponse)
    async def evaluate(req: EvalRequest):
        result = run_eval(req.signatures_dir, req.relevance_path, _request_config(req))
        return EvalResponse(**result)

    @app.post("/sweep", response_model=SweepResponse)
    async def sweep(req: SweepRequest):
        result = run_sweep(req.relevance_path, req.parameter, req.values,
                           _request_config(req),
                           signatures_dir=req.signatures_dir,
                           corpus_dir=req.corpus_dir)
        return SweepResponse(**result)

    @app.post("/synth", response_model=SynthResponse)
    async def synth(req: SynthRequest):
        result = run_synth(req.out_dir, req.scenes, req.views_per_scene,
                           req.distractors, req.seed,
                           width=req.width, height=req.height,
                           duration=req.duration, noise_p=req.noise_p,
                           occluder_frac=req.occluder_frac,
                           actor_count=req.actor_count)
        return SynthResponse(**result)

    return app
