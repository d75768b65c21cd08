"""Command-line client for the motion-barcode pipeline.

Every subcommand builds a JSON request and sends it to the HTTP service:
in-process by default, or to a running server via --server URL.  Results
print as CSV on stdout (floats fixed to 6 decimals); domain errors print
on stderr and exit 1, usage errors exit 2.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__

_CONFIG_FLAG_KEYS = (
    "detector", "diff_threshold", "samples_per_pixel", "match_radius",
    "min_matches", "subsample_factor", "target_regions", "compactness",
    "slic_iterations", "min_motion_fraction", "min_barcodes", "method",
    "threshold", "seed",
)


def _add_common_flags(parser):
    parser.add_argument("--server", metavar="URL", default=None,
                        help="send requests to a running server instead of in-process")
    parser.add_argument("--config", metavar="FILE", default=None,
                        help="configuration file with 'key = value' lines")


def _add_config_flags(parser, keys):
    flags = {
        "detector": (str, "--detector", "background model: vibe or framediff"),
        "diff_threshold": (int, "--diff-threshold", "frame-difference threshold"),
        "samples_per_pixel": (int, "--samples-per-pixel", "background samples per pixel"),
        "match_radius": (int, "--match-radius", "background match radius"),
        "min_matches": (int, "--min-matches", "matches needed to stay background"),
        "subsample_factor": (int, "--subsample", "background update subsampling"),
        "target_regions": (int, "--regions", "target superpixel count"),
        "compactness": (float, "--compactness", "superpixel compactness weight"),
        "slic_iterations": (int, "--iterations", "superpixel refinement iterations"),
        "min_motion_fraction": (float, "--min-motion", "minimum fraction of active bits"),
        "min_barcodes": (int, "--min-barcodes", "barcodes needed to avoid the low-motion flag"),
        "method": (str, "--method", "similarity method: heuristic or assignment"),
        "threshold": (float, "--threshold", "correlation threshold for the heuristic score"),
        "seed": (int, "--seed", "deterministic seed"),
    }
    for key in keys:
        typ, flag, help_text = flags[key]
        parser.add_argument(flag, dest=key, type=typ, default=None, help=help_text)


def _parse_values(spec: str):
    """Parse a sweep value list: 'a:b:step' (inclusive) or 'v1,v2,...' or 'v'."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"range step must be positive, got {step}")
        count = int(round((stop - start) / step))
        values = [start + i * step for i in range(count + 1)]
        return [v for v in values if v <= stop + step * 1e-9]
    return [float(p) for p in spec.split(",") if p != ""]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mbarcode",
        description="Motion-barcode video event retrieval")
    parser.add_argument("--version", action="version", version=f"mbarcode {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="binary motion masks from grayscale frames")
    p.add_argument("--frames", required=True, metavar="MANIFEST",
                   help="text file listing frame PGMs, one per line")
    p.add_argument("--out-dir", required=True, help="directory for mask PGMs + manifest")
    _add_common_flags(p)
    _add_config_flags(p, ("detector", "diff_threshold", "samples_per_pixel",
                          "match_radius", "min_matches", "subsample_factor", "seed"))

    p = sub.add_parser("signature", help="clip signature from motion masks")
    p.add_argument("--masks", required=True, metavar="MANIFEST",
                   help="text file listing mask PGMs, one per line")
    p.add_argument("--out", required=True, help="signature file (or directory) to write")
    p.add_argument("--labels-out", default=None, help="write the raw 32-bit label map here")
    p.add_argument("--labels-pgm-out", default=None, help="write a debug label PGM here")
    _add_common_flags(p)
    _add_config_flags(p, ("target_regions", "compactness", "slic_iterations",
                          "min_motion_fraction", "min_barcodes"))

    p = sub.add_parser("query", help="rank indexed clips against one query")
    p.add_argument("--signatures", required=True, metavar="DIR",
                   help="directory of .mbsig files")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--query-id", help="clip id already present in the index")
    group.add_argument("--query-path", help="signature file for an external query")
    _add_common_flags(p)
    _add_config_flags(p, ("method", "threshold"))

    p = sub.add_parser("eval", help="average precision over a relevance file")
    p.add_argument("--signatures", required=True, metavar="DIR")
    p.add_argument("--relevance", required=True, metavar="FILE")
    p.add_argument("--rankings-out", default=None,
                   help="also write the full per-query ranking CSV here")
    _add_common_flags(p)
    _add_config_flags(p, ("method", "threshold"))

    p = sub.add_parser("sweep", help="mean AP while varying one parameter")
    p.add_argument("--relevance", required=True, metavar="FILE")
    p.add_argument("--parameter", required=True,
                   choices=("threshold", "temporal_length", "region_count"))
    p.add_argument("--values", required=True,
                   help="comma list '0.1,0.2' or inclusive range '0.0:1.0:0.1'")
    p.add_argument("--signatures", default=None, metavar="DIR",
                   help="signature directory (threshold / temporal_length sweeps)")
    p.add_argument("--corpus", default=None, metavar="DIR",
                   help="mask corpus directory (region_count sweeps)")
    _add_common_flags(p)
    _add_config_flags(p, ("method", "threshold"))

    p = sub.add_parser("synth", help="generate a synthetic multi-view corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--scenes", required=True, type=int)
    p.add_argument("--views", type=int, default=2, help="views per scene (>= 2)")
    p.add_argument("--distractors", type=int, default=0)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--duration", type=int, default=200)
    p.add_argument("--noise-p", type=float, default=0.0)
    p.add_argument("--occluder-frac", type=float, default=0.0)
    p.add_argument("--actors", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    _add_common_flags(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _open_client(args):
    if getattr(args, "server", None):
        import httpx
        return httpx.Client(base_url=args.server, timeout=3600.0)
    import warnings
    with warnings.catch_warnings():
        # the bundled test client works fine; its import-time deprecation
        # notice would otherwise clutter stderr of every one-shot command
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app
    return TestClient(create_app())


def _config_payload(args, keys=_CONFIG_FLAG_KEYS):
    payload = {}
    if getattr(args, "config", None):
        payload["config_file"] = args.config
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            payload[key] = value
    return payload


def _post(client, path, payload):
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise RuntimeError(f"{path} failed ({response.status_code}): {detail}")
    return response.json()


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import create_app
        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    try:
        with _open_client(args) as client:
            if args.command == "detect":
                payload = {"frames_manifest": args.frames, "out_dir": args.out_dir,
                           **_config_payload(args)}
                result = _post(client, "/detect", payload)
                print(result["mask_manifest"])
            elif args.command == "signature":
                payload = {"mask_manifest": args.masks, "out_path": args.out,
                           "labels_out": args.labels_out,
                           "labels_pgm_out": args.labels_pgm_out,
                           **_config_payload(args)}
                result = _post(client, "/signature", payload)
                print(result["signature_path"])
            elif args.command == "query":
                payload = {"signatures_dir": args.signatures,
                           "query_id": args.query_id,
                           "query_path": args.query_path,
                           **_config_payload(args)}
                result = _post(client, "/query", payload)
                sys.stdout.write(result["csv"])
            elif args.command == "eval":
                payload = {"signatures_dir": args.signatures,
                           "relevance_path": args.relevance,
                           **_config_payload(args)}
                result = _post(client, "/eval", payload)
                if args.rankings_out:
                    with open(args.rankings_out, "w", newline="\n") as f:
                        f.write(result["ranking_csv"])
                sys.stdout.write(result["summary_csv"])
            elif args.command == "sweep":
                try:
                    values = _parse_values(args.values)
                except ValueError as exc:
                    parser.error(str(exc))
                payload = {"relevance_path": args.relevance,
                           "parameter": args.parameter,
                           "values": values,
                           "signatures_dir": args.signatures,
                           "corpus_dir": args.corpus,
                           **_config_payload(args)}
                result = _post(client, "/sweep", payload)
                sys.stdout.write(result["csv"])
            elif args.command == "synth":
                payload = {"out_dir": args.out_dir, "scenes": args.scenes,
                           "views_per_scene": args.views,
                           "distractors": args.distractors, "seed": args.seed,
                           "width": args.width, "height": args.height,
                           "duration": args.duration, "noise_p": args.noise_p,
                           "occluder_frac": args.occluder_frac,
                           "actor_count": args.actors}
                result = _post(client, "/synth", payload)
                sys.stdout.write(result["csv"])
    except (RuntimeError, OSError, ValueError) as exc:
        print(f"mbarcode: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
