"""Pipeline configuration: defaults, config-file parsing, flag overrides.

Precedence is defaults < config file < explicit flags.  Config files hold
`key = value` lines with `#` comments; keys match the PipelineConfig field
names and values are cast to the field's type.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

_DETECTORS = ("vibe", "framediff")
_METHODS = ("heuristic", "assignment")


@dataclass
class PipelineConfig:
    detector: str = "vibe"
    diff_threshold: int = 15
    samples_per_pixel: int = 20
    match_radius: int = 20
    min_matches: int = 2
    subsample_factor: int = 16
    target_regions: int = 1000
    compactness: float = 10.0
    slic_iterations: int = 10
    min_motion_fraction: float = 0.1
    min_barcodes: int = 100
    method: str = "heuristic"
    threshold: float = 0.4
    seed: int = 0

    def __post_init__(self):
        if self.detector not in _DETECTORS:
            raise ValueError(f"detector must be one of {_DETECTORS}, got {self.detector!r}")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}
_CASTS = {"int": int, "float": float, "str": str}


def parse_config_file(path) -> dict:
    """Read `key = value` lines into a dict of typed overrides."""
    overrides = {}
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}")
            key, _, value = (part.strip() for part in stripped.partition("="))
            if key not in _FIELD_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown configuration key {key!r}")
            try:
                overrides[key] = _CASTS[_FIELD_TYPES[key]](value)
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: invalid {_FIELD_TYPES[key]} value {value!r} "
                    f"for key {key!r}") from None
    return overrides


def resolve_config(file_path=None, flag_overrides=None) -> PipelineConfig:
    merged = {}
    if file_path is not None:
        merged.update(parse_config_file(file_path))
    for key, value in (flag_overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown configuration key {key!r}")
        merged[key] = _CASTS[_FIELD_TYPES[key]](value)
    return PipelineConfig(**merged)
