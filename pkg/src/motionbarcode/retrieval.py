"""Clip retrieval: score a query signature against an index and evaluate.

Rankings order by descending score with clip id as the tie-breaker, queries
never retrieve themselves, and evaluation reports average precision per
query plus the mean over all queries.  Sweeps re-run the evaluation while
varying the decision threshold or the barcode prefix length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barcode import MotionBarcode
from .pooling import ClipSignature
from .similarity import assignment_similarity, heuristic_similarity

_METHODS = ("heuristic", "assignment")


@dataclass
class SignatureIndex:
    entries: list
    id_lookup: dict

    @property
    def frame_count(self):
        return self.entries[0].frame_count if self.entries else None


def build_index(signatures) -> SignatureIndex:
    entries = list(signatures)
    lookup = {}
    for pos, sig in enumerate(entries):
        if sig.clip_id in lookup:
            raise ValueError(f"duplicate clip_id {sig.clip_id!r} in index")
        if sig.frame_count != entries[0].frame_count:
            raise ValueError(
                f"clip {sig.clip_id!r} has frame count {sig.frame_count}, "
                f"index uses {entries[0].frame_count}")
        lookup[sig.clip_id] = pos
    return SignatureIndex(entries, lookup)


def _check_method(method):
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {_METHODS}")


def query(index: SignatureIndex, signature: ClipSignature,
          method: str = "heuristic", threshold: float = 0.4) -> list:
    """Rank every index entry (excluding the query's own clip_id) against
    the query; returns [(clip_id, score)] best first.  A pairing where
    either side retained no barcodes scores 0.0.
    """
    _check_method(method)
    if index.entries and signature.frame_count != index.frame_count:
        raise ValueError(
            f"query frame count {signature.frame_count} != index {index.frame_count}")
    scored = []
    for entry in index.entries:
        if entry.clip_id == signature.clip_id:
            continue
        if len(signature) == 0 or len(entry) == 0:
            value = 0.0
        elif method == "heuristic":
            value = heuristic_similarity(signature, entry, threshold).value
        else:
            value = assignment_similarity(signature, entry).value
        scored.append((entry.clip_id, value))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored


def average_precision(ranked_ids, relevant_ids) -> float:
    relevant = set(relevant_ids)
    if not relevant:
        raise ValueError("relevant set must not be empty")
    hits = 0
    total = 0.0
    for pos, clip_id in enumerate(ranked_ids, start=1):
        if clip_id in relevant:
            hits += 1
            total += hits / pos
    return total / len(relevant)


@dataclass
class RankedResult:
    query_id: str
    ranking: list
    relevant_ids: set
    average_precision: float


def evaluate(index: SignatureIndex, relevance,
             method: str = "heuristic", threshold: float = 0.4) -> list:
    """Run every (query_id, relevant set) pair; query ids must be indexed."""
    results = []
    for query_id, relevant in relevance:
        if query_id not in index.id_lookup:
            raise ValueError(f"query id {query_id!r} not present in index")
        sig = index.entries[index.id_lookup[query_id]]
        ranking = query(index, sig, method=method, threshold=threshold)
        ap = average_precision([cid for cid, _ in ranking], relevant)
        results.append(RankedResult(query_id, ranking, set(relevant), ap))
    return results


def mean_average_precision(results) -> float:
    if not results:
        raise ValueError("no query results to average")
    return float(np.mean([r.average_precision for r in results]))


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------

def _truncated_index(index: SignatureIndex, length: int) -> SignatureIndex:
    entries = []
    for sig in index.entries:
        barcodes = [MotionBarcode(b.bits[:length], source_id=b.source_id)
                    for b in sig.barcodes]
        entries.append(ClipSignature(sig.clip_id, length, barcodes,
                                     sig.region_count, sig.low_motion_flag))
    return build_index(entries)


def sweep(index: SignatureIndex, relevance, parameter: str, values,
          method: str = "heuristic", threshold: float = 0.4) -> list:
    """Mean average precision as one parameter varies; returns [(value, mAP)].

    Supported parameters: `threshold` (values in [-1, 1]) and
    `temporal_length` (prefix lengths in [1, N]).  Region-count sweeps need
    the mask corpus and live in the pipeline layer.
    """
    _check_method(method)
    values = list(values)
    if not values:
        raise ValueError("sweep requires at least one value")
    rows = []
    if parameter == "threshold":
        for value in values:
            value = float(value)
            if not -1.0 <= value <= 1.0:
                raise ValueError(f"threshold {value} outside [-1, 1]")
            results = evaluate(index, relevance, method=method, threshold=value)
            rows.append((value, mean_average_precision(results)))
    elif parameter == "temporal_length":
        n = index.frame_count
        if n is None:
            raise ValueError("cannot sweep temporal_length on an empty index")
        for value in values:
            length = int(value)
            if length != value:
                raise ValueError(f"temporal_length {value} is not an integer")
            if length < 1 or length > n:
                raise ValueError(f"temporal_length {length} outside [1, {n}]")
            results = evaluate(_truncated_index(index, length), relevance,
                               method=method, threshold=threshold)
            rows.append((length, mean_average_precision(results)))
    elif parameter == "region_count":
        raise ValueError(
            "region_count sweep requires the mask corpus; "
            "use pipeline.run_sweep with a corpus directory")
    else:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    return rows


# ---------------------------------------------------------------------------
# Relevance files and CSV rendering
# ---------------------------------------------------------------------------

def read_relevance(path) -> list:
    """Parse `query_id relevant_id [relevant_id ...]` lines, preserving order."""
    pairs = []
    seen = set()
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected query id and at least one relevant id")
            query_id, relevant = parts[0], parts[1:]
            if query_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate query id {query_id!r}")
            if query_id in relevant:
                raise ValueError(f"{path}:{lineno}: query {query_id!r} lists itself as relevant")
            seen.add(query_id)
            pairs.append((query_id, set(relevant)))
    if not pairs:
        raise ValueError(f"{path}: no relevance entries found")
    return pairs


def write_relevance(pairs, path) -> None:
    with open(path, "w", newline="\n") as f:
        for query_id, relevant in pairs:
            f.write(query_id + " " + " ".join(sorted(relevant)) + "\n")


def render_ranking_csv(results) -> str:
    lines = ["query_id,rank,clip_id,score,is_relevant"]
    for res in results:
        for rank, (clip_id, score) in enumerate(res.ranking, start=1):
            flag = 1 if clip_id in res.relevant_ids else 0
            lines.append(f"{res.query_id},{rank},{clip_id},{score:.6f},{flag}")
    return "\n".join(lines) + "\n"


def render_summary_csv(results) -> str:
    lines = ["query_id,ap"]
    for res in results:
        lines.append(f"{res.query_id},{res.average_precision:.6f}")
    lines.append(f"mean_ap,{mean_average_precision(results):.6f}")
    return "\n".join(lines) + "\n"


def render_sweep_csv(rows, parameter) -> str:
    lines = [f"{parameter},mean_ap"]
    for value, mean_ap in rows:
        shown = f"{value:.6f}" if isinstance(value, float) else str(value)
        lines.append(f"{shown},{mean_ap:.6f}")
    return "\n".join(lines) + "\n"
