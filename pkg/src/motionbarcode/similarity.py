"""Barcode correlation and clip-to-clip similarity scores.

For binary vectors Pearson correlation reduces to a closed form in the ones
counts and the co-occurrence count:

    r = (N*n11 - na*nb) / sqrt(na*(N - na) * nb*(N - nb))

Zero-variance vectors correlate 0 with everything except an identical
zero-variance vector, which correlates 1.  All quantities are exact
integers below 2**53, so whole correlation matrices are computed with one
float32 matmul (exact for counts below 2**24) plus broadcasting.

Two clip scores are built on top:

* heuristic: count barcodes on each side whose best correlation with the
  other side exceeds a threshold, then C1/K1 + C2/K2 (range [0, 2]).
* assignment: maximum-weight one-to-one matching over positive
  correlations, total weight normalized by min(K1, K2).

The matching is solved exactly with an O(n^3) shortest-augmenting-path
method and canonicalized to the lexicographically smallest optimal pair
set, so results are reproducible across platforms.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .barcode import MotionBarcode
from .pooling import ClipSignature


def correlation(a: MotionBarcode, b: MotionBarcode) -> float:
    if len(a) != len(b):
        raise ValueError(f"barcode lengths differ: {len(a)} vs {len(b)}")
    n = len(a)
    na, nb = a.ones_count, b.ones_count
    va = na * (n - na)
    vb = nb * (n - nb)
    if va == 0 or vb == 0:
        return 1.0 if (va == 0 and vb == 0 and na == nb) else 0.0
    n11 = int(np.dot(a.bits.astype(np.int64), b.bits.astype(np.int64)))
    return (n * n11 - na * nb) / math.sqrt(va * vb)


def correlation_matrix(bits_a: np.ndarray, bits_b: np.ndarray) -> np.ndarray:
    """All-pairs correlation of two (K, N) binary matrices, shape (K1, K2)."""
    bits_a = np.ascontiguousarray(bits_a, dtype=np.uint8)
    bits_b = np.ascontiguousarray(bits_b, dtype=np.uint8)
    if bits_a.ndim != 2 or bits_b.ndim != 2:
        raise ValueError("bit matrices must be 2-dimensional")
    if bits_a.shape[1] != bits_b.shape[1]:
        raise ValueError(
            f"barcode lengths differ: {bits_a.shape[1]} vs {bits_b.shape[1]}")
    n = bits_a.shape[1]
    if n >= 2 ** 24:
        raise ValueError(f"barcode length {n} too large for exact accumulation")
    na = bits_a.sum(axis=1, dtype=np.int64)
    nb = bits_b.sum(axis=1, dtype=np.int64)
    n11 = (bits_a.astype(np.float32) @ bits_b.astype(np.float32).T).astype(np.float64)
    num = n * n11 - na[:, None] * nb[None, :].astype(np.float64)
    va = (na * (n - na)).astype(np.float64)
    vb = (nb * (n - nb)).astype(np.float64)
    denom = np.sqrt(va)[:, None] * np.sqrt(vb)[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    flat_a = va == 0
    flat_b = vb == 0
    if flat_a.any() and flat_b.any():
        equal_flat = flat_a[:, None] & flat_b[None, :] & (na[:, None] == nb[None, :])
        r[equal_flat] = 1.0
    return r


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    matched_a: int
    matched_b: int
    size_a: int
    size_b: int
    method: str


def _signature_pair_matrix(sig_a: ClipSignature, sig_b: ClipSignature) -> np.ndarray:
    if len(sig_a) == 0 or len(sig_b) == 0:
        raise ValueError(
            f"cannot score empty signature ({sig_a.clip_id!r}: {len(sig_a)}, "
            f"{sig_b.clip_id!r}: {len(sig_b)})")
    if sig_a.frame_count != sig_b.frame_count:
        raise ValueError(
            f"frame counts differ: {sig_a.frame_count} vs {sig_b.frame_count}")
    return correlation_matrix(sig_a.bit_matrix(), sig_b.bit_matrix())


def heuristic_similarity(sig_a: ClipSignature, sig_b: ClipSignature,
                         threshold: float = 0.4) -> SimilarityScore:
    if not -1.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [-1, 1], got {threshold}")
    corr = _signature_pair_matrix(sig_a, sig_b)
    k1, k2 = corr.shape
    c1 = int((corr.max(axis=1) > threshold).sum())
    c2 = int((corr.max(axis=0) > threshold).sum())
    return SimilarityScore(
        value=c1 / k1 + c2 / k2,
        matched_a=c1, matched_b=c2, size_a=k1, size_b=k2,
        method="heuristic",
    )


def assignment_similarity(sig_a: ClipSignature, sig_b: ClipSignature) -> SimilarityScore:
    corr = _signature_pair_matrix(sig_a, sig_b)
    pairs, total = max_weight_matching(corr)
    k1, k2 = corr.shape
    return SimilarityScore(
        value=total / min(k1, k2),
        matched_a=len(pairs), matched_b=len(pairs), size_a=k1, size_b=k2,
        method="assignment",
    )


# ---------------------------------------------------------------------------
# Maximum-weight bipartite matching
# ---------------------------------------------------------------------------

def max_weight_matching(weights) -> tuple:
    """Exact maximum-weight bipartite matching on a K1 x K2 weight matrix.

    Only pairs with strictly positive weight count; leaving a vertex
    unmatched is free.  Returns (pairs, total) where pairs is the
    lexicographically smallest list of (row, col) index pairs among all
    maximum-weight solutions, sorted ascending, and total is the summed
    weight of those pairs.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError("weight matrix must be 2-dimensional")
    if w.size == 0:
        return [], 0.0
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    k1, k2 = w.shape
    n = max(k1, k2)
    padded = np.zeros((n, n), dtype=np.float64)
    padded[:k1, :k2] = np.maximum(w, 0.0)

    # Solve as min-cost perfect assignment on complementary costs; the
    # resulting potentials certify optimality and expose the tight edges
    # every optimal solution must use.
    cost = padded.max() - padded
    col_to_row, u, v = _min_cost_assignment(cost)
    row_to_col = np.empty(n, dtype=np.int64)
    row_to_col[col_to_row] = np.arange(n)

    tol = 1e-9 * max(1.0, float(np.abs(cost).max()))
    pairs = _canonical_positive_pairs(w, cost, u, v, row_to_col, col_to_row, tol)
    total = float(sum(w[i, j] for i, j in pairs))
    return pairs, total


def _min_cost_assignment(cost: np.ndarray):
    """Shortest-augmenting-path assignment (O(n^3)) with dual potentials.

    Returns (col_to_row, u, v) with u[i] + v[j] <= cost[i, j] everywhere and
    equality on matched pairs.
    """
    n = cost.shape[0]
    c = np.zeros((n + 1, n + 1), dtype=np.float64)
    c[1:, 1:] = cost
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)   # p[j] = row matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    cols = np.arange(n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = c[i0] - u[i0] - v
            improved = ~used & (cur < minv)
            minv[improved] = cur[improved]
            way[improved] = j0
            reach = np.where(used, np.inf, minv)
            j1 = int(np.argmin(reach))
            delta = reach[j1]
            used_cols = cols[used]
            u[p[used_cols]] += delta
            v[used_cols] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j_prev = way[j0]
            p[j0] = p[j_prev]
            j0 = j_prev
    col_to_row = p[1:] - 1
    return col_to_row, u[1:], v[1:]


def _canonical_positive_pairs(w, cost, u, v, row_to_col, col_to_row, tol):
    """Pick the lexicographically smallest positive pair set among optima.

    Complementary slackness: a perfect matching on the padded square is
    optimal iff every edge is tight (cost[i,j] == u[i] + v[j]).  Rows are
    scanned in ascending order; for each, the smallest tight positive real
    column that still admits a perfect tight completion is pinned, testing
    feasibility with one alternating-path repair of the current matching.
    Earlier pins are immovable, which makes the greedy choice safe.
    """
    n = cost.shape[0]
    k1, k2 = w.shape
    pinned_col = np.zeros(n, dtype=bool)
    pairs = []
    col_idx = np.arange(n)
    for i in range(k1):
        reduced = cost[i] - u[i] - v
        candidates = col_idx[(col_idx < k2) & ~pinned_col & (reduced <= tol)]
        candidates = candidates[w[i, candidates] > 0.0]
        chosen = -1
        for j in candidates:
            j = int(j)
            if row_to_col[i] == j or _repin(i, j, cost, u, v,
                                            row_to_col, col_to_row, pinned_col, tol):
                chosen = j
                break
        if chosen >= 0:
            pinned_col[chosen] = True
            pairs.append((i, chosen))
    return pairs


def _repin(i, j, cost, u, v, row_to_col, col_to_row, pinned_col, tol):
    """Try to rewire the current tight perfect matching so row i takes column j.

    Frees row i's column and column j's row, then searches the tight
    subgraph (avoiding pinned columns and j itself) for an alternating path
    putting the displaced row back to work.  Commits on success, restores
    the matching on failure.
    """
    n = cost.shape[0]
    j0 = row_to_col[i]
    i1 = col_to_row[j]
    row_to_col[i] = j
    col_to_row[j] = i
    row_to_col[i1] = -1
    col_to_row[j0] = -1

    seen = pinned_col.copy()
    seen[j] = True
    came_from = np.full(n, -1, dtype=np.int64)
    queue = deque([int(i1)])
    free_col = -1
    while queue and free_col < 0:
        r = queue.popleft()
        reduced = cost[r] - u[r] - v
        for cnew in np.flatnonzero(~seen & (reduced <= tol)):
            cnew = int(cnew)
            seen[cnew] = True
            came_from[cnew] = r
            rnext = col_to_row[cnew]
            if rnext < 0:
                free_col = cnew
                break
            queue.append(int(rnext))

    if free_col < 0:
        row_to_col[i] = j0
        col_to_row[j0] = i
        row_to_col[i1] = j
        col_to_row[j] = i1
        return False

    cpos = free_col
    while True:
        r = came_from[cpos]
        cprev = row_to_col[r]
        row_to_col[r] = cpos
        col_to_row[cpos] = r
        if r == i1:
            break
        cpos = cprev
    return True
