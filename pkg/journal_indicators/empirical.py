"""
Indicators computed directly from per-paper citation counts.

These are the ground-truth values the estimates are checked against. Ties
between equal citation counts always score half a success, which makes
complementary probabilities sum to one and the average rank equal the
N-weighted CSI aggregation exactly.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .estimated import (
    DEFAULT_THRESHOLD,
    KappaResult,
    KappaStatus,
    RankTable,
    coupled_size,
    coupling_ratio,
    id_key,
    require_unique_ids,
)
from .lognormal import ArithMoments, LogMoments

logger = logging.getLogger(__name__)

# upper bound on draws held in memory at once by group sampling
_CHUNK_DRAWS = 1 << 22


@dataclass(frozen=True, eq=False)
class CitationVector:
    """Citation counts of one journal's papers, order irrelevant.

    Integer data must be >= 0. Real-valued synthetic data lives on the shifted
    scale and only needs c + 1 > 0.
    """

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("a citation vector needs at least one paper")
        if np.issubdtype(arr.dtype, np.integer) or arr.dtype == bool:
            arr = arr.astype(np.int64)
            if np.any(arr < 0):
                raise DomainError("citation counts must be >= 0")
        else:
            arr = arr.astype(np.float64)
            if not np.all(np.isfinite(arr)) or np.any(arr + 1.0 <= 0.0):
                raise DomainError("real-valued citations must be finite with c + 1 > 0")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @classmethod
    def of(cls, values):
        return cls(np.asarray(list(values)))

    def __len__(self):
        return int(self.counts.size)

    def sorted(self):
        return np.sort(self.counts)


def _vector(cv):
    return cv if isinstance(cv, CitationVector) else CitationVector(np.asarray(cv))


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def empirical_moments(cv):
    """(m, v) and (mu, sigma) of c + 1 with population (divisor N) spreads."""
    cv = _vector(cv)
    shifted = cv.counts.astype(np.float64) + 1.0
    logs = np.log(shifted)
    return (ArithMoments(float(shifted.mean()), float(shifted.std())),
            LogMoments(float(logs.mean()), float(logs.std())))


def empirical_h_index(cv):
    """Largest h such that at least h papers have >= h citations (unshifted counts)."""
    cv = _vector(cv)
    descending = np.sort(cv.counts)[::-1]
    ranks = np.arange(1, descending.size + 1)
    return int(np.count_nonzero(descending >= ranks))


def superiority_counts(t, r):
    """(wins, ties, total) over all ordered pairs (paper of t, paper of r)."""
    t, r = _vector(t), _vector(r)
    pool = r.sorted()
    below = np.searchsorted(pool, t.counts, side="left")
    upto = np.searchsorted(pool, t.counts, side="right")
    wins = int(below.sum())
    ties = int((upto - below).sum())
    return wins, ties, len(t) * len(r)


def empirical_csi(t, r):
    """Share of pairs where the paper of t has more citations; ties count half."""
    wins, ties, total = superiority_counts(t, r)
    return (2 * wins + ties) / (2 * total)


def empirical_csi_exhaustive(t, r):
    """O(|t|*|r|) reference form of empirical_csi."""
    t, r = _vector(t), _vector(r)
    diff = t.counts[:, None] - r.counts[None, :]
    wins = int(np.count_nonzero(diff > 0))
    ties = int(np.count_nonzero(diff == 0))
    return (2 * wins + ties) / (2 * diff.size)


def _group_sums(values, k, trials, rng):
    """Sums of k with-replacement draws, one per trial, drawn in fixed-size chunks."""
    per_chunk = max(1, _CHUNK_DRAWS // k)
    sums = np.empty(trials, dtype=values.dtype)
    for start in range(0, trials, per_chunk):
        size = min(per_chunk, trials - start)
        picks = rng.integers(0, values.size, size=(size, k))
        sums[start:start + size] = values[picks].sum(axis=1)
    return sums


def empirical_group_csi(t, k_t, r, k_r, trials, seed):
    """Share of trials where the mean of k_t draws from t beats the mean of k_r draws from r.

    Draws are with replacement. Means are compared through cross-multiplied
    sums so integer ties are exact; ties count half.
    """
    t, r = _vector(t), _vector(r)
    for name, k in (("k_t", k_t), ("k_r", k_r), ("trials", trials)):
        if isinstance(k, bool) or int(k) != k or k < 1:
            raise DomainError(f"{name} must be a positive integer, got {k}")
    rng = _rng(seed)
    sums_t = _group_sums(t.counts, int(k_t), int(trials), rng)
    sums_r = _group_sums(r.counts, int(k_r), int(trials), rng)
    lhs = sums_t * k_r
    rhs = sums_r * k_t
    wins = int(np.count_nonzero(lhs > rhs))
    ties = int(np.count_nonzero(lhs == rhs))
    return (2 * wins + ties) / (2 * int(trials))


def empirical_kappa(t, r, threshold=DEFAULT_THRESHOLD, trials=20000, seed=0, cap=5000):
    """Smallest coupled pair (k_t, k_r) whose empirical group success reaches threshold.

    Every candidate pair is evaluated with the same seed, so successive sizes
    share their random stream. The pair (1, 1) is tried first, then k_t is
    searched upward by doubling and integer bisection, and the result is
    walked down until the next-smaller pair fails.
    """
    if not 0.5 < threshold < 1.0:
        raise DomainError(f"threshold must be in (0.5, 1), got {threshold}")
    t, r = _vector(t), _vector(r)

    def success(k_t, k_r):
        return empirical_group_csi(t, k_t, r, k_r, trials, seed)

    one_to_one = empirical_csi(t, r)
    if one_to_one >= threshold:
        return KappaResult(1, 1, one_to_one, threshold, True, KappaStatus.REACHED)

    if not t.counts.mean() > r.counts.mean():
        logger.info("empirical kappa: means are not ordered, unreachable")
        return KappaResult(None, None, None, threshold, False, KappaStatus.UNREACHABLE)

    arith_t, _ = empirical_moments(t)
    arith_r, _ = empirical_moments(r)
    ratio = coupling_ratio(arith_t.v, arith_r.v, "empirical kappa")

    def passes(k):
        return success(k, coupled_size(k, ratio)) >= threshold

    lo, hi = 0, 1
    while not passes(hi):
        if hi >= cap:
            logger.warning(f"empirical kappa: no pair below cap {cap}")
            return KappaResult(None, None, None, threshold, False, KappaStatus.CAP_EXCEEDED)
        lo, hi = hi, min(cap, hi * 2)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid

    k = hi
    value = success(k, coupled_size(k, ratio))
    while k > 1:
        below = success(k - 1, coupled_size(k - 1, ratio))
        if below < threshold:
            break
        k, value = k - 1, below
    return KappaResult(k, coupled_size(k, ratio), value, threshold, True, KappaStatus.REACHED)


def percentiles(pooled):
    """Mid-rank percentile of each value: (strictly fewer + half of equal) / total."""
    pooled = np.asarray(pooled)
    ordered = np.sort(pooled)
    below = np.searchsorted(ordered, pooled, side="left")
    upto = np.searchsorted(ordered, pooled, side="right")
    return (below + upto) / (2.0 * pooled.size)


def empirical_average_rank(journals):
    """Mean pooled percentile of each journal's papers.

    `journals` is a list of (id, CitationVector) pairs; rows come back in id order.
    """
    if not journals:
        raise DomainError("average rank needs at least one journal")
    require_unique_ids([jid for jid, _ in journals], "average rank")
    ordered = sorted(((jid, _vector(cv)) for jid, cv in journals), key=lambda item: id_key(item[0]))
    pooled = np.concatenate([cv.counts.astype(np.float64) for _, cv in ordered])
    scores = percentiles(pooled)
    ranks, weights = {}, {}
    start = 0
    for jid, cv in ordered:
        stop = start + len(cv)
        ranks[jid] = float(math.fsum(scores[start:stop]) / len(cv))
        weights[jid] = len(cv)
        start = stop
    return RankTable(ranks=ranks, weights=weights, provenance="empirical")
