"""
Journal indicators estimated from the core moments only.

Every indicator here is a function of (m, v) per journal, routed through the
log-normal model: the h-index fixed point, the one-one and group-group
citation success index (CSI), the minimum representative size kappa and the
average rank of a journal's papers in a set of journals.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy import optimize, special

from .errors import DegenerateComparisonError, DomainError, ResultIdentityError
from .lognormal import (
    ArithMoments,
    LogMoments,
    arith_to_log,
    group_moments,
    implied_log_mean,
    lognormal_ccdf,
    relaxed_group_log_moments,
)

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.9
DEFAULT_KAPPA_CAP = 10 ** 6
DEFAULT_XTOL = 1e-10
DEFAULT_RESIDUAL = 1e-6
DEFAULT_MAX_ITERATIONS = 200


class MomentSource(str, enum.Enum):
    """Where a record's log-space parameters come from."""

    MEASURED = "measured"   # directly supplied mu/sigma, falling back to derived
    DERIVED = "derived"     # always arith_to_log(m, v)


def id_key(journal_id):
    """Sort key: numeric ids in numeric order, then the rest alphabetically."""
    text = str(journal_id)
    return (0, int(text), "") if text.isdigit() else (1, 0, text)


def by_id(record):
    return id_key(record.id)


def require_unique_ids(ids, what):
    """Raise DomainError naming the first id that appears twice."""
    seen = set()
    for jid in ids:
        if jid in seen:
            raise DomainError(f"{what}: journal id {jid!r} appears more than once")
        seen.add(jid)


class KappaStatus(str, enum.Enum):
    REACHED = "reached"
    UNREACHABLE = "unreachable"
    CAP_EXCEEDED = "cap_exceeded"


@dataclass(frozen=True)
class JournalRecord:
    """One journal: identity, paper count and its moments."""

    id: str
    name: str
    n_papers: int
    arith: ArithMoments
    log: Optional[LogMoments] = None
    log_provenance: str = "measured"

    def __post_init__(self):
        if isinstance(self.n_papers, bool) or int(self.n_papers) != self.n_papers or self.n_papers < 1:
            raise DomainError(f"journal {self.id}: n_papers must be a positive integer, got {self.n_papers}")
        self.arith.check()
        if self.log is not None:
            self.log.check()
        if self.log_provenance not in ("measured", "derived"):
            raise DomainError(f"journal {self.id}: unknown log provenance {self.log_provenance!r}")

    def log_moments(self, source=MomentSource.MEASURED):
        source = MomentSource(source)
        if source is MomentSource.MEASURED and self.log is not None:
            return self.log
        return arith_to_log(self.arith)


def journal_impact_factor(record):
    """The impact factor is simply the journal's mean m."""
    return record.arith.m


@dataclass(frozen=True)
class HIndexEstimate:
    h_real: float
    h_int: int


@dataclass(frozen=True)
class KappaResult:
    """Minimum representative sizes for comparing journal t against r."""

    kappa_t: Optional[int]
    kappa_r: Optional[int]
    success_at_kappa: Optional[float]
    threshold: float
    reachable: bool
    status: KappaStatus

    def to_row(self):
        return {
            "kappa_t": self.kappa_t,
            "kappa_r": self.kappa_r,
            "success_at_kappa": self.success_at_kappa,
            "threshold": self.threshold,
            "reachable": self.reachable,
            "kappa_status": self.status.value,
        }


@dataclass(frozen=True)
class ComparisonResult:
    """Pairwise comparison of two journals."""

    t: str
    r: str
    csi: float
    k_t: int
    k_r: int
    group_csi: float
    kappa: KappaResult
    provenance: str = "estimated"

    def to_rows(self):
        row = {
            "t": self.t,
            "r": self.r,
            "provenance": self.provenance,
            "csi": self.csi,
            "k_t": self.k_t,
            "k_r": self.k_r,
            "group_csi": self.group_csi,
        }
        row.update(self.kappa.to_row())
        return [row]


@dataclass
class RankTable:
    """Average percentile R per journal (0 worst, 1 best)."""

    ranks: Dict[str, float]
    weights: Dict[str, int]
    provenance: str = "estimated"

    def weighted_mean(self):
        total = sum(self.weights.values())
        return math.fsum(self.weights[jid] * r for jid, r in self.ranks.items()) / total

    def check_identity(self, tol=1e-9):
        mean = self.weighted_mean()
        if abs(mean - 0.5) > tol:
            raise ResultIdentityError(f"rank table weighted mean is {mean!r}, expected 0.5")
        return mean

    def ordered(self):
        """(id, R) pairs by R descending, ties by id."""
        return sorted(self.ranks.items(), key=lambda item: (-item[1], id_key(item[0])))

    def to_rows(self):
        return [
            {"position": position, "id": jid, "n_papers": self.weights[jid], "rank": r}
            for position, (jid, r) in enumerate(self.ordered(), start=1)
        ]


@dataclass
class IndicatorTable:
    rows: List[dict] = field(default_factory=list)

    def to_rows(self):
        return list(self.rows)


def estimate_h_index(j, lm=None, source=MomentSource.MEASURED,
                     xtol=DEFAULT_XTOL, residual=DEFAULT_RESIDUAL,
                     max_iterations=DEFAULT_MAX_ITERATIONS):
    """Solve h = N * P(C > h + 1) by bisection on [0, N].

    The right-hand side is strictly decreasing in h, so the fixed point is
    unique. Returns the real solution and its floor.
    """
    if lm is None:
        lm = j.log_moments(source)
    lm.check()
    n = j.n_papers

    if lm.sigma_ln == 0.0:
        # point mass: every paper has exactly exp(mu) - 1 citations
        count = math.exp(lm.mu_ln) - 1.0
        if abs(count - round(count)) < 1e-9:
            count = float(round(count))
        h_real = min(float(n), max(0.0, count))
        return HIndexEstimate(h_real, int(math.floor(h_real)))

    def excess(h):
        return h - n * lognormal_ccdf(h + 1.0, lm)

    lo_value = excess(0.0)
    hi_value = excess(float(n))
    if lo_value >= 0.0:
        h_real = 0.0
    elif hi_value <= 0.0:
        h_real = float(n)
    else:
        h_real, info = optimize.bisect(excess, 0.0, float(n), xtol=xtol,
                                       maxiter=max_iterations, full_output=True,
                                       disp=False)
        if not info.converged:
            logger.warning(f"h-index bisection for {j.id} stopped after {info.iterations} iterations")
    gap = abs(excess(h_real))
    if gap > residual:
        logger.warning(f"h-index residual for {j.id} is {gap:.3g}, above {residual:.3g}")
    logger.debug(f"estimated h for {j.id}: {h_real:.6f}")
    return HIndexEstimate(h_real, int(math.floor(h_real)))


def csi(t, r):
    """Probability that a random paper of t out-cites a random paper of r."""
    t.check()
    r.check()
    spread = math.hypot(t.sigma_ln, r.sigma_ln)
    gap = t.mu_ln - r.mu_ln
    if spread == 0.0:
        if gap == 0.0:
            raise DegenerateComparisonError("both journals are point masses at the same location")
        return 1.0 if gap > 0.0 else 0.0
    return float(special.ndtr(gap / spread))


def group_csi(t, k_t, r, k_r):
    """Probability that the mean of k_t papers of t beats the mean of k_r papers of r."""
    return csi(group_moments(t, k_t).as_log(), group_moments(r, k_r).as_log())


def _relaxed_group_csi(t, k_t, r, k_r):
    return csi(relaxed_group_log_moments(t, k_t), relaxed_group_log_moments(r, k_r))


def coupling_ratio(v_t, v_r, label=""):
    """k_r / k_t = v_r / v_t; falls back to 1 when either spread is zero."""
    if v_t > 0.0 and v_r > 0.0:
        return v_r / v_t
    logger.warning(f"zero spread in {label or 'comparison'}; using coupling ratio 1")
    return 1.0


def coupled_size(k_t, ratio):
    """k_r = max(1, round(k_t * ratio)), rounding halves up."""
    return max(1, int(math.floor(k_t * ratio + 0.5)))


def _minimal_pair(success, ratio, threshold, start):
    """Shared integer search over coupled pairs.

    `success(k_t, k_r)` evaluates the group success rate; `start` is an
    integer k_t that already meets the threshold. Walks down until the
    next-smaller pair fails, so the returned pair is locally minimal.
    """
    k = start
    value = success(k, coupled_size(k, ratio))
    while k > 1:
        below = success(k - 1, coupled_size(k - 1, ratio))
        if below < threshold:
            break
        k, value = k - 1, below
    return k, coupled_size(k, ratio), value


def min_representative_size(t, r, threshold=DEFAULT_THRESHOLD, cap=DEFAULT_KAPPA_CAP,
                            source=MomentSource.MEASURED, xtol=1e-6,
                            max_iterations=DEFAULT_MAX_ITERATIONS):
    """Smallest coupled sample sizes (kappa_t, kappa_r) at which group_csi >= threshold.

    The one-sample pair (1, 1) is tried first. Otherwise k_r follows k_t
    through k_r = round(k_t * v_r / v_t); the real-valued relaxation is
    bracketed by doubling, solved by bisection, and the integers around the
    root are checked directly.
    """
    if not 0.5 < threshold < 1.0:
        raise DomainError(f"threshold must be in (0.5, 1), got {threshold}")
    lm_t = t.log_moments(source)
    lm_r = r.log_moments(source)

    try:
        one_to_one = csi(lm_t, lm_r)
    except DegenerateComparisonError:
        one_to_one = 0.5
    if one_to_one >= threshold:
        return KappaResult(1, 1, one_to_one, threshold, True, KappaStatus.REACHED)

    if not implied_log_mean(lm_t) > implied_log_mean(lm_r):
        logger.info(f"kappa {t.id} vs {r.id}: group success never exceeds 0.5, unreachable")
        return KappaResult(None, None, None, threshold, False, KappaStatus.UNREACHABLE)

    ratio = coupling_ratio(t.arith.v, r.arith.v, f"{t.id} vs {r.id}")

    def relaxed(k):
        return _relaxed_group_csi(lm_t, k, lm_r, max(1.0, k * ratio)) - threshold

    def integer_success(k_t, k_r):
        return group_csi(lm_t, k_t, lm_r, k_r)

    hi = 1.0
    while relaxed(hi) < 0.0:
        if hi > cap:
            logger.warning(f"kappa {t.id} vs {r.id}: no pair below cap {cap}")
            return KappaResult(None, None, None, threshold, False, KappaStatus.CAP_EXCEEDED)
        hi *= 2.0
    lo = max(1.0, hi / 2.0)
    root = hi if lo == hi else optimize.bisect(relaxed, lo, hi, xtol=xtol,
                                              maxiter=max_iterations, disp=False)
    logger.debug(f"kappa {t.id} vs {r.id}: real root {root:.6f}")

    # the two integers around the root, then upward until the threshold holds
    k = max(1, int(math.floor(root)))
    while integer_success(k, coupled_size(k, ratio)) < threshold:
        k += 1
        if k > cap:
            return KappaResult(None, None, None, threshold, False, KappaStatus.CAP_EXCEEDED)

    k_t, k_r, value = _minimal_pair(integer_success, ratio, threshold, k)
    if k_t > cap or k_r > cap:
        return KappaResult(None, None, None, threshold, False, KappaStatus.CAP_EXCEEDED)
    return KappaResult(k_t, k_r, value, threshold, True, KappaStatus.REACHED)


def compare(t, r, k_t=10, k_r=10, threshold=DEFAULT_THRESHOLD, cap=DEFAULT_KAPPA_CAP,
            source=MomentSource.MEASURED):
    """csi, group_csi at (k_t, k_r) and kappa for one pair of journals."""
    lm_t = t.log_moments(source)
    lm_r = r.log_moments(source)
    return ComparisonResult(
        t=t.id,
        r=r.id,
        csi=csi(lm_t, lm_r),
        k_t=k_t,
        k_r=k_r,
        group_csi=group_csi(lm_t, k_t, lm_r, k_r),
        kappa=min_representative_size(t, r, threshold, cap, source),
    )


def csi_matrix(log_moments):
    """Pairwise csi[i, j] = csi(i, j); the diagonal is 0.5 by definition."""
    mu = np.array([lm.mu_ln for lm in log_moments])
    sigma = np.array([lm.sigma_ln for lm in log_moments])
    gap = mu[:, None] - mu[None, :]
    spread = np.hypot(sigma[:, None], sigma[None, :])
    off_diagonal = ~np.eye(len(mu), dtype=bool)
    if np.any((spread == 0.0) & (gap == 0.0) & off_diagonal):
        raise DegenerateComparisonError("two journals are point masses at the same location")
    with np.errstate(divide="ignore", invalid="ignore"):
        matrix = np.where(spread > 0.0, special.ndtr(gap / np.where(spread > 0.0, spread, 1.0)),
                          np.where(gap > 0.0, 1.0, 0.0))
    np.fill_diagonal(matrix, 0.5)
    return matrix


def rank_from_csi(ids, weights, matrix, provenance):
    """R_t = sum_r N_r * csi(t, r) / sum_r N_r, self term included."""
    require_unique_ids(ids, "average rank")
    w = np.asarray(weights, dtype=float)
    ranks = matrix @ w / w.sum()
    return RankTable(
        ranks={jid: float(value) for jid, value in zip(ids, ranks)},
        weights={jid: int(n) for jid, n in zip(ids, weights)},
        provenance=provenance,
    )


def average_rank(records, source=MomentSource.MEASURED):
    """Average percentile of each journal's papers across the whole set."""
    if not records:
        raise DomainError("average rank needs at least one journal")
    ordered = sorted(records, key=by_id)
    require_unique_ids([rec.id for rec in ordered], "average rank")
    matrix = csi_matrix([rec.log_moments(source) for rec in ordered])
    return rank_from_csi([rec.id for rec in ordered], [rec.n_papers for rec in ordered],
                         matrix, "estimated")


def estimate_indicators(records, source=MomentSource.MEASURED, **solver):
    """Impact factor and estimated h for every journal, in id order."""
    table = IndicatorTable()
    for rec in sorted(records, key=by_id):
        h = estimate_h_index(rec, source=source, **solver)
        table.rows.append({
            "id": rec.id,
            "name": rec.name,
            "n_papers": rec.n_papers,
            "jif": journal_impact_factor(rec),
            "h_real": h.h_real,
            "h_int": h.h_int,
        })
    return table
