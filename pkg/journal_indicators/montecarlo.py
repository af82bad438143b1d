"""
Monte Carlo validation of the estimated indicators.

Each journal is replaced by a synthetic sample drawn from the log-normal
implied by its (m, v); the empirical indicators of those samples are then
compared with the closed-form estimates. Every task draws from its own
substream of (seed, task kind, task index), so reports do not depend on
scheduling or on the number of workers.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
from scipy import special

from .empirical import (
    CitationVector,
    empirical_csi,
    empirical_group_csi,
    empirical_kappa,
)
from .errors import DegenerateComparisonError, DomainError
from .estimated import (
    DEFAULT_THRESHOLD,
    KappaStatus,
    MomentSource,
    average_rank,
    by_id,
    csi,
    estimate_h_index,
    group_csi,
    min_representative_size,
    rank_from_csi,
)
from .lognormal import implied_log_mean, printed_group_moments

logger = logging.getLogger(__name__)

GENERATOR = "numpy.random.PCG64"

# substream tags
_SAMPLE, _GROUP, _KAPPA, _FORMS = 0, 1, 2, 3

_UNIT = float(2 ** 53)


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    n_samples: int = 100000
    discretize: bool = False
    tolerance: float = 0.02
    k_t: int = 10
    k_r: int = 10
    trials: int = 20000
    threshold: float = DEFAULT_THRESHOLD
    kappa_tolerance: int = 1
    h_tolerance: float = 2.0
    kappa_max: int = 25
    kappa_cap: int = 5000
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise DomainError(f"seed must be a non-negative integer, got {self.seed}")
        for name in ("n_samples", "k_t", "k_r", "trials", "kappa_max", "kappa_cap", "workers"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.tolerance > 0:
            if self.tolerance < 0:
                raise DomainError(f"tolerance must be >= 0, got {self.tolerance}")
            logger.warning("tolerance 0: every Monte Carlo comparison is expected to fail")
        if not 0.5 < self.threshold < 1.0:
            raise DomainError(f"threshold must be in (0.5, 1), got {self.threshold}")

    @classmethod
    def from_settings(cls, settings, seed, **overrides):
        sim = settings.simulation
        values = dict(
            seed=seed,
            n_samples=sim["n_samples"],
            discretize=sim["discretize"],
            tolerance=sim["tolerance"],
            k_t=settings.default_k,
            k_r=settings.default_k,
            trials=sim["trials"],
            threshold=settings.threshold,
            kappa_tolerance=sim["kappa_tolerance"],
            h_tolerance=sim["h_tolerance"],
            kappa_max=sim["kappa_max"],
            kappa_cap=sim["empirical_kappa_cap"],
            workers=sim["workers"],
        )
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True)
class ValidationEntry:
    indicator: str
    subject: str
    formula_value: Optional[float]
    mc_value: Optional[float]
    abs_error: Optional[float]
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class FormCheck:
    """One group-moment form against simulation, in MC standard errors."""

    form: str
    formula_value: float
    mc_value: float
    abs_error: float
    standard_errors: float


@dataclass
class ValidationReport:
    config: SimulationConfig
    entries: List[ValidationEntry] = field(default_factory=list)
    form_checks: List[FormCheck] = field(default_factory=list)
    form_subject: str = ""

    @property
    def passed(self):
        return all(entry.passed for entry in self.entries)

    def failures(self):
        return [entry for entry in self.entries if not entry.passed]

    def header(self):
        cfg = self.config
        return {
            "generator": GENERATOR,
            "numpy_version": np.__version__,
            "seed": cfg.seed,
            "n_samples": cfg.n_samples,
            "trials": cfg.trials,
            "k_t": cfg.k_t,
            "k_r": cfg.k_r,
            "discretize": cfg.discretize,
            "tolerance": cfg.tolerance,
            "kappa_tolerance": cfg.kappa_tolerance,
            "h_tolerance": cfg.h_tolerance,
            "threshold": cfg.threshold,
            "entries": len(self.entries),
            "failures": len(self.failures()),
            "passed": self.passed,
        }

    def to_rows(self):
        rows = [asdict(entry) for entry in self.entries]
        for check in self.form_checks:
            rows.append({
                "indicator": f"group_form:{check.form}",
                "subject": self.form_subject,
                "formula_value": check.formula_value,
                "mc_value": check.mc_value,
                "abs_error": check.abs_error,
                "tolerance": None,
                "passed": None,
            })
        return rows


def substream(seed, *task):
    """Independent generator seed for one task."""
    return np.random.SeedSequence([int(seed), *[int(part) for part in task]])


def _standard_normals(rng, n):
    # uniforms in (0, 1) exclusive, so the inverse CDF stays finite
    uniforms = (rng.integers(0, 2 ** 53, size=n, dtype=np.int64) + 0.5) / _UNIT
    return special.ndtri(uniforms)


def sample_lognormal(lm, n, seed, discretize=False):
    """n synthetic citation counts c with c + 1 log-normal(mu, sigma).

    Normal deviates come from the inverse CDF applied to PCG64 uniforms, so
    each sample consumes exactly one draw. With discretize the values are
    rounded to the nearest non-negative integer.
    """
    lm.check()
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = _standard_normals(rng, int(n))
    values = np.exp(lm.mu_ln + lm.sigma_ln * z) - 1.0
    if discretize:
        return np.clip(np.rint(values), 0, None).astype(np.int64)
    return values


def synthetic_journals(records, n, seed, discretize=False, source=MomentSource.DERIVED, sizes=None):
    """One synthetic CitationVector per record, keyed by id, drawn in id order.

    `sizes` maps id to sample size; otherwise every journal gets n papers.
    """
    journals = {}
    for index, rec in enumerate(sorted(records, key=by_id)):
        size = sizes[rec.id] if sizes else n
        values = sample_lognormal(rec.log_moments(source), size, substream(seed, _SAMPLE, index), discretize)
        journals[rec.id] = CitationVector(values)
    return journals


def survival_h_index(cv, n_papers):
    """Largest integer h with N * (share of sample with c >= h) >= h."""
    ordered = cv.sorted()
    size = ordered.size
    h = 0
    lo, hi = 0, int(n_papers)
    # N * share(c >= h) is non-increasing in h
    while lo <= hi:
        mid = (lo + hi) // 2
        share = (size - np.searchsorted(ordered, mid, side="left")) / size
        if n_papers * share >= mid:
            h, lo = mid, mid + 1
        else:
            hi = mid - 1
    return h


def _pmap(workers, fn, items):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _entry(indicator, subject, formula_value, mc_value, tolerance):
    error = abs(formula_value - mc_value)
    return ValidationEntry(indicator, subject, formula_value, mc_value, error, tolerance, error <= tolerance)


def compare_group_forms(t, r, k_t, k_r, trials, seed, n_samples=100000):
    """Corrected group moments versus the printed variants, checked against simulation.

    Returns one FormCheck per form; `standard_errors` is the distance to the
    Monte Carlo value in binomial standard errors.
    """
    sample_t = CitationVector(sample_lognormal(t, n_samples, substream(seed, _FORMS, 0)))
    sample_r = CitationVector(sample_lognormal(r, n_samples, substream(seed, _FORMS, 1)))
    mc = empirical_group_csi(sample_t, k_t, sample_r, k_r, trials, substream(seed, _FORMS, 2))
    se = math.sqrt(max(mc * (1.0 - mc), 1e-12) / trials)

    forms = {
        "corrected": group_csi(t, k_t, r, k_r),
    }
    for name, halved, shifted in (("printed_sum", False, True),
                                  ("printed_halved", True, False),
                                  ("printed", True, True)):
        forms[name] = csi(printed_group_moments(t, k_t, halved_exponent=halved, sum_shift=shifted).as_log(),
                          printed_group_moments(r, k_r, halved_exponent=halved, sum_shift=shifted).as_log())
    return [FormCheck(name, value, mc, abs(value - mc), abs(value - mc) / se)
            for name, value in forms.items()]


def validate_all(journals, cfg):
    """Estimated versus simulated h, csi, group csi, kappa and average rank."""
    if not journals:
        raise DomainError("validation needs at least one journal")
    records = sorted(journals, key=by_id)
    ids = [rec.id for rec in records]
    logs = [rec.log_moments(MomentSource.DERIVED) for rec in records]
    report = ValidationReport(cfg)

    logger.info(f"drawing {len(records)} synthetic journals of {cfg.n_samples} papers (seed {cfg.seed})")
    samples = synthetic_journals(records, cfg.n_samples, cfg.seed, cfg.discretize)

    # h: the sample stands in for the journal's survival function, scaled to N
    for rec in records:
        formula = estimate_h_index(rec, source=MomentSource.DERIVED).h_real
        simulated = survival_h_index(samples[rec.id], rec.n_papers)
        report.entries.append(_entry("h_index", rec.id, formula, float(simulated), cfg.h_tolerance))

    pairs = list(itertools.combinations(range(len(records)), 2))
    # a single journal is compared with itself
    compared = pairs or [(0, 0)]

    def csi_task(pair):
        i, j = pair
        try:
            formula = csi(logs[i], logs[j])
        except DegenerateComparisonError as e:
            logger.warning(f"csi {ids[i]} vs {ids[j]}: {e}")
            return ValidationEntry("csi", f"{ids[i]}|{ids[j]}", None, None, None, cfg.tolerance, False)
        return _entry("csi", f"{ids[i]}|{ids[j]}", formula,
                      empirical_csi(samples[ids[i]], samples[ids[j]]), cfg.tolerance)

    def group_task(item):
        index, (i, j) = item
        subject = f"{ids[i]}|{ids[j]}"
        try:
            formula = group_csi(logs[i], cfg.k_t, logs[j], cfg.k_r)
        except DegenerateComparisonError as e:
            logger.warning(f"group csi {subject}: {e}")
            return ValidationEntry("group_csi", subject, None, None, None, cfg.tolerance, False)
        simulated = empirical_group_csi(samples[ids[i]], cfg.k_t, samples[ids[j]], cfg.k_r,
                                        cfg.trials, substream(cfg.seed, _GROUP, index))
        return _entry("group_csi", subject, formula, simulated, cfg.tolerance)

    report.entries.extend(_pmap(cfg.workers, csi_task, compared))
    report.entries.extend(_pmap(cfg.workers, group_task, list(enumerate(compared))))

    def kappa_task(item):
        index, (i, j) = item
        subject = f"{ids[i]}|{ids[j]}"
        # orient the pair so the first journal dominates
        t, r = (i, j) if implied_log_mean(logs[i]) >= implied_log_mean(logs[j]) else (j, i)
        estimate = min_representative_size(records[t], records[r], cfg.threshold,
                                           source=MomentSource.DERIVED)
        if estimate.status is not KappaStatus.REACHED:
            return None
        if max(estimate.kappa_t, estimate.kappa_r) > cfg.kappa_max:
            return None
        simulated = empirical_kappa(samples[ids[t]], samples[ids[r]], cfg.threshold, cfg.trials,
                                    substream(cfg.seed, _KAPPA, index), cfg.kappa_cap)
        subject = f"{ids[t]}|{ids[r]}"
        if simulated.status is not KappaStatus.REACHED:
            return ValidationEntry("kappa", subject, float(estimate.kappa_t), None, None,
                                   cfg.kappa_tolerance, False)
        error = float(max(abs(estimate.kappa_t - simulated.kappa_t), abs(estimate.kappa_r - simulated.kappa_r)))
        return ValidationEntry("kappa", subject, float(estimate.kappa_t), float(simulated.kappa_t),
                               error, cfg.kappa_tolerance, error <= cfg.kappa_tolerance)

    kappa_entries = _pmap(cfg.workers, kappa_task, list(enumerate(pairs)))
    skipped = sum(entry is None for entry in kappa_entries)
    if skipped:
        logger.info(f"kappa validation skipped {skipped} pairs (unreachable or above {cfg.kappa_max})")
    report.entries.extend(entry for entry in kappa_entries if entry is not None)

    # average rank: N-weighted aggregation of the simulated csi matrix
    try:
        formula_rank = average_rank(records, MomentSource.DERIVED)
        size = len(records)
        matrix = np.full((size, size), 0.5)
        for i, j in pairs:
            matrix[i, j] = empirical_csi(samples[ids[i]], samples[ids[j]])
            matrix[j, i] = 1.0 - matrix[i, j]
        simulated_rank = rank_from_csi(ids, [rec.n_papers for rec in records], matrix, "monte-carlo")
        for jid in ids:
            report.entries.append(_entry("average_rank", jid, formula_rank.ranks[jid],
                                         simulated_rank.ranks[jid], cfg.tolerance))
    except DegenerateComparisonError as e:
        logger.warning(f"average rank skipped: {e}")

    if len(records) >= 2:
        report.form_subject = f"{ids[0]}|{ids[1]}"
        report.form_checks = compare_group_forms(logs[0], logs[1], 3, 7, cfg.trials, cfg.seed, cfg.n_samples)

    logger.info(f"validation: {len(report.entries)} entries, {len(report.failures())} failures")
    return report

