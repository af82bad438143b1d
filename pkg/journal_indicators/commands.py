"""
Subcommand implementations.

Each function takes already-loaded inputs plus the SettingsManager and returns
a result object with ``to_rows()`` (and optionally ``header()``) that
dataset.write_results can serialize.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .empirical import (
    empirical_average_rank,
    empirical_csi,
    empirical_group_csi,
    empirical_h_index,
    empirical_kappa,
    empirical_moments,
)
from .errors import DegenerateComparisonError, DomainError, UnknownJournalError, UsageError
from .estimated import (
    JournalRecord,
    KappaStatus,
    MomentSource,
    average_rank,
    by_id,
    compare as compare_pair,
    csi,
    estimate_h_index,
    estimate_indicators,
    group_csi,
    min_representative_size,
    rank_from_csi,
)
from .dataset import SummaryTable
from .lognormal import implied_log_mean
from .montecarlo import SimulationConfig, substream, survival_h_index, synthetic_journals, validate_all

logger = logging.getLogger(__name__)

FIGURES = ("h", "csi", "group-csi", "kappa", "rank")

# substream tag for plot-data draws
_PLOT = 4


def _require_journals(records, what):
    if not records:
        raise DomainError(f"{what} needs at least one journal")


def _solver_options(settings):
    return dict(xtol=settings.root_xtol, residual=settings.root_residual,
                max_iterations=settings.max_iterations)


def find_journal(records, journal_id):
    for rec in records:
        if rec.id == journal_id:
            return rec
    known = ", ".join(rec.id for rec in sorted(records, key=by_id)[:10])
    raise UnknownJournalError(f"unknown journal id {journal_id!r} (known: {known}{', ...' if len(records) > 10 else ''})")


def records_from_citations(citations, keep_log=True):
    """One JournalRecord per citation vector, named by its id.

    With keep_log the measured log moments of the data are attached;
    otherwise estimates fall back to the (m, v) route.
    """
    records = []
    for jid, cv in citations.items():
        arith, log = empirical_moments(cv)
        records.append(JournalRecord(jid, jid, len(cv), arith, log if keep_log else None))
    return records


def summarize(citations, settings):
    """Measured (m, v, mu, sigma) per journal next to the (m, v)-derived mu, sigma."""
    records = records_from_citations(citations)
    logger.info(f"summarized {len(records)} journals")
    return SummaryTable(records, derived_columns=True)


def indicators(records, settings, source=None):
    _require_journals(records, "indicators")
    return estimate_indicators(records, source or settings.moment_source, **_solver_options(settings))


def compare(records, id_t, id_r, settings, k_t=None, k_r=None, threshold=None, source=None):
    t = find_journal(records, id_t)
    r = find_journal(records, id_r)
    return compare_pair(
        t, r,
        k_t=k_t or settings.default_k,
        k_r=k_r or settings.default_k,
        threshold=threshold or settings.threshold,
        cap=settings.kappa_cap,
        source=source or settings.moment_source,
    )


def rank(records, settings, source=None):
    """Estimated average rank; the weighted-mean identity is checked before returning."""
    _require_journals(records, "rank")
    table = average_rank(records, source or settings.moment_source)
    table.check_identity()
    return table


def validate(records, settings, seed, samples=None, tolerance=None, k_t=None, k_r=None, trials=None):
    _require_journals(records, "validate")
    cfg = SimulationConfig.from_settings(settings, seed, n_samples=samples, tolerance=tolerance,
                                         k_t=k_t, k_r=k_r, trials=trials)
    return validate_all(records, cfg)


@dataclass
class PlotData:
    """Scatter points (x = real or simulated, y = estimated) for one figure."""

    figure: str
    mode: str
    seed: int
    x_axis: str
    y_axis: str
    points: List[dict] = field(default_factory=list)
    parameters: Dict[str, object] = field(default_factory=dict)

    def add(self, subject, x, y, **extra):
        self.points.append({"subject": subject, "x": float(x), "y": float(y), **extra})

    def identity_extent(self):
        """(low, high) covering every coordinate, for drawing y = x."""
        if not self.points:
            return None, None
        values = [p["x"] for p in self.points] + [p["y"] for p in self.points]
        return min(values), max(values)

    def header(self):
        low, high = self.identity_extent()
        header = {
            "figure": self.figure,
            "input": self.mode,
            "seed": self.seed,
            "x": self.x_axis,
            "y": self.y_axis,
            "points": len(self.points),
            "identity_min": low,
            "identity_max": high,
        }
        header.update(self.parameters)
        return header

    def to_rows(self):
        return list(self.points)


@dataclass
class _PlotInputs:
    records: List[JournalRecord]
    samples: dict
    weights: List[int]
    source: MomentSource
    synthetic: bool

    @property
    def ids(self):
        return [rec.id for rec in self.records]


def _plot_h(inputs, plot, options):
    for rec in inputs.records:
        cv = inputs.samples[rec.id]
        real = survival_h_index(cv, rec.n_papers) if inputs.synthetic else empirical_h_index(cv)
        plot.add(rec.id, real, estimate_h_index(rec, source=inputs.source, **options["solver"]).h_real)


def _pairs(inputs):
    return list(itertools.combinations(range(len(inputs.records)), 2))


def _plot_csi(inputs, plot, options):
    ids = inputs.ids
    for i, j in _pairs(inputs):
        lm_i = inputs.records[i].log_moments(inputs.source)
        lm_j = inputs.records[j].log_moments(inputs.source)
        try:
            estimate = csi(lm_i, lm_j)
        except DegenerateComparisonError as e:
            logger.warning(f"csi {ids[i]}|{ids[j]} skipped: {e}")
            continue
        plot.add(f"{ids[i]}|{ids[j]}", empirical_csi(inputs.samples[ids[i]], inputs.samples[ids[j]]), estimate)


def _plot_group_csi(inputs, plot, options):
    ids = inputs.ids
    k_t, k_r = options["k_t"], options["k_r"]
    for index, (i, j) in enumerate(_pairs(inputs)):
        lm_i = inputs.records[i].log_moments(inputs.source)
        lm_j = inputs.records[j].log_moments(inputs.source)
        try:
            estimate = group_csi(lm_i, k_t, lm_j, k_r)
        except DegenerateComparisonError as e:
            logger.warning(f"group csi {ids[i]}|{ids[j]} skipped: {e}")
            continue
        real = empirical_group_csi(inputs.samples[ids[i]], k_t, inputs.samples[ids[j]], k_r,
                                   options["trials"], substream(options["seed"], _PLOT, 2, index))
        plot.add(f"{ids[i]}|{ids[j]}", real, estimate)


def _plot_kappa(inputs, plot, options):
    ids = inputs.ids
    records = inputs.records
    skipped = 0
    for index, (i, j) in enumerate(_pairs(inputs)):
        lm_i = records[i].log_moments(inputs.source)
        lm_j = records[j].log_moments(inputs.source)
        t, r = (i, j) if implied_log_mean(lm_i) >= implied_log_mean(lm_j) else (j, i)
        estimate = min_representative_size(records[t], records[r], options["threshold"],
                                           options["kappa_cap"], inputs.source)
        too_large = estimate.reachable and max(estimate.kappa_t, estimate.kappa_r) > options["kappa_max"]
        if estimate.status is not KappaStatus.REACHED or too_large:
            skipped += 1
            continue
        real = empirical_kappa(inputs.samples[ids[t]], inputs.samples[ids[r]], options["threshold"],
                               options["trials"], substream(options["seed"], _PLOT, 3, index),
                               options["empirical_kappa_cap"])
        if real.status is not KappaStatus.REACHED:
            skipped += 1
            continue
        # one point per component of the pair
        subject = f"{ids[t]}|{ids[r]}"
        plot.add(subject, real.kappa_t, estimate.kappa_t, component="kappa_t")
        plot.add(subject, real.kappa_r, estimate.kappa_r, component="kappa_r")
    if skipped:
        logger.info(f"kappa plot skipped {skipped} pairs (unreachable or above {options['kappa_max']})")


def _plot_rank(inputs, plot, options):
    estimated = average_rank(inputs.records, inputs.source)
    sizes_match = all(len(inputs.samples[rec.id]) == rec.n_papers for rec in inputs.records)
    if sizes_match:
        real = empirical_average_rank(list(inputs.samples.items()))
    else:
        # samples of another size: aggregate the pairwise matrix with N weights
        size = len(inputs.records)
        matrix = np.full((size, size), 0.5)
        for i, j in _pairs(inputs):
            matrix[i, j] = empirical_csi(inputs.samples[inputs.ids[i]], inputs.samples[inputs.ids[j]])
            matrix[j, i] = 1.0 - matrix[i, j]
        real = rank_from_csi(inputs.ids, inputs.weights, matrix, "monte-carlo")
    for jid in inputs.ids:
        plot.add(jid, real.ranks[jid], estimated.ranks[jid])


_PLOTTERS = {
    "h": (_plot_h, "h_index"),
    "csi": (_plot_csi, "csi"),
    "group-csi": (_plot_group_csi, "group_csi"),
    "kappa": (_plot_kappa, "kappa"),
    "rank": (_plot_rank, "average_rank"),
}


def plot_data(figure, settings, seed, citations=None, records=None, source=None,
              k_t=None, k_r=None, threshold=None, trials=None, samples=None):
    """Points comparing the real (or simulated) value of an indicator with its estimate.

    With citations the estimate comes from each journal's (m, v). With
    records each journal is replaced by a synthetic sample of N papers
    (or `samples` papers) drawn from its log moments.
    """
    if figure not in _PLOTTERS:
        raise UsageError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    if (citations is None) == (records is None):
        raise UsageError("plot-data needs exactly one of citations or summary input")
    if isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed}")

    if citations is not None:
        _require_journals(citations, "plot-data")
        plot_records = sorted(records_from_citations(citations, keep_log=False), key=by_id)
        inputs = _PlotInputs(plot_records, dict(citations), [rec.n_papers for rec in plot_records],
                             MomentSource.DERIVED, synthetic=False)
        mode, x_axis = "citations", "empirical"
    else:
        _require_journals(records, "plot-data")
        plot_records = sorted(records, key=by_id)
        chosen = MomentSource(source or settings.moment_source)
        sizes = {rec.id: (samples or rec.n_papers) for rec in plot_records}
        drawn = synthetic_journals(plot_records, None, seed, settings.simulation["discretize"],
                                   source=chosen, sizes=sizes)
        inputs = _PlotInputs(plot_records, drawn, [rec.n_papers for rec in plot_records], chosen, synthetic=True)
        mode, x_axis = "summary", "simulated"

    options = {
        "seed": seed,
        "k_t": k_t or settings.default_k,
        "k_r": k_r or settings.default_k,
        "threshold": threshold or settings.threshold,
        "trials": trials or settings.simulation["trials"],
        "kappa_cap": settings.kappa_cap,
        "kappa_max": settings.simulation["kappa_max"],
        "empirical_kappa_cap": settings.simulation["empirical_kappa_cap"],
        "solver": _solver_options(settings),
    }
    plotter, indicator = _PLOTTERS[figure]
    plot = PlotData(figure, mode, seed, f"{x_axis}_{indicator}", f"estimated_{indicator}")
    if figure in ("group-csi", "kappa"):
        plot.parameters.update(trials=options["trials"])
    if figure == "group-csi":
        plot.parameters.update(k_t=options["k_t"], k_r=options["k_r"])
    if figure == "kappa":
        plot.parameters.update(threshold=options["threshold"])

    plotter(inputs, plot, options)
    logger.info(f"plot-data {figure}: {len(plot.points)} points")
    return plot
