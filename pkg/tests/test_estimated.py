import itertools
import math

import numpy as np
import pytest

from journal_indicators.errors import DegenerateComparisonError, DomainError, ResultIdentityError
from journal_indicators.estimated import (
    JournalRecord,
    KappaStatus,
    MomentSource,
    RankTable,
    average_rank,
    compare,
    coupled_size,
    csi,
    estimate_h_index,
    estimate_indicators,
    group_csi,
    id_key,
    journal_impact_factor,
    min_representative_size,
)
from journal_indicators.lognormal import ArithMoments, LogMoments, implied_log_mean, lognormal_ccdf


def record(jid, n, m, v, mu=None, sigma=None):
    log = None if mu is None else LogMoments(mu, sigma)
    return JournalRecord(jid, f"journal {jid}", n, ArithMoments(m, v), log)


class TestJournalRecord:

    def test_rejects_empty_journal(self):
        with pytest.raises(DomainError):
            record("x", 0, 2.0, 1.0)

    def test_measured_falls_back_to_derived(self):
        rec = record("x", 10, 4.01, 4.35)
        assert rec.log_moments(MomentSource.MEASURED) == rec.log_moments(MomentSource.DERIVED)

    def test_measured_uses_supplied_columns(self, journals):
        nejm = journals["NEW ENGL J MED"]
        assert nejm.log_moments("measured") == LogMoments(3.32, 1.48)
        assert nejm.log_moments("derived") != LogMoments(3.32, 1.48)

    def test_impact_factor_is_mean(self, journals):
        assert journal_impact_factor(journals["LANCET"]) == 45.02

    def test_id_key_orders_numbers_numerically(self):
        assert sorted(["10", "2", "b", "1", "a"], key=id_key) == ["1", "2", "10", "a", "b"]


class TestHIndex:

    def test_nejm(self, journals):
        h = estimate_h_index(journals["NEW ENGL J MED"])
        assert h.h_real == pytest.approx(113, abs=1)

    def test_matches_integer_scan(self, journals):
        nejm = journals["NEW ENGL J MED"]
        lm = nejm.log_moments()
        crossing = max(h for h in range(nejm.n_papers + 1)
                       if h <= nejm.n_papers * lognormal_ccdf(h + 1.0, lm))
        assert estimate_h_index(nejm).h_int == crossing

    def test_fixed_point_residual(self, medical):
        for rec in medical:
            h = estimate_h_index(rec)
            lm = rec.log_moments()
            assert abs(h.h_real - rec.n_papers * lognormal_ccdf(h.h_real + 1.0, lm)) <= 1e-6

    def test_random_journals_match_scan(self):
        rng = np.random.default_rng(31)
        for n, m, cv in zip(rng.integers(1, 2001, 1000), rng.uniform(1.0, 100.0, 1000), rng.uniform(0.2, 3.0, 1000)):
            rec = record("x", int(n), m, m * cv)
            lm = rec.log_moments()
            h = estimate_h_index(rec)
            assert abs(h.h_real - n * lognormal_ccdf(h.h_real + 1.0, lm)) <= 1e-6
            grid = np.arange(n + 1)
            assert h.h_int == grid[grid <= n * lognormal_ccdf(grid + 1.0, lm)].max()

    def test_single_paper_bounded(self):
        h = estimate_h_index(record("x", 1, 60.0, 80.0))
        assert 0.0 <= h.h_real <= 1.0

    def test_point_mass(self):
        rec = record("x", 200, 51.0, 0.0, math.log(51.0), 0.0)
        h = estimate_h_index(rec)
        assert h.h_real == 50.0
        assert h.h_int == 50

    def test_point_mass_capped_by_size(self):
        rec = record("x", 20, 51.0, 0.0, math.log(51.0), 0.0)
        assert estimate_h_index(rec).h_int == 20

    def test_indicator_table(self, medical):
        rows = estimate_indicators(medical).to_rows()
        assert [row["id"] for row in rows] == [str(i) for i in range(1, 31)]
        assert rows[0]["jif"] == 65.91
        assert rows[0]["h_int"] == 113


class TestCsi:

    def test_equal_log_means(self):
        assert csi(LogMoments(3.32, 1.48), LogMoments(3.32, 0.97)) == 0.5

    def test_nejm_vs_ann_intern_med(self):
        value = csi(LogMoments(3.32, 1.48), LogMoments(2.46, 0.89))
        oracle = 0.5 * (1 + math.erf(0.86 / math.sqrt(1.48 ** 2 + 0.89 ** 2) / math.sqrt(2)))
        assert value == pytest.approx(0.691, abs=1e-3)
        assert value == pytest.approx(oracle, abs=1e-12)

    def test_complementary_over_table(self, medical):
        logs = [rec.log_moments() for rec in medical]
        pairs = list(itertools.combinations(logs, 2))
        assert len(pairs) == 435
        for t, r in pairs:
            assert csi(t, r) + csi(r, t) == pytest.approx(1.0, abs=1e-12)

    def test_point_masses(self):
        assert csi(LogMoments(2.0, 0.0), LogMoments(1.0, 0.0)) == 1.0
        assert csi(LogMoments(1.0, 0.0), LogMoments(2.0, 0.0)) == 0.0
        with pytest.raises(DegenerateComparisonError):
            csi(LogMoments(1.0, 0.0), LogMoments(1.0, 0.0))

    def test_increasing_in_log_mean(self):
        for r, sigma_t in ((LogMoments(2.46, 0.89), 1.48), (LogMoments(1.02, 0.82), 0.3), (LogMoments(0.5, 0.0), 0.7)):
            spread = math.hypot(sigma_t, r.sigma_ln)
            values = [csi(LogMoments(mu, sigma_t), r) for mu in r.mu_ln + spread * np.linspace(-5, 5, 201)]
            assert all(a < b for a, b in zip(values, values[1:]))

    def test_group_nondecreasing_in_k_when_t_leads(self):
        # t ahead in both log mean and spread: the score only grows with k
        rng = np.random.default_rng(6)
        for _ in range(200):
            mu_r, sigma_r = rng.uniform(0.0, 4.0), rng.uniform(0.1, 2.0)
            t = LogMoments(mu_r + rng.uniform(0.01, 1.0), sigma_r + rng.uniform(0.0, 1.0))
            r = LogMoments(mu_r, sigma_r)
            values = [group_csi(t, k, r, k) for k in range(1, 101)]
            assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    def test_group_can_dip_against_a_wider_journal(self):
        # narrow t, wide r, t ahead in implied mean only: success falls from k=1 to k=2, then recovers
        t, r = LogMoments(1.22495, 0.01), LogMoments(0.0, 1.5)
        assert implied_log_mean(t) > implied_log_mean(r)
        assert group_csi(t, 2, r, 2) < group_csi(t, 1, r, 1) - 0.02
        assert group_csi(t, 10 ** 4, r, 10 ** 4) > 0.99

    def test_group_single_draw_reduces_to_csi(self):
        t, r = LogMoments(3.32, 1.48), LogMoments(2.46, 0.89)
        assert group_csi(t, 1, r, 1) == pytest.approx(csi(t, r), abs=1e-12)

    def test_group_large_k(self):
        assert group_csi(LogMoments(3.32, 1.48), 100, LogMoments(2.46, 0.89), 100) > 0.999


class TestMinRepresentativeSize:

    def test_identical_journals_unreachable(self, journals):
        lancet = journals["LANCET"]
        result = min_representative_size(lancet, lancet)
        assert not result.reachable
        assert result.status is KappaStatus.UNREACHABLE
        assert result.kappa_t is None and result.kappa_r is None

    def test_one_sample_already_sufficient(self):
        t = record("t", 100, 150.0, 15.0, 5.0, 0.1)
        r = record("r", 100, 3.0, 0.3, 1.0, 0.1)
        result = min_representative_size(t, r)
        assert (result.kappa_t, result.kappa_r) == (1, 1)
        assert result.success_at_kappa >= 0.9

    def test_nejm_vs_lancet_is_minimal(self, journals):
        t, r = journals["NEW ENGL J MED"], journals["LANCET"]
        result = min_representative_size(t, r, 0.9, source=MomentSource.DERIVED)
        assert result.reachable and result.status is KappaStatus.REACHED
        ratio = r.arith.v / t.arith.v
        assert result.kappa_r == coupled_size(result.kappa_t, ratio)

        lm_t, lm_r = t.log_moments("derived"), r.log_moments("derived")
        assert group_csi(lm_t, result.kappa_t, lm_r, result.kappa_r) >= 0.9
        below = result.kappa_t - 1
        assert group_csi(lm_t, below, lm_r, coupled_size(below, ratio)) < 0.9

        first_passing = next(k for k in itertools.count(1)
                             if group_csi(lm_t, k, lm_r, coupled_size(k, ratio)) >= 0.9)
        assert abs(result.kappa_t - first_passing) <= 1

    def test_weaker_journal_unreachable(self, journals):
        result = min_representative_size(journals["LANCET"], journals["NEW ENGL J MED"],
                                         source=MomentSource.DERIVED)
        assert result.status is KappaStatus.UNREACHABLE

    def test_cap_exceeded(self, journals):
        t, r = journals["NEW ENGL J MED"], journals["LANCET"]
        result = min_representative_size(t, r, 0.9, cap=4, source=MomentSource.DERIVED)
        assert result.status is KappaStatus.CAP_EXCEEDED
        assert not result.reachable

    @pytest.mark.parametrize("threshold", [0.5, 1.0, 0.3])
    def test_threshold_range(self, journals, threshold):
        with pytest.raises(DomainError):
            min_representative_size(journals["LANCET"], journals["BMC MED"], threshold)

    def test_coupled_size_rounding(self):
        assert coupled_size(3, 0.5) == 2
        assert coupled_size(1, 0.1) == 1
        assert coupled_size(10, 0.59) == 6


class TestCompare:

    def test_self_comparison(self, journals):
        lancet = journals["LANCET"]
        result = compare(lancet, lancet)
        assert result.csi == 0.5
        assert result.group_csi == pytest.approx(0.5)
        assert result.kappa.status is KappaStatus.UNREACHABLE

    def test_rows(self, journals):
        result = compare(journals["NEW ENGL J MED"], journals["ANN INTERN MED"])
        row, = result.to_rows()
        assert row["t"] == "1" and row["r"] == "4"
        assert row["csi"] == pytest.approx(0.691, abs=1e-3)
        assert row["k_t"] == row["k_r"] == 10
        assert row["kappa_status"] == "reached"


class TestAverageRank:

    def test_single_journal(self):
        table = average_rank([record("a", 50, 5.0, 4.0)])
        assert table.ranks == {"a": 0.5}

    def test_identical_journals(self):
        table = average_rank([record("a", 50, 5.0, 4.0), record("b", 500, 5.0, 4.0)])
        assert table.ranks["a"] == pytest.approx(0.5)
        assert table.ranks["b"] == pytest.approx(0.5)

    def test_medical_identity_and_leader(self, medical):
        table = average_rank(medical, MomentSource.DERIVED)
        assert table.weighted_mean() == pytest.approx(0.5, abs=1e-12)
        table.check_identity(1e-12)
        assert table.ordered()[0][0] == "1"

    def test_rows_sorted_descending(self, medical):
        rows = average_rank(medical).to_rows()
        assert len(rows) == 30
        assert [row["position"] for row in rows] == list(range(1, 31))
        ranks = [row["rank"] for row in rows]
        assert ranks == sorted(ranks, reverse=True)

    def test_identity_on_random_sets(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            size = int(rng.integers(1, 16))
            journals = []
            for i in range(size):
                m = rng.uniform(1.0, 80.0)
                journals.append(record(str(i), int(rng.integers(1, 3000)), m, m * rng.uniform(0.0, 3.0)))
            table = average_rank(journals, MomentSource.DERIVED)
            assert table.weighted_mean() == pytest.approx(0.5, abs=1e-12)
            table.check_identity(1e-12)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DomainError, match="'a'"):
            average_rank([record("a", 50, 5.0, 4.0), record("b", 20, 3.0, 1.0), record("a", 60, 7.0, 2.0)])

    def test_broken_identity_detected(self):
        table = RankTable(ranks={"a": 0.9, "b": 0.9}, weights={"a": 1, "b": 1})
        with pytest.raises(ResultIdentityError):
            table.check_identity()

    def test_ties_ordered_by_id(self):
        table = RankTable(ranks={"10": 0.5, "9": 0.5}, weights={"10": 1, "9": 1})
        assert [jid for jid, _ in table.ordered()] == ["9", "10"]

    def test_empty_set_rejected(self):
        with pytest.raises(DomainError):
            average_rank([])
