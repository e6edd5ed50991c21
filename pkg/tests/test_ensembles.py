"""Finite and limiting rank-deficiency pmfs and their oracles."""

from fractions import Fraction as F

import pytest

from rankdist import ensembles as ens
from rankdist import gfmatrix as gfm
from rankdist import tvbounds as tvb
from rankdist.ensembles import (
    Ensemble,
    ParityError,
    finite_pmf,
    limit_pmf,
    rank_count_qbinomial,
    skewcentro_even_reduction,
    support_max,
    uniform,
)
from rankdist.qseries import QProductSpec, infinite_qproduct, interval_sum

ALL_KINDS = [
    uniform(0),
    uniform(1),
    uniform(2),
    Ensemble(ens.SYMMETRIC),
    Ensemble(ens.ZERODIAG_EVEN),
    Ensemble(ens.ZERODIAG_ODD),
    Ensemble(ens.SKEWCENTRO_EVEN),
    Ensemble(ens.SKEWCENTRO_ODD),
    Ensemble(ens.HERMITIAN),
]


def valid_sizes(e: Ensemble, n_max: int, n_min: int = 0):
    for n in range(n_min, n_max + 1):
        try:
            ens.check_parity(e, n)
        except ParityError:
            continue
        yield n


class TestEnsembleId:
    def test_parity_enforced(self):
        with pytest.raises(ParityError):
            finite_pmf(Ensemble(ens.ZERODIAG_EVEN), 2, 3)
        with pytest.raises(ParityError):
            finite_pmf(Ensemble(ens.SKEWCENTRO_ODD), 3, 4)

    def test_negative_n(self):
        with pytest.raises(ValueError):
            finite_pmf(uniform(0), 2, -1)

    def test_m_only_for_uniform(self):
        with pytest.raises(ValueError):
            Ensemble(ens.SYMMETRIC, m=1)

    def test_support_max(self):
        assert support_max(uniform(3), 7) == 7
        assert support_max(Ensemble(ens.SYMMETRIC), 7) == 7
        assert support_max(Ensemble(ens.ZERODIAG_EVEN), 8) == 4
        assert support_max(Ensemble(ens.ZERODIAG_ODD), 7) == 3
        assert support_max(Ensemble(ens.SKEWCENTRO_EVEN), 8) == 4
        assert support_max(Ensemble(ens.SKEWCENTRO_ODD), 7) == 3
        assert support_max(Ensemble(ens.HERMITIAN), 7) == 7

    def test_field_realizable(self):
        assert ens.field_realizable(uniform(0), 4)
        assert ens.field_realizable(Ensemble(ens.ZERODIAG_EVEN), 8)
        assert ens.field_realizable(Ensemble(ens.HERMITIAN), 3)
        assert not ens.field_realizable(Ensemble(ens.HERMITIAN), 2)
        assert not ens.field_realizable(Ensemble(ens.SKEWCENTRO_ODD), 4)
        assert not ens.field_realizable(uniform(0), 6)


class TestFinitePmf:
    def test_uniform_2x2_gf2(self):
        pmf = finite_pmf(uniform(0), 2, 2)
        assert pmf.probs == (F(3, 8), F(9, 16), F(1, 16))

    def test_symmetric_2x2_gf2(self):
        pmf = finite_pmf(Ensemble(ens.SYMMETRIC), 2, 2)
        assert pmf.probs == (F(1, 2), F(3, 8), F(1, 8))

    def test_zerodiag_2x2_gf2(self):
        pmf = finite_pmf(Ensemble(ens.ZERODIAG_EVEN), 2, 2)
        assert pmf.probs == (F(1, 2), F(1, 2))

    def test_skewcentro_1x1(self):
        pmf = finite_pmf(Ensemble(ens.SKEWCENTRO_ODD), 3, 1)
        assert pmf.probs == (F(1),)

    def test_hermitian_1x1_gf9(self):
        pmf = finite_pmf(Ensemble(ens.HERMITIAN), 3, 1)
        assert pmf.probs == (F(2, 3), F(1, 3))

    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    @pytest.mark.parametrize("q", [2, 3, 4, 5])
    def test_sums_to_one_exactly(self, e, q):
        for n in valid_sizes(e, 12):
            pmf = finite_pmf(e, q, n)
            assert sum(pmf.probs) == 1
            assert all(p >= 0 for p in pmf.probs)
            assert len(pmf.probs) == support_max(e, n) + 1

    def test_not_monotone_in_k(self):
        # at m=0, n=2 the mass rises then falls; nothing may assume otherwise
        pmf = finite_pmf(uniform(0), 2, 2)
        assert pmf.probs[0] < pmf.probs[1] > pmf.probs[2]

    def test_json_shape(self):
        d = finite_pmf(uniform(1), 2, 2).to_jsonable()
        assert d["probs"][0] == {"k": 0, "num": "21", "den": "32"}
        assert d["field_realizable"] is True


class TestLimitPmf:
    def test_uniform_p0(self):
        lim = limit_pmf(uniform(0), 2, trunc_k=8)
        direct = infinite_qproduct(QProductSpec(2, trunc=300))
        assert lim.probs[0].intersects(direct)
        # 0.2887880950866023 < p_0 < 0.2887880950866025
        assert lim.probs[0].hi < F(2887880950866025, 10**16)
        assert lim.probs[0].lo > F(2887880950866023, 10**16)

    def test_symmetric_p0_lower_bound(self):
        lim = limit_pmf(Ensemble(ens.SYMMETRIC), 2, trunc_k=8)
        assert lim.probs[0].lo >= F(3, 8)

    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    @pytest.mark.parametrize("q", [2, 3, 5])
    def test_normalization_enclosed(self, e, q):
        lim = limit_pmf(e, q, trunc_k=10)
        total = interval_sum(lim.probs) + lim.tail
        assert total.contains(1)

    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    def test_positive_lower_bounds(self, e):
        lim = limit_pmf(e, 2, trunc_k=8)
        assert all(p.lo > 0 for p in lim.probs)
        assert lim.tail.lo > 0

    def test_trunc_k_too_small_rejected(self):
        with pytest.raises(ValueError):
            limit_pmf(uniform(0), 2, trunc_k=3)

    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    def test_finite_pmf_approaches_limit(self, e):
        """Pointwise gap to the limit is bounded by twice the certified
        distance window and shrinks as n grows."""
        q = 2 if e.kind not in (ens.SKEWCENTRO_EVEN, ens.SKEWCENTRO_ODD, ens.HERMITIAN) else 3
        lim = limit_pmf(e, q, trunc_k=12)
        prev_gap = None
        for n in (12, 16, 20):
            n_adj = next(m for m in (n, n + 1) if _parity_ok(e, m))
            pmf = finite_pmf(e, q, n_adj)
            _, hi = tvb.theorem_window(e, q, n_adj)
            for k in range(4):
                iv = lim.probs[k]
                gap = max(F(0), iv.lo - pmf.probs[k], pmf.probs[k] - iv.hi)
                assert gap <= 2 * hi
            gap0 = abs(pmf.probs[0] - lim.probs[0].lo)
            if prev_gap is not None:
                assert gap0 < prev_gap
            prev_gap = gap0


def _parity_ok(e, n):
    try:
        ens.check_parity(e, n)
        return True
    except ParityError:
        return False


class TestRankCountOracle:
    def test_2x2_full_rank(self):
        assert rank_count_qbinomial(2, 2, 2, 2) == F(6, 16)

    def test_1x1_zero(self):
        assert rank_count_qbinomial(1, 1, 0, 3) == F(1, 3)

    def test_cross_oracle_3x4(self):
        assert rank_count_qbinomial(3, 4, 2, 2) == finite_pmf(uniform(1), 2, 3).probs[1]

    def test_matches_product_pmf(self):
        for q in (2, 3, 4):
            for n in range(0, 9):
                for m in range(0, 4):
                    pmf = finite_pmf(uniform(m), q, n)
                    for k in range(n + 1):
                        assert rank_count_qbinomial(n, n + m, n - k, q) == pmf.probs[k]

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            rank_count_qbinomial(2, 2, 3, 2)


class TestSkewCentroReduction:
    def test_q2_n4(self):
        w = skewcentro_even_reduction(2, 4)
        assert w.equal and [row[0] for row in w.rows] == [0, 1, 2]

    def test_q3_n2(self):
        assert skewcentro_even_reduction(3, 2).equal

    def test_empty_matrix(self):
        w = skewcentro_even_reduction(2, 0)
        assert w.equal and w.rows[0][1] == 1

    @pytest.mark.parametrize("q", [3, 5])
    def test_term_exact_up_to_12(self, q):
        for n in range(0, 13, 2):
            assert skewcentro_even_reduction(q, n).equal

    def test_odd_n_rejected(self):
        with pytest.raises(ParityError):
            skewcentro_even_reduction(2, 3)


class TestEnumerationOracle:
    CASES = [
        (uniform(0), 2, 2),
        (uniform(0), 2, 3),
        (uniform(1), 2, 3),
        (uniform(0), 3, 2),
        (Ensemble(ens.SYMMETRIC), 2, 3),
        (Ensemble(ens.SYMMETRIC), 3, 2),
        (Ensemble(ens.ZERODIAG_EVEN), 2, 4),
        (Ensemble(ens.ZERODIAG_ODD), 2, 3),
        (Ensemble(ens.ZERODIAG_ODD), 3, 3),
        (Ensemble(ens.SKEWCENTRO_EVEN), 3, 4),
        (Ensemble(ens.SKEWCENTRO_ODD), 3, 3),
        (Ensemble(ens.HERMITIAN), 3, 2),
    ]

    @pytest.mark.parametrize("e,q,n", CASES, ids=lambda v: str(v))
    def test_exhaustive_counts_match(self, e, q, n):
        field = gfm.field_for(e, q)
        counts = gfm.enumerate_ensemble(e, field, n)
        total = sum(counts.values())
        pmf = finite_pmf(e, q, n)
        tallied = {}
        for r, c in counts.items():
            tallied[gfm.q_statistic(e, n, r)] = F(c, total)
        for k in pmf.support:
            assert tallied.get(k, F(0)) == pmf.probs[k]
