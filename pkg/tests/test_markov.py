"""Rank-evolution chain: exact transitions, stationarity, simulation."""

from fractions import Fraction as F

import pytest

from rankdist import markov as mkv


class TestBuildChain:
    def test_q2_n1_alternating(self):
        chain = mkv.build_chain(2, 1, 0)
        assert chain.transitions[0][1] == 1
        assert chain.transitions[1][0] == 1

    def test_boundary_up_rate_vanishes(self):
        # the up factor q^(n-i)-1 is zero at i=n, so the last row has no
        # mass beyond the support
        chain = mkv.build_chain(3, 4, 1)
        last = chain.transitions[4]
        assert sum(last) == 1 and last[4] + last[3] == 1

    @pytest.mark.parametrize("q", [2, 3, 4, 5])
    def test_rows_sum_to_one_and_nonnegative(self, q):
        for n in range(1, 13):
            for m in range(0, 4):
                chain = mkv.build_chain(q, n, m)
                for row in chain.transitions:
                    assert sum(row) == 1
                    assert all(x >= 0 for x in row)

    def test_tridiagonal(self):
        chain = mkv.build_chain(2, 5, 0)
        for i, row in enumerate(chain.transitions):
            for j, x in enumerate(row):
                if abs(i - j) > 1:
                    assert x == 0

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            mkv.build_chain(1, 2, 0)
        with pytest.raises(ValueError):
            mkv.build_chain(2, 0, 0)


class TestStationarity:
    @pytest.mark.parametrize("q,n,m", [(2, 3, 0), (3, 5, 2), (5, 8, 3), (4, 12, 1)])
    def test_defect_exactly_zero(self, q, n, m):
        report = mkv.verify_stationarity(mkv.build_chain(q, n, m))
        assert report.exact
        assert all(d == 0 for d in report.defects)

    def test_detailed_balance_n1(self):
        report = mkv.verify_stationarity(mkv.build_chain(2, 1, 0))
        assert report.detailed_balance

    def test_report_json(self):
        rec = mkv.verify_stationarity(mkv.build_chain(2, 2, 1)).to_jsonable()
        assert rec["stationarity_defect"] == "0" and rec["passed"]


class TestConvergence:
    def test_tv_to_stationary_decreasing(self):
        tvs = mkv.chain_tv_to_stationary(mkv.build_chain(2, 4, 0), 50)
        assert len(tvs) == 51
        assert all(tvs[i + 1] <= tvs[i] for i in range(50))
        assert tvs[50] < F(1, 10**6)


class TestSimulation:
    def test_zero_steps_rejected(self):
        with pytest.raises(ValueError):
            mkv.simulate_chain_vs_matrix(2, 3, 0, 0, seed=1)

    def test_q2_n4(self):
        rep = mkv.simulate_chain_vs_matrix(2, 4, 0, 20000, seed=11)
        assert rep.tv_chain < 0.05 and rep.tv_matrix < 0.05

    def test_q3_n3_m1(self):
        rep = mkv.simulate_chain_vs_matrix(3, 3, 1, 20000, seed=11)
        assert rep.tv_chain < 0.05 and rep.tv_matrix < 0.05

    def test_deterministic(self):
        a = mkv.simulate_chain_vs_matrix(2, 3, 0, 5000, seed=4)
        b = mkv.simulate_chain_vs_matrix(2, 3, 0, 5000, seed=4)
        assert a == b

    def test_json_keys(self):
        rec = mkv.simulate_chain_vs_matrix(2, 2, 0, 2000, seed=1).to_jsonable()
        assert set(rec) == {
            "q",
            "n",
            "m",
            "steps",
            "burn_in",
            "seed",
            "stationarity_defect",
            "empirical_tv_chain",
            "empirical_tv_matrix",
        }
