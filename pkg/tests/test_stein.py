"""Characterization pairs, moment identities, equation solutions and their
certified sup-norm bounds."""

import random
from fractions import Fraction as F

import pytest

from rankdist import ensembles as ens
from rankdist import stein
from rankdist.ensembles import Ensemble, finite_pmf, limit_pmf, uniform
from rankdist.qseries import IntervalRat, interval_sum

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


def valid_sizes(e, n_max, n_min=1):
    for n in range(n_min, n_max + 1):
        try:
            ens.check_parity(e, n)
            yield n
        except ens.ParityError:
            continue


class TestRegistration:
    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    @pytest.mark.parametrize("q", [2, 3, 4, 5])
    def test_finite_defect_zero(self, e, q):
        for n in valid_sizes(e, 12):
            pair = stein.stein_pair(e, q, n, check=False)
            pmf = finite_pmf(e, q, n)
            assert all(d == 0 for d in stein.registration_defects(pair, pmf))

    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    def test_limit_registration_within_intervals(self, e):
        for q in (2, 3):
            stein.stein_pair(e, q, stein.LIMIT)  # raises on failure

    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    def test_bounded_support_endpoint(self, e):
        for q in (2, 3):
            for n in valid_sizes(e, 9):
                pair = stein.stein_pair(e, q, n, check=False)
                assert pair.a(pair.support_max + 1) == 0

    def test_limit_pair_examples(self):
        pair = stein.stein_pair(uniform(0), 2, stein.LIMIT, check=False)
        assert pair.a(5) == 2
        assert pair.b(3) == (2**3 - 1) ** 2

    def test_symmetric_indicator_value(self):
        pair = stein.stein_pair(Ensemble(ens.SYMMETRIC), 2, 3, check=False)
        assert pair.a(2) == F(3, 4)  # indicator active when n-k+1 is even
        assert pair.a(1) == 1


class TestCharacterization:
    def test_symmetric_indicator_fn(self):
        pair = stein.stein_pair(Ensemble(ens.SYMMETRIC), 2, 4, check=False)
        pmf = finite_pmf(Ensemble(ens.SYMMETRIC), 2, 4)
        defect = stein.characterization_check(
            pair, pmf, [lambda x: F(1 if x == 2 else 0)]
        )
        assert defect == 0

    def test_zero_function(self):
        pair = stein.stein_pair(uniform(0), 2, 5, check=False)
        pmf = finite_pmf(uniform(0), 2, 5)
        assert stein.characterization_check(pair, pmf, [lambda x: F(0)]) == 0

    def test_exponential_fn(self):
        pair = stein.stein_pair(uniform(1), 3, 5, check=False)
        pmf = finite_pmf(uniform(1), 3, 5)
        assert stein.characterization_check(pair, pmf, [lambda x: F(3) ** x]) == 0

    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    def test_full_trial_family(self, e):
        for q, n in [(2, 4), (3, 3)]:
            for nn in valid_sizes(e, n + 1, n):
                pair = stein.stein_pair(e, q, nn, check=False)
                assert stein.characterization_check(pair, finite_pmf(e, q, nn)) == 0

    def test_poisson_sanity_instance(self):
        pair, probs = stein.truncated_poisson(F(3, 2), 9)
        assert sum(probs) == 1
        assert stein.characterization_check(pair, probs) == 0


class TestMoments:
    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    @pytest.mark.parametrize("q", [2, 3, 4, 5])
    def test_grid_exact(self, e, q):
        for n in valid_sizes(e, 12):
            checks = stein.moment_identities(e, q, n)
            assert checks and all(c.passed for c in checks)

    def test_uniform_n1_value(self):
        c = stein.moment_identities(uniform(0), 2, 1)[0]
        assert c.lhs == F(3, 2) == 2 - F(1, 2)

    def test_zerodiag_even_value(self):
        c = stein.moment_identities(Ensemble(ens.ZERODIAG_EVEN), 2, 4)[0]
        assert c.lhs == F(23, 8)

    def test_hermitian_bound_and_identity(self):
        checks = stein.moment_identities(Ensemble(ens.HERMITIAN), 3, 1)
        upper = next(c for c in checks if c.relation == "le")
        assert upper.lhs == F(5, 3) and upper.rhs == 2 + F(1, 3)
        exact = next(c for c in checks if c.relation == "eq")
        assert exact.passed


def _cross_form(pair, limit, in_head, in_tail, k):
    """f(k+1) from arbitrary head/tail masses of the target set."""
    head = limit.head_mass(k)
    return (in_head * limit.tail_mass(k) - in_tail * head) / (
        limit.probs[k] * pair.a(k + 1)
    )


class TestSolutions:
    @pytest.fixture(scope="class")
    def setup(self):
        pair = stein.stein_pair(uniform(0), 2, stein.LIMIT, check=False)
        limit = limit_pmf(uniform(0), 2, trunc_k=24)
        return pair, limit

    def test_empty_target_is_zero(self, setup):
        pair, limit = setup
        sol = stein.stein_solution(pair, limit, frozenset(), 10)
        assert all(v.contains(0) and v.width() < F(1, 2**50) for v in sol.values)

    def test_singleton_zero_value(self, setup):
        pair, limit = setup
        sol = stein.stein_solution(pair, limit, {0}, 10)
        expected = (1 - limit.probs[0]) / 2  # (1 - p_0)/a(1)
        assert sol.values[1].intersects(expected)

    def test_complement_negates(self, setup):
        pair, limit = setup
        A = frozenset({0, 2, 5})
        sol = stein.stein_solution(pair, limit, A, 12)
        for k in range(13):
            head_A = interval_sum(limit.probs[j] for j in sorted(A) if j <= k)
            head_Ac = limit.head_mass(k) - head_A
            tail_A = interval_sum(limit.probs[j] for j in sorted(A) if j > k)
            tail_Ac = limit.tail_mass(k) - tail_A
            f_Ac = _cross_form(pair, limit, head_Ac, tail_Ac, k)
            assert f_Ac.intersects(-sol.values[k + 1])

    def test_routes_intersect_to_k20(self, setup):
        pair, limit = setup
        # stein_solution raises if the two routes ever fail to intersect
        stein.stein_solution(pair, limit, {1, 3, 4, 7, 10}, 20)

    def test_equation_residual(self, setup):
        pair, limit = setup
        A = frozenset({0, 3, 4})
        k_max = 14
        sol = stein.stein_solution(pair, limit, A, k_max)
        p_A = interval_sum(limit.probs[j] for j in sorted(A))
        for k in range(k_max):
            lhs = sol.values[k + 1] * pair.a(k + 1) - sol.values[k] * pair.b(k)
            rhs = IntervalRat.point(1 if k in A else 0) - p_A
            assert lhs.intersects(rhs)

    def test_target_outside_range_rejected(self, setup):
        pair, limit = setup
        with pytest.raises(ValueError):
            stein.stein_solution(pair, limit, {30}, 10)


class TestSupNorm:
    @pytest.mark.parametrize("e", ALL_KINDS, ids=lambda e: e.label())
    def test_dominates_random_targets(self, e):
        q = 3
        pair = stein.stein_pair(e, q, stein.LIMIT, check=False)
        limit = limit_pmf(e, q, trunc_k=12)
        k_max = 10
        sups = [stein.stein_sup_norm(pair, limit, k) for k in range(k_max + 1)]
        rng = random.Random(20240 + hash(e.kind) % 1000)
        for _ in range(200):
            A = frozenset(j for j in range(k_max + 1) if rng.random() < 0.5)
            sol = stein.stein_solution(pair, limit, A, k_max)
            for k in range(k_max + 1):
                assert abs(sol.values[k + 1]).lo <= sups[k].hi

    def test_generic_f1_bound(self):
        pair = stein.stein_pair(uniform(0), 2, stein.LIMIT, check=False)
        limit = limit_pmf(uniform(0), 2, trunc_k=12)
        sup0 = stein.stein_sup_norm(pair, limit, 0)
        generic = stein.fA1_generic_bound(pair, limit)
        assert sup0.lo <= generic.hi

    def test_vanishing_tail_drives_sup_to_zero(self):
        pair = stein.stein_pair(uniform(0), 2, stein.LIMIT, check=False)
        limit = limit_pmf(uniform(0), 2, trunc_k=12)
        sups = [stein.stein_sup_norm(pair, limit, k).hi for k in (4, 8, 12)]
        assert sups[0] > sups[1] > sups[2]
        assert sups[2] < F(1, 2**20)  # decays like a(k+1)/b(k+1) ~ q^(-2k)

    def test_uniform_m0_constant(self):
        pair = stein.stein_pair(uniform(0), 2, stein.LIMIT, check=False)
        limit = limit_pmf(uniform(0), 2, trunc_k=20)
        bound = F(1, 4) + F(1, 8)
        for k in range(21):
            assert stein.stein_sup_norm(pair, limit, k).hi <= bound

    def test_hermitian_constants(self):
        pair = stein.stein_pair(Ensemble(ens.HERMITIAN), 3, stein.LIMIT, check=False)
        limit = limit_pmf(Ensemble(ens.HERMITIAN), 3, trunc_k=20)
        for k in range(1, 21):
            s = stein.stein_sup_norm(pair, limit, k).hi
            assert s <= F(18, 10) / 3**4
            assert s <= F(14, 10) / 3**4  # sharper variant available from q=3


class TestVerifySolutionBounds:
    @pytest.mark.parametrize(
        "e", [uniform(2), Ensemble(ens.ZERODIAG_ODD), Ensemble(ens.SKEWCENTRO_ODD)],
        ids=lambda e: e.label(),
    )
    def test_spot_ensembles(self, e):
        checks = stein.verify_solution_bounds(e, [2, 5], k_max=16)
        assert checks and all(c.passed for c in checks)
        assert any(c.k is None for c in checks)  # tail argument present

    def test_report_shape(self):
        checks = stein.verify_solution_bounds(uniform(0), [2], k_max=6)
        rec = checks[0].to_jsonable()
        assert set(rec) == {"check", "ensemble", "q", "k", "sup_hi", "constant", "passed"}
