"""Characterization pairs (a, b) with a(k)p_{k-1} = b(k)p_k, the induced
recursive equation a(k+1)f(k+1) - b(k)f(k) = h(k) - E h(Q), its solutions for
indicator targets, and certified bounds on their sup norms.

Every distribution in `ensembles` is registered here against its pair, the
closed-form moment identities are checked to defect exactly zero, and the
solution-norm constants that drive the distance bounds are certified with
interval arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import ensembles as ens
from .qseries import IntervalRat, interval_sum

# sentinel for "the limiting distribution" in place of a finite n
LIMIT = None


@dataclass(frozen=True)
class SteinPair:
    """Functions (a, b) characterizing one distribution via the ratio
    identity a(k)p_{k-1} = b(k)p_k.

    support_max is None for distributions on all nonnegative integers; for a
    bounded support {0..K} the side condition a(K+1) = 0 holds.
    """

    ensemble: ens.Ensemble
    q: int
    n: int | None
    a: Callable[[int], Fraction]
    b: Callable[[int], Fraction]
    support_max: int | None

    def ratio(self, k: int) -> Fraction:
        """p_k / p_{k-1} = a(k) / b(k) for k >= 1."""
        return self.a(k) / self.b(k)


def stein_pair(
    ensemble: ens.Ensemble,
    q: int,
    n: int | None = LIMIT,
    check: bool = True,
    check_trunc_k: int = 12,
) -> SteinPair:
    """Build the (a, b) pair for the ensemble at size n (or its limit).

    With check=True the ratio identity is replayed against the pmf itself:
    exactly for finite n, within enclosures against the limiting pmf.  A
    failure here means the pair and the pmf disagree and is raised.
    """
    a_fn, b_fn = ens.ab_functions(ensemble, q, n)
    kmax = None if n is None else ens.support_max(ensemble, n)
    pair = SteinPair(ensemble, q, n, a_fn, b_fn, kmax)
    if check:
        if n is None:
            limit = ens.limit_pmf(ensemble, q, trunc_k=check_trunc_k)
            for k in range(1, check_trunc_k + 1):
                lhs = limit.probs[k - 1] * a_fn(k)
                rhs = limit.probs[k] * b_fn(k)
                if not lhs.intersects(rhs):
                    raise AssertionError(
                        f"ratio identity fails for {ensemble.label()} limit at k={k}"
                    )
        else:
            pmf = ens.finite_pmf(ensemble, q, n)
            if a_fn(kmax + 1) != 0:
                raise AssertionError(
                    f"a({kmax + 1}) != 0 for bounded support {ensemble.label()}"
                )
            for k in range(1, kmax + 1):
                if a_fn(k) * pmf.probs[k - 1] != b_fn(k) * pmf.probs[k]:
                    raise AssertionError(
                        f"ratio identity fails for {pmf.label()} at k={k}"
                    )
    return pair


def registration_defects(pair: SteinPair, pmf: ens.RankPmf) -> list[Fraction]:
    """Exact defects a(k)p_{k-1} - b(k)p_k over the pmf support; all must be 0."""
    return [
        pair.a(k) * pmf.probs[k - 1] - pair.b(k) * pmf.probs[k]
        for k in range(1, len(pmf.probs))
    ]


# ---------------------------------------------------------------------------
# Characterization identity on trial functions
# ---------------------------------------------------------------------------


def default_trial_functions(q: int, kmax: int) -> list[Callable[[int], Fraction]]:
    """Indicators of each point, x, x^2, q^x, q^-x and q^2x."""
    fns: list[Callable[[int], Fraction]] = []
    for j in range(kmax + 2):
        fns.append(lambda x, j=j: Fraction(1 if x == j else 0))
    fns.append(lambda x: Fraction(x))
    fns.append(lambda x: Fraction(x * x))
    fns.append(lambda x: Fraction(q) ** x)
    fns.append(lambda x: Fraction(q) ** (-x))
    fns.append(lambda x: Fraction(q) ** (2 * x))
    return fns


def characterization_check(
    pair: SteinPair,
    pmf: "ens.RankPmf | Sequence[Fraction]",
    trial_fns: Sequence[Callable[[int], Fraction]] | None = None,
) -> Fraction:
    """Max |E[a(X+1)f(X+1)] - E[b(X)f(X)]| over trial functions, exactly.

    Zero for every trial function iff the pair characterizes the pmf, which
    may be a RankPmf or a bare probability sequence indexed by k.
    """
    probs = pmf.probs if isinstance(pmf, ens.RankPmf) else tuple(pmf)
    kmax = len(probs) - 1
    if trial_fns is None:
        trial_fns = default_trial_functions(pair.q, kmax)
    worst = Fraction(0)
    for f in trial_fns:
        lhs = sum(p * pair.a(k + 1) * f(k + 1) for k, p in enumerate(probs))
        rhs = sum(p * pair.b(k) * f(k) for k, p in enumerate(probs))
        worst = max(worst, abs(lhs - rhs))
    return worst


# ---------------------------------------------------------------------------
# Moment identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentCheck:
    check: str
    ensemble: ens.Ensemble
    q: int
    n: int
    lhs: Fraction
    rhs: Fraction
    relation: str  # "eq" or "le"
    passed: bool

    def to_jsonable(self) -> dict:
        return {
            "check": self.check,
            "ensemble": self.ensemble.to_jsonable(),
            "q": self.q,
            "n": self.n,
            "lhs": f"{self.lhs.numerator}/{self.lhs.denominator}",
            "rhs": f"{self.rhs.numerator}/{self.rhs.denominator}",
            "relation": self.relation,
            "passed": self.passed,
        }


def _power_moment(pmf: ens.RankPmf, q: int, power: int) -> Fraction:
    return sum(p * Fraction(q) ** (power * k) for k, p in enumerate(pmf.probs))


def moment_identities(ensemble: ens.Ensemble, q: int, n: int) -> list[MomentCheck]:
    """Evaluate the closed-form moments of q^Q exactly against the pmf.

    Equalities must hold with defect exactly zero; the Hermitian first
    moment is an upper bound and is checked as such, together with the
    exact rewriting of E[q^Q] it follows from.
    """
    pmf = ens.finite_pmf(ensemble, q, n)
    out: list[MomentCheck] = []
    Q = Fraction(q)

    def add(check: str, lhs: Fraction, rhs: Fraction, relation: str = "eq") -> None:
        ok = (lhs == rhs) if relation == "eq" else (lhs <= rhs)
        out.append(MomentCheck(check, ensemble, q, n, lhs, rhs, relation, ok))

    kind = ensemble.kind
    if kind == ens.UNIFORM:
        m = ensemble.m
        add("uniform_qQ", _power_moment(pmf, q, 1), 1 + Q**-m - Q ** -(n + m))
        c = {k: _power_moment(pmf, q, k) for k in range(-1, 5)}
        for k in range(-1, 3):
            add(
                f"uniform_recursion_k={k}",
                Q**m * c[k + 2],
                (1 + Q**m - Q ** (-n + k + 1)) * c[k + 1] + (Q ** (k + 1) - 1) * c[k],
            )
    elif kind == ens.SYMMETRIC:
        lhs = sum(
            p * Q**k for k, p in enumerate(pmf.probs) if (n - k) % 2 == 0
        )
        add("symmetric_parity_qQ", lhs, Fraction(1))
    elif kind == ens.ZERODIAG_EVEN:
        add("zerodiag_even_q2Q", _power_moment(pmf, q, 2), q + 1 - Q ** (1 - n))
    elif kind == ens.ZERODIAG_ODD:
        add("zerodiag_odd_q2Q", _power_moment(pmf, q, 2), 1 + Q**-1 - Q**-n)
    elif kind == ens.SKEWCENTRO_EVEN:
        # through the term-exact reduction to square uniform matrices
        add("skewcentro_even_qQ", _power_moment(pmf, q, 1), 2 - Q ** -(n // 2))
    elif kind == ens.SKEWCENTRO_ODD:
        add(
            "skewcentro_odd_qQ",
            _power_moment(pmf, q, 1),
            1 + Q**-1 - Q ** -((n + 1) // 2),
        )
    else:  # HERMITIAN
        lhs = _power_moment(pmf, q, 1)
        add("hermitian_qQ_upper", lhs, 2 + Q**-n, relation="le")
        rhs = sum(
            p * (2 * Q**-k - (-1) ** (n - k) * Q**-n)
            for k, p in enumerate(pmf.probs)
        )
        add("hermitian_qQ_exact", lhs, rhs)
    return out


# ---------------------------------------------------------------------------
# Solutions of the recursive equation for indicator targets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SteinSolution:
    """Enclosed solution values f(0..k_max+1) for target set A; f(0) = 0."""

    pair: SteinPair
    target: frozenset[int]
    values: tuple[IntervalRat, ...]

    def value(self, k: int) -> IntervalRat:
        return self.values[k]


def _require_limit(pair: SteinPair, limit: ens.LimitPmf) -> None:
    if pair.n is not None:
        raise ValueError("solutions are computed for limit pairs only")
    if pair.ensemble != limit.ensemble or pair.q != limit.q:
        raise ValueError("pair and limit pmf describe different distributions")


def stein_solution(
    pair: SteinPair, limit: ens.LimitPmf, A: Iterable[int], k_max: int
) -> SteinSolution:
    """Solve a(k+1)f(k+1) - b(k)f(k) = 1(k in A) - P(Q in A) for k <= k_max.

    Each value is enclosed twice, by the partial-sum form
      f(k+1) = (P(A n U_k) - P(A) P(U_k)) / (a(k+1) p_k)
    and by the cross form
      f(k+1) = (P(A n U_k) P(U_k^c) - P(A n U_k^c) P(U_k)) / (a(k+1) p_k);
    the enclosures must intersect and their intersection is returned.
    """
    _require_limit(pair, limit)
    A = frozenset(A)
    if any(j < 0 or j > k_max for j in A):
        raise ValueError("A must be a subset of {0..k_max}")
    if limit.trunc_k < k_max:
        raise ValueError("limit pmf truncated below k_max")
    probs = limit.probs
    values: list[IntervalRat] = [IntervalRat.point(0)]
    p_A = interval_sum(probs[j] for j in sorted(A))
    head = IntervalRat.point(0)  # P(U_k)
    head_A = IntervalRat.point(0)  # P(A n U_k)
    for k in range(k_max + 1):
        head = head + probs[k]
        if k in A:
            head_A = head_A + probs[k]
        denom = probs[k] * pair.a(k + 1)
        partial_form = (head_A - p_A * head) / denom
        tail_A = interval_sum(probs[j] for j in sorted(A) if j > k)
        cross_form = (head_A * limit.tail_mass(k) - tail_A * head) / denom
        values.append(partial_form.intersect(cross_form))
    return SteinSolution(pair, A, tuple(values))


def stein_sup_norm(pair: SteinPair, limit: ens.LimitPmf, k: int) -> IntervalRat:
    """sup over every target set A of |f_A(k+1)|, in closed form.

    The cross form is extremal at A = U_k (and its complement, with opposite
    sign), so the supremum equals P(Q <= k) P(Q > k) / (a(k+1) p_k); no
    enumeration over A is involved.
    """
    _require_limit(pair, limit)
    if k < 0 or k > limit.trunc_k:
        raise ValueError("k out of range for this limit pmf")
    return (
        limit.head_mass(k)
        * limit.tail_mass(k)
        / (limit.probs[k] * pair.a(k + 1))
    )


def sup_norm_tail_bound(pair: SteinPair, k: int) -> Fraction:
    """Exact bound on sup-norm values at indices >= k, decreasing in k.

    Since P(Q > j)/p_j <= r/(1-r) with r = a(j+1)/b(j+1) < 1 decreasing,
    every sup norm at j >= k is at most r/((1-r) a) evaluated at j = k.
    """
    a0 = pair.a(k + 1)
    r = pair.ratio(k + 1)
    if r >= 1:
        raise ValueError(f"ratio >= 1 at k={k}")
    return r / ((1 - r) * a0)


# ---------------------------------------------------------------------------
# Certified solution-norm constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    check: str
    ensemble: ens.Ensemble
    q: int
    k: int | None  # None marks the monotone tail argument
    sup_hi: Fraction
    constant: Fraction
    passed: bool

    def to_jsonable(self) -> dict:
        return {
            "check": self.check,
            "ensemble": self.ensemble.to_jsonable(),
            "q": self.q,
            "k": self.k,
            "sup_hi": f"{self.sup_hi.numerator}/{self.sup_hi.denominator}",
            "constant": f"{self.constant.numerator}/{self.constant.denominator}",
            "passed": self.passed,
        }


def solution_bound_specs(
    ensemble: ens.Ensemble, q: int
) -> list[tuple[str, Fraction, Fraction]]:
    """(name, bound on |f(1)|, bound on |f(k)| for k >= 2) per ensemble."""
    Q = Fraction(q)
    kind = ensemble.kind
    if kind in (ens.UNIFORM, ens.SKEWCENTRO_EVEN):
        m = ensemble.m
        specs = [("general", 2 / Q ** (m + 2), 2 / Q ** (m + 2))]
        if m == 0:
            c = Q**-2 + Q**-3
            specs.append(("square", c, c))
        return specs
    if kind == ens.SYMMETRIC:
        return [("main", Q**-1 + Q**-3, 2 * Q**-2)]
    if kind == ens.ZERODIAG_EVEN:
        return [("main", Q**-3 + Q**-5, Fraction(131, 100) * Q**-7)]
    if kind == ens.ZERODIAG_ODD:
        return [("main", 2 * Q**-5, Fraction(57, 50) * Q**-9)]
    if kind == ens.SKEWCENTRO_ODD:
        return [("main", 2 * Q**-3, 2 * Q**-3)]
    # HERMITIAN
    specs = [("main", Fraction(11, 10) * Q**-2, Fraction(9, 5) * Q**-4)]
    if q >= 3:
        specs.append(("refined", Fraction(11, 10) * Q**-2, Fraction(7, 5) * Q**-4))
    return specs


def verify_solution_bounds(
    ensemble: ens.Ensemble,
    q_list: Iterable[int],
    k_max: int = 40,
) -> list[BoundCheck]:
    """Certify the stated solution-norm constants for each q.

    Checks sup_A |f_A(1)| at k=0, sup_A |f_A(k+1)| for 1 <= k <= k_max, and
    covers all k > k_max by the monotone tail bound.
    """
    out: list[BoundCheck] = []
    for q in q_list:
        pair = stein_pair(ensemble, q, LIMIT, check=False)
        limit = ens.limit_pmf(ensemble, q, trunc_k=k_max)
        specs = solution_bound_specs(ensemble, q)
        sups = [stein_sup_norm(pair, limit, k) for k in range(k_max + 1)]
        tail = sup_norm_tail_bound(pair, k_max + 1)
        for name, c1, ck in specs:
            out.append(
                BoundCheck(name, ensemble, q, 0, sups[0].hi, c1, sups[0].hi <= c1)
            )
            for k in range(1, k_max + 1):
                out.append(
                    BoundCheck(name, ensemble, q, k, sups[k].hi, ck, sups[k].hi <= ck)
                )
            out.append(BoundCheck(name + "_tail", ensemble, q, None, tail, ck, tail <= ck))
    return out


def fA1_generic_bound(pair: SteinPair, limit: ens.LimitPmf) -> IntervalRat:
    """Enclosure of P(Q >= 1)/a(1), the generic bound on |f_A(1)|."""
    _require_limit(pair, limit)
    return (1 - limit.probs[0]) / pair.a(1)


# ---------------------------------------------------------------------------
# Generic-machinery sanity instance
# ---------------------------------------------------------------------------


def truncated_poisson(
    lam: Fraction, k_max: int
) -> tuple[SteinPair, tuple[Fraction, ...]]:
    """Poisson(lam) conditioned on {0..k_max}: pair a(k)=lam*1(k<=k_max), b(k)=k.

    The normalizing constant cancels from the ratio identity, so the pmf is
    exactly rational and the characterization machinery applies verbatim.
    """
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lam must be positive")
    weights = [lam**k / math.factorial(k) for k in range(k_max + 1)]
    total = sum(weights)
    probs = tuple(w / total for w in weights)

    def a(k: int) -> Fraction:
        return lam if k <= k_max else Fraction(0)

    def b(k: int) -> Fraction:
        return Fraction(k)

    pair = SteinPair(ens.uniform(0), 2, k_max, a, b, k_max)
    return pair, probs
