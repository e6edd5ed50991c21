"""Certified total-variation distances between the finite-size rank
distributions and their limits, and verification that each distance lands
inside the explicit window stated for its ensemble.

A distance is never reported as a float: it is an interval with exact
rational endpoints, and a window check passes only when the whole interval
lies inside the window.  A straddling interval triggers truncation
refinement, never a fuzzy pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import ensembles as ens
from .qseries import IntervalRat, interval_sum


@dataclass(frozen=True)
class TvResult:
    ensemble: ens.Ensemble
    q: int
    n: int
    tv: IntervalRat
    theorem_lower: Fraction
    theorem_upper: Fraction
    passed: bool
    refined: bool = False

    @property
    def lower_margin(self) -> Fraction:
        return self.tv.lo - self.theorem_lower

    @property
    def upper_margin(self) -> Fraction:
        return self.theorem_upper - self.tv.hi

    def to_jsonable(self) -> dict:
        def fs(x: Fraction) -> str:
            return f"{x.numerator}/{x.denominator}"

        return {
            "ensemble": self.ensemble.to_jsonable(),
            "q": self.q,
            "n": self.n,
            "tv_lo": fs(self.tv.lo),
            "tv_hi": fs(self.tv.hi),
            "window_lo": fs(self.theorem_lower),
            "window_hi": fs(self.theorem_upper),
            "lower_margin": fs(self.lower_margin),
            "upper_margin": fs(self.upper_margin),
            "refined": self.refined,
            "passed": self.passed,
        }

    def to_csv_row(self) -> list:
        d = self.to_jsonable()
        return [
            self.ensemble.label(),
            self.q,
            self.n,
            d["tv_lo"],
            d["tv_hi"],
            d["window_lo"],
            d["window_hi"],
            int(self.refined),
            int(self.passed),
        ]


CSV_HEADER = [
    "ensemble",
    "q",
    "n",
    "tv_lo",
    "tv_hi",
    "window_lo",
    "window_hi",
    "refined",
    "passed",
]


def theorem_window(
    ensemble: ens.Ensemble, q: int, n: int, refined: bool = False
) -> tuple[Fraction, Fraction]:
    """Stated [lower, upper] window for the distance at (ensemble, q, n)."""
    if n < 1:
        raise ValueError("windows are stated for n >= 1")
    ens.check_parity(ensemble, n)
    kind = ensemble.kind
    if refined and kind != ens.HERMITIAN:
        raise ValueError("only the Hermitian window has a refined variant")
    Q = Fraction(q)
    if kind == ens.UNIFORM:
        scale = Q ** (n + ensemble.m + 1)
        return Fraction(1, 8) / scale, 3 / scale
    if kind == ens.SYMMETRIC:
        if n % 2 == 0:
            scale = Q ** (n + 1)
            return Fraction(18, 100) / scale, Fraction(225, 100) / scale
        scale = Q ** (n + 2)
        return Fraction(18, 100) / scale, 2 / scale
    if kind == ens.ZERODIAG_EVEN:
        scale = Q ** (n + 1)
        return Fraction(18, 100) / scale, Fraction(15, 10) / scale
    if kind == ens.ZERODIAG_ODD:
        scale = Q ** (n + 2)
        return Fraction(37, 100) / scale, Fraction(22, 10) / scale
    if kind == ens.SKEWCENTRO_EVEN:
        scale = Q ** (n // 2 + 1)
        return Fraction(1, 8) / scale, 3 / scale
    if kind == ens.SKEWCENTRO_ODD:
        scale = Q ** ((n + 3) // 2)
        return Fraction(1, 4) / scale, 3 / scale
    # HERMITIAN
    scale = Q ** (n + 1)
    if refined:
        if q < 3:
            raise ValueError("refined Hermitian window requires q >= 3")
        return Fraction(19, 100) / scale, Fraction(15, 10) / scale
    return Fraction(7, 100) / scale, Fraction(23, 10) / scale


def tv_distance(pmf: ens.RankPmf, limit: ens.LimitPmf) -> IntervalRat:
    """Enclosure of half the l1 distance between pmf and its limit.

    The finite pmf is treated as zero above its support; the limit's mass
    beyond trunc_k enters through its certified tail enclosure.
    """
    if pmf.ensemble != limit.ensemble or pmf.q != limit.q:
        raise ValueError("pmf and limit describe different distributions")
    kmax = len(pmf.probs) - 1
    if limit.trunc_k < kmax:
        raise ValueError("limit pmf truncated below the finite support")
    total = interval_sum(
        abs(IntervalRat.point(pmf.prob(k)) - limit.probs[k])
        for k in range(limit.trunc_k + 1)
    )
    return (total + limit.tail) / 2


def tv_exact(p1: ens.RankPmf, p2: ens.RankPmf) -> Fraction:
    """Exact distance between two finite pmfs of the same ensemble family."""
    top = max(len(p1.probs), len(p2.probs))
    return sum(abs(p1.prob(k) - p2.prob(k)) for k in range(top)) / 2


def tv_maximizing_set(
    pmf: ens.RankPmf, limit: ens.LimitPmf
) -> tuple[frozenset[int], IntervalRat]:
    """The certainly-overweighted set A = {k : p_{k,n} > hi(p_k)} and an
    enclosure of P_n(A) - P(A); equals the distance when no point straddles."""
    A = frozenset(
        k for k in range(limit.trunc_k + 1) if pmf.prob(k) > limit.probs[k].hi
    )
    diff = interval_sum(
        IntervalRat.point(pmf.prob(k)) - limit.probs[k] for k in sorted(A)
    )
    return A, diff


def tv_lower_witness(pmf: ens.RankPmf, limit: ens.LimitPmf) -> IntervalRat:
    """Enclosure of half the pointwise gap at k=0, a certified lower bound
    on the distance; the sign of the gap flips for Hermitian odd n."""
    gap = IntervalRat.point(pmf.probs[0]) - limit.probs[0]
    if pmf.ensemble.kind == ens.HERMITIAN and pmf.n % 2 == 1:
        gap = -gap
    return gap / 2


def verify_tv_theorem(
    ensemble: ens.Ensemble,
    q: int,
    n: int,
    refined: bool = False,
    max_rounds: int = 6,
    qprod_trunc: int | None = None,
) -> TvResult:
    """Certify that the distance at (ensemble, q, n) lies inside its window.

    Truncations are raised until the enclosure is strictly inside or
    strictly outside the window; a straddling enclosure is never reported.
    """
    lo, hi = theorem_window(ensemble, q, n, refined=refined)
    pmf = ens.finite_pmf(ensemble, q, n)
    trunc_k = len(pmf.probs) - 1 + 8
    for _ in range(max_rounds):
        limit = ens.limit_pmf(ensemble, q, trunc_k=trunc_k, qprod_trunc=qprod_trunc)
        tv = tv_distance(pmf, limit)
        if lo <= tv.lo and tv.hi <= hi:
            return TvResult(ensemble, q, n, tv, lo, hi, True, refined)
        if tv.hi < lo or tv.lo > hi:
            return TvResult(ensemble, q, n, tv, lo, hi, False, refined)
        trunc_k += 8
        qprod_trunc = (qprod_trunc or 0) + 32
    raise RuntimeError(
        f"could not certify window membership for {ensemble.label()} q={q} n={n}"
    )


@dataclass(frozen=True)
class GridReport:
    results: tuple[TvResult, ...]
    errors: tuple[tuple[str, str], ...]

    @property
    def all_pass(self) -> bool:
        return not self.errors and all(r.passed for r in self.results)

    def min_margins(self) -> tuple[Fraction, Fraction] | None:
        if not self.results:
            return None
        return (
            min(r.lower_margin for r in self.results),
            min(r.upper_margin for r in self.results),
        )


def tv_grid(
    ensembles: Sequence[ens.Ensemble],
    q_values: Iterable[int],
    n_values: Iterable[int],
    include_refined: bool = True,
) -> GridReport:
    """Run the window check across a grid, skipping parity-invalid cells.

    Per-cell failures are collected, not raised; cell order is
    deterministic (ensemble, then q, then n, refined variant last).
    """
    results: list[TvResult] = []
    errors: list[tuple[str, str]] = []
    for e in ensembles:
        for q in q_values:
            for n in n_values:
                if n < 1:
                    continue
                try:
                    ens.check_parity(e, n)
                except ens.ParityError:
                    continue
                variants = [False]
                if include_refined and e.kind == ens.HERMITIAN and q >= 3:
                    variants.append(True)
                for refined in variants:
                    cell = f"{e.label()} q={q} n={n}" + (" refined" if refined else "")
                    try:
                        results.append(verify_tv_theorem(e, q, n, refined=refined))
                    except Exception as exc:  # noqa: BLE001 - cell isolation
                        errors.append((cell, str(exc)))
    return GridReport(tuple(results), tuple(errors))
