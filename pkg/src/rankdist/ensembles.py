"""Rank distributions of random matrices over GF(q) for six ensembles.

For an n x n (or n x (n+m)) matrix drawn uniformly from an ensemble, the
statistic of interest is k = n - rank, halved (or shifted and halved) for the
ensembles whose rank is always even.  This module computes the exact
finite-n pmf of k for every ensemble, the interval-enclosed limiting pmf as
n -> infinity, and the alternating-sum rank-count oracle for uniform
rectangular matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .qseries import (
    IntervalRat,
    QProductSpec,
    default_qprod_trunc,
    finite_qproduct,
    infinite_qproduct,
    interval_sum,
    qbinomial,
)

UNIFORM = "uniform"
SYMMETRIC = "symmetric"
ZERODIAG_EVEN = "zerodiag-even"
ZERODIAG_ODD = "zerodiag-odd"
SKEWCENTRO_EVEN = "skewcentro-even"
SKEWCENTRO_ODD = "skewcentro-odd"
HERMITIAN = "hermitian"

KINDS = (
    UNIFORM,
    SYMMETRIC,
    ZERODIAG_EVEN,
    ZERODIAG_ODD,
    SKEWCENTRO_EVEN,
    SKEWCENTRO_ODD,
    HERMITIAN,
)

_EVEN_N = {ZERODIAG_EVEN, SKEWCENTRO_EVEN}
_ODD_N = {ZERODIAG_ODD, SKEWCENTRO_ODD}
# rank is even for these, so k counts rank deficiency in steps of 2
HALVED = {ZERODIAG_EVEN, ZERODIAG_ODD, SKEWCENTRO_EVEN, SKEWCENTRO_ODD}


class ParityError(ValueError):
    """n has the wrong parity for the requested ensemble."""


@dataclass(frozen=True)
class Ensemble:
    """Identifies one matrix ensemble; m is the column surplus for uniform."""

    kind: str
    m: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind != UNIFORM and self.m != 0:
            raise ValueError("m applies only to the uniform ensemble")
        if self.m < 0:
            raise ValueError("m must be >= 0")

    def label(self) -> str:
        if self.kind == UNIFORM:
            return f"uniform(m={self.m})"
        return self.kind

    def to_jsonable(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == UNIFORM:
            d["m"] = self.m
        return d


def uniform(m: int = 0) -> Ensemble:
    return Ensemble(UNIFORM, m)


def check_parity(ensemble: Ensemble, n: int) -> None:
    if n < 0:
        raise ValueError("n must be >= 0")
    if ensemble.kind in _EVEN_N and n % 2 != 0:
        raise ParityError(f"{ensemble.kind} requires even n, got {n}")
    if ensemble.kind in _ODD_N and n % 2 != 1:
        raise ParityError(f"{ensemble.kind} requires odd n, got {n}")


def support_max(ensemble: Ensemble, n: int) -> int:
    """Largest value of the deficiency statistic k at matrix size n."""
    check_parity(ensemble, n)
    if ensemble.kind in (ZERODIAG_EVEN, SKEWCENTRO_EVEN):
        return n // 2
    if ensemble.kind in (ZERODIAG_ODD, SKEWCENTRO_ODD):
        return (n - 1) // 2
    return n


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def prime_power(q: int) -> tuple[int, int] | None:
    """Return (p, e) with q = p^e and p prime, or None."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if not _is_prime(p):
            continue
        if q % p == 0:
            e = 0
            r = q
            while r % p == 0:
                r //= p
                e += 1
            return (p, e) if r == 1 else None
    return None


def field_realizable(ensemble: Ensemble, q: int) -> bool:
    """Whether a matching matrix ensemble over a genuine field exists at q.

    The pmf formulas are rational functions of q and evaluate for any
    q >= 2; this flag records when a matrix model realizes them: any prime
    power for uniform and symmetric, any prime power for zero-diagonal
    (power of 2 as symmetric-zero-diagonal, odd as skew-symmetric), odd
    prime powers for skew centrosymmetric and Hermitian.
    """
    pe = prime_power(q)
    if pe is None:
        return False
    p, _ = pe
    if ensemble.kind in (SKEWCENTRO_EVEN, SKEWCENTRO_ODD, HERMITIAN):
        return p != 2
    return True


@dataclass(frozen=True)
class RankPmf:
    """Exact pmf of the deficiency statistic k on {0..K}."""

    ensemble: Ensemble
    q: int
    n: int
    probs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if sum(self.probs) != 1:
            raise AssertionError(f"pmf does not sum to 1: {self.label()}")
        if any(p < 0 for p in self.probs):
            raise AssertionError(f"negative pmf entry: {self.label()}")

    def label(self) -> str:
        return f"{self.ensemble.label()} q={self.q} n={self.n}"

    @property
    def support(self) -> range:
        return range(len(self.probs))

    def prob(self, k: int) -> Fraction:
        return self.probs[k] if 0 <= k < len(self.probs) else Fraction(0)

    def to_jsonable(self) -> dict:
        return {
            "ensemble": self.ensemble.to_jsonable(),
            "q": self.q,
            "n": self.n,
            "field_realizable": field_realizable(self.ensemble, self.q),
            "probs": [
                {"k": k, "num": str(p.numerator), "den": str(p.denominator)}
                for k, p in enumerate(self.probs)
            ],
        }


@dataclass(frozen=True)
class LimitPmf:
    """Interval-enclosed limiting pmf with a certified tail beyond trunc_k."""

    ensemble: Ensemble
    q: int
    trunc_k: int
    probs: tuple[IntervalRat, ...]
    tail: IntervalRat

    def prob(self, k: int) -> IntervalRat:
        return self.probs[k]

    def head_mass(self, k: int) -> IntervalRat:
        """Enclosure of P(Q <= k)."""
        return interval_sum(self.probs[: k + 1])

    def tail_mass(self, k: int) -> IntervalRat:
        """Enclosure of P(Q > k), summed directly so that its relative width
        stays small even where the mass itself is tiny."""
        return interval_sum(self.probs[k + 1 :]) + self.tail

    def to_jsonable(self) -> dict:
        def iv(x: IntervalRat) -> dict:
            return {
                "lo": {"num": str(x.lo.numerator), "den": str(x.lo.denominator)},
                "hi": {"num": str(x.hi.numerator), "den": str(x.hi.denominator)},
            }

        return {
            "ensemble": self.ensemble.to_jsonable(),
            "q": self.q,
            "trunc_k": self.trunc_k,
            "probs": [dict(k=k, **iv(p)) for k, p in enumerate(self.probs)],
            "tail": iv(self.tail),
        }


# ---------------------------------------------------------------------------
# Finite-n rank counts
# ---------------------------------------------------------------------------


def _symmetric_count(q: int, n: int, r: int) -> Fraction:
    # number of symmetric n x n matrices of rank r
    h, odd = divmod(r, 2)
    v = Fraction(1)
    for i in range(1, h + 1):
        v *= Fraction(q ** (2 * i), q ** (2 * i) - 1)
    for i in range(0, 2 * h + odd):
        v *= q ** (n - i) - 1
    return v


def _zerodiag_count(q: int, n: int, r: int) -> Fraction:
    # number of symmetric zero-diagonal (char 2) / skew-symmetric (odd q)
    # n x n matrices of rank r = 2h
    h = r // 2
    v = Fraction(1)
    for i in range(1, h + 1):
        v *= Fraction(q ** (2 * i - 2), q ** (2 * i) - 1)
    for i in range(0, 2 * h):
        v *= q ** (n - i) - 1
    return v


def _skewcentro_even_count(q: int, n: int, r: int) -> Fraction:
    h = r // 2
    half = n // 2
    v = Fraction(1)
    for j in range(0, half - h):
        v *= Fraction(q**half - q**j, q ** (half - h) - q**j)
    for i in range(0, h):
        v *= q**half - q**i
    return v


def _skewcentro_odd_count(q: int, n: int, r: int) -> Fraction:
    h = r // 2
    c = (n - 1) // 2
    v = Fraction(1)
    for j in range(0, c - h + 1):
        v *= Fraction(q ** (c + 1) - q**j, q ** (c + 1 - h) - q**j)
    for i in range(0, h):
        v *= q**c - q**i
    return v


def _hermitian_count(q: int, n: int, r: int) -> Fraction:
    v = Fraction(q ** (r * (r - 1) // 2))
    for i in range(1, r + 1):
        v *= Fraction(q ** (2 * n - 2 * (r - i)) - 1, q**i - (-1) ** i)
    return v


def finite_pmf(ensemble: Ensemble, q: int, n: int) -> RankPmf:
    """Exact pmf of the deficiency statistic for the ensemble at size n."""
    if q < 2:
        raise ValueError("q must be >= 2")
    check_parity(ensemble, n)
    kind = ensemble.kind
    kmax = support_max(ensemble, n)
    probs: list[Fraction] = []
    if kind == UNIFORM:
        m = ensemble.m
        top = finite_qproduct(q, 1, n + m)
        for k in range(n + 1):
            num = top * finite_qproduct(q, k + 1, n)
            den = finite_qproduct(q, 1, n - k) * finite_qproduct(q, 1, m + k)
            probs.append(Fraction(1, q ** (k * (m + k))) * num / den)
    elif kind == SYMMETRIC:
        total = q ** (n * (n + 1) // 2)
        probs = [_symmetric_count(q, n, n - k) / total for k in range(n + 1)]
    elif kind in (ZERODIAG_EVEN, ZERODIAG_ODD):
        total = q ** (n * (n - 1) // 2)
        shift = 0 if kind == ZERODIAG_EVEN else 1
        probs = [
            _zerodiag_count(q, n, n - shift - 2 * k) / total for k in range(kmax + 1)
        ]
    elif kind == SKEWCENTRO_EVEN:
        total = q ** ((n // 2) ** 2)
        probs = [
            _skewcentro_even_count(q, n, n - 2 * k) / total for k in range(kmax + 1)
        ]
    elif kind == SKEWCENTRO_ODD:
        total = q ** ((n - 1) ** 2 // 4 + (n - 1) // 2)
        probs = [
            _skewcentro_odd_count(q, n, n - 1 - 2 * k) / total for k in range(kmax + 1)
        ]
    else:  # HERMITIAN
        total = q ** (n * n)
        probs = [_hermitian_count(q, n, n - k) / total for k in range(n + 1)]
    return RankPmf(ensemble, q, n, tuple(probs))


# ---------------------------------------------------------------------------
# Ratio (a, b) functions: a(k) * p_{k-1} = b(k) * p_k
# ---------------------------------------------------------------------------


def ab_functions(
    ensemble: Ensemble, q: int, n: int | None
) -> tuple[Callable[[int], Fraction], Callable[[int], Fraction]]:
    """Return (a, b) with a(k)p_{k-1} = b(k)p_k for the ensemble's pmf.

    n=None selects the limiting distribution.  For bounded supports
    a(K+1) = 0, which is what terminates the support.
    """
    Q = Fraction(q)
    kind = ensemble.kind
    if kind == UNIFORM:
        m = ensemble.m

        def b(k: int) -> Fraction:
            return Fraction((q**k - 1) * (q ** (k + m) - 1))

        if n is None:
            return (lambda k: Q, b)
        return (lambda k: Q * (1 - Q ** (k - 1 - n)), b)
    if kind == SYMMETRIC:

        def b(k: int) -> Fraction:
            return Fraction(q**k - 1)

        if n is None:
            return (lambda k: Fraction(1), b)

        def a(k: int) -> Fraction:
            # indicator active when n-k+1 is even
            if (n - k + 1) % 2 == 0:
                return 1 - Q ** (k - 1 - n)
            return Fraction(1)

        return (a, b)
    if kind in (ZERODIAG_EVEN, ZERODIAG_ODD):
        off = -1 if kind == ZERODIAG_EVEN else 1

        def b(k: int) -> Fraction:
            return Fraction((q ** (2 * k + off) - 1) * (q ** (2 * k) - 1))

        if n is None:
            return (lambda k: Q**2, b)
        half = n // 2
        return (lambda k: Q**2 - Q ** (-2 * (half - k)), b)
    if kind == SKEWCENTRO_EVEN:
        # identical in distribution to uniform(m=0) at size n/2
        inner = None if n is None else n // 2
        return ab_functions(uniform(0), q, inner)
    if kind == SKEWCENTRO_ODD:

        def b(k: int) -> Fraction:
            return Fraction((q**k - 1) * (q ** (k + 1) - 1))

        if n is None:
            return (lambda k: Q, b)
        c = (n - 1) // 2
        return (lambda k: Q - Q ** (k - c), b)
    # HERMITIAN

    def b(k: int) -> Fraction:
        return Fraction(q ** (2 * k) - 1)

    if n is None:
        return (lambda k: Q, b)
    return (lambda k: Q - (-1) ** (n - k + 1) * Q ** (k - n), b)


# ---------------------------------------------------------------------------
# Limiting pmfs
# ---------------------------------------------------------------------------


def _limit_prob(ensemble: Ensemble, q: int, k: int, trunc: int) -> IntervalRat:
    kind = ensemble.kind
    if kind in (UNIFORM, SKEWCENTRO_EVEN):
        m = ensemble.m  # 0 for skewcentro-even
        inf = infinite_qproduct(QProductSpec(q, start=k + 1, trunc=k + 1 + trunc))
        return (
            inf
            * Fraction(1, q ** (k * (m + k)))
            / finite_qproduct(q, 1, m + k)
        )
    if kind == SYMMETRIC:
        odd = infinite_qproduct(QProductSpec(q, start=1, step=2, trunc=trunc))
        den = Fraction(1)
        for i in range(1, k + 1):
            den *= q**i - 1
        return odd / den
    if kind in (ZERODIAG_EVEN, ZERODIAG_ODD):
        odd = infinite_qproduct(QProductSpec(q, start=1, step=2, trunc=trunc))
        top = 2 * k if kind == ZERODIAG_EVEN else 2 * k + 1
        den = Fraction(1)
        for i in range(1, top + 1):
            den *= q**i - 1
        return odd * Fraction(q**top) / den
    if kind == SKEWCENTRO_ODD:
        full = infinite_qproduct(QProductSpec(q, start=1, trunc=trunc))
        den = (
            Fraction(q ** (k * k + k))
            * (1 - Fraction(1, q ** (k + 1)))
            * finite_qproduct(q, 1, k) ** 2
        )
        return full / den
    # HERMITIAN: leading constant is 1 / prod_{i odd}(1 + q^-i)
    oddplus = infinite_qproduct(QProductSpec(q, start=1, step=2, sign=+1, trunc=trunc))
    den = Fraction(q ** (k * k)) * finite_qproduct(q * q, 1, k)
    return 1 / oddplus / den


def limit_pmf(
    ensemble: Ensemble,
    q: int,
    trunc_k: int = 24,
    qprod_trunc: int | None = None,
) -> LimitPmf:
    """Interval-enclosed limiting pmf {p_k: k <= trunc_k} plus certified tail.

    The tail enclosure uses the exact successive ratio p_{k+1}/p_k =
    a(k+1)/b(k+1), which is below 1 and decreasing past trunc_k (a is
    constant in k, b strictly increasing), so the tail is between
    p_{trunc_k} * r and p_{trunc_k} * r/(1-r) with r the ratio at trunc_k+1.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if trunc_k < 4:
        raise ValueError("trunc_k must be >= 4")
    trunc = qprod_trunc if qprod_trunc is not None else default_qprod_trunc(q)
    probs = tuple(_limit_prob(ensemble, q, k, trunc) for k in range(trunc_k + 1))
    a_fn, b_fn = ab_functions(ensemble, q, None)
    r = a_fn(trunc_k + 1) / b_fn(trunc_k + 1)
    if r >= 1:
        raise ValueError(f"trunc_k={trunc_k} too small: ratio {r} >= 1")
    last = probs[trunc_k]
    tail = IntervalRat(last.lo * r, last.hi * r / (1 - r))
    return LimitPmf(ensemble, q, trunc_k, probs, tail)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def rank_count_qbinomial(k_rows: int, n_cols: int, r: int, q: int) -> Fraction:
    """P(rank = r) for a uniform k_rows x n_cols matrix, by alternating sum.

    Independent of the product-form pmf; the two are cross-checked in tests.
    """
    if not (0 <= r <= min(k_rows, n_cols)):
        raise ValueError("need 0 <= r <= min(k_rows, n_cols)")
    total = Fraction(0)
    for l in range(r + 1):
        j = r - l
        total += (-1) ** j * qbinomial(r, l, q) * q ** (k_rows * l + j * (j - 1) // 2)
    return Fraction(1, q ** (k_rows * n_cols)) * qbinomial(n_cols, r, q) * total


@dataclass(frozen=True)
class ReductionWitness:
    """Per-k equality record for the even skew-centrosymmetric reduction."""

    q: int
    n: int
    rows: tuple[tuple[int, Fraction, Fraction, bool], ...]

    @property
    def equal(self) -> bool:
        return all(row[3] for row in self.rows)


def skewcentro_even_reduction(q: int, n: int) -> ReductionWitness:
    """Check, term by term, that the even skew-centrosymmetric pmf at size n
    equals the uniform square pmf at size n/2."""
    if n % 2 != 0:
        raise ParityError("n must be even")
    lhs = finite_pmf(Ensemble(SKEWCENTRO_EVEN), q, n)
    rhs = finite_pmf(uniform(0), q, n // 2)
    rows = tuple(
        (k, lhs.probs[k], rhs.probs[k], lhs.probs[k] == rhs.probs[k])
        for k in range(n // 2 + 1)
    )
    return ReductionWitness(q, n, rows)
