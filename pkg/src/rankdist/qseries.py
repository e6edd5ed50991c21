"""Exact q-series primitives: finite and truncated-infinite products of the
form prod (1 +/- q^-i), Gaussian binomial coefficients, and the product
inequalities used to certify every bound downstream.

All arithmetic is over arbitrary-precision rationals.  Quantities that are
genuinely infinite (the infinite products) are returned as closed intervals
with exact rational endpoints; everything finite is a single Fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

RationalLike = Union[int, Fraction]


class IntervalError(ValueError):
    """Invalid interval construction or operation."""


@dataclass(frozen=True)
class IntervalRat:
    """Closed interval [lo, hi] with exact rational endpoints.

    Arithmetic is enclosure-preserving: if x in a and y in b then
    x op y in (a op b).  Because endpoints are exact rationals there is no
    rounding; result intervals are the exact hulls.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if not (isinstance(self.lo, Fraction) and isinstance(self.hi, Fraction)):
            object.__setattr__(self, "lo", Fraction(self.lo))
            object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise IntervalError(f"lo {self.lo} > hi {self.hi}")

    @staticmethod
    def point(x: RationalLike) -> "IntervalRat":
        x = Fraction(x)
        return IntervalRat(x, x)

    @staticmethod
    def _coerce(x: "IntervalRat | RationalLike") -> "IntervalRat":
        if isinstance(x, IntervalRat):
            return x
        return IntervalRat.point(x)

    # --- arithmetic -------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        return IntervalRat(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return IntervalRat(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        c = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return IntervalRat(min(c), max(c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("division by an interval containing 0")
        return self * IntervalRat(Fraction(1, 1) / o.hi, Fraction(1, 1) / o.lo)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return IntervalRat(Fraction(0), max(-self.lo, self.hi))

    def max_with(self, other) -> "IntervalRat":
        o = self._coerce(other)
        return IntervalRat(max(self.lo, o.lo), max(self.hi, o.hi))

    # --- predicates -------------------------------------------------------

    def contains(self, x: RationalLike) -> bool:
        x = Fraction(x)
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "IntervalRat") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "IntervalRat") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "IntervalRat") -> "IntervalRat":
        if not self.intersects(other):
            raise IntervalError(f"disjoint intervals {self} and {other}")
        return IntervalRat(max(self.lo, other.lo), min(self.hi, other.hi))

    def width(self) -> Fraction:
        return self.hi - self.lo

    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.mid())

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def interval_sum(items: Iterable[IntervalRat]) -> IntervalRat:
    """Enclosing sum of an iterable of intervals."""
    total = IntervalRat.point(0)
    for it in items:
        total = total + it
    return total


ONE = IntervalRat.point(1)


# ---------------------------------------------------------------------------
# q-products
# ---------------------------------------------------------------------------


def finite_qproduct(q: int, lo: int, hi: int, sign: int = -1) -> Fraction:
    """Exact prod_{i=lo}^{hi} (1 + sign*q^-i); empty product (hi < lo) is 1."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    result = Fraction(1)
    for i in range(lo, hi + 1):
        result *= 1 + Fraction(sign, q**i)
    return result


def default_qprod_trunc(q: int) -> int:
    """Smallest T with relative tail factor 2*q^-(T+1) <= 2^-66."""
    t = 1
    while q ** (t + 1) < 2**67:
        t += 1
    return t


@dataclass(frozen=True)
class QProductSpec:
    """Truncated infinite product prod_{i>=start, i=start mod step}(1+sign*q^-i).

    step is 1 (all indices) or 2 (indices of one parity); trunc is the last
    index kept exactly, the rest is enclosed by a rigorous tail factor.
    """

    q: int
    start: int = 1
    step: int = 1
    sign: int = -1
    trunc: int | None = None

    def __post_init__(self) -> None:
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if self.start < 1:
            raise ValueError("start must be >= 1")
        if self.step not in (1, 2):
            raise ValueError("step must be 1 or 2")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.trunc is None:
            object.__setattr__(
                self, "trunc", self.start + default_qprod_trunc(self.q)
            )
        if self.trunc < self.start:
            raise ValueError("trunc must be >= start")


def infinite_qproduct(spec: QProductSpec) -> IntervalRat:
    """Certified enclosure of the infinite product described by spec.

    The partial product P_T over indices <= trunc is exact.  The omitted tail
    over indices > trunc lies in [1 - 2*q^-(T+1), 1] for sign=-1 (a subset of
    the full product over all i > T, each factor below 1), hence the
    enclosure [P_T*(1 - 2*q^-(T+1)), P_T].  For sign=+1 each omitted factor
    1 + x is at most 1/(1 - x), reducing to the same tail bound on the other
    side: [P_T, P_T/(1 - 2*q^-(T+1))].
    """
    q, t = spec.q, spec.trunc
    partial = Fraction(1)
    for i in range(spec.start, t + 1):
        if (i - spec.start) % spec.step == 0:
            partial *= 1 + Fraction(spec.sign, q**i)
    tail = 1 - Fraction(2, q ** (t + 1))
    if tail <= 0:
        raise ValueError(f"truncation {t} too small for q={q}: tail bound >= 1")
    if spec.sign == -1:
        return IntervalRat(partial * tail, partial)
    return IntervalRat(partial, partial / tail)


def qbinomial(n: int, m: int, q: int) -> Fraction:
    """Gaussian binomial coefficient [n, m]_q; 0 outside 0 <= m <= n."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if m < 0 or m > n:
        return Fraction(0)
    result = Fraction(1)
    for j in range(m):
        result *= Fraction(q ** (n - j) - 1, q ** (m - j) - 1)
    return result


# ---------------------------------------------------------------------------
# Product inequalities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InequalityCheck:
    """Outcome of one certified inequality instance."""

    name: str
    q: int
    n: int | None
    m: int | None
    lhs_lo: Fraction
    rhs: Fraction
    passed: bool

    def to_jsonable(self) -> dict:
        return {
            "check": self.name,
            "q": self.q,
            "n": self.n,
            "m": self.m,
            "lhs_lo": _frac_str(self.lhs_lo),
            "rhs": _frac_str(self.rhs),
            "passed": self.passed,
        }


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _geom_sum(q: int, start: int, step: int) -> Fraction:
    # sum_{i>=start, i=start mod step} q^-i
    return Fraction(1, q**start) / (1 - Fraction(1, q**step))


def check_product_inequalities(q: int, n_max: int) -> list[InequalityCheck]:
    """Certify the lower bounds on (1 - q^-i)-type products.

    Checks, exactly for finite products and via certified enclosures for
    infinite ones:
      1. prod_{i=1}^n (1-q^-i)        >= 1 - 1/q - 1/q^2       (1 <= n <= n_max)
      2. prod_{i>=1} (1-q^-i)         >= 1 - 1/q - 1/q^2 + 1/q^5 + 1/q^7
                                          - 1/q^12 - 1/q^15
      3. prod_{i>=1 odd} (1-q^-i)     >= 1 - 1/q - 1/q^3
      4. prod_{i>=3 odd} (1-q^-i)     >= 1 - 2/q^3
      5. prod_{i=m+1}^n (1-q^-i)      >= 1 - 2/q^(m+1)          (0 <= m <= n <= n_max)
    and, on the same factor sets, prod (1-a_i) >= 1 - sum a_i.

    Failures are reported (passed=False), never raised.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    results: list[InequalityCheck] = []

    def record(name, n, m, lhs_lo, rhs):
        results.append(InequalityCheck(name, q, n, m, lhs_lo, rhs, lhs_lo >= rhs))

    rhs1 = 1 - Fraction(1, q) - Fraction(1, q**2)
    for n in range(1, n_max + 1):
        record("finite_all", n, None, finite_qproduct(q, 1, n), rhs1)

    inf_all = infinite_qproduct(QProductSpec(q))
    rhs2 = (
        1
        - Fraction(1, q)
        - Fraction(1, q**2)
        + Fraction(1, q**5)
        + Fraction(1, q**7)
        - Fraction(1, q**12)
        - Fraction(1, q**15)
    )
    record("infinite_all", None, None, inf_all.lo, rhs2)

    inf_odd = infinite_qproduct(QProductSpec(q, start=1, step=2))
    record("infinite_odd", None, None, inf_odd.lo, 1 - Fraction(1, q) - Fraction(1, q**3))

    inf_odd3 = infinite_qproduct(QProductSpec(q, start=3, step=2))
    record("infinite_odd_from_3", None, None, inf_odd3.lo, 1 - Fraction(2, q**3))

    for n in range(1, n_max + 1):
        for m in range(0, n + 1):
            record(
                "finite_shifted",
                n,
                m,
                finite_qproduct(q, m + 1, n),
                1 - Fraction(2, q ** (m + 1)),
            )

    # prod(1 - a_i) >= 1 - sum(a_i) on each factor set above
    for n in range(1, n_max + 1):
        for m in range(0, n + 1):
            ssum = sum(Fraction(1, q**i) for i in range(m + 1, n + 1))
            record("product_vs_sum_finite", n, m, finite_qproduct(q, m + 1, n), 1 - ssum)
    record("product_vs_sum_all", None, None, inf_all.lo, 1 - _geom_sum(q, 1, 1))
    record("product_vs_sum_odd", None, None, inf_odd.lo, 1 - _geom_sum(q, 1, 2))
    record("product_vs_sum_odd_from_3", None, None, inf_odd3.lo, 1 - _geom_sum(q, 3, 2))

    return results


def all_pass(checks: Sequence[InequalityCheck]) -> bool:
    return all(c.passed for c in checks)
