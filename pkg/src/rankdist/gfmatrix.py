"""Finite-field arithmetic, uniform samplers for the structured matrix
ensembles, and rank computation with a packed-word fast path over GF(2).

Fields GF(p), GF(p^2) and GF(8) are supported.  GF(p^2) is built as
GF(p)[x]/(x^2 - s) with s the smallest positive non-residue (x^2 + x + 1 in
characteristic 2); conjugation is the Frobenius map a -> a^p.  Elements are
coded as integers in [0, q): the base-p digits are the polynomial
coefficients, so the prime subfield occupies codes 0..p-1.

Monte-Carlo streams come from a counter-based Philox generator keyed by
(master seed, stream index): one stream per declared worker, so results are
reproducible for any declared parallelism width.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iter_product

import numpy as np

from . import ensembles as ens

_TABLE_LIMIT = 128  # largest q for table-backed extension fields
ENUM_GUARD = 2**24  # largest ensemble cardinality enumerate_ensemble accepts


class FieldSpec:
    """Arithmetic for GF(q), q = p^e with e = 1, 2, or q = 8."""

    def __init__(self, q: int) -> None:
        pe = ens.prime_power(q)
        if pe is None:
            raise ValueError(f"{q} is not a prime power")
        p, e = pe
        if e > 1 and (q > _TABLE_LIMIT or (e == 3 and p != 2) or e > 3):
            raise ValueError(f"unsupported extension field GF({q})")
        self.p = p
        self.e = e
        self.q = q
        self.theta_sq: int | None = None
        if e == 1:
            self.modulus = None
        elif p == 2:
            # x^2 + x + 1 and x^3 + x + 1
            self.modulus = (1, 1, 1) if e == 2 else (1, 1, 0, 1)
        else:
            s = next(
                s for s in range(2, p) if all(x * x % p != s for x in range(p))
            )
            self.theta_sq = s
            self.modulus = (-s % p, 0, 1)
        if e > 1:
            self._build_tables()

    # --- representation ---------------------------------------------------

    def _digits(self, code: int) -> list[int]:
        d = []
        for _ in range(self.e):
            code, r = divmod(code, self.p)
            d.append(r)
        return d

    def _code(self, digits: list[int]) -> int:
        c = 0
        for d in reversed(digits):
            c = c * self.p + d
        return c

    def _poly_mul(self, x: int, y: int) -> int:
        p, e = self.p, self.e
        a, b = self._digits(x), self._digits(y)
        conv = [0] * (2 * e - 1)
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                conv[i + j] = (conv[i + j] + ai * bj) % p
        # reduce with x^e = -(modulus without leading coeff)
        low = [(-c) % p for c in self.modulus[:-1]]
        for i in range(2 * e - 2, e - 1, -1):
            c = conv[i]
            if c:
                conv[i] = 0
                for j, lj in enumerate(low):
                    conv[i - e + j] = (conv[i - e + j] + c * lj) % p
        return self._code(conv[:e])

    def _build_tables(self) -> None:
        q = self.q
        self._mul = [[self._poly_mul(x, y) for y in range(q)] for x in range(q)]
        self._add = [
            [
                self._code([(a + b) % self.p for a, b in zip(self._digits(x), self._digits(y))])
                for y in range(q)
            ]
            for x in range(q)
        ]
        self._neg = [self._code([(-d) % self.p for d in self._digits(x)]) for x in range(q)]
        self._inv = [0] * q
        for x in range(1, q):
            self._inv[x] = next(y for y in range(1, q) if self._mul[x][y] == 1)
        # Frobenius x -> x^p, the conjugation for quadratic extensions
        self._conj = [self._pow(x, self.p) for x in range(q)]

    def _pow(self, x: int, k: int) -> int:
        r = 1
        for _ in range(k):
            r = self._mul[r][x]
        return r

    # --- operations ---------------------------------------------------------

    def add(self, x: int, y: int) -> int:
        if self.e == 1:
            return (x + y) % self.p
        return self._add[x][y]

    def neg(self, x: int) -> int:
        if self.e == 1:
            return (-x) % self.p
        return self._neg[x]

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if self.e == 1:
            return (x * y) % self.p
        return self._mul[x][y]

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        if self.e == 1:
            return pow(x, -1, self.p)
        return self._inv[x]

    def conj(self, x: int) -> int:
        """The order-2 automorphism of a quadratic extension."""
        if self.e != 2:
            raise ValueError("conjugation requires a quadratic extension")
        return self._conj[x]

    def elements(self) -> range:
        return range(self.q)

    def __repr__(self) -> str:
        return f"GF({self.q})"


@lru_cache(maxsize=None)
def field_spec(q: int) -> FieldSpec:
    return FieldSpec(q)


def field_for(ensemble: ens.Ensemble, q: int) -> FieldSpec:
    """Field the matrix entries live in: GF(q), or GF(q^2) for Hermitian."""
    if not ens.field_realizable(ensemble, q):
        raise ValueError(f"{ensemble.label()} is not realizable at q={q}")
    if ensemble.kind == ens.HERMITIAN:
        p, e = ens.prime_power(q)
        if e != 1:
            raise ValueError("Hermitian sampling supports odd prime q only")
        return field_spec(q * q)
    return field_spec(q)


def ensemble_q(ensemble: ens.Ensemble, field: FieldSpec) -> int:
    """The distribution parameter q realized by entries in `field`."""
    return field.p if ensemble.kind == ens.HERMITIAN else field.q


@dataclass
class MatrixGF:
    field: FieldSpec
    rows: int
    cols: int
    entries: list  # rows x cols nested lists of field codes

    def bit_rows(self) -> list[int]:
        if self.field.q != 2:
            raise ValueError("bit packing requires GF(2)")
        return [
            sum(bit << j for j, bit in enumerate(row)) for row in self.entries
        ]

    def transpose(self) -> "MatrixGF":
        t = [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)]
        return MatrixGF(self.field, self.cols, self.rows, t)

    def dump(self) -> str:
        return "\n".join("".join(str(x) for x in row) for row in self.entries)


# ---------------------------------------------------------------------------
# Rank
# ---------------------------------------------------------------------------


def gf2_rank_rows(rows: list[int], ncols: int) -> int:
    """Rank over GF(2) of rows packed as integers (bit j = column j)."""
    pivots: list[tuple[int, int]] = []  # (row value, lowest set bit)
    for row in rows:
        for prow, pbit in pivots:
            if row & pbit:
                row ^= prow
        if row:
            pivots.append((row, row & -row))
    return len(pivots)


def gf2_rank_batch(words: np.ndarray, ncols: int) -> np.ndarray:
    """Ranks of a batch of GF(2) matrices, vectorized across the batch.

    words has shape (batch, nrows) with each row packed into one uint64;
    ncols <= 64.
    """
    if ncols > 64:
        raise ValueError("batched rank supports up to 64 columns")
    w = words.astype(np.uint64, copy=True)
    t, r = w.shape
    rank = np.zeros(t, dtype=np.int64)
    tidx = np.arange(t)
    rowidx = np.arange(r)
    one = np.uint64(1)
    for c in range(ncols):
        bits = (w >> np.uint64(c)) & one
        cand = (bits == one) & (rowidx[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        pidx = np.argmax(cand, axis=1)
        rptr = np.minimum(rank, r - 1)
        pivot = w[tidx, pidx]
        current = w[tidx, rptr]
        w[tidx, pidx] = np.where(has, current, w[tidx, pidx])
        w[tidx, rptr] = np.where(has, pivot, w[tidx, rptr])
        hot = (((w >> np.uint64(c)) & one) == one)
        hot[tidx, rptr] = False
        hot &= has[:, None]
        w ^= np.where(hot, w[tidx, rptr][:, None], np.uint64(0))
        rank += has
    return rank


def _rank_python(mat: MatrixGF) -> int:
    f = mat.field
    a = [row[:] for row in mat.entries]
    nr, nc = mat.rows, mat.cols
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = f.inv(a[r][c])
        prow = a[r]
        for i in range(r + 1, nr):
            if a[i][c]:
                fac = f.mul(a[i][c], inv)
                row = a[i]
                for j in range(c, nc):
                    row[j] = f.sub(row[j], f.mul(fac, prow[j]))
        r += 1
        if r == nr:
            break
    return r


def _rank_numpy_prime(p: int, entries) -> int:
    a = np.array(entries, dtype=np.int64) % p
    nr, nc = a.shape
    r = 0
    for c in range(nc):
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        fac = (a[r + 1 :, c] * inv) % p
        a[r + 1 :, c:] = (a[r + 1 :, c:] - np.outer(fac, a[r, c:])) % p
        r += 1
        if r == nr:
            break
    return r


def rank_bitsliced(mat: MatrixGF) -> int:
    return gf2_rank_rows(mat.bit_rows(), mat.cols)


def rank_generic(mat: MatrixGF) -> int:
    """Entrywise-elimination rank; the reference path for every field."""
    if mat.rows == 0 or mat.cols == 0:
        return 0
    if mat.field.e == 1:
        return _rank_numpy_prime(mat.field.p, mat.entries)
    return _rank_python(mat)


def rank(mat: MatrixGF) -> int:
    """Row rank over the matrix's field; packed-XOR fast path for GF(2)."""
    if mat.rows == 0 or mat.cols == 0:
        return 0
    if mat.field.q == 2:
        return rank_bitsliced(mat)
    if mat.field.e > 1 or mat.rows * mat.cols <= 1024:
        return _rank_python(mat)
    return _rank_numpy_prime(mat.field.p, mat.entries)


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for (master seed, stream index)."""
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


@lru_cache(maxsize=None)
def skewcentro_orbits(n: int):
    """Cell orbits under 'negate on transpose' and 'copy on anti-transpose'.

    Returns (free, pinned): free is a tuple of orbits, each a tuple of
    ((i, j), sign) with sign relative to the orbit representative; pinned
    cells are forced to 0 because their orbit relates them to their own
    negation.
    """
    seen: dict[tuple[int, int], int] = {}
    free = []
    pinned = []
    for start in iter_product(range(n), range(n)):
        if start in seen:
            continue
        signs = {start: 1}
        stack = [start]
        consistent = True
        while stack:
            (i, j) = stack.pop()
            s = signs[(i, j)]
            for (ni, nj), factor in (((j, i), -1), ((n - 1 - j, n - 1 - i), 1)):
                ns = s * factor
                if (ni, nj) in signs:
                    if signs[(ni, nj)] != ns:
                        consistent = False
                else:
                    signs[(ni, nj)] = ns
                    stack.append((ni, nj))
        for cell in signs:
            seen[cell] = 1
        if consistent:
            free.append(tuple(sorted(signs.items())))
        else:
            pinned.extend(sorted(signs))
    return tuple(free), tuple(pinned)


def free_coordinate_count(ensemble: ens.Ensemble, n: int) -> int:
    """Number of independent base-field coordinates of one sample."""
    kind = ensemble.kind
    if kind == ens.UNIFORM:
        return n * (n + ensemble.m)
    if kind == ens.SYMMETRIC:
        return n * (n + 1) // 2
    if kind in (ens.ZERODIAG_EVEN, ens.ZERODIAG_ODD):
        return n * (n - 1) // 2
    if kind in (ens.SKEWCENTRO_EVEN, ens.SKEWCENTRO_ODD):
        return len(skewcentro_orbits(n)[0])
    # Hermitian: n subfield diagonal entries + C(n,2) full-field entries
    return n * n


def _zeros(field: FieldSpec, rows: int, cols: int) -> MatrixGF:
    return MatrixGF(field, rows, cols, [[0] * cols for _ in range(rows)])


def sample(
    ensemble: ens.Ensemble, field: FieldSpec, n: int, rng: np.random.Generator
) -> MatrixGF:
    """Draw one exactly-uniform sample of the ensemble at size n.

    Free coordinates are i.i.d. uniform over the field; the remaining
    entries are filled from the defining relations.
    """
    ens.check_parity(ensemble, n)
    kind = ensemble.kind
    if kind == ens.UNIFORM:
        cols = n + ensemble.m
        vals = rng.integers(0, field.q, size=n * cols)
        return MatrixGF(
            field, n, cols, [vals[i * cols : (i + 1) * cols].tolist() for i in range(n)]
        )
    if kind == ens.SYMMETRIC:
        mat = _zeros(field, n, n)
        vals = iter(rng.integers(0, field.q, size=n * (n + 1) // 2).tolist())
        for i in range(n):
            for j in range(i, n):
                v = next(vals)
                mat.entries[i][j] = v
                mat.entries[j][i] = v
        return mat
    if kind in (ens.ZERODIAG_EVEN, ens.ZERODIAG_ODD):
        # char 2: symmetric with zero diagonal; odd q: skew-symmetric
        mat = _zeros(field, n, n)
        vals = iter(rng.integers(0, field.q, size=n * (n - 1) // 2).tolist())
        for i in range(n):
            for j in range(i + 1, n):
                v = next(vals)
                mat.entries[i][j] = v
                mat.entries[j][i] = field.neg(v)
        return mat
    if kind in (ens.SKEWCENTRO_EVEN, ens.SKEWCENTRO_ODD):
        if field.p == 2:
            raise ValueError("skew centrosymmetric sampling requires odd q")
        free, _ = skewcentro_orbits(n)
        mat = _zeros(field, n, n)
        vals = rng.integers(0, field.q, size=len(free)).tolist()
        for orbit, v in zip(free, vals):
            for (i, j), sign in orbit:
                mat.entries[i][j] = v if sign == 1 else field.neg(v)
        return mat
    # HERMITIAN over GF(p^2)
    if field.e != 2 or field.p == 2:
        raise ValueError("Hermitian sampling requires GF(p^2) with p odd")
    mat = _zeros(field, n, n)
    diag = rng.integers(0, field.p, size=n).tolist()
    upper = iter(rng.integers(0, field.q, size=n * (n - 1) // 2).tolist())
    for i in range(n):
        mat.entries[i][i] = diag[i]
        for j in range(i + 1, n):
            v = next(upper)
            mat.entries[i][j] = v
            mat.entries[j][i] = field.conj(v)
    return mat


def check_structure(ensemble: ens.Ensemble, mat: MatrixGF) -> bool:
    """Entry-by-entry check of the ensemble's defining relations."""
    f, a, n = mat.field, mat.entries, mat.rows
    kind = ensemble.kind
    if kind == ens.UNIFORM:
        return mat.cols == mat.rows + ensemble.m
    if kind == ens.SYMMETRIC:
        return all(a[i][j] == a[j][i] for i in range(n) for j in range(n))
    if kind in (ens.ZERODIAG_EVEN, ens.ZERODIAG_ODD):
        return all(a[i][i] == 0 for i in range(n)) and all(
            a[j][i] == f.neg(a[i][j]) for i in range(n) for j in range(n)
        )
    if kind in (ens.SKEWCENTRO_EVEN, ens.SKEWCENTRO_ODD):
        return all(
            a[j][i] == f.neg(a[i][j]) and a[i][j] == a[n - 1 - j][n - 1 - i]
            for i in range(n)
            for j in range(n)
        )
    return all(a[j][i] == f.conj(a[i][j]) for i in range(n) for j in range(n))


def q_statistic(ensemble: ens.Ensemble, n: int, r: int) -> int:
    """Deficiency statistic k from a sampled rank r."""
    kind = ensemble.kind
    if kind in (ens.ZERODIAG_EVEN, ens.SKEWCENTRO_EVEN):
        if (n - r) % 2:
            raise AssertionError(f"odd rank {r} in an even-rank ensemble (n={n})")
        return (n - r) // 2
    if kind in (ens.ZERODIAG_ODD, ens.SKEWCENTRO_ODD):
        if (n - 1 - r) % 2:
            raise AssertionError(f"odd rank {r} in an even-rank ensemble (n={n})")
        return (n - 1 - r) // 2
    return n - r


# ---------------------------------------------------------------------------
# Enumeration oracle
# ---------------------------------------------------------------------------


def enumerate_ensemble(
    ensemble: ens.Ensemble, field: FieldSpec, n: int
) -> dict[int, int]:
    """Exhaustively tally ranks over the whole ensemble (tiny sizes only)."""
    ens.check_parity(ensemble, n)
    kind = ensemble.kind
    if kind == ens.HERMITIAN:
        coord_sizes = [field.p] * n + [field.q] * (n * (n - 1) // 2)
    elif kind in (ens.SKEWCENTRO_EVEN, ens.SKEWCENTRO_ODD):
        coord_sizes = [field.q] * len(skewcentro_orbits(n)[0])
    else:
        coord_sizes = [field.q] * free_coordinate_count(ensemble, n)
    total = 1
    for s in coord_sizes:
        total *= s
        if total > ENUM_GUARD:
            raise ValueError(f"ensemble size exceeds guard {ENUM_GUARD}")
    counts: dict[int, int] = {}
    for assignment in iter_product(*(range(s) for s in coord_sizes)):
        mat = _fill(ensemble, field, n, assignment)
        r = rank(mat)
        counts[r] = counts.get(r, 0) + 1
    return counts


def _fill(ensemble, field, n, vals) -> MatrixGF:
    kind = ensemble.kind
    it = iter(vals)
    if kind == ens.UNIFORM:
        cols = n + ensemble.m
        return MatrixGF(field, n, cols, [[next(it) for _ in range(cols)] for _ in range(n)])
    mat = _zeros(field, n, n)
    if kind == ens.SYMMETRIC:
        for i in range(n):
            for j in range(i, n):
                v = next(it)
                mat.entries[i][j] = v
                mat.entries[j][i] = v
    elif kind in (ens.ZERODIAG_EVEN, ens.ZERODIAG_ODD):
        for i in range(n):
            for j in range(i + 1, n):
                v = next(it)
                mat.entries[i][j] = v
                mat.entries[j][i] = field.neg(v)
    elif kind in (ens.SKEWCENTRO_EVEN, ens.SKEWCENTRO_ODD):
        free, _ = skewcentro_orbits(n)
        for orbit, v in zip(free, it):
            for (i, j), sign in orbit:
                mat.entries[i][j] = v if sign == 1 else field.neg(v)
    else:  # HERMITIAN
        for i in range(n):
            mat.entries[i][i] = next(it)
        for i in range(n):
            for j in range(i + 1, n):
                v = next(it)
                mat.entries[i][j] = v
                mat.entries[j][i] = field.conj(v)
    return mat


# ---------------------------------------------------------------------------
# Monte-Carlo comparison with the exact pmf
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalReport:
    ensemble: ens.Ensemble
    q: int
    n: int
    trials: int
    seed: int
    workers: int
    counts: tuple[int, ...]
    empirical_tv: float
    chi2: float

    def to_jsonable(self) -> dict:
        return {
            "ensemble": self.ensemble.to_jsonable(),
            "q": self.q,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "workers": self.workers,
            "counts": list(self.counts),
            "empirical_tv": self.empirical_tv,
            "chi2": self.chi2,
        }


_BATCH = 4096  # fixed chunk so outputs never depend on memory heuristics


def _random_words(rng, count: int, rows: int, cols: int) -> np.ndarray:
    if cols <= 32:
        return rng.integers(0, 1 << cols, size=(count, rows), dtype=np.uint64)
    lo = rng.integers(0, 1 << 32, size=(count, rows), dtype=np.uint64)
    hi = rng.integers(0, 1 << (cols - 32), size=(count, rows), dtype=np.uint64)
    return lo | (hi << np.uint64(32))


def _gf2_batch_words(ensemble, n: int, count: int, rng) -> np.ndarray:
    kind = ensemble.kind
    if kind == ens.UNIFORM:
        return _random_words(rng, count, n, n + ensemble.m)
    bits = rng.integers(0, 2, size=(count, n, n), dtype=np.uint8)
    upper = np.triu(bits, 0 if kind == ens.SYMMETRIC else 1)
    full = upper | np.triu(upper, 1).transpose(0, 2, 1)
    weights = (np.uint64(1) << np.arange(n, dtype=np.uint64))[None, None, :]
    return (full.astype(np.uint64) * weights).sum(axis=2)


def _stream_counts(ensemble, field, n, trials, rng) -> np.ndarray:
    q = ensemble_q(ensemble, field)
    kmax = ens.support_max(ensemble, n)
    counts = np.zeros(kmax + 1, dtype=np.int64)
    cols = n + ensemble.m if ensemble.kind == ens.UNIFORM else n
    batched = (
        field.q == 2
        and cols <= 64
        and ensemble.kind in (ens.UNIFORM, ens.SYMMETRIC, ens.ZERODIAG_EVEN, ens.ZERODIAG_ODD)
    )
    if batched:
        done = 0
        while done < trials:
            chunk = min(_BATCH, trials - done)
            words = _gf2_batch_words(ensemble, n, chunk, rng)
            ranks = gf2_rank_batch(words, cols)
            for r in ranks.tolist():
                counts[q_statistic(ensemble, n, r)] += 1
            done += chunk
    else:
        for _ in range(trials):
            mat = sample(ensemble, field, n, rng)
            counts[q_statistic(ensemble, n, rank(mat))] += 1
    return counts


def empirical_pmf(
    ensemble: ens.Ensemble,
    field: FieldSpec,
    n: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> EmpiricalReport:
    """Sample `trials` matrices and compare rank frequencies to the exact pmf.

    Work is split across `workers` independent streams (stream w handles a
    fixed share), so the histogram depends only on (seed, workers).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    q = ensemble_q(ensemble, field)
    pmf = ens.finite_pmf(ensemble, q, n)
    counts = np.zeros(len(pmf.probs), dtype=np.int64)
    base, extra = divmod(trials, workers)
    for w in range(workers):
        share = base + (1 if w < extra else 0)
        if share:
            counts += _stream_counts(ensemble, field, n, share, rng_stream(seed, w))
    freqs = [Fraction(int(c), trials) for c in counts]
    tv = float(sum(abs(f - p) for f, p in zip(freqs, pmf.probs)) / 2)
    chi2 = float(
        sum(
            (float(c) - trials * float(p)) ** 2 / (trials * float(p))
            for c, p in zip(counts, pmf.probs)
        )
    )
    return EmpiricalReport(
        ensemble, q, n, trials, seed, workers, tuple(int(c) for c in counts), tv, chi2
    )


def random_nonzero_vector(field: FieldSpec, length: int, rng) -> list[int]:
    """Uniform over nonzero vectors, by rejection."""
    while True:
        v = rng.integers(0, field.q, size=length).tolist()
        if any(v):
            return v


def random_matrix(field: FieldSpec, rows: int, cols: int, rng) -> MatrixGF:
    vals = rng.integers(0, field.q, size=rows * cols)
    return MatrixGF(
        field, rows, cols, [vals[i * cols : (i + 1) * cols].tolist() for i in range(rows)]
    )
