"""Birth-death chain on the rank deficiency of an n x (n+m) matrix over
GF(q) evolving by rank-one additions.

The transition matrix is exact rational; its stationary distribution is the
uniform-ensemble pmf, verified with defect exactly zero.  A simulation
cross-check runs the chain and the literal matrix process side by side and
compares both occupation measures to the exact pmf.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import ensembles as ens
from . import gfmatrix as gfm


@dataclass(frozen=True)
class RankChain:
    """Tridiagonal transition matrix on deficiency states {0..n}."""

    q: int
    n: int
    m: int
    transitions: tuple[tuple[Fraction, ...], ...]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.transitions[i]


def build_chain(q: int, n: int, m: int = 0) -> RankChain:
    """Exact transition matrix of the rank-one-update chain.

    From deficiency i, the rank drops (i -> i+1), grows (i -> i-1) or stays,
    with the stated rational rates; rows sum to exactly 1 and the up-rate
    vanishes at i = n.
    """
    if q < 2 or n < 1 or m < 0:
        raise ValueError("need q >= 2, n >= 1, m >= 0")
    den = (q**n - 1) * (q ** (n + m) - 1)
    rows = []
    for i in range(n + 1):
        up = Fraction(q) ** (n - i - 1) * (q ** (n - i) - 1) / den
        down = Fraction((q**n - q ** (n - i)) * (q ** (n + m) - q ** (n - i)), den)
        row = [Fraction(0)] * (n + 1)
        if i < n:
            row[i + 1] = up
        if i > 0:
            row[i - 1] = down
        row[i] = 1 - up - down
        if row[i] < 0:
            raise AssertionError(f"negative holding probability at i={i}")
        rows.append(tuple(row))
    return RankChain(q, n, m, tuple(rows))


@dataclass(frozen=True)
class StationarityReport:
    q: int
    n: int
    m: int
    defects: tuple[Fraction, ...]
    detailed_balance: bool

    @property
    def exact(self) -> bool:
        return self.detailed_balance and all(d == 0 for d in self.defects)

    def to_jsonable(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "m": self.m,
            "stationarity_defect": str(max(abs(d) for d in self.defects)),
            "detailed_balance": self.detailed_balance,
            "passed": self.exact,
        }


def verify_stationarity(chain: RankChain) -> StationarityReport:
    """Check pi M = pi exactly with pi the uniform-ensemble pmf."""
    pi = ens.finite_pmf(ens.uniform(chain.m), chain.q, chain.n).probs
    t = chain.transitions
    size = chain.n + 1
    defects = tuple(
        sum(pi[i] * t[i][j] for i in range(size)) - pi[j] for j in range(size)
    )
    balance = all(
        pi[i] * t[i][i + 1] == pi[i + 1] * t[i + 1][i] for i in range(chain.n)
    )
    return StationarityReport(chain.q, chain.n, chain.m, defects, balance)


def chain_tv_to_stationary(chain: RankChain, steps: int) -> list[Fraction]:
    """Exact distance of delta_0 M^t to the stationary pmf for t <= steps."""
    pi = ens.finite_pmf(ens.uniform(chain.m), chain.q, chain.n).probs
    size = chain.n + 1
    dist = [Fraction(1 if j == 0 else 0) for j in range(size)]
    out = []
    for _ in range(steps + 1):
        out.append(sum(abs(d - p) for d, p in zip(dist, pi)) / 2)
        dist = [
            sum(dist[i] * chain.transitions[i][j] for i in range(size))
            for j in range(size)
        ]
    return out


@dataclass(frozen=True)
class SimulationReport:
    q: int
    n: int
    m: int
    steps: int
    burn_in: int
    seed: int
    tv_chain: float
    tv_matrix: float

    def to_jsonable(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "m": self.m,
            "steps": self.steps,
            "burn_in": self.burn_in,
            "seed": self.seed,
            "stationarity_defect": "0",
            "empirical_tv_chain": self.tv_chain,
            "empirical_tv_matrix": self.tv_matrix,
        }


def simulate_chain_vs_matrix(
    q: int,
    n: int,
    m: int,
    steps: int,
    seed: int,
    burn_in: int | None = None,
) -> SimulationReport:
    """Run the chain and the rank-one-update matrix process side by side.

    Both start at the zero matrix (deficiency n); occupation measures over
    `steps` post-burn-in states are compared to the exact pmf.  The added
    rank-one matrix is u v^T with u, v uniform over nonzero vectors, which
    hits every rank-one matrix with equal multiplicity q - 1.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    chain = build_chain(q, n, m)
    if burn_in is None:
        burn_in = 10 * n
    pmf = ens.finite_pmf(ens.uniform(m), q, n).probs
    size = n + 1

    # chain path, from its own stream
    rng = gfm.rng_stream(seed, 0)
    cum = []
    for i in range(size):
        row = chain.transitions[i]
        acc, levels = 0.0, []
        for p in row:
            acc += float(p)
            levels.append(acc)
        cum.append(levels)
    state = n
    counts_chain = [0] * size
    draws = rng.random(burn_in + steps)
    for t in range(burn_in + steps):
        u = draws[t]
        levels = cum[state]
        nxt = 0
        while nxt < size - 1 and u >= levels[nxt]:
            nxt += 1
        state = nxt
        if t >= burn_in:
            counts_chain[state] += 1

    # literal matrix process, independent stream
    rng = gfm.rng_stream(seed, 1)
    field = gfm.field_spec(q)
    mat = gfm.MatrixGF(field, n, n + m, [[0] * (n + m) for _ in range(n)])
    counts_mat = [0] * size
    for t in range(burn_in + steps):
        u = gfm.random_nonzero_vector(field, n, rng)
        v = gfm.random_nonzero_vector(field, n + m, rng)
        for i in range(n):
            ui = u[i]
            if ui == 0:
                continue
            row = mat.entries[i]
            for j in range(n + m):
                if v[j]:
                    row[j] = field.add(row[j], field.mul(ui, v[j]))
        if t >= burn_in:
            counts_mat[n - gfm.rank(mat)] += 1

    def tv(counts: list[int]) -> float:
        return float(
            sum(abs(Fraction(c, steps) - p) for c, p in zip(counts, pmf)) / 2
        )

    return SimulationReport(
        q, n, m, steps, burn_in, seed, tv(counts_chain), tv(counts_mat)
    )
