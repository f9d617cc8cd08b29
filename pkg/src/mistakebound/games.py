"""Finite binary zero-sum games and the sparsification searches built on them.

Convention: the row player picks a mixed strategy to *minimize* the expected
payoff val(a, b) and the column player maximizes it.  In the learning
applications rows are concepts, columns are labeled examples and the payoff
is 1[h(x) != y].
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import ConceptClass, Example
from .dims import dual_vcdim, vcdim

EXACT_MAX_SIDE = 12
MAX_DOUBLINGS = 10
START_CONSTANT = 8


class ToleranceNotReached(RuntimeError):
    def __init__(self, gap: float, iterations: int):
        self.gap, self.iterations = gap, iterations
        super().__init__(f"duality gap {gap:.3g} after {iterations} iterations")


class SparsificationFailed(RuntimeError):
    """A verified search exhausted its doubling budget (should not happen)."""


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(v).limit_denominator(10**9)


def log1(z: float) -> float:
    """log(z) = max(ln z, 1)."""
    return max(math.log(z), 1.0)


@dataclass(frozen=True)
class GameMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise ValueError("game matrix needs at least one row and one column")
        width = len(self.entries[0])
        for row in self.entries:
            if len(row) != width:
                raise ValueError("ragged game matrix")
            if any(v not in (0, 1) for v in row):
                raise ValueError("game entries must be bits")

    @classmethod
    def from_rows(cls, rows) -> GameMatrix:
        return cls(tuple(tuple(int(v) for v in r) for r in rows))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)


@dataclass(frozen=True)
class MixedStrategy:
    support: tuple[int, ...]
    weights: tuple

    def __post_init__(self):
        if len(set(self.support)) != len(self.support):
            raise ValueError("support entries must be distinct")
        if len(self.support) != len(self.weights):
            raise ValueError("support and weights differ in length")

    @classmethod
    def from_dense(cls, probs) -> MixedStrategy:
        pairs = [(i, p) for i, p in enumerate(probs) if p > 0]
        return cls(tuple(i for i, _ in pairs), tuple(p for _, p in pairs))

    def dense(self, size: int) -> list:
        out = [0] * size
        for i, p in zip(self.support, self.weights):
            out[i] = p
        return out


@dataclass(frozen=True)
class GameSolution:
    value: Fraction | float
    row_strategy: MixedStrategy
    col_strategy: MixedStrategy
    duality_gap: Fraction | float
    iterations: int = 0


def _simplex_max(A: list[list[Fraction]], c: list[Fraction]):
    """max c.z subject to A z <= 1, z >= 0, in exact arithmetic with Bland's rule.

    The all-slack basis is feasible because the right-hand side is all ones.
    Returns (optimum, primal z, dual u).
    """
    m, n = len(A), len(c)
    # tableau rows: [A | I | 1]; objective row holds reduced costs
    T = [list(A[i]) + [Fraction(int(i == j)) for j in range(m)] + [Fraction(1)] for i in range(m)]
    obj = [-ci for ci in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]
    while True:
        enter = next((j for j in range(n + m) if obj[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise ArithmeticError("unbounded game LP")
        piv = T[leave][enter]
        prow = [v / piv for v in T[leave]]
        T[leave] = prow
        for i in range(m):
            if i != leave and T[i][enter]:
                f = T[i][enter]
                T[i] = [a - f * b for a, b in zip(T[i], prow)]
        if obj[enter]:
            f = obj[enter]
            obj = [a - f * b for a, b in zip(obj, prow)]
        basis[leave] = enter
    z = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            z[b] = T[i][-1]
    return obj[-1], z, obj[n:n + m]


def _payoff_bounds(M, p, q):
    rows, cols = len(M), len(M[0])
    upper = max(sum(p[i] * M[i][j] for i in range(rows)) for j in range(cols))
    lower = min(sum(q[j] * M[i][j] for j in range(cols)) for i in range(rows))
    return upper, lower


def _solve_exact(G: GameMatrix) -> GameSolution:
    M = G.entries
    rows, cols = G.shape
    # shift payoffs to 1..2 so the value is positive, then normalize strategies:
    # z_i = p_i / v solves max sum z s.t. (M+1)^T z <= 1.
    A = [[Fraction(M[i][j] + 1) for i in range(rows)] for j in range(cols)]
    opt, z, u = _simplex_max(A, [Fraction(1)] * rows)
    shifted = 1 / opt
    p = [zi * shifted for zi in z]
    q = [ui * shifted for ui in u]
    upper, lower = _payoff_bounds(M, p, q)
    return GameSolution(shifted - 1, MixedStrategy.from_dense(p), MixedStrategy.from_dense(q),
                        upper - lower)


def _softmax(a: np.ndarray) -> np.ndarray:
    a = a - a.max()
    e = np.exp(a)
    return e / e.sum()


def _solve_iterative(G: GameMatrix, tol: float, max_iter: int, eta: float = 0.5) -> GameSolution:
    """Optimistic multiplicative weights self-play with certified bounds.

    The upper bound is the best response value against some row strategy seen
    (last iterate or running average); the lower bound likewise for columns.
    Both are valid at every iteration, so their difference certifies the gap.
    """
    M = G.array()
    rows, cols = M.shape
    x, y = np.full(rows, 1 / rows), np.full(cols, 1 / cols)
    loss_x, gain_y = np.zeros(rows), np.zeros(cols)
    sum_x, sum_y = np.zeros(rows), np.zeros(cols)
    gx, gy = M @ y, M.T @ x
    upper, lower = gy.max(), gx.min()
    best_x, best_y = x, y
    t = 0
    for t in range(1, max_iter + 1):
        loss_x += gx
        gain_y += gy
        x = _softmax(-eta * (loss_x + gx))
        y = _softmax(eta * (gain_y + gy))
        gx, gy = M @ y, M.T @ x
        sum_x += x
        sum_y += y
        for cand, val in ((x, gy.max()), (sum_x / t, (M.T @ sum_x).max() / t)):
            if val < upper:
                upper, best_x = val, cand.copy()
        for cand, val in ((y, gx.min()), (sum_y / t, (M @ sum_y).min() / t)):
            if val > lower:
                lower, best_y = val, cand.copy()
        if upper - lower <= tol:
            break
    gap = float(upper - lower)
    if gap > tol:
        raise ToleranceNotReached(gap, t)
    return GameSolution(float(upper + lower) / 2, MixedStrategy.from_dense(best_x.tolist()),
                        MixedStrategy.from_dense(best_y.tolist()), gap, t)


def game_value(G: GameMatrix, mode: str = "exact", tol: float = 1e-4,
               max_iter: int = 10**6) -> GameSolution:
    """Value of min_rows max_cols of the game, with optimal strategies.

    ``exact`` solves the game LP in rational arithmetic and returns gap 0;
    ``iterative`` runs optimistic multiplicative weights until the certified
    gap is at most ``tol``.
    """
    if mode == "exact":
        if min(G.shape) > EXACT_MAX_SIDE:
            raise ValueError(f"exact mode needs min(rows, cols) <= {EXACT_MAX_SIDE}, got {G.shape}")
        return _solve_exact(G)
    if mode in ("iterative", "iter"):
        return _solve_iterative(G, tol, max_iter)
    raise ValueError(f"unknown mode {mode!r}")


def triangular_dim(G: GameMatrix) -> int:
    """Largest k admitting rows a_1..a_k and columns b_1..b_k with val(a_i, b_j) = 1[i <= j].

    Peels the pattern from the front: a_1 must be 1 on every remaining column,
    b_1 must be 0 on every remaining row.
    """
    M = G.entries
    rows, cols = G.shape
    col_ones = [sum(1 << j for j in range(cols) if M[i][j]) for i in range(rows)]
    row_zeros = [sum(1 << i for i in range(rows) if not M[i][j]) for j in range(cols)]
    memo: dict[tuple[int, int], int] = {}

    def peel(R: int, C: int) -> int:
        key = (R, C)
        if key in memo:
            return memo[key]
        best = 0
        for a in range(rows):
            if not R >> a & 1:
                continue
            for b in range(cols):
                if C >> b & 1 and M[a][b]:
                    v = 1 + peel(R & row_zeros[b] & ~(1 << a), C & col_ones[a] & ~(1 << b))
                    if v > best:
                        best = v
        memo[key] = best
        return best

    return peel((1 << rows) - 1, (1 << cols) - 1)


def error_matrix(C: ConceptClass, S: Sequence[Example]) -> GameMatrix:
    """Rows: concepts of C; columns: examples of S; entry 1[h(x) != y]."""
    return GameMatrix(tuple(tuple(int(h[x] != y) for x, y in S) for h in C.rows))


def class_matrix(C: ConceptClass) -> GameMatrix:
    return GameMatrix.from_rows(C.rows)


# --- verified sparsification ------------------------------------------------

@dataclass(frozen=True)
class EpsNet:
    sequence: tuple[Example, ...]
    game_value: Fraction
    start_size: int
    doublings: int
    method: str

    @property
    def size(self) -> int:
        return len(self.sequence)

    def constant(self, V: int, eps) -> float:
        """Adaptive c1 with size = c1 * V / eps * log(1/eps)."""
        eps = float(eps)
        return self.size * eps / (max(V, 1) * log1(1 / eps))


@dataclass(frozen=True)
class Multiset:
    """Multiset of concept indices: ``counts[i]`` copies of concept i."""
    counts: tuple[tuple[int, int], ...]
    start_size: int
    doublings: int
    method: str

    @property
    def size(self) -> int:
        return sum(c for _, c in self.counts)

    def constant(self, dual_vc: int, eps) -> float:
        """Adaptive c2 with size = c2 * vc* / eps^2."""
        return self.size * float(eps) ** 2 / max(dual_vc, 1)


def _sample_counts(support, probs, m, rng) -> Counter:
    p = np.asarray([float(v) for v in probs])
    p = p / p.sum()
    draws = rng.choice(len(support), size=m, p=p)
    return Counter({support[k]: int(c) for k, c in enumerate(np.bincount(draws, minlength=len(support))) if c})


def _round_counts(support, probs, m) -> Counter:
    """Largest-remainder rounding of probs * m to integer counts."""
    exact = [Fraction(p) * m for p in map(as_fraction, probs)]
    base = [int(math.floor(e)) for e in exact]
    short = m - sum(base)
    order = sorted(range(len(support)), key=lambda k: (-(exact[k] - base[k]), k))
    for k in order[:short]:
        base[k] += 1
    return Counter({support[k]: c for k, c in enumerate(base) if c})


def net_ok(C: ConceptClass, seq: Sequence[Example], eps: Fraction) -> bool:
    """Every h in C errs on more than an eps/2 fraction of seq."""
    m = len(seq)
    for h in C.rows:
        errs = sum(h[x] != y for x, y in seq)
        if 2 * errs <= eps * m:
            return False
    return True


def _greedy_net(C: ConceptClass, support: list[Example], m: int) -> list[Example]:
    """Pessimistic-estimator construction: repeatedly add the example carrying
    the most exponentially-weighted error, so concepts that are still rarely
    wrong dominate the choice."""
    errs = np.zeros(len(C))
    wrong = np.array([[h[x] != y for x, y in support] for h in C.rows], dtype=float)
    seq = []
    for _ in range(m):
        w = np.exp(-(errs - errs.min()))
        k = int(np.argmax(w @ wrong))
        seq.append(support[k])
        errs += wrong[:, k]
    return seq


def eps_net(C: ConceptClass, S: Sequence[Example], eps, rng=None, seed: int = 0) -> EpsNet | None:
    """Sequence S' over S on which every h in C errs at rate > eps/2, or None.

    None is returned when some mixture of concepts has error at most eps on
    every element of S (the game value is <= eps).  Otherwise the example
    player's optimal strategy is sampled, starting from length
    8 * V / eps * log(1/eps) and doubling until the property verifies.
    """
    eps = as_fraction(eps)
    S = list(dict.fromkeys(S))
    if not S:
        return None
    sol = game_value(error_matrix(C, S))
    if sol.value <= eps:
        return None
    rng = rng if rng is not None else np.random.default_rng(seed)
    support = [S[j] for j in sol.col_strategy.support]
    m0 = m = math.ceil(START_CONSTANT * max(vcdim(C), 1) / float(eps) * log1(1 / float(eps)))
    for d in range(MAX_DOUBLINGS + 1):
        for _ in range(2):
            counts = _sample_counts(support, sol.col_strategy.weights, m, rng)
            seq = [e for e in support for _ in range(counts.get(e, 0))]
            if net_ok(C, seq, eps):
                return EpsNet(tuple(seq), sol.value, m0, d, "sampled")
        seq = _greedy_net(C, support, m)
        if net_ok(C, seq, eps):
            return EpsNet(tuple(seq), sol.value, m0, d, "greedy")
        m *= 2
    raise SparsificationFailed(f"no verified eps-net within {MAX_DOUBLINGS} doublings")


def approx_ok(C: ConceptClass, counts: Counter, eps: Fraction, scope: Sequence[Example]) -> bool:
    """Every scope example is mislabeled by fewer than a 2*eps fraction of the multiset."""
    size = sum(counts.values())
    for x, y in scope:
        errs = sum(c for i, c in counts.items() if C.rows[i][x] != y)
        if errs >= 2 * eps * size:
            return False
    return True


def dual_eps_approx(C: ConceptClass, pi: MixedStrategy, eps, scope: Sequence[Example],
                    rng=None, seed: int = 0) -> Multiset:
    """Sparse multiset of concepts approximating the mixture ``pi`` on ``scope``.

    Requires pi-error <= eps on every scope example; returns a multiset whose
    empirical error is < 2*eps on each of them.
    """
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError("eps must lie in (0, 1/2)")
    weights = [as_fraction(w) for w in pi.weights]
    for x, y in scope:
        err = sum(w for i, w in zip(pi.support, weights) if C.rows[i][x] != y)
        if err > eps * sum(weights):
            raise ValueError(f"precondition violated: mixture error {float(err):.4f} > eps at {(x, y)}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    support = list(pi.support)
    if len(support) == 1:
        counts = Counter({support[0]: 1})
        if approx_ok(C, counts, eps, scope):
            return Multiset(((support[0], 1),), 1, 0, "point")
    m0 = m = math.ceil(START_CONSTANT * max(dual_vcdim(C), 1) / float(eps) ** 2)
    for d in range(MAX_DOUBLINGS + 1):
        for _ in range(2):
            counts = _sample_counts(support, weights, m, rng)
            if approx_ok(C, counts, eps, scope):
                return Multiset(tuple(sorted(counts.items())), m0, d, "sampled")
        counts = _round_counts(support, weights, m)
        if approx_ok(C, counts, eps, scope):
            return Multiset(tuple(sorted(counts.items())), m0, d, "rounded")
        m *= 2
    raise SparsificationFailed(f"no verified dual eps-approximation within {MAX_DOUBLINGS} doublings")
