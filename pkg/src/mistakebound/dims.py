"""Exact combinatorial dimensions and optimal mistake bounds for small classes."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Concept, ConceptClass

INF = math.inf
DEFAULT_STATE_CAP = 10**6
HELLY_DOMAIN_CAP = 11


class CapExceeded(RuntimeError):
    pass


class Littlestone:
    """Memoized Littlestone dimension of sub-classes (masks) of one class.

    Only instances that split the version space into two non-empty parts are
    branched on; any other instance contributes L(empty) = -1 to the min.
    """

    def __init__(self, C: ConceptClass):
        self.C = C
        self.memo: dict[int, int] = {0: -1}

    def __call__(self, mask: int) -> int:
        got = self.memo.get(mask)
        if got is not None:
            return got
        size = mask.bit_count()
        if size == 1:
            self.memo[mask] = 0
            return 0
        ceiling = size.bit_length() - 1  # L <= floor(log2 |V|)
        best = 0
        for m0, m1 in self.C.label_masks:
            a, b = mask & m0, mask & m1
            if not a or not b:
                continue
            if min(a.bit_count(), b.bit_count()).bit_length() - 1 < best:
                continue
            v = min(self(a), self(b)) + 1
            if v > best:
                best = v
                if best == ceiling:
                    break
        self.memo[mask] = best
        return best


def ldim(C: ConceptClass) -> int:
    return Littlestone(C)(C.full)


def _vc_of_rows(rows: list[tuple[int, ...]], width: int) -> int:
    """VC dimension of a list of bit rows over ``width`` points."""
    if not rows:
        return 0
    distinct = set(rows)
    ceiling = len(distinct).bit_length() - 1
    # level k holds every shattered k-subset, as sorted tuples
    level = [()]
    best = 0
    for k in range(1, ceiling + 1):
        nxt = []
        for s in level:
            start = s[-1] + 1 if s else 0
            for z in range(start, width):
                t = s + (z,)
                if len({tuple(r[i] for i in t) for r in distinct}) == 1 << k:
                    nxt.append(t)
        if not nxt:
            break
        best, level = k, nxt
    return best


def vcdim(C: ConceptClass) -> int:
    return _vc_of_rows(list(C.rows), C.n)


def dual_vcdim(C: ConceptClass) -> int:
    """Largest number of concepts whose labels at the instances realize every pattern."""
    cols = [C.column(x) for x in range(C.n)]
    return _vc_of_rows(cols, len(C))


def dual_helly(C: ConceptClass, H: ConceptClass, domain_cap: int = HELLY_DOMAIN_CAP):
    """Exact dual Helly number K(C, H); ``math.inf`` when unbounded.

    Sets containing both (x,0) and (x,1) always hold a 2-element contradiction,
    so only partial labelings need to be examined.  For each partial labeling f
    we compute mu(f), the size of its smallest C-unrealizable subset, by the
    recurrence mu(f) = min(min_e mu(f - e), |f| if f is C-unrealizable).
    K is the largest mu over H-unrealizable f, clamped below at 2.  The maximum
    is attained on minimal H-unrealizable sets, since mu only drops on supersets.
    """
    if C.n != H.n:
        raise ValueError(f"domain mismatch: {C.n} vs {H.n}")
    n = C.n
    if n > domain_cap:
        raise CapExceeded(f"dual_helly enumerates 3^{n} labelings; cap is domain size {domain_cap}")
    total = 3**n
    cons_c = [0] * total
    cons_h = [0] * total
    mu = [INF] * total
    size = [0] * total
    cons_c[0], cons_h[0] = C.full, H.full
    lc, lh = C.label_masks, H.label_masks
    pow3 = [3**i for i in range(n)]
    worst = 0
    for code in range(1, total):
        # strip the lowest set digit to find a parent
        p, c = 0, code
        while c % 3 == 0:
            c //= 3
            p += 1
        digit = c % 3
        parent = code - digit * pow3[p]
        y = digit - 1
        cons_c[code] = cons_c[parent] & lc[p][y]
        cons_h[code] = cons_h[parent] & lh[p][y]
        size[code] = size[parent] + 1
        best = INF if cons_c[code] else size[code]
        rest, q = code, 0
        while rest:
            d = rest % 3
            if d:
                sub = mu[code - d * pow3[q]]
                if sub < best:
                    best = sub
            rest //= 3
            q += 1
        mu[code] = best
        if not cons_h[code] and best > worst:
            worst = best
            if worst == INF:
                return INF
    return max(2, worst)


def threshold_dim(C: ConceptClass) -> int:
    """Largest k with h_1..h_k in C and x_1..x_k such that h_i(x_j) = 1[j <= i].

    Grows the pattern one (h, x) pair at a time at its far end: the new h must
    be 1 on every chosen x, and the new x must be 0 on every chosen h.
    """
    lm = C.label_masks
    zero_of = []
    for r in C.rows:
        z = 0
        for x, b in enumerate(r):
            if not b:
                z |= 1 << x
        zero_of.append(z)
    memo: dict[tuple[int, int], int] = {}

    def grow(hmask: int, xmask: int) -> int:
        key = (hmask, xmask)
        if key in memo:
            return memo[key]
        best = 0
        bound = min(hmask.bit_count(), xmask.bit_count())
        x_iter = xmask
        while x_iter and best < bound:
            x = (x_iter & -x_iter).bit_length() - 1
            x_iter &= x_iter - 1
            cand = hmask & lm[x][1]
            while cand and best < bound:
                h = (cand & -cand).bit_length() - 1
                cand &= cand - 1
                v = 1 + grow(hmask & lm[x][1] & ~(1 << h), xmask & zero_of[h] & ~(1 << x))
                best = max(best, v)
        memo[key] = best
        return best

    return grow(C.full, (1 << C.n) - 1)


# --- optimal mistake bound --------------------------------------------------

@dataclass(frozen=True)
class MistakeBoundResult:
    value: float  # int-valued, or math.inf
    optimal_first_hypothesis: Concept | None
    states: int


class MistakeBoundGame:
    """Game-tree value M(V) = min_h max_{(x,y)} [1[h(x) != y] + M(V_(x,y))].

    V ranges over non-empty version spaces of C (masks); h over H.  An example
    on which h errs without shrinking V lets the adversary repeat it forever,
    so such an h is worth infinity at V.  Examples that neither shrink V nor
    cause a mistake are useless to the adversary and skipped.
    """

    def __init__(self, C: ConceptClass, H: ConceptClass, cap: int = DEFAULT_STATE_CAP):
        if C.n != H.n:
            raise ValueError(f"domain mismatch: {C.n} vs {H.n}")
        self.C, self.H, self.cap = C, H, cap
        self.memo: dict[int, tuple[float, int | None]] = {}
        self.work = 0

    def children(self, V: int):
        out = []
        for x, (m0, m1) in enumerate(self.C.label_masks):
            for y, my in ((0, m0), (1, m1)):
                V2 = V & my
                if V2:
                    out.append((x, y, V2))
        return out

    def solve(self, V: int) -> tuple[float, int | None]:
        """Return (value, index in H of an optimal hypothesis)."""
        got = self.memo.get(V)
        if got is not None:
            return got
        self.work += 1
        if self.work > self.cap:
            raise CapExceeded(f"mistake-bound recursion exceeded {self.cap} states")
        kids = []
        for x, y, V2 in self.children(V):
            sub = None if V2 == V else self.solve(V2)[0]
            kids.append((x, y, sub))
        best, arg = INF, None
        for hi, h in enumerate(self.H.rows):
            worst = 0
            for x, y, sub in kids:
                err = h[x] != y
                if sub is None:
                    if err:
                        worst = INF
                        break
                    continue
                v = err + sub
                if v > worst:
                    worst = v
                    if worst >= best:
                        break
            if worst < best:
                best, arg = worst, hi
        if arg is None:
            arg = 0
        self.memo[V] = (best, arg)
        return best, arg

    def hardest_example(self, V: int, h: Concept) -> tuple[int, int] | None:
        """Adversary reply to hypothesis h at version space V (None if h is unbeatable)."""
        best, arg = -1, None
        for x, y, V2 in self.children(V):
            err = h[x] != y
            if V2 == V:
                if err:
                    return (x, y)
                continue
            v = err + self.solve(V2)[0]
            if v > best:
                best, arg = v, (x, y)
        return arg


def mb_exact(C: ConceptClass, H: ConceptClass, cap: int = DEFAULT_STATE_CAP) -> MistakeBoundResult:
    game = MistakeBoundGame(C, H, cap)
    value, arg = game.solve(C.full)
    first = None if value == INF else H.rows[arg]
    return MistakeBoundResult(value, first, game.work)


def simulate_eq(C: ConceptClass, H: ConceptClass, game: MistakeBoundGame | None = None) -> float:
    """Worst-case number of equivalence queries used by the optimal online policy.

    For every target in C, every sequence of valid counterexamples is explored;
    the learner's query at version space V is the minimizing hypothesis of the
    mistake-bound recursion, updated with (x, target(x)) after each reply.
    """
    game = game or MistakeBoundGame(C, H)
    lm = C.label_masks
    memo: dict[tuple[int, int], float] = {}

    def queries(V: int, t: int) -> float:
        key = (V, t)
        if key in memo:
            return memo[key]
        value, hi = game.solve(V)
        if value == INF:
            return INF
        h, target = H.rows[hi], C.rows[t]
        if h == target:
            memo[key] = 1
            return 1
        worst = 0
        for x in range(C.n):
            if h[x] != target[x]:
                V2 = V & lm[x][target[x]]
                worst = max(worst, INF if V2 == V else queries(V2, t))
        memo[key] = 1 + worst
        return 1 + worst

    return max(queries(C.full, t) for t in range(len(C)))


def eq_query_complexity(C: ConceptClass, H: ConceptClass, cap: int = DEFAULT_STATE_CAP,
                        simulate_max: int = 8) -> float:
    """QC_EQ(C, H) = MB(C, H) + 1, cross-checked by simulation on small classes."""
    game = MistakeBoundGame(C, H, cap)
    value = game.solve(C.full)[0]
    qc = value + 1
    if len(C) <= simulate_max and value != INF:
        used = simulate_eq(C, H, game)
        if used > qc:
            raise AssertionError(f"EQ simulation used {used} queries, above MB + 1 = {qc}")
    return qc


# --- report -----------------------------------------------------------------

@dataclass(frozen=True)
class DimensionReport:
    ldim: int
    vcdim: int
    dual_vcdim: int
    dual_helly: float | None
    threshold_dim: int
    flags: tuple[str, ...] = ()

    FIELDS = ("ldim", "vcdim", "dual_vcdim", "dual_helly", "threshold_dim", "flags")

    def row(self) -> list[str]:
        k = "" if self.dual_helly is None else ("inf" if self.dual_helly == INF else str(self.dual_helly))
        return [str(self.ldim), str(self.vcdim), str(self.dual_vcdim), k,
                str(self.threshold_dim), ";".join(self.flags)]


def dimension_report(C: ConceptClass, H: ConceptClass | None = None) -> DimensionReport:
    flags = []
    k = None
    if H is not None:
        k = dual_helly(C, H)
        if len(C) == 1:
            flags.append("helly_clamped_single_concept")
        if k == INF:
            flags.append("helly_infinite")
    return DimensionReport(ldim(C), vcdim(C), dual_vcdim(C), k, threshold_dim(C), tuple(flags))
