"""Online learning of C with hypotheses from H through a weighted cover of version spaces.

Each round the learner looks at the instances where the weighted vote of the
entries' SOA predictions is nearly unanimous (the HighVote set).  If some
h in H agrees with all of them it predicts with that h; otherwise HighVote
contains a small C-unrealizable subset, and every entry branches on it.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable

from .core import Concept, ConceptClass, Example
from .dims import INF, Littlestone, dual_helly, ldim
from .soa import soa_label

Predictor = Callable[[int, int], int]


class InvariantViolation(AssertionError):
    pass


def soa_predictor(C: ConceptClass) -> Predictor:
    lit = Littlestone(C)
    memo: dict[tuple[int, int], int] = {}

    def predict(mask: int, x: int) -> int:
        key = (mask, x)
        got = memo.get(key)
        if got is None:
            got = memo[key] = soa_label(lit, mask, x)
        return got

    return predict


def halving_predictor(C: ConceptClass) -> Predictor:
    """Majority of the version space; ties go to 1."""
    lm = C.label_masks

    def predict(mask: int, x: int) -> int:
        return int((mask & lm[x][1]).bit_count() >= (mask & lm[x][0]).bit_count())

    return predict


@dataclass(frozen=True)
class WeightedCover:
    """A multiset of (version space, weight) entries with weights eta**k.

    ``groups`` maps (mask, k) to the number of entries with that version space
    and weight eta**k.  Entries are never merged by adding weights, so the
    multiplicities keep the branching tree's node count.
    """
    C: ConceptClass
    eta: Fraction
    groups: tuple[tuple[tuple[int, int], int], ...]
    predict: Predictor = field(compare=False, repr=False, hash=False)

    @classmethod
    def initial(cls, C: ConceptClass, eta: Fraction, predict: Predictor) -> WeightedCover:
        return cls(C, eta, (((C.full, 0), 1),), predict)

    def _with(self, counter: Counter) -> WeightedCover:
        return WeightedCover(self.C, self.eta, tuple(sorted(counter.items())), self.predict)

    @property
    def key(self):
        return self.groups

    def __len__(self) -> int:
        return sum(c for _, c in self.groups)

    def weight(self, k: int) -> Fraction:
        return self.eta**k

    def total_weight(self) -> Fraction:
        return sum((c * self.eta**k for (_, k), c in self.groups), Fraction(0))

    def vote(self, x: int) -> Fraction:
        num = den = Fraction(0)
        for (mask, k), c in self.groups:
            w = c * self.eta**k
            den += w
            if self.predict(mask, x):
                num += w
        if not den:
            raise ValueError("vote of an empty cover")
        return num / den

    def highvote(self, eps) -> list[Example]:
        """Instances whose vote lies in [0, eps] or [1 - eps, 1], labeled by the majority."""
        out = []
        for x in range(self.C.n):
            v = self.vote(x)
            if v <= eps or v >= 1 - eps:
                out.append((x, int(v >= Fraction(1, 2))))
        return out

    def update(self, x: int, y: int) -> WeightedCover:
        """Decay entries whose prediction at x is wrong, then restrict all to h(x) = y."""
        out = Counter()
        lm = self.C.label_masks[x][y]
        for (mask, k), c in self.groups:
            k2 = k + (self.predict(mask, x) != y)
            m2 = mask & lm
            if m2:
                out[(m2, k2)] += c
        return self._with(out)

    def branch(self, examples) -> WeightedCover:
        """Split each entry on every (x, y): decay if its prediction is y, keep h(x) = 1 - y."""
        out = Counter()
        lm = self.C.label_masks
        for (mask, k), c in self.groups:
            for x, y in examples:
                k2 = k + (self.predict(mask, x) == y)
                m2 = mask & lm[x][1 - y]
                if m2:
                    out[(m2, k2)] += c
        return self._with(out)

    def holding(self, target: int) -> list[tuple[int, int]]:
        """(k, count) for groups whose version space contains concept ``target``."""
        return [(k, c) for (mask, k), c in self.groups if mask >> target & 1]


def smallest_unrealizable(C: ConceptClass, S: list[Example], limit: int) -> tuple[Example, ...] | None:
    """Smallest C-unrealizable subset of S with at most ``limit`` elements."""
    for r in range(1, min(limit, len(S)) + 1):
        for sub in combinations(S, r):
            if not C.consistent(sub):
                return sub
    return None


@dataclass
class Round:
    t: int
    hypothesis: Concept
    x: int
    y: int
    prediction: int
    mistake: bool
    branches: list[tuple[Example, ...]]
    cover_before: tuple


@dataclass
class RunTrace:
    rounds: list[Round]
    mistake_count: int
    branch_count: int
    bound: float
    K: float
    L: int
    final_cover: tuple = ()

    @property
    def stream(self) -> list[Example]:
        return [(r.x, r.y) for r in self.rounds]


class HellyLearner:
    """Deterministic learner for C predicting only with members of H.

    ``mutate`` is a test hook for negative controls: ``"flip_restrict"``
    restricts version spaces to the wrong label after mistakes.
    """

    def __init__(self, C: ConceptClass, H: ConceptClass, K=None, L: int | None = None,
                 cache: dict | None = None, mutate: str | None = None):
        if C.n != H.n:
            raise ValueError("C and H must share a domain")
        self.C, self.H = C, H
        self.K = dual_helly(C, H) if K is None else K
        if self.K == INF:
            raise ValueError("dual Helly number is infinite: C cannot be learned with H")
        self.L = ldim(C) if L is None else L
        self.eta = Fraction(1, 2 * self.K)
        self.cover = WeightedCover.initial(C, self.eta, soa_predictor(C))
        self.cache = {} if cache is None else cache
        self.mutate = mutate
        self.mistakes = 0
        self.branch_rounds = 0
        self.decay_log: list[tuple[str, Fraction, Fraction]] = []
        self._proposal = None

    def clone(self) -> HellyLearner:
        new = object.__new__(HellyLearner)
        new.__dict__.update(self.__dict__)
        new.decay_log = list(self.decay_log)
        return new

    def state_key(self):
        return self.cover.key

    def propose(self):
        """Branch until HighVote is H-realizable; returns (h, branch witnesses)."""
        if self._proposal is not None:
            return self._proposal
        key = self.cover.key
        hit = self.cache.get(key)
        if hit is None:
            cover, witnesses, log = self.cover, [], []
            while True:
                hv = cover.highvote(self.eta)
                ok = self.H.consistent(hv)
                if ok:
                    h = self.H.rows[(ok & -ok).bit_length() - 1]
                    break
                wit = smallest_unrealizable(self.C, hv, self.K)
                if wit is None:
                    raise InvariantViolation("HighVote has no C-unrealizable subset of size <= K")
                before = cover.total_weight()
                cover = cover.branch(wit)
                witnesses.append(wit)
                log.append(("branch", before, cover.total_weight()))
            hit = self.cache[key] = (cover, h, tuple(witnesses), tuple(log))
        cover, h, witnesses, log = hit
        self.cover = cover
        self.branch_rounds += len(witnesses)
        self.decay_log.extend(log)
        self._proposal = (h, witnesses)
        return self._proposal

    def predict(self, x: int) -> int:
        return self.propose()[0][x]

    def loss(self, x: int, y: int) -> int:
        return int(self.predict(x) != y)

    def observe(self, x: int, y: int) -> bool:
        wrong = self.predict(x) != y
        if wrong:
            before = self.cover.total_weight()
            self.cover = self.cover.update(x, 1 - y if self.mutate == "flip_restrict" else y)
            self.decay_log.append(("mistake", before, self.cover.total_weight()))
            self.mistakes += 1
        self._proposal = None
        return wrong


def helly_bound(L: int, K) -> float:
    """4 L K ln(2K)."""
    return 4 * L * K * math.log(2 * K)


def check_decay(log, K) -> None:
    eta = Fraction(1, 2 * K)
    for kind, before, after in log:
        if kind == "mistake" and after > (1 - eta * (1 - eta)) * before:
            raise InvariantViolation(f"mistake round kept {after / before} of the weight")
        if kind == "branch" and after > (1 - Fraction(1, 4 * K)) * before:
            raise InvariantViolation(f"branch round kept {after / before} of the weight")


def check_witness(trace: RunTrace, C: ConceptClass, eta: Fraction) -> None:
    """Some entry holds a concept consistent with the whole stream, with weight >= eta^L.

    Checked against every concept consistent with the full stream, at the start
    of every round and after the last one.
    """
    targets = C.members(C.consistent(trace.stream))
    if not targets:
        raise InvariantViolation("stream is not C-realizable")
    for t in targets:
        for cover in [r.cover_before for r in trace.rounds] + [trace.final_cover]:
            if not any(mask >> t & 1 and k <= trace.L for (mask, k), _ in cover):
                raise InvariantViolation(f"no entry holds target {C.rows[t]} with weight >= eta^L")


def lh_run(C: ConceptClass, H: ConceptClass, stream, T: int | None = None,
           learner: HellyLearner | None = None, check: bool = True) -> RunTrace:
    """Run the learner on an example stream (a list, or an adversary with ``next``)."""
    learner = learner or HellyLearner(C, H)
    rounds = []
    examples = list(stream)[:T] if T is not None else list(stream)
    for t, (x, y) in enumerate(examples, 1):
        cover_before = learner.cover.key
        h, wits = learner.propose()
        pred = h[x]
        wrong = learner.observe(x, y)
        rounds.append(Round(t, h, x, y, pred, wrong, list(wits), cover_before))
    trace = RunTrace(rounds, learner.mistakes, learner.branch_rounds,
                     helly_bound(learner.L, learner.K), learner.K, learner.L, learner.cover.key)
    if check:
        check_decay(learner.decay_log, learner.K)
        check_witness(trace, C, learner.eta)
        M, N = trace.mistake_count, trace.branch_count
        if M + N and not (M + N) / (4 * learner.K) < learner.L * math.log(2 * learner.K):
            raise InvariantViolation(f"M/(4K) + N/(4K) = {(M + N) / (4 * learner.K)} >= L ln(2K)")
    return trace


def lh_step(learner: HellyLearner, x: int, y: int) -> tuple[int, HellyLearner]:
    pred = learner.predict(x)
    learner.observe(x, y)
    return pred, learner


def vote(Q: WeightedCover, x: int) -> Fraction:
    return Q.vote(x)


def highvote(Q: WeightedCover, eps) -> list[Example]:
    return Q.highvote(eps)
