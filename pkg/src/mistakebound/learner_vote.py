"""Margin-vote online learner: predictions are sparse votes of concepts from C.

The learner keeps the same weighted cover as the H-restricted learner, with
eta = eps/8.  Each round it solves the game "concepts of C vs. examples of
HighVote(Q, eps/8)".  If its value is at most eps/2, the optimal mixture is
sparsified into a vote that is eps-close to every HighVote label; otherwise
an eps-net of HighVote is found and every entry branches on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ConceptClass, Example
from .dims import dual_vcdim, ldim
from .games import (
    EpsNet, Multiset, as_fraction, dual_eps_approx, eps_net, error_matrix, game_value,
)
from .learner_helly import (
    InvariantViolation, WeightedCover, halving_predictor, soa_predictor,
)
from .votes import MajHypothesis, VoteHypothesis, maj_eval, vote_eval

__all__ = [
    "Branch", "MajHypothesis", "MajLearner", "MarginTrace", "VoteHypothesis", "VoteLearner",
    "lv_as_mistake_learner", "lv_propose", "lv_run", "maj_eval", "margin_bound", "vote_eval",
]


@dataclass(frozen=True)
class Branch:
    sequence: tuple[Example, ...]
    game_value: Fraction
    weight_before: Fraction
    weight_after: Fraction
    net: EpsNet


@dataclass(frozen=True)
class Proposal:
    cover: WeightedCover
    vote: VoteHypothesis
    branches: tuple[Branch, ...]
    game_value: Fraction
    highvote: tuple[Example, ...]
    approx: Multiset | None = None


def margin_bound(L: float, eps) -> float:
    """8L / (eps (1 - eps/8)) * ln(8/eps)."""
    eps = float(eps)
    return 8 * L / (eps * (1 - eps / 8)) * math.log(8 / eps)


def _stable_seed(seed: int, key) -> list[int]:
    return [seed, hash(key) & (2**63 - 1)]


class VoteLearner:
    """Margin learner over C.

    ``base`` selects the per-entry predictor: ``"soa"`` (default) or
    ``"halving"`` for the general mistake-bounded conversion.
    """

    def __init__(self, C: ConceptClass, eps, base: str = "soa", seed: int = 0,
                 cache: dict | None = None):
        self.C = C
        self.eps = as_fraction(eps)
        if not 0 < self.eps < Fraction(1, 2):
            raise ValueError("eps must lie in (0, 1/2)")
        self.eta = self.eps / 8
        predict = {"soa": soa_predictor, "halving": halving_predictor}[base](C)
        self.base = base
        self.cover = WeightedCover.initial(C, self.eta, predict)
        self.seed = seed
        self.cache = {} if cache is None else cache
        self.margin_errors = 0
        self.branch_rounds = 0
        self.branch_factors: list[Fraction] = []
        self.decay_log: list[tuple[str, Fraction, Fraction, int]] = []
        self._proposal: Proposal | None = None

    def clone(self) -> VoteLearner:
        new = object.__new__(VoteLearner)
        new.__dict__.update(self.__dict__)
        new.branch_factors = list(self.branch_factors)
        new.decay_log = list(self.decay_log)
        return new

    def state_key(self):
        return self.cover.key

    def _solve(self, cover: WeightedCover) -> Proposal:
        C, eps = self.C, self.eps
        rng = np.random.default_rng(_stable_seed(self.seed, cover.key))
        branches = []
        while True:
            hv = cover.highvote(self.eta)
            if not hv:
                # every vote meets an empty constraint set
                vote = VoteHypothesis.of([C.rows[0]])
                return Proposal(cover, vote, tuple(branches), Fraction(0), ())
            sol = game_value(error_matrix(C, hv))
            if sol.value <= eps / 2:
                ms = dual_eps_approx(C, sol.row_strategy, eps / 2, hv, rng=rng)
                vote = VoteHypothesis.from_counts((C.rows[i], c) for i, c in ms.counts)
                worst = max(abs(vote(x) - y) for x, y in hv)
                if worst > eps:
                    raise InvariantViolation(f"proposed vote deviates {worst} > eps on HighVote")
                return Proposal(cover, vote, tuple(branches), sol.value, tuple(hv), ms)
            net = eps_net(C, hv, eps / 2, rng=rng)
            if net is None:
                raise InvariantViolation("game value above eps/2 but no eps-net exists")
            before = cover.total_weight()
            cover = cover.branch(net.sequence)
            branches.append(Branch(net.sequence, sol.value, before, cover.total_weight(), net))

    def propose(self) -> Proposal:
        if self._proposal is not None:
            return self._proposal
        key = self.cover.key
        prop = self.cache.get(key)
        if prop is None:
            prop = self.cache[key] = self._solve(self.cover)
        self.cover = prop.cover
        for b in prop.branches:
            self.branch_rounds += 1
            m = len(b.sequence)
            self.branch_factors.append(self.eps / 4 * m)
            self.decay_log.append(("branch", b.weight_before, b.weight_after, m))
        self._proposal = prop
        return prop

    def hypothesis(self) -> VoteHypothesis:
        return self.propose().vote

    def value(self, x: int) -> Fraction:
        return self.propose().vote(x)

    def loss(self, x: int, y: int) -> int:
        return int(abs(self.value(x) - y) > self.eps)

    def observe(self, x: int, y: int) -> bool:
        err = self.loss(x, y)
        if err:
            before = self.cover.total_weight()
            self.cover = self.cover.update(x, y)
            self.decay_log.append(("margin", before, self.cover.total_weight(), 0))
            self.margin_errors += 1
        self._proposal = None
        return bool(err)


class MajLearner:
    """Predicts with the majority of each proposed vote (eps = 1/3 by default)."""

    def __init__(self, C: ConceptClass, eps=Fraction(1, 3), **kw):
        self.inner = VoteLearner(C, eps, **kw)
        self.mistakes = 0

    def clone(self) -> MajLearner:
        new = object.__new__(MajLearner)
        new.inner = self.inner.clone()
        new.mistakes = self.mistakes
        return new

    def state_key(self):
        return self.inner.state_key()

    def propose(self):
        return (MajHypothesis(self.inner.hypothesis()),)

    def predict(self, x: int) -> int:
        return MajHypothesis(self.inner.hypothesis())(x)

    def loss(self, x: int, y: int) -> int:
        return int(self.predict(x) != y)

    def observe(self, x: int, y: int) -> bool:
        wrong = self.predict(x) != y
        self.mistakes += wrong
        self.inner.observe(x, y)
        return wrong


@dataclass
class MarginRound:
    t: int
    x: int
    y: int
    value: Fraction
    vote_size: int
    margin_error: bool
    mistake: bool
    branches: int
    cover_before: tuple


@dataclass
class MarginTrace:
    rounds: list[MarginRound]
    margin_error_count: int
    branch_count: int
    mistake_count: int
    bound: float
    L: int
    eps: Fraction
    max_vote_size: int
    branch_sizes: list[int]

    @property
    def stream(self) -> list[Example]:
        return [(r.x, r.y) for r in self.rounds]


def check_margin_decay(learner: VoteLearner) -> None:
    e = learner.eps
    eta = learner.eta
    for kind, before, after, m in learner.decay_log:
        if kind == "margin" and after > (1 - (e / 8) * (1 - e / 8)) * before:
            raise InvariantViolation(f"margin-error round kept {after / before} of the weight")
        if kind == "branch" and after > m * ((1 - e / 8) * eta + e / 8) * before:
            raise InvariantViolation(f"branch round grew weight by {after / before}")


def check_multiplicity(trace: MarginTrace, learner: VoteLearner, L: int) -> None:
    """At least prod((eps/4) m_r) entries hold each consistent target, all with
    weight >= eta^L.  Checked at every round start and at the end."""
    C = learner.C
    targets = C.members(C.consistent(trace.stream))
    if not targets:
        raise InvariantViolation("stream is not C-realizable")
    checkpoints, done = [], 0
    for r in trace.rounds:
        checkpoints.append((r.cover_before, done))
        done += r.branches
    checkpoints.append((learner.cover.key, done))
    for t in targets:
        for groups, n_branches in checkpoints:
            needed = math.prod(learner.branch_factors[:n_branches], start=Fraction(1))
            held = [(k, c) for (mask, k), c in groups if mask >> t & 1]
            if any(k > L for k, _ in held):
                raise InvariantViolation("target entry with weight below eta^L")
            if sum(c for _, c in held) < needed:
                raise InvariantViolation(
                    f"only {sum(c for _, c in held)} entries hold the target, need {float(needed):.3g}")


def lv_propose(learner: VoteLearner):
    """The vote for the current state, or the first branch taken on the way to it."""
    prop = learner.propose()
    if prop.branches:
        return prop.branches[0]
    return prop.vote


def lv_run(C: ConceptClass, eps, stream, learner=None, L: int | None = None,
           check: bool = True, mistake_learner: bool = False) -> MarginTrace:
    learner = learner or VoteLearner(C, eps)
    inner = learner.inner if isinstance(learner, MajLearner) else learner
    L = ldim(C) if L is None else L
    rounds = []
    mistakes = 0
    max_size = 0
    branch_sizes = []
    for t, (x, y) in enumerate(stream, 1):
        cover_before = inner.cover.key
        n_before = inner.branch_rounds
        prop = inner.propose()
        branch_sizes.extend(len(b.sequence) for b in prop.branches)
        v = prop.vote(x)
        max_size = max(max_size, prop.vote.size)
        wrong = int(v >= Fraction(1, 2)) != y
        mistakes += wrong
        err = inner.observe(x, y)
        rounds.append(MarginRound(t, x, y, v, prop.vote.size, err, wrong,
                                  inner.branch_rounds - n_before, cover_before))
    trace = MarginTrace(rounds, inner.margin_errors, inner.branch_rounds, mistakes,
                        margin_bound(L, inner.eps), L, inner.eps, max_size, branch_sizes)
    if check:
        check_margin_decay(inner)
        check_multiplicity(trace, inner, L)
        e = float(inner.eps)
        lhs = trace.margin_error_count + trace.branch_count * 8 / (e * (1 - e / 8)) * math.log(1 / (1 - e / 16))
        if lhs > trace.bound * (1 + 1e-12):
            raise InvariantViolation(f"M + N*c = {lhs} exceeds {trace.bound}")
    return trace


def lv_as_mistake_learner(C: ConceptClass, stream, learner: MajLearner | None = None,
                          check: bool = True) -> MarginTrace:
    """Majority-vote wrapper at eps = 1/3; mistakes are counted on Maj of each vote."""
    learner = learner or MajLearner(C)
    return lv_run(C, learner.inner.eps, stream, learner=learner, check=check)


def vote_size_constant(trace: MarginTrace, C: ConceptClass) -> float:
    """Adaptive c in |vote| <= c * vc* / eps^2."""
    return trace.max_vote_size * float(trace.eps) ** 2 / max(dual_vcdim(C), 1)


def halving_mistake_bound(C: ConceptClass) -> int:
    """Worst-case mistakes of the halving learner on C (exact recursion)."""
    lm = C.label_masks
    memo: dict[int, int] = {}

    def worst(V: int) -> int:
        if V in memo:
            return memo[V]
        best = 0
        for x in range(C.n):
            a, b = V & lm[x][0], V & lm[x][1]
            if not a or not b:
                continue
            pred = int(b.bit_count() >= a.bit_count())
            best = max(best, (pred != 0) + worst(a), (pred != 1) + worst(b))
        memo[V] = best
        return best

    return worst(C.full)
