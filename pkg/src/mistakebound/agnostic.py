"""Agnostic online learning with randomized proper predictions.

Experts g_I replay SOA with forced flips at the rounds in I.  For each expert
the margin-vote learner is run on the expert's own labels; the resulting vote
predictors are aggregated with exponential weights, and the aggregate mixture
over C is sparsified into a small vote each round.

Experts sharing the same I-prefix behave identically up to the current round,
so they are tracked as one group with a multiplicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import ConceptClass, Example
from .dims import Littlestone, dual_vcdim, ldim
from .games import MAX_DOUBLINGS, START_CONSTANT, SparsificationFailed, as_fraction, log1
from .learner_vote import VoteLearner, margin_bound
from .soa import soa_label
from .votes import VoteHypothesis

DEFAULT_EXPERT_CAP = 10**5
MAX_INNER_EPS = Fraction(9, 20)
SLACK = 1e-9


class ExpertCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class MistakeSet:
    """Rounds (1-based) at which an expert flips SOA's prediction."""
    I: frozenset[int]

    @classmethod
    def of(cls, *rounds: int) -> MistakeSet:
        return cls(frozenset(rounds))

    def check(self, L: int, T: int) -> None:
        if len(self.I) > L or any(not 1 <= t <= T for t in self.I):
            raise ValueError(f"mistake set {sorted(self.I)} invalid for L={L}, T={T}")


def _flip_step(C: ConceptClass, lit, mask: int, x: int, flip: bool, every_round: bool):
    """One step of the expert construction: returns (label, next version space)."""
    lm = C.label_masks[x]
    pred = soa_label(lit, mask, x)
    if flip and mask & lm[1 - pred]:
        return 1 - pred, mask & lm[1 - pred]
    if every_round:
        return pred, mask & lm[pred]
    return pred, mask


def expert_trace(C: ConceptClass, I, xs, every_round: bool = False, lit=None) -> list[int]:
    """Labels g_I(x_{1:t}) for t = 1..len(xs).

    The label at round t is SOA's prediction on the version space after round
    t's update; at a flip round that update keeps only concepts disagreeing
    with SOA (when any exist).  With ``every_round`` the version space is also
    restricted to the emitted label on the other rounds, which makes every
    expert's trace realizable by C.
    """
    I = I.I if isinstance(I, MistakeSet) else frozenset(I)
    lit = lit or Littlestone(C)
    mask, out = C.full, []
    for t, x in enumerate(xs, 1):
        y, mask = _flip_step(C, lit, mask, x, t in I, every_round)
        out.append(y)
    return out


def expert_g(C: ConceptClass, I, xs, every_round: bool = False) -> int:
    """g_I on the prefix ``xs``."""
    return expert_trace(C, I, xs, every_round)[-1]


def mistake_sets(T: int, L: int):
    from itertools import combinations
    for j in range(min(L, T) + 1):
        for c in combinations(range(1, T + 1), j):
            yield frozenset(c)


def expert_count(T: int, L: int) -> int:
    return sum(math.comb(T, j) for j in range(min(L, T) + 1))


def covering_set(C: ConceptClass, h, xs, lit=None) -> frozenset[int]:
    """Rounds where SOA (updating every round) errs on h's labels; g of this set traces h."""
    lit = lit or Littlestone(C)
    lm = C.label_masks
    mask, I = C.full, set()
    for t, x in enumerate(xs, 1):
        if soa_label(lit, mask, x) != h[x]:
            I.add(t)
        mask &= lm[x][h[x]]
    return frozenset(I)


def check_coverage(C: ConceptClass, xs, every_round: bool = False) -> list:
    """Concept traces on xs not produced by any g_I with |I| <= L (empty when covered)."""
    L = max(ldim(C), 0)
    lit = Littlestone(C)
    traces = {tuple(expert_trace(C, I, xs, every_round, lit)) for I in mistake_sets(len(xs), L)}
    return [h for h in C.rows if tuple(h[x] for x in xs) not in traces]


# -- sparsification of the aggregate mixture --------------------------------

def _max_deviation(C_arr: np.ndarray, counts: np.ndarray, target: np.ndarray) -> float:
    vals = counts @ C_arr / counts.sum()
    return float(np.max(np.abs(vals - target)))


def _largest_remainder(p: np.ndarray, m: int) -> np.ndarray:
    raw = p * m
    counts = np.floor(raw).astype(np.int64)
    short = m - counts.sum()
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


@dataclass(frozen=True)
class SparseVote:
    vote: VoteHypothesis
    deviation: float
    start_size: int
    doublings: int
    method: str

    @property
    def size(self) -> int:
        return self.vote.size


def sparsify_final(C: ConceptClass, mixture, eps, rng=None, seed: int = 0) -> SparseVote:
    """Vote over C whose value is within eps of the mixture's at every instance.

    ``mixture`` maps concept indices to non-negative weights.  Small sizes are
    tried first by deterministic rounding; after that the mixture is sampled
    starting from 8 * vc* / eps^2 draws, doubling until the full scan passes.
    """
    eps = float(eps)
    items = [(i, float(w)) for i, w in (mixture.items() if isinstance(mixture, dict) else mixture) if w > 0]
    if not items:
        raise ValueError("empty mixture")
    idx = np.array([i for i, _ in items])
    p = np.array([w for _, w in items])
    p /= p.sum()
    C_arr = np.array([C.rows[i] for i in idx], dtype=float)
    target = p @ C_arr

    def done(counts, m0, d, method):
        vote = VoteHypothesis.from_counts((C.rows[i], int(c)) for i, c in zip(idx, counts) if c)
        return SparseVote(vote, _max_deviation(C_arr, counts, target), m0, d, method)

    if len(idx) == 1:
        return done(np.array([1]), 1, 0, "point")
    m0 = math.ceil(START_CONSTANT * max(dual_vcdim(C), 1) / eps**2)
    for m in range(1, min(m0, 64) + 1):
        counts = _largest_remainder(p, m)
        if _max_deviation(C_arr, counts, target) <= eps + SLACK:
            return done(counts, m0, 0, "rounded")
    rng = rng if rng is not None else np.random.default_rng(seed)
    m = m0
    for d in range(MAX_DOUBLINGS + 1):
        for _ in range(2):
            counts = rng.multinomial(m, p)
            if _max_deviation(C_arr, counts, target) <= eps + SLACK:
                return done(counts, m0, d, "sampled")
        counts = _largest_remainder(p, m)
        if _max_deviation(C_arr, counts, target) <= eps + SLACK:
            return done(counts, m0, d, "rounded")
        m *= 2
    raise SparsificationFailed(f"no eps-approximating vote within {MAX_DOUBLINGS} doublings")


def mixture_values(C: ConceptClass, mixture) -> list[float]:
    """p(h : h(x) = 1) for every instance x."""
    total = sum(mixture.values())
    return [sum(w for i, w in mixture.items() if C.rows[i][x]) / total for x in range(C.n)]


def size_shape(C: ConceptClass, T: int, L: int) -> float:
    """vc* T / (L log(T/L)), the reference shape for the final vote size."""
    L = max(L, 1)
    return max(dual_vcdim(C), 1) * T / (L * log1(T / L))


# -- the aggregated learner ---------------------------------------------------

@dataclass
class _Group:
    prefix: frozenset[int]
    mask: int
    learner: VoteLearner
    loss: float = 0.0


@dataclass
class AgnosticRound:
    t: int
    x: int
    y: int
    mixture_value: float
    prediction: float
    vote_size: int
    abs_loss: float
    best_loss: int
    cum_regret_vs_best: float
    groups: int


@dataclass
class AgnosticResult:
    rounds: list[AgnosticRound]
    votes: list[VoteHypothesis]
    sparse: list[SparseVote]
    targets: list[list[float]]
    T: int
    L: int
    N: int
    eta: float
    eps: float
    inner_eps: Fraction
    learner_loss: float
    mixture_loss: float
    best_expert_loss: float
    best_concept_loss: int
    regret: float
    aggregator_regret: float
    aggregator_bound: float
    composite_bound: float
    chain_bound: float
    star_margin_errors: int
    star_deviation: float
    trivial_regime: bool
    max_vote_size: int
    size_shape: float
    chain: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.regret <= self.composite_bound + SLACK
                and self.aggregator_regret <= self.aggregator_bound + SLACK
                and all(self.chain.values()))

    def csv_rows(self):
        for r in self.rounds:
            yield {"round": r.t, "vote_size": r.vote_size, "prediction": r.prediction,
                   "label": r.y, "abs_loss": r.abs_loss, "cum_regret_vs_best": r.cum_regret_vs_best}


def agnostic_parameters(T: int, L: int) -> tuple[int, float, float]:
    """(N, eta, eps) for horizon T and Littlestone dimension L."""
    N = expert_count(T, L)
    eta = math.sqrt(8 / T * math.log(N)) if N > 1 else 0.0
    Lp = max(L, 1)
    eps = math.sqrt(Lp / T * math.log(math.e * T / Lp))
    return N, eta, eps


def agnostic_run(C: ConceptClass, stream, T: int | None = None, seed: int = 0,
                 expert_cap: int = DEFAULT_EXPERT_CAP, cache: dict | None = None) -> AgnosticResult:
    """Run the aggregated learner on a labeled stream (labels may be arbitrary)."""
    stream = list(stream)
    T = len(stream) if T is None else T
    if T < 1 or len(stream) != T:
        raise ValueError("stream length must equal T >= 1")
    L = ldim(C)
    N, eta, eps = agnostic_parameters(T, L)
    if N > expert_cap:
        raise ExpertCapExceeded(f"{N} experts exceed the cap {expert_cap}")
    inner_eps = min(as_fraction(eps), MAX_INNER_EPS)
    lit = Littlestone(C)
    lm = C.label_masks
    rng = np.random.default_rng(seed)
    cache = {} if cache is None else cache
    xs = [x for x, _ in stream]

    losses = np.array([[h[x] != y for x, y in stream] for h in C.rows], dtype=np.int64)
    star = int(np.argmin(losses.sum(axis=1)))
    h_star = C.rows[star]
    I_star = covering_set(C, h_star, xs, lit)

    groups = [_Group(frozenset(), C.full, VoteLearner(C, inner_eps, seed=seed, cache=cache))]
    rounds, votes, sparse, targets = [], [], [], []
    cum = cum_mix = 0.0
    cum_best = np.zeros(len(C), dtype=np.int64)
    star_dev = 0.0
    chain = {"sparsify": True, "aggregator": True, "star_deviation": True}

    for t, (x, y) in enumerate(stream, 1):
        # groups hold prefixes I ∩ [1, t-1]; each stands for this many experts
        def mult(g: _Group) -> int:
            return sum(math.comb(T - t + 1, j) for j in range(L - len(g.prefix) + 1))

        logw = np.array([math.log(mult(g)) - eta * g.loss for g in groups])
        w = np.exp(logw - logw.max())
        w /= w.sum()
        preds, mixture = [], {}
        for g, wg in zip(groups, w):
            vote = g.learner.hypothesis()
            preds.append(float(vote(x)))
            size = vote.size
            for row, c in vote.counts:
                i = C.index[row]
                mixture[i] = mixture.get(i, 0.0) + wg * c / size
        mix_val = float(np.dot(w, preds))
        sv = sparsify_final(C, mixture, inner_eps, rng=rng)
        votes.append(sv.vote)
        sparse.append(sv)
        targets.append(mixture_values(C, mixture))
        pred = float(sv.vote(x))
        if sv.deviation > float(inner_eps) + SLACK:
            chain["sparsify"] = False

        star_group = next(g for g in groups if g.prefix == I_star & set(range(1, t)))
        f_star = preds[groups.index(star_group)]
        star_dev += abs(f_star - h_star[x])

        new_groups = []
        for g, f in zip(groups, preds):
            g.loss += abs(f - y)
            if len(g.prefix) < L:
                label, mask = _flip_step(C, lit, g.mask, x, True, every_round=True)
                lrn = g.learner.clone()
                lrn.observe(x, label)
                new_groups.append(_Group(g.prefix | {t}, mask, lrn, g.loss))
            label, g.mask = _flip_step(C, lit, g.mask, x, False, every_round=True)
            g.learner.observe(x, label)
            new_groups.append(g)
        groups = new_groups

        cum += abs(pred - y)
        cum_mix += abs(mix_val - y)
        cum_best += losses[:, t - 1]
        best_now = int(cum_best.min())
        best_expert = min(g.loss for g in groups)
        if cum_mix - best_expert > math.sqrt(T / 2 * math.log(N)) + SLACK:
            chain["aggregator"] = False
        rounds.append(AgnosticRound(t, x, y, mix_val, pred, sv.size, abs(pred - y),
                                    best_now, cum - best_now, len(groups)))

    star_final = next(g for g in groups if g.prefix == I_star)
    M_star = star_final.learner.margin_errors
    e_in = float(inner_eps)
    if star_dev > e_in * T + M_star + SLACK or M_star > margin_bound(L, inner_eps) + SLACK:
        chain["star_deviation"] = False
    best_concept = int(losses[star].sum())
    best_expert = min(g.loss for g in groups)
    agg_bound = math.sqrt(T / 2 * math.log(N))
    composite = agg_bound + eps * T + margin_bound(L, eps)
    chain_bound = agg_bound + 2 * e_in * T + margin_bound(L, inner_eps)
    regret = cum - best_concept
    chain["total"] = regret <= e_in * T + agg_bound + star_dev + SLACK
    return AgnosticResult(
        rounds=rounds, votes=votes, sparse=sparse, targets=targets,
        T=T, L=L, N=N, eta=eta, eps=eps, inner_eps=inner_eps,
        learner_loss=cum, mixture_loss=cum_mix, best_expert_loss=best_expert,
        best_concept_loss=best_concept, regret=regret,
        aggregator_regret=cum_mix - best_expert, aggregator_bound=agg_bound,
        composite_bound=composite, chain_bound=chain_bound,
        star_margin_errors=M_star, star_deviation=star_dev,
        trivial_regime=T < 10 * L, max_vote_size=max(v.size for v in votes),
        size_shape=size_shape(C, T, L), chain=chain,
    )


def monte_carlo_loss(result: AgnosticResult, C: ConceptClass, draws: int = 10**4, seed: int = 0):
    """Sample one concept per round from each emitted vote; returns (mean loss, standard error)."""
    rng = np.random.default_rng(seed)
    total = np.zeros(draws)
    for r, vote in zip(result.rounds, result.votes):
        members = np.array([row[r.x] for row in vote.members()])
        picks = members[rng.integers(len(members), size=draws)]
        total += picks != r.y
    return float(total.mean()), float(total.std(ddof=1) / math.sqrt(draws))
