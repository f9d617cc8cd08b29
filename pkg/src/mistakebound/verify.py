"""Acceptance checks over the fixture family, each with a runtime budget."""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import oracles
from .adversary import random_label_stream, random_stream, worst_case_stream
from .agnostic import agnostic_run, check_coverage
from .core import make_class, powerset, singletons, thresholds
from .dims import (
    dual_helly, dual_vcdim, eq_query_complexity, ldim, mb_exact, simulate_eq,
    threshold_dim, vcdim, MistakeBoundGame,
)
from .fixtures import fixture_classes, fixture_pairs
from .games import (
    GameMatrix, MAX_DOUBLINGS, approx_ok, class_matrix, game_value, net_ok, triangular_dim,
)
from .learner_helly import HellyLearner, helly_bound, lh_run
from .learner_vote import MajLearner, VoteLearner, lv_as_mistake_learner, lv_run

MARGIN_EPS = (Fraction(1, 10), Fraction(1, 4), Fraction(2, 5))
STREAM_T = 64
SLACK = 1e-9


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str
    bound: str
    seconds: float = 0.0
    limit: float = math.inf
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.number:>2} {self.name}: {self.measured} (bound: {self.bound}) "
                f"{self.seconds:.1f}s/{self.limit:.0f}s")


@dataclass
class SuiteReport:
    level: str
    results: list[CriterionResult]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        out = [r.line() for r in self.results]
        for r in self.results:
            if not r.passed:
                out += [f"    {r.number}: {d}" for d in r.details[:10]]
        return out


class _Ctx:
    def __init__(self, n_random: int, mutate: str | None):
        self.classes = fixture_classes(n_random)
        self.pairs = fixture_pairs(n_random)
        self.mutate = mutate


def _dimension_oracles(ctx: _Ctx):
    bad = []
    for f in ctx.classes:
        C = f.C
        got = (ldim(C), vcdim(C), dual_vcdim(C), threshold_dim(C))
        want = (oracles.ldim_tree(C), oracles.vc_brute(C), oracles.dual_vc_brute(C),
                oracles.threshold_brute(C))
        if got != want:
            bad.append(f"{f.name}: (L, VC, VC*, Thr) = {got}, oracle {want}")
    return not bad, f"{len(ctx.classes) - len(bad)}/{len(ctx.classes)} classes agree", "exact", bad


def _lower_bound(ctx: _Ctx):
    bad, margin = [], math.inf
    for p in ctx.pairs:
        K, L = dual_helly(p.C, p.H), ldim(p.C)
        mb = mb_exact(p.C, p.H).value
        margin = min(margin, mb - max(L, K - 1))
        if mb < max(L, K - 1):
            note = " (single concept, K clamped to 2)" if len(p.C) == 1 else ""
            bad.append(f"{p.name}: MB={mb} < max(L={L}, K-1={K - 1}){note}")
    return (not bad, f"{len(ctx.pairs) - len(bad)}/{len(ctx.pairs)} pairs, min slack {margin}",
            "MB >= max(L, K-1)", bad)


def _helly(ctx: _Ctx):
    bad, ran, worst = [], 0, 0.0
    for p in ctx.pairs:
        K, L = dual_helly(p.C, p.H), ldim(p.C)
        if K > 4 or L > 3:
            continue
        ran += 1
        bound = math.ceil(helly_bound(L, K))
        try:
            probe = HellyLearner(p.C, p.H, K=K, L=L, mutate=ctx.mutate)
            wc = worst_case_stream(p.C, probe, T=STREAM_T, fallback=False)
            learner = HellyLearner(p.C, p.H, K=K, L=L, cache=probe.cache, mutate=ctx.mutate)
            trace = lh_run(p.C, p.H, wc.stream, learner=learner)
        except Exception as e:
            bad.append(f"{p.name}: {type(e).__name__}: {e}")
            continue
        if trace.mistake_count > bound:
            bad.append(f"{p.name}: {trace.mistake_count} mistakes > {bound}")
        worst = max(worst, trace.mistake_count / max(bound, 1))
    return not bad, f"{ran} pairs, max mistakes/bound {worst:.3f}", "ceil(4 L K ln 2K)", bad


def _majority(ctx: _Ctx):
    bad, worst = [], 0.0
    for f in ctx.classes:
        C, L = f.C, ldim(f.C)
        cache: dict = {}
        streams = [worst_case_stream(C, MajLearner(C, cache=cache), T=STREAM_T, fallback=False).stream]
        streams += [random_stream(C, STREAM_T, s) for s in range(100)]
        for s, stream in enumerate(streams):
            try:
                trace = lv_as_mistake_learner(C, stream, learner=MajLearner(C, cache=cache))
            except Exception as e:
                bad.append(f"{f.name} stream {s}: {type(e).__name__}: {e}")
                break
            if trace.mistake_count > 80 * L:
                bad.append(f"{f.name} stream {s}: {trace.mistake_count} > {80 * L}")
            worst = max(worst, trace.mistake_count / max(80 * L, 1))
    return not bad, f"{len(ctx.classes)} classes x 101 streams, max mistakes/bound {worst:.3f}", "80 L", bad


def _margin(ctx: _Ctx):
    bad, worst = [], 0.0
    for eps in MARGIN_EPS:
        for f in ctx.classes:
            C = f.C
            cache: dict = {}
            streams = [worst_case_stream(C, VoteLearner(C, eps, cache=cache), T=STREAM_T,
                                         fallback=False).stream]
            streams += [random_stream(C, STREAM_T, s) for s in range(10)]
            for s, stream in enumerate(streams):
                try:
                    trace = lv_run(C, eps, stream, learner=VoteLearner(C, eps, cache=cache))
                except Exception as e:
                    bad.append(f"{f.name} eps={eps} stream {s}: {type(e).__name__}: {e}")
                    break
                if trace.margin_error_count > trace.bound:
                    bad.append(f"{f.name} eps={eps}: {trace.margin_error_count} > {trace.bound:.2f}")
                worst = max(worst, trace.margin_error_count / max(trace.bound, 1))
    return (not bad, f"3 eps x {len(ctx.classes)} classes x 11 streams, max errors/bound {worst:.3f}",
            "8L/(eps(1-eps/8)) ln(8/eps)", bad)


AGNOSTIC_CLASSES = (("singletons(3)", singletons(3)), ("singletons(5)", singletons(5)),
                    ("powerset(2)", powerset(2)), ("thresholds(3)", thresholds(3)))


def _agnostic(ctx: _Ctx):
    bad, worst, worst_agg, runs = [], 0.0, -math.inf, 0
    for name, C in AGNOSTIC_CLASSES:
        cache: dict = {}
        for T in (8, 16):
            for s in range(100):
                runs += 1
                try:
                    r = agnostic_run(C, random_label_stream(C.n, T, s), seed=s, cache=cache)
                except Exception as e:
                    bad.append(f"{name} T={T} seed {s}: {type(e).__name__}: {e}")
                    continue
                if r.regret > r.composite_bound + SLACK:
                    bad.append(f"{name} T={T} seed {s}: regret {r.regret:.3f} > {r.composite_bound:.3f}")
                if r.aggregator_regret > r.aggregator_bound + SLACK:
                    bad.append(f"{name} T={T} seed {s}: aggregator regret "
                               f"{r.aggregator_regret:.4f} > {r.aggregator_bound:.4f}")
                if not all(r.chain.values()):
                    bad.append(f"{name} T={T} seed {s}: chain step failed {r.chain}")
                worst = max(worst, r.regret / r.composite_bound)
                worst_agg = max(worst_agg, r.aggregator_regret - r.aggregator_bound)
    return (not bad, f"{runs} runs, max regret/bound {worst:.3f}, max aggregator excess {worst_agg:.3f}",
            "sqrt((T/2) ln N) + eps T + margin bound", bad)


def coverage_cases(max_n: int = 3, max_size: int = 8, max_len: int = 4):
    for n in range(1, max_n + 1):
        rows = list(itertools.product((0, 1), repeat=n))
        for k in range(1, min(max_size, len(rows)) + 1):
            for sub in itertools.combinations(rows, k):
                C = make_class(sub)
                for T in range(1, max_len + 1):
                    for xs in itertools.product(range(n), repeat=T):
                        yield C, xs


def _coverage(ctx: _Ctx):
    bad, cases = [], 0
    for C, xs in coverage_cases():
        cases += 1
        for every_round in (False, True):
            missed = check_coverage(C, xs, every_round)
            if missed:
                bad.append(f"{C.rows} on {xs} (every_round={every_round}): uncovered {missed}")
    return not bad, f"{cases} (class, sequence) cases", "every concept trace covered", bad


def _eq(ctx: _Ctx):
    bad = []
    for p in ctx.pairs:
        game = MistakeBoundGame(p.C, p.H)
        mb = game.solve(p.C.full)[0]
        eq = eq_query_complexity(p.C, p.H)
        sim = simulate_eq(p.C, p.H, game)
        if eq != mb + 1 or sim > eq:
            bad.append(f"{p.name}: EQ={eq}, MB={mb}, simulated={sim}")
    return not bad, f"{len(ctx.pairs) - len(bad)}/{len(ctx.pairs)} pairs", "EQ = MB + 1", bad


def _games(ctx: _Ctx):
    bad = []
    for k in range(1, 9):
        G = GameMatrix.from_rows([[int(i <= j) for j in range(k)] for i in range(k)])
        v = game_value(G).value
        if v != 1:
            bad.append(f"triangular {k}x{k}: value {v}")
    v = game_value(GameMatrix.from_rows([[1, 0], [0, 1]])).value
    if v != Fraction(1, 2):
        bad.append(f"2x2 symmetric game: value {v}")
    rng = random.Random(7)
    worst_gap = 0.0
    for _ in range(50):
        r, c = rng.randint(1, 12), rng.randint(1, 12)
        G = GameMatrix.from_rows([[rng.randint(0, 1) for _ in range(c)] for _ in range(r)])
        exact = game_value(G).value
        it = game_value(G, mode="iterative", tol=1e-4)
        gap = max(abs(float(exact) - float(it.value)), float(it.duality_gap))
        worst_gap = max(worst_gap, gap)
        if gap > 1e-4:
            bad.append(f"{r}x{c} matrix: iterative gap {gap:.2e}")
    for f in ctx.classes:
        if triangular_dim(class_matrix(f.C)) != threshold_dim(f.C):
            bad.append(f"{f.name}: triangular_dim != threshold_dim")
    return not bad, f"max iterative gap {worst_gap:.1e}", "exact values; gap <= 1e-4", bad


def _sparsification(ctx: _Ctx):
    bad, checked = [], 0
    for eps in MARGIN_EPS:
        for f in ctx.classes:
            C = f.C
            cache: dict = {}
            stream = worst_case_stream(C, VoteLearner(C, eps, cache=cache), T=STREAM_T,
                                       fallback=False).stream
            lv_run(C, eps, stream, learner=VoteLearner(C, eps, cache=cache), check=False)
            for prop in cache.values():
                for b in prop.branches:
                    checked += 1
                    if not net_ok(C, b.sequence, eps / 2) or b.net.doublings > MAX_DOUBLINGS:
                        bad.append(f"{f.name} eps={eps}: eps-net failed verification")
                if prop.approx is not None:
                    checked += 1
                    counts = dict(prop.approx.counts)
                    if (not approx_ok(C, counts, eps / 2, prop.highvote)
                            or prop.approx.doublings > MAX_DOUBLINGS
                            or any(abs(prop.vote(x) - y) > eps for x, y in prop.highvote)):
                        bad.append(f"{f.name} eps={eps}: sparse vote failed verification")
    for name, C in AGNOSTIC_CLASSES:
        for T in (8, 16):
            for s in range(5):
                r = agnostic_run(C, random_label_stream(C.n, T, s), seed=s)
                for sv, target in zip(r.sparse, r.targets):
                    checked += 1
                    dev = max(abs(float(sv.vote(x)) - target[x]) for x in range(C.n))
                    if dev > float(r.inner_eps) + SLACK or sv.doublings > MAX_DOUBLINGS:
                        bad.append(f"{name} T={T} seed {s}: final vote deviation {dev:.3f}")
    return not bad, f"{checked} outputs re-verified", f"verified within {MAX_DOUBLINGS} doublings", bad


CRITERIA = {
    1: ("dimension oracles", _dimension_oracles, 60, "quick"),
    2: ("mistake-bound lower bound", _lower_bound, 60, "quick"),
    3: ("restricted-hypothesis learner bound", _helly, 120, "full"),
    4: ("majority-vote learner bound", _majority, 120, "full"),
    5: ("margin-error bound", _margin, 180, "full"),
    6: ("agnostic regret", _agnostic, 300, "full"),
    7: ("expert coverage", _coverage, 60, "quick"),
    8: ("equivalence-query correspondence", _eq, 60, "quick"),
    9: ("game values", _games, 120, "quick"),
    10: ("sparsification", _sparsification, 120, "full"),
}


def run_criterion(number: int, ctx: _Ctx) -> CriterionResult:
    name, fn, limit, _ = CRITERIA[number]
    start = time.perf_counter()
    passed, measured, bound, details = fn(ctx)
    seconds = time.perf_counter() - start
    if seconds >= limit:
        passed = False
        details = details + [f"runtime {seconds:.1f}s exceeds {limit}s"]
    return CriterionResult(number, name, passed, measured, bound, seconds, limit, details)


def verify_suite(level: str = "full", only=None, mutate: str | None = None,
                 n_random: int = 50, progress=None) -> SuiteReport:
    """Run the acceptance criteria; ``quick`` skips the learner simulations."""
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    ctx = _Ctx(n_random, mutate)
    numbers = sorted(only) if only else [n for n, c in CRITERIA.items()
                                         if level == "full" or c[3] == "quick"]
    results = []
    for n in numbers:
        res = run_criterion(n, ctx)
        if progress:
            progress(res.line())
        results.append(res)
    return SuiteReport(level, results)
