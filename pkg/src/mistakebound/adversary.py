"""Adversaries that generate C-realizable example streams."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .core import ConceptClass, Example
from .dims import INF, DEFAULT_STATE_CAP, CapExceeded, MistakeBoundGame


@dataclass
class WorstCase:
    """Result of the exact adversary search against one deterministic learner."""
    stream: list[Example]
    forced: float
    nodes: int
    heuristic: bool = False


def worst_case_stream(C: ConceptClass, learner, T: int = 64,
                      cap: int = DEFAULT_STATE_CAP, fallback: bool = True) -> WorstCase:
    """Realizable stream maximizing the learner's loss count.

    The learner must expose ``clone``, ``state_key``, ``loss(x, y)`` and
    ``observe(x, y)``.  Search states are (learner state, true version space).
    An example that changes neither is pointless for the adversary unless it
    costs the learner a loss, in which case the loss can be repeated forever.
    When the search exceeds ``cap`` states, a greedy adversary is used instead
    and the result is flagged as heuristic.
    """
    lm = C.label_masks
    memo: dict = {}
    nodes = 0

    def search(lrn, V: int):
        nonlocal nodes
        key = (lrn.state_key(), V)
        got = memo.get(key)
        if got is not None:
            return got
        nodes += 1
        if nodes > cap:
            raise CapExceeded(f"adversary search exceeded {cap} states")
        best, arg = 0, None
        for x in range(C.n):
            for y in (0, 1):
                V2 = V & lm[x][y]
                if not V2:
                    continue
                loss = lrn.loss(x, y)
                nxt = lrn.clone()
                nxt.observe(x, y)
                if V2 == V and nxt.state_key() == key[0]:
                    if loss:
                        memo[key] = (INF, (x, y))
                        return memo[key]
                    continue
                v = loss + search(nxt, V2)[0]
                if v > best or arg is None:
                    best, arg = v, (x, y)
        memo[key] = (best, arg)
        return best, arg

    try:
        forced = search(learner.clone(), C.full)[0]
    except CapExceeded:
        if not fallback:
            raise
        return greedy_stream(C, learner, T)
    stream, lrn, V = [], learner.clone(), C.full
    while len(stream) < T:
        _, arg = search(lrn, V)
        if arg is None:
            break
        stream.append(arg)
        lrn.observe(*arg)
        V &= lm[arg[0]][arg[1]]
    return WorstCase(stream, forced, nodes)


def greedy_stream(C: ConceptClass, learner, T: int) -> WorstCase:
    """Heuristic adversary: maximize the immediate loss, then keep the version
    space's Littlestone dimension as high as possible."""
    from .dims import Littlestone

    lit = Littlestone(C)
    lm = C.label_masks
    stream, lrn, V, total = [], learner.clone(), C.full, 0
    for _ in range(T):
        options = [(lrn.loss(x, y), lit(V & lm[x][y]), -x, y) for x in range(C.n) for y in (0, 1)
                   if V & lm[x][y]]
        loss, _, negx, y = max(options)
        x = -negx
        stream.append((x, y))
        total += loss
        lrn.observe(x, y)
        V &= lm[x][y]
    return WorstCase(stream, total, 0, heuristic=True)


class PolicyAdversary:
    """Replies to any hypothesis from H with the example of the mistake-bound
    recursion; forces at least MB(C, H) mistakes on every learner using H."""

    def __init__(self, C: ConceptClass, H: ConceptClass, cap: int = DEFAULT_STATE_CAP):
        self.C = C
        self.game = MistakeBoundGame(C, H, cap)
        self.V = C.full

    def reply(self, h) -> Example | None:
        ex = self.game.hardest_example(self.V, tuple(h))
        if ex is not None:
            self.V &= self.C.label_masks[ex[0]][ex[1]]
        return ex


def play_policy(C: ConceptClass, H: ConceptClass, learner, T: int = 64) -> tuple[list[Example], int]:
    """Run PolicyAdversary against a learner exposing ``propose`` (hypothesis first)."""
    adv = PolicyAdversary(C, H)
    stream, mistakes = [], 0
    for _ in range(T):
        h = learner.propose()[0]
        ex = adv.reply(h)
        if ex is None:
            break
        mistakes += learner.observe(*ex)
        stream.append(ex)
    return stream, mistakes


def worst_case_adversary(C: ConceptClass, target, T: int = 64):
    """Policy adversary when ``target`` is a hypothesis class, otherwise the
    exact search against the given learner."""
    if isinstance(target, ConceptClass):
        return PolicyAdversary(C, target)
    return worst_case_stream(C, target, T)


def random_stream(C: ConceptClass, T: int, seed: int) -> list[Example]:
    """Pick a target concept at random, then label uniformly random instances with it."""
    rng = random.Random(seed)
    h = rng.choice(C.rows)
    xs = [rng.randrange(C.n) for _ in range(T)]
    return [(x, h[x]) for x in xs]


def random_label_stream(n: int, T: int, seed: int) -> list[Example]:
    """Uniform instances with independent fair-coin labels (agnostic setting)."""
    rng = random.Random(seed)
    return [(rng.randrange(n), rng.randrange(2)) for _ in range(T)]


def alternating_stream(n: int, T: int, x: int = 0) -> list[Example]:
    return [(x % n, t % 2) for t in range(T)]
