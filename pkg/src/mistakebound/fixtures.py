"""The fixed family of small classes and (C, H) pairs used by the verification suite."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import ConceptClass, constant, powerset, random_class, singletons, thresholds

RANDOM_FIXTURES = 50
RANDOM_SEED = 20240601


@dataclass(frozen=True)
class Fixture:
    name: str
    C: ConceptClass


@dataclass(frozen=True)
class FixturePair:
    name: str
    C: ConceptClass
    H: ConceptClass


def fixture_classes(n_random: int = RANDOM_FIXTURES) -> list[Fixture]:
    out = [Fixture(f"singletons({n})", singletons(n)) for n in range(2, 9)]
    out += [Fixture(f"thresholds({n})", thresholds(n)) for n in range(2, 7)]
    out += [Fixture(f"powerset({d})", powerset(d)) for d in range(1, 4)]
    rng = random.Random(RANDOM_SEED)
    for i in range(n_random):
        n = rng.randint(1, 6)
        m = rng.randint(1, min(16, 2**n))
        seed = rng.randrange(2**31)
        out.append(Fixture(f"random({n},{m},{seed})", random_class(n, m, seed)))
    return out


def fixture_pairs(n_random: int = RANDOM_FIXTURES) -> list[FixturePair]:
    """(C, C), (C, C + all-zero), (C, C + both constants), and (C, all functions) for |X| <= 4."""
    out = []
    for f in fixture_classes(n_random):
        C, n = f.C, f.C.n
        zero, one = constant(n, 0), constant(n, 1)
        out.append(FixturePair(f"{f.name}|self", C, C))
        if zero not in C:
            out.append(FixturePair(f"{f.name}|+zero", C, C.union([zero])))
        if zero not in C or one not in C:
            out.append(FixturePair(f"{f.name}|+constants", C, C.union([zero, one])))
        if n <= 4 and len(C) < 2**n:
            out.append(FixturePair(f"{f.name}|all", C, powerset(n)))
    return out
