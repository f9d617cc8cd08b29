"""Slow, direct reference computations used to cross-check the fast ones.

These deliberately share no code with ``dims``: classes are handled as sets
of row tuples and every quantity is found by exhaustive search.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations, permutations, product

from .core import ConceptClass


def _consistent(rows, S) -> bool:
    return any(all(h[x] == y for x, y in S) for h in rows)


def ldim_tree(C: ConceptClass) -> int:
    """Depth of the deepest complete mistake tree, found by explicit tree search."""
    n = C.n

    @lru_cache(maxsize=None)
    def has_tree(rows: frozenset, depth: int) -> bool:
        if not rows:
            return False
        if depth == 0:
            return True
        for x in range(n):
            zero = frozenset(h for h in rows if h[x] == 0)
            one = rows - zero
            if zero and one and has_tree(zero, depth - 1) and has_tree(one, depth - 1):
                return True
        return False

    rows = frozenset(C.rows)
    if not rows:
        return -1
    d = 0
    while has_tree(rows, d + 1):
        d += 1
    return d


def vc_brute(C: ConceptClass) -> int:
    best = 0
    for k in range(1, C.n + 1):
        if any(len({tuple(h[x] for x in xs) for h in C.rows}) == 2**k
               for xs in combinations(range(C.n), k)):
            best = k
        else:
            break
    return best


def dual_vc_brute(C: ConceptClass) -> int:
    """Largest set of concepts on which the instances realize every labeling."""
    best = 0
    for k in range(1, len(C) + 1):
        found = False
        for hs in combinations(C.rows, k):
            if len({tuple(h[x] for h in hs) for x in range(C.n)}) == 2**k:
                found = True
                break
        if not found:
            break
        best = k
    return best


def threshold_brute(C: ConceptClass) -> int:
    """Largest k with ordered x_1..x_k such that every staircase 1^i 0^(k-i) appears."""
    best = 0
    for k in range(1, C.n + 1):
        need = {tuple(int(j < i) for j in range(k)) for i in range(1, k + 1)}
        if any(need <= {tuple(h[x] for x in xs) for h in C.rows}
               for xs in permutations(range(C.n), k)):
            best = k
        else:
            break
    return best


def dual_helly_brute(C: ConceptClass, H: ConceptClass):
    """max(2, largest minimal C-unrealizable core of an H-unrealizable labeled set)."""
    worst = 0
    for labels in product((None, 0, 1), repeat=C.n):
        S = [(x, y) for x, y in enumerate(labels) if y is not None]
        if _consistent(H.rows, S):
            continue
        if _consistent(C.rows, S):
            return math.inf
        for r in range(1, len(S) + 1):
            if any(not _consistent(C.rows, sub) for sub in combinations(S, r)):
                worst = max(worst, r)
                break
    return max(2, worst)
