"""Finite concept classes over the instance space {0, ..., n-1}.

A concept is a tuple of 0/1 labels, one per instance.  A ``ConceptClass``
keeps its concepts in first-occurrence order without duplicates; subsets of a
class (version spaces) are handled internally as bitmasks over concept
indices so that restriction is a single AND.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

Concept = tuple[int, ...]
Example = tuple[int, int]

POWERSET_CAP = 16


class ClassFormatError(ValueError):
    """Malformed concept-class or matrix file."""


@dataclass(frozen=True)
class ConceptClass:
    n: int
    rows: tuple[Concept, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("domain size must be >= 1")
        seen = set()
        for r in self.rows:
            if len(r) != self.n:
                raise ValueError(f"row {r} has length {len(r)}, expected {self.n}")
            if any(b not in (0, 1) for b in r):
                raise ValueError(f"row {r} is not a bit vector")
            if r in seen:
                raise ValueError(f"duplicate row {r}")
            seen.add(r)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __contains__(self, row) -> bool:
        return tuple(row) in self.index

    def __repr__(self) -> str:
        body = ",".join("".join(map(str, r)) for r in self.rows[:8])
        more = ",..." if len(self.rows) > 8 else ""
        return f"ConceptClass(n={self.n}, [{body}{more}])"

    @cached_property
    def index(self) -> dict[Concept, int]:
        return {r: i for i, r in enumerate(self.rows)}

    @cached_property
    def full(self) -> int:
        return (1 << len(self.rows)) - 1

    @cached_property
    def label_masks(self) -> tuple[tuple[int, int], ...]:
        """``label_masks[x][y]`` is the mask of concepts with h(x) = y."""
        out = []
        for x in range(self.n):
            ones = 0
            for i, r in enumerate(self.rows):
                if r[x]:
                    ones |= 1 << i
            out.append((self.full & ~ones, ones))
        return tuple(out)

    def consistent(self, examples: Iterable[Example], mask: int | None = None) -> int:
        """Mask of concepts (within ``mask``) agreeing with every example."""
        m = self.full if mask is None else mask
        lm = self.label_masks
        for x, y in examples:
            self._check(x)
            m &= lm[x][y]
            if not m:
                break
        return m

    def members(self, mask: int) -> list[int]:
        return [i for i in range(len(self.rows)) if mask >> i & 1]

    def subclass(self, mask: int) -> ConceptClass:
        return ConceptClass(self.n, tuple(self.rows[i] for i in self.members(mask)))

    def union(self, extra: Iterable[Sequence[int]]) -> ConceptClass:
        return make_class(list(self.rows) + [tuple(r) for r in extra], n=self.n)

    def column(self, x: int) -> tuple[int, ...]:
        return tuple(r[x] for r in self.rows)

    def _check(self, x: int) -> None:
        if not 0 <= x < self.n:
            raise IndexError(f"instance {x} outside domain of size {self.n}")


def make_class(rows: Sequence[Sequence[int]], n: int | None = None,
               allow_empty: bool = False) -> ConceptClass:
    """Build a class from bit rows, dropping duplicates (first occurrence wins)."""
    rows = [tuple(int(b) for b in r) for r in rows]
    if not rows:
        if not allow_empty:
            raise ValueError("empty class requires allow_empty=True")
        if n is None:
            raise ValueError("empty class requires an explicit domain size")
        return ConceptClass(n, ())
    width = len(rows[0])
    if width == 0:
        raise ValueError("zero-length rows")
    if any(len(r) != width for r in rows):
        raise ValueError("ragged rows")
    if n is not None and n != width:
        raise ValueError(f"rows have length {width}, expected {n}")
    return ConceptClass(width, tuple(dict.fromkeys(rows)))


def restrict(C: ConceptClass, e: Example) -> ConceptClass:
    """C_{(x,y)}: the concepts labeling x with y.  May be empty."""
    x, y = e
    C._check(x)
    return C.subclass(C.label_masks[x][y])


def is_realizable(C: ConceptClass, S: Iterable[Example]) -> bool:
    return C.consistent(S) != 0


def witness(C: ConceptClass, S: Iterable[Example]) -> Concept | None:
    m = C.consistent(S)
    if not m:
        return None
    return C.rows[(m & -m).bit_length() - 1]


# --- generators -------------------------------------------------------------

def singletons(n: int) -> ConceptClass:
    return make_class([[int(i == j) for j in range(n)] for i in range(n)])


def thresholds(n: int) -> ConceptClass:
    """h_i(x) = 1[x >= i] for i = 0..n, giving n + 1 concepts."""
    return make_class([[int(x >= i) for x in range(n)] for i in range(n + 1)])


def powerset(d: int) -> ConceptClass:
    if d > POWERSET_CAP:
        raise ValueError(f"powerset({d}) exceeds cap {POWERSET_CAP}")
    rows = [[(v >> (d - 1 - j)) & 1 for j in range(d)] for v in range(1 << d)]
    return make_class(rows)


def random_class(n: int, m: int, seed: int) -> ConceptClass:
    """m distinct uniformly random concepts over n instances."""
    if n > POWERSET_CAP:
        raise ValueError(f"domain size {n} exceeds cap {POWERSET_CAP}")
    if not 1 <= m <= 1 << n:
        raise ValueError(f"cannot draw {m} distinct concepts over {n} instances")
    rng = random.Random(seed)
    codes = rng.sample(range(1 << n), m)
    return make_class([[(v >> (n - 1 - j)) & 1 for j in range(n)] for v in codes])


def constant(n: int, bit: int) -> Concept:
    return (bit,) * n


def generate(spec: str) -> ConceptClass:
    """Build a class from a descriptor.

    Accepted forms: ``singletons:N``, ``thresholds:N``, ``powerset:D``,
    ``random:N:M:SEED`` and ``file:PATH``.
    """
    kind, _, rest = spec.partition(":")
    args = rest.split(":") if rest else []
    try:
        if kind == "file":
            return read_class(rest)
        nums = [int(a) for a in args]
        if kind == "singletons" and len(nums) == 1:
            return singletons(*nums)
        if kind == "thresholds" and len(nums) == 1:
            return thresholds(*nums)
        if kind == "powerset" and len(nums) == 1:
            return powerset(*nums)
        if kind == "random" and len(nums) == 3:
            return random_class(*nums)
    except ValueError as exc:
        if isinstance(exc, ClassFormatError):
            raise
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown generator spec {spec!r}")


# --- file formats -----------------------------------------------------------

def _data_lines(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def _parse_bits(line: str, width: int, where: str) -> tuple[int, ...]:
    bits = "".join(line.split())
    if len(bits) != width or set(bits) - {"0", "1"}:
        raise ClassFormatError(f"{where}: expected {width} bits, got {line!r}")
    return tuple(int(c) for c in bits)


def parse_bit_table(text: str, where: str = "<input>",
                    rows_first: bool = False) -> list[tuple[int, ...]]:
    """Parse a two-number header followed by rows of bits.

    Class files put the row width first ("n m"); matrix files put the row
    count first ("r c").
    """
    lines = _data_lines(text)
    if not lines:
        raise ClassFormatError(f"{where}: missing header")
    head = lines[0].split()
    if len(head) != 2 or not all(h.isdigit() for h in head):
        raise ClassFormatError(f"{where}: bad header {lines[0]!r}")
    width, count = int(head[0]), int(head[1])
    if rows_first:
        width, count = count, width
    body = lines[1:]
    if len(body) != count:
        raise ClassFormatError(f"{where}: header promises {count} rows, found {len(body)}")
    return [_parse_bits(line, width, where) for line in body]


def read_class(path: str | Path) -> ConceptClass:
    """Read the "n m" + m rows of n bits format."""
    path = Path(path)
    rows = parse_bit_table(path.read_text(), str(path))
    if not rows:
        raise ClassFormatError(f"{path}: class has no concepts")
    return make_class(rows)


def format_class(C: ConceptClass) -> str:
    lines = [f"{C.n} {len(C)}"] + ["".join(map(str, r)) for r in C.rows]
    return "\n".join(lines) + "\n"


def write_class(C: ConceptClass, path: str | Path) -> None:
    Path(path).write_text(format_class(C))


def read_stream(path: str | Path) -> list[Example]:
    """Example stream file: one ``x,y`` (or ``x y``) pair per line."""
    path = Path(path)
    out = []
    for line in _data_lines(path.read_text()):
        parts = line.replace(",", " ").split()
        if len(parts) != 2 or parts[1] not in ("0", "1") or not parts[0].isdigit():
            raise ClassFormatError(f"{path}: bad example line {line!r}")
        out.append((int(parts[0]), int(parts[1])))
    return out


def write_stream(stream: Iterable[Example], path: str | Path) -> None:
    Path(path).write_text("".join(f"{x},{y}\n" for x, y in stream))
