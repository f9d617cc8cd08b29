"""Standard Optimal Algorithm: predict the label whose restriction keeps the larger Littlestone dimension."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import ConceptClass, Example
from .dims import Littlestone


class UnrealizableStream(ValueError):
    def __init__(self, prefix):
        self.prefix = list(prefix)
        super().__init__(f"stream stops being realizable at round {len(self.prefix)}: {self.prefix[-1]}")


def soa_label(lit: Littlestone, mask: int, x: int) -> int:
    """SOA prediction for version space ``mask``; ties go to 1."""
    if not mask:
        raise ValueError("SOA is undefined on the empty class")
    m0, m1 = lit.C.label_masks[x]
    return 1 if lit(mask & m1) >= lit(mask & m0) else 0


def soa_predict(C: ConceptClass, x: int) -> int:
    C._check(x)
    return soa_label(Littlestone(C), C.full, x)


@dataclass
class SoaState:
    C: ConceptClass
    mask: int
    mistakes: int = 0
    lit: Littlestone = field(default=None, repr=False)

    def __post_init__(self):
        if self.lit is None:
            self.lit = Littlestone(self.C)

    @property
    def version_space(self) -> ConceptClass:
        return self.C.subclass(self.mask)

    def predict(self, x: int) -> int:
        return soa_label(self.lit, self.mask, x)

    def update(self, x: int, y: int) -> bool:
        """Feed one example; returns whether the prediction was a mistake."""
        wrong = self.predict(x) != y
        self.mistakes += wrong
        self.mask &= self.C.label_masks[x][y]
        return wrong

    # adversary-search protocol
    def clone(self) -> SoaState:
        return SoaState(self.C, self.mask, self.mistakes, self.lit)

    def state_key(self) -> int:
        return self.mask

    def loss(self, x: int, y: int) -> int:
        return int(self.predict(x) != y)

    def observe(self, x: int, y: int) -> bool:
        return self.update(x, y)


def soa_run(C: ConceptClass, stream: list[Example]):
    """Run SOA over a realizable stream.  Returns (predictions, mistakes, final state)."""
    for t in range(1, len(stream) + 1):
        if not C.consistent(stream[:t]):
            raise UnrealizableStream(stream[:t])
    state = SoaState(C, C.full)
    preds = []
    for x, y in stream:
        preds.append(state.predict(x))
        state.update(x, y)
    return preds, state.mistakes, state
