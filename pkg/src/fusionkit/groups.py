"""Finite abelian groups given by cyclic factors, and their quotients."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np


class AbelianGroup:
    """Index-based view of a finite abelian group.

    Subclasses fill ``labels``, ``add_table`` and ``neg_table``; index 0 is
    always the identity.
    """

    labels: tuple[str, ...]
    add_table: np.ndarray
    neg_table: np.ndarray

    @property
    def order(self) -> int:
        return len(self.labels)

    def add(self, i: int, j: int) -> int:
        return int(self.add_table[i, j])

    def neg(self, i: int) -> int:
        return int(self.neg_table[i])

    def sub(self, i: int, j: int) -> int:
        return int(self.add_table[i, self.neg_table[j]])

    def double(self, i: int) -> int:
        return int(self.add_table[i, i])

    def index_of(self, label: str) -> int:
        return self.labels.index(label)


def _fmt(elem: tuple[int, ...]) -> str:
    if len(elem) == 1:
        return str(elem[0])
    return "(" + ",".join(str(x) for x in elem) + ")"


@dataclass
class FiniteAbelianGroup(AbelianGroup):
    """Z_{n1} x ... x Z_{nk}; elements enumerated with the first factor fastest."""

    orders: tuple[int, ...]
    elements: list[tuple[int, ...]] = field(init=False)

    def __post_init__(self):
        self.orders = tuple(int(n) for n in self.orders)
        if not self.orders or any(n < 1 for n in self.orders):
            raise ValueError(f"bad cyclic orders {self.orders}")
        ranges = [range(n) for n in reversed(self.orders)]
        self.elements = [tuple(reversed(e)) for e in product(*ranges)]
        self._index = {e: i for i, e in enumerate(self.elements)}
        self.labels = tuple(_fmt(e) for e in self.elements)
        n = len(self.elements)
        self.add_table = np.zeros((n, n), dtype=np.int64)
        self.neg_table = np.zeros(n, dtype=np.int64)
        for i, x in enumerate(self.elements):
            self.neg_table[i] = self._index[tuple((-a) % m for a, m in zip(x, self.orders))]
            for j, y in enumerate(self.elements):
                s = tuple((a + b) % m for a, b, m in zip(x, y, self.orders))
                self.add_table[i, j] = self._index[s]

    def index(self, elem) -> int:
        if isinstance(elem, int) and len(self.orders) == 1:
            elem = (elem,)
        elem = tuple(int(a) % m for a, m in zip(elem, self.orders))
        return self._index[elem]

    def element(self, i: int) -> tuple[int, ...]:
        return self.elements[i]

    @property
    def name(self) -> str:
        return "x".join(f"Z{n}" for n in self.orders)


@dataclass
class QuotientGroup(AbelianGroup):
    """G / H with H generated by ``gens``; cosets are labelled by their first member."""

    parent: AbelianGroup
    gens: tuple[int, ...]

    def __post_init__(self):
        sub = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g in self.gens:
                y = self.parent.add(x, g)
                if y not in sub:
                    sub.add(y)
                    frontier.append(y)
        self.subgroup = tuple(sorted(sub))
        coset_of = {}
        reps = []
        for x in range(self.parent.order):
            if x in coset_of:
                continue
            c = len(reps)
            reps.append(x)
            for h in self.subgroup:
                coset_of[self.parent.add(x, h)] = c
        self.representatives = tuple(reps)
        self.coset_of = coset_of
        n = len(reps)
        self.labels = tuple(f"[{self.parent.labels[r]}]" for r in reps)
        self.add_table = np.zeros((n, n), dtype=np.int64)
        self.neg_table = np.zeros(n, dtype=np.int64)
        for i, x in enumerate(reps):
            self.neg_table[i] = coset_of[self.parent.neg(x)]
            for j, y in enumerate(reps):
                self.add_table[i, j] = coset_of[self.parent.add(x, y)]

    def project(self, x: int) -> int:
        return self.coset_of[x]

    @property
    def name(self) -> str:
        pname = getattr(self.parent, "name", "G")
        gl = ",".join(self.parent.labels[g] for g in self.gens)
        return f"{pname}/<{gl}>"


def parse_group(text: str) -> FiniteAbelianGroup:
    """Parse '4,2' or 'Z4xZ2' into a group."""
    t = text.replace("Z", "").replace("x", ",").replace("×", ",")
    return FiniteAbelianGroup(tuple(int(p) for p in t.split(",") if p.strip()))


def parse_element(group: FiniteAbelianGroup, text: str) -> int:
    t = text.strip().strip("()")
    return group.index(tuple(int(p) for p in t.split(",")))
