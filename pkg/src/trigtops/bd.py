"""Associative Belavin-Drinfeld structures (C0, C, Gamma1, Gamma2).

Pairs are ordered ``(row, column)`` in the ``(j, i)`` convention used for
P1 membership: a pair ``(s, t)`` in P1 means ``t = C0^m(s)`` for some
``0 < m < n``.  All points of the underlying set are labelled 1..n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

Pair = tuple[int, int]

ENUMERATION_BOUND = 5


class BDError(ValueError):
    pass


@dataclass(frozen=True)
class CyclicPerm:
    """Permutation of {1..n} given by ``image[s-1] = sigma(s)``; must be an n-cycle."""

    image: tuple[int, ...]

    def __post_init__(self):
        n = len(self.image)
        if n == 0 or sorted(self.image) != list(range(1, n + 1)):
            raise BDError(f"not a permutation of 1..{n}: {self.image}")
        s, length = 1, 0
        while True:
            s = self.image[s - 1]
            length += 1
            if s == 1:
                break
        if length != n:
            raise BDError(f"permutation {self.image} is not transitive")

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, s: int) -> int:
        return self.image[s - 1]

    def power(self, s: int, k: int) -> int:
        k %= self.n
        for _ in range(k):
            s = self.image[s - 1]
        return s

    def inverse(self) -> "CyclicPerm":
        inv = [0] * self.n
        for s, t in enumerate(self.image, start=1):
            inv[t - 1] = s
        return CyclicPerm(tuple(inv))

    def exponent(self, s: int, t: int) -> int:
        """The unique k in 0..n-1 with sigma^k(s) = t."""
        for k in range(self.n):
            if self.power(s, k) == t:
                return k
        raise BDError(f"{t} not in orbit of {s}")  # unreachable for an n-cycle

    def graph(self) -> frozenset[Pair]:
        return frozenset((s, self(s)) for s in range(1, self.n + 1))


def shift_down(n: int) -> CyclicPerm:
    """s -> s-1 cyclically (1 -> n)."""
    return CyclicPerm(tuple(n if s == 1 else s - 1 for s in range(1, n + 1)))


def chain_set(c0: CyclicPerm, gamma: frozenset[Pair]) -> frozenset[Pair]:
    """All (s, C0^k(s)) whose first k links along C0 lie in ``gamma``."""
    out = set()
    for s in range(1, c0.n + 1):
        t = s
        for _ in range(c0.n - 1):
            if (t, c0(t)) not in gamma:
                break
            t = c0(t)
            out.add((s, t))
    return frozenset(out)


@dataclass(frozen=True)
class BDStructure:
    n: int
    c0: CyclicPerm
    c: CyclicPerm
    gamma1: frozenset[Pair]
    gamma2: frozenset[Pair]
    p1: frozenset[Pair]
    p2: frozenset[Pair]
    # (pair in P1) -> tuple of tau^1(pair), tau^2(pair), ... while defined
    tau_table: dict[Pair, tuple[Pair, ...]] = field(compare=False, hash=False)

    def tau(self, pair: Pair) -> Pair:
        return (self.c(pair[0]), self.c(pair[1]))

    def tau_terms(self):
        """Yield (j, i, k, l, m, nu) for every defined tau^nu(j, i) = (k, l), i = C0^m(j)."""
        for (j, i), images in sorted(self.tau_table.items()):
            m = self.c0.exponent(j, i)
            for nu, (k, l) in enumerate(images, start=1):
                yield j, i, k, l, m, nu

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "c0": list(self.c0.image),
            "c": list(self.c.image),
            "gamma1": [list(p) for p in sorted(self.gamma1)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BDStructure":
        return build_bd(
            int(data["n"]),
            CyclicPerm(tuple(data["c0"])),
            CyclicPerm(tuple(data["c"])),
            {tuple(p) for p in data["gamma1"]},
        )


def build_bd(n: int, c0: CyclicPerm, c: CyclicPerm, gamma1) -> BDStructure:
    if c0.n != n or c.n != n:
        raise BDError(f"permutations must act on 1..{n}")
    gamma1 = frozenset((int(a), int(b)) for a, b in gamma1)
    graph = c0.graph()
    if not gamma1 <= graph:
        raise BDError(f"gamma1 {sorted(gamma1)} is not inside the graph of C0")
    if gamma1 == graph:
        raise BDError("gamma1 must be a proper subset of the graph of C0")
    gamma2 = frozenset((c(a), c(b)) for a, b in gamma1)
    if not gamma2 <= graph:
        raise BDError("(C x C) gamma1 escapes the graph of C0")
    p1 = chain_set(c0, gamma1)
    p2 = chain_set(c0, gamma2)
    tau = lambda p: (c(p[0]), c(p[1]))  # noqa: E731
    if frozenset(tau(p) for p in p1) != p2:
        raise BDError("C x C does not map P1 onto P2")

    bound = n * n
    table: dict[Pair, tuple[Pair, ...]] = {}
    for pair in sorted(p1):
        images = []
        cur = pair
        while True:
            cur = tau(cur)
            images.append(cur)
            if cur not in p1:
                break
            if len(images) > bound:
                raise BDError(f"tau iteration from {pair} exceeded n^2 = {bound} steps")
        table[pair] = tuple(images)
    return BDStructure(n, c0, c, gamma1, gamma2, p1, p2, table)


def worked_example(n: int) -> BDStructure:
    """C0: s -> s-1, C = C0^-1, Gamma1 = {(1,n), (2,1), ..., (n-1,n-2)}."""
    c0 = shift_down(n)
    gamma1 = {(1, n)} | {(s, s - 1) for s in range(2, n)}
    return build_bd(n, c0, c0.inverse(), gamma1)


def transitive_perms(n: int):
    """All n-cycles on 1..n."""
    for rest in itertools.permutations(range(2, n + 1)):
        cycle = (1,) + rest
        image = [0] * n
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            image[a - 1] = b
        yield CyclicPerm(tuple(image))


def enumerate_bd(n: int, bound: int = ENUMERATION_BOUND) -> list[BDStructure]:
    """Every structurally valid (C0, C, Gamma1) with Gamma1 proper and nonempty.

    No quotient by relabelling is taken.
    """
    if n > bound:
        raise BDError(f"n={n} exceeds the enumeration bound {bound}")
    out = []
    perms = list(transitive_perms(n))
    for c0 in perms:
        edges = sorted(c0.graph())
        for c in perms:
            for size in range(1, n):
                for sub in itertools.combinations(edges, size):
                    try:
                        out.append(build_bd(n, c0, c, sub))
                    except BDError:
                        continue
    return out
