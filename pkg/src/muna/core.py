"""Exact finite monounary algebras.

A finite monounary algebra is a set {0..n-1} together with one unary
operation, stored as its dense value table ``succ``.  Equivalently it is a
functional graph: every node has exactly one out-edge.  All operations here
are pure; instances are immutable and safe to share between threads (the
lazily built orbit tables are computed deterministically, so a racing
recomputation publishes the same value).

Iterated images use tail/cycle decomposition, so exponents may be
astronomically large without cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import BadArity, NotConnected, OutOfRange

# Node sets are plain frozensets of indices.
NodeSet = frozenset


@dataclass(frozen=True)
class FiniteAlgebra:
    """A total self-map on {0..size-1}, given by its value table."""

    succ: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.succ, tuple):
            object.__setattr__(self, "succ", tuple(self.succ))
        n = len(self.succ)
        for x, y in enumerate(self.succ):
            if not 0 <= y < n:
                raise OutOfRange(f"succ[{x}]={y!r} not in 0..{n - 1}")

    @property
    def size(self) -> int:
        return len(self.succ)

    def _check(self, x: int) -> None:
        if not 0 <= x < self.size:
            raise OutOfRange(f"node {x} not in 0..{self.size - 1}")

    @cached_property
    def preds(self) -> tuple[tuple[int, ...], ...]:
        """preds[y] lists all x with succ[x] == y, ascending."""
        out: list[list[int]] = [[] for _ in range(self.size)]
        for x, y in enumerate(self.succ):
            out[y].append(x)
        return tuple(tuple(p) for p in out)

    @cached_property
    def _orbit_tables(self) -> tuple[tuple[int, ...], tuple[int, ...], dict]:
        """(tail, enter, cycle_at): tail[x] = steps until x's orbit enters
        its cycle, enter[x] = the cycle node it enters at, and
        cycle_at[c] = (cycle tuple in f-order starting at its least node,
        position of c in it) for every cycle node c."""
        n = self.size
        indeg = [0] * n
        for y in self.succ:
            indeg[y] += 1
        order: list[int] = []  # tree nodes in peel order (sources first)
        queue = [x for x in range(n) if indeg[x] == 0]
        while queue:
            x = queue.pop()
            order.append(x)
            y = self.succ[x]
            indeg[y] -= 1
            if indeg[y] == 0:
                queue.append(y)
        on_cycle = [x for x in range(n) if indeg[x] > 0]

        cycle_at: dict[int, tuple[tuple[int, ...], int]] = {}
        seen: set[int] = set()
        for c in on_cycle:
            if c in seen:
                continue
            cyc = [c]
            v = self.succ[c]
            while v != c:
                cyc.append(v)
                v = self.succ[v]
            lo = cyc.index(min(cyc))
            cyc = cyc[lo:] + cyc[:lo]
            seen.update(cyc)
            for pos, node in enumerate(cyc):
                cycle_at[node] = (tuple(cyc), pos)

        tail = [0] * n
        enter = list(range(n))
        for x in reversed(order):  # succ[x] is always resolved first
            tail[x] = tail[self.succ[x]] + 1
            enter[x] = enter[self.succ[x]]
        return tuple(tail), tuple(enter), cycle_at

    def image(self, x: int, n: int) -> int:
        """f^n(x); n may be arbitrarily large."""
        self._check(x)
        if n < 0:
            raise OutOfRange(f"exponent {n} is negative")
        tail, enter, cycle_at = self._orbit_tables
        if n <= tail[x]:
            v = x
            for _ in range(n):
                v = self.succ[v]
            return v
        cyc, pos = cycle_at[enter[x]]
        return cyc[(pos + (n - tail[x])) % len(cyc)]

    def preimage(self, x: int, n: int) -> NodeSet:
        """f^{-n}(x): all b with f^n(b) == x.

        The frontier sequence over the power set is eventually periodic, so
        repeated frontiers are detected and large n fast-forwarded.
        """
        self._check(x)
        if n < 0:
            raise OutOfRange(f"exponent {n} is negative")
        preds = self.preds
        cur = frozenset((x,))
        trail = [cur]
        history = {cur: 0}
        step = 0
        while step < n:
            cur = frozenset(p for y in cur for p in preds[y])
            step += 1
            first = history.get(cur)
            if first is not None:
                period = step - first
                return trail[first + (n - first) % period]
            history[cur] = step
            trail.append(cur)
            if not cur:
                return cur  # stays empty forever
        return cur

    def first_arrivals(self, x: int) -> dict[int, int]:
        """Minimal walk length to x, for every node that reaches x."""
        self._check(x)
        depth = {x: 0}
        frontier = [x]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for y in frontier:
                for p in self.preds[y]:
                    if p not in depth:
                        depth[p] = d
                        nxt.append(p)
            frontier = nxt
        return depth

    def bn_set(self, x: int, n: int) -> NodeSet:
        """Elements whose first arrival at x takes exactly n steps:
        f^{-n}(x) minus all shallower preimages."""
        if n < 0:
            raise OutOfRange(f"exponent {n} is negative")
        arrivals = self.first_arrivals(x)
        return frozenset(b for b, d in arrivals.items() if d == n)

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        """Weakly connected components, each sorted, ordered by least node."""
        n = self.size
        comp = [-1] * n
        out = []
        for start in range(n):
            if comp[start] >= 0:
                continue
            cid = len(out)
            members = [start]
            comp[start] = cid
            stack = [start]
            while stack:
                v = stack.pop()
                for w in (self.succ[v],) + self.preds[v]:
                    if comp[w] < 0:
                        comp[w] = cid
                        members.append(w)
                        stack.append(w)
            out.append(tuple(sorted(members)))
        return tuple(out)

    def cycle_of(self, component: Iterable[int]) -> tuple[int, ...]:
        """The unique cycle of a component, in f-order from its least node."""
        members = sorted(component)
        if not members:
            raise ValueError("component is empty")
        _, enter, cycle_at = self._orbit_tables
        cyc, _ = cycle_at[enter[members[0]]]
        return cyc

    def generated(self, seeds: Iterable[int]) -> NodeSet:
        """Smallest subalgebra containing the seeds (forward closure)."""
        out: set[int] = set()
        for s in seeds:
            self._check(s)
            v = s
            while v not in out:
                out.add(v)
                v = self.succ[v]
        return frozenset(out)


def make(succ: Sequence[int]) -> FiniteAlgebra:
    """Build and validate an algebra from any integer sequence."""
    return FiniteAlgebra(tuple(succ))


def line(n: int) -> FiniteAlgebra:
    """The n-element line: x maps to max(0, x-1)."""
    if n < 1:
        raise BadArity(f"line requires n >= 1, got {n}")
    return FiniteAlgebra((0,) + tuple(range(n - 1)))


def cycle(n: int) -> FiniteAlgebra:
    """The n-element cycle: x maps to (x+1) mod n."""
    if n < 1:
        raise BadArity(f"cycle requires n >= 1, got {n}")
    return FiniteAlgebra(tuple((x + 1) % n for x in range(n)))


def trivial(n: int) -> FiniteAlgebra:
    """n fixpoints: the identity map."""
    if n < 1:
        raise BadArity(f"trivial requires n >= 1, got {n}")
    return FiniteAlgebra(tuple(range(n)))


def pair_index(a: int, b: int, b_size: int) -> int:
    """Index of the pair (a, b) in a product whose right factor has b_size."""
    return a * b_size + b


def unpair_index(k: int, b_size: int) -> tuple[int, int]:
    """Inverse of pair_index."""
    return divmod(k, b_size)


def product(a: FiniteAlgebra, b: FiniteAlgebra) -> FiniteAlgebra:
    """Direct product acting componentwise; pair (x, y) sits at x*|B| + y."""
    bs = b.size
    succ = [0] * (a.size * bs)
    for x in range(a.size):
        fx = a.succ[x] * bs
        for y in range(bs):
            succ[x * bs + y] = fx + b.succ[y]
    return FiniteAlgebra(tuple(succ))


@dataclass(frozen=True)
class ForwardRelated:
    """f^steps(source) == target with steps minimal."""

    source: int
    target: int
    steps: int


@dataclass(frozen=True)
class DisjointBackcones:
    """Back-cones of a and b are disjoint; f^offset_a(a) == f^offset_b(b)
    == meet, with offset_a + offset_b minimal, then offset_a minimal."""

    meet: int
    offset_a: int
    offset_b: int


Trichotomy = ForwardRelated | DisjointBackcones


def _orbit_times(alg: FiniteAlgebra, v: int) -> dict[int, int]:
    times: dict[int, int] = {}
    t = 0
    while v not in times:
        times[v] = t
        v = alg.succ[v]
        t += 1
    return times


def trichotomy(alg: FiniteAlgebra, a: int, b: int) -> Trichotomy:
    """Relate two distinct nodes of one component: either one is a forward
    image of the other, or their back-cones are disjoint and meet forward."""
    alg._check(a)
    alg._check(b)
    if a == b:
        raise ValueError("nodes must be distinct")
    ta = _orbit_times(alg, a)
    tb = _orbit_times(alg, b)
    na = ta.get(b)
    nb = tb.get(a)
    if na is not None or nb is not None:
        if nb is None or (na is not None and na < nb):
            return ForwardRelated(a, b, na)
        if na is None or nb < na:
            return ForwardRelated(b, a, nb)
        # same minimal distance both ways: direction from the smaller index
        return ForwardRelated(a, b, na) if a < b else ForwardRelated(b, a, nb)
    best = None
    for p, i in ta.items():
        j = tb.get(p)
        if j is None:
            continue
        key = (i + j, i)
        if best is None or key < best[0]:
            best = (key, p, i, j)
    if best is None:
        raise NotConnected(f"nodes {a} and {b} lie in different components")
    _, p, i, j = best
    return DisjointBackcones(p, i, j)


def is_homomorphism(
    dom: FiniteAlgebra, cod: FiniteAlgebra, mapping: Sequence[int]
) -> bool:
    """Check the commuting condition phi(f(x)) == g(phi(x)) at every node."""
    if len(mapping) != dom.size:
        raise OutOfRange(
            f"mapping has {len(mapping)} entries, domain has {dom.size}"
        )
    for x, v in enumerate(mapping):
        if not 0 <= v < cod.size:
            raise OutOfRange(f"mapping[{x}]={v} not in codomain")
    return all(
        cod.succ[mapping[x]] == mapping[dom.succ[x]] for x in range(dom.size)
    )
