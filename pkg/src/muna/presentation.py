"""Finite presentations of a class of infinite monounary algebras.

A presentation is a finite skeleton graph plus three kinds of annotation:

* forward-ray ports: a node with no successor continues into a fresh
  one-way infinite chain (x, x+1, x+2, ...);
* backward rays: an attached chain ... -> r2 -> r1 -> node extending
  infinitely backwards, every chain node having exactly one preimage;
* fans: infinitely many finite chains, one of each length 1, 2, 3, ...,
  all terminating at the node.

A presentation with no annotations denotes exactly its skeleton.  The
``unfold`` operation materialises the denoted algebra down to a finite
depth, keeping provenance tags so oracle checks can tell real structure
from truncation artifacts (truncated forward rays end in a self-loop,
which is the one deliberate lie).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

from .core import FiniteAlgebra
from .errors import BadArity, DanglingPort, OutOfRange, Overflow

DEFAULT_UNFOLD_CAP = 500_000


# ---------------------------------------------------------------------------
# Element addresses
#
# Elements of the denoted algebra are addressed uniformly; the same tags
# serve as provenance for unfolded nodes and as the vocabulary of witnesses.


@dataclass(frozen=True)
class SkeletonNode:
    node: int


@dataclass(frozen=True)
class RayNode:
    """depth steps up the given backward-ray family (depth >= 1)."""

    node: int
    family: int
    depth: int


@dataclass(frozen=True)
class FanNode:
    """depth steps up the fan line of the given length (1 <= depth <= length)."""

    node: int
    length: int
    depth: int


@dataclass(frozen=True)
class ForwardNode:
    """depth steps along the forward ray leaving the given port (depth >= 1)."""

    port: int
    depth: int


Element = SkeletonNode | RayNode | FanNode | ForwardNode


def as_element(x: int | Element) -> Element:
    """Allow bare skeleton indices wherever an element is expected."""
    return SkeletonNode(x) if isinstance(x, int) else x


# ---------------------------------------------------------------------------
# Presentations


@dataclass(frozen=True)
class Presentation:
    """Skeleton table (None marks a port) plus per-node annotations."""

    succ: tuple[int | None, ...]
    rays: tuple[int, ...] = ()
    fans: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if not isinstance(self.succ, tuple):
            object.__setattr__(self, "succ", tuple(self.succ))
        if not isinstance(self.fans, frozenset):
            object.__setattr__(self, "fans", frozenset(self.fans))
        n = len(self.succ)
        if len(self.rays) > n:
            raise OutOfRange(f"{len(self.rays)} ray counts for {n} nodes")
        if len(self.rays) < n or not isinstance(self.rays, tuple):
            object.__setattr__(
                self, "rays", tuple(self.rays) + (0,) * (n - len(self.rays))
            )
        for x, y in enumerate(self.succ):
            if y is not None and not 0 <= y < n:
                raise OutOfRange(f"succ[{x}]={y!r} not in 0..{n - 1}")
        for x, r in enumerate(self.rays):
            if r < 0:
                raise OutOfRange(f"rays[{x}]={r} is negative")
        for x in self.fans:
            if not 0 <= x < n:
                raise OutOfRange(f"fan at {x} not in 0..{n - 1}")

    @property
    def size(self) -> int:
        return len(self.succ)

    @property
    def ports(self) -> tuple[int, ...]:
        return tuple(x for x, y in enumerate(self.succ) if y is None)

    def ray_count(self, x: int) -> int:
        return self.rays[x]

    def is_annotated(self) -> bool:
        return bool(self.ports) or bool(self.fans) or any(self.rays)

    def _check(self, x: int) -> None:
        if not 0 <= x < self.size:
            raise OutOfRange(f"node {x} not in 0..{self.size - 1}")

    @cached_property
    def preds(self) -> tuple[tuple[int, ...], ...]:
        """Skeleton predecessors only; annotations do not appear here."""
        out: list[list[int]] = [[] for _ in range(self.size)]
        for x, y in enumerate(self.succ):
            if y is not None:
                out[y].append(x)
        return tuple(tuple(p) for p in out)

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        """Weakly connected components of the skeleton."""
        comp = [-1] * self.size
        out = []
        for start in range(self.size):
            if comp[start] >= 0:
                continue
            cid = len(out)
            comp[start] = cid
            members = [start]
            stack = [start]
            while stack:
                v = stack.pop()
                nbrs = list(self.preds[v])
                if self.succ[v] is not None:
                    nbrs.append(self.succ[v])
                for w in nbrs:
                    if comp[w] < 0:
                        comp[w] = cid
                        members.append(w)
                        stack.append(w)
            out.append(tuple(sorted(members)))
        return tuple(out)

    @cached_property
    def component_index(self) -> tuple[int, ...]:
        idx = [0] * self.size
        for cid, members in enumerate(self.components):
            for v in members:
                idx[v] = cid
        return tuple(idx)


def make_presentation(
    size: int,
    succ: Mapping[int, int],
    *,
    rays: Mapping[int, int] | Sequence[int] | None = None,
    fans: Sequence[int] = (),
    ports: Sequence[int] = (),
) -> Presentation:
    """Assemble a presentation from a partial successor map plus an explicit
    port list; every node must either have a successor or be a port, and
    never both."""
    table: list[int | None] = [None] * size
    for x, y in succ.items():
        if not 0 <= x < size:
            raise OutOfRange(f"node {x} not in 0..{size - 1}")
        table[x] = y
    port_set = set(ports)
    for p in port_set:
        if not 0 <= p < size:
            raise OutOfRange(f"port {p} not in 0..{size - 1}")
        if table[p] is not None:
            raise DanglingPort(f"port {p} also has a successor")
    for x in range(size):
        if table[x] is None and x not in port_set:
            raise DanglingPort(f"node {x} has no successor and is not a port")
    if rays is None:
        ray_tuple = (0,) * size
    elif isinstance(rays, Mapping):
        ray_tuple = tuple(rays.get(x, 0) for x in range(size))
    else:
        ray_tuple = tuple(rays) + (0,) * (size - len(rays))
    return Presentation(tuple(table), ray_tuple, frozenset(fans))


def from_algebra(alg: FiniteAlgebra) -> Presentation:
    """The annotation-free presentation of a finite algebra."""
    return Presentation(tuple(alg.succ))


def skeleton_algebra(pres: Presentation) -> FiniteAlgebra:
    """The denoted finite algebra of an annotation-free presentation."""
    if pres.is_annotated():
        raise BadArity("presentation has annotations; unfold it instead")
    return FiniteAlgebra(tuple(y for y in pres.succ))  # type: ignore[misc]


def validate(pres: Presentation) -> Presentation:
    """Re-check all structural invariants and precompute components."""
    Presentation(pres.succ, pres.rays, pres.fans)  # re-runs range checks
    pres.components
    return pres


# ---------------------------------------------------------------------------
# Forward terminal structure


@dataclass(frozen=True)
class Cycle:
    length: int


@dataclass(frozen=True)
class ForwardRay:
    pass


TerminalKind = Cycle | ForwardRay


def terminal_kind(pres: Presentation, component: Sequence[int]) -> TerminalKind:
    """Whether the component's forward orbits end in a cycle or run off
    along a forward ray."""
    members = sorted(component)
    if not members:
        raise ValueError("component is empty")
    seen: set[int] = set()
    v = members[0]
    while v not in seen:
        seen.add(v)
        nxt = pres.succ[v]
        if nxt is None:
            return ForwardRay()
        v = nxt
    return Cycle(len(_cycle_from(pres, v)))


def _cycle_from(pres: Presentation, start: int) -> list[int]:
    cyc = [start]
    v = pres.succ[start]
    while v != start:
        assert v is not None
        cyc.append(v)
        v = pres.succ[v]
    lo = cyc.index(min(cyc))
    return cyc[lo:] + cyc[:lo]


def component_cycle(
    pres: Presentation, component: Sequence[int]
) -> tuple[int, ...] | None:
    """The component's cycle in f-order from its least node, or None when
    the component terminates in a forward ray."""
    members = sorted(component)
    if not members:
        raise ValueError("component is empty")
    seen: set[int] = set()
    v = members[0]
    while v not in seen:
        seen.add(v)
        nxt = pres.succ[v]
        if nxt is None:
            return None
        v = nxt
    return tuple(_cycle_from(pres, v))


# ---------------------------------------------------------------------------
# Unfolding


@dataclass(frozen=True, eq=False)
class UnfoldMap:
    """A depth-d truncation of the denoted algebra.

    Skeleton nodes keep their indices; every other node carries the address
    of the element it materialises.  Truncated forward rays end in a
    self-loop at depth ``horizon``, so forward-eternality questions must
    consult the origin tags rather than the raw graph.
    """

    truncated: FiniteAlgebra
    origin: tuple[Element, ...]
    horizon: int

    @cached_property
    def index_of(self) -> dict[Element, int]:
        return {el: i for i, el in enumerate(self.origin)}

    def materialize(self, el: int | Element) -> int | None:
        """Truncated index of an element, or None if beyond the horizon."""
        return self.index_of.get(as_element(el))


def unfold_size(pres: Presentation, depth: int) -> int:
    return (
        pres.size
        + sum(pres.rays) * depth
        + len(pres.fans) * depth * (depth + 1) // 2
        + len(pres.ports) * depth
    )


def unfold(
    pres: Presentation, depth: int, cap: int = DEFAULT_UNFOLD_CAP
) -> UnfoldMap:
    """Materialise the denoted algebra to the given depth: backward rays as
    chains of length depth, fans as one line of each length 1..depth, and
    forward rays as chains of length depth closed by a self-loop."""
    if depth < 1:
        raise BadArity(f"unfold requires depth >= 1, got {depth}")
    total = unfold_size(pres, depth)
    if total > cap:
        raise Overflow(f"unfolding to depth {depth} needs {total} nodes (cap {cap})")

    succ: list[int] = [0] * total
    origin: list[Element] = [SkeletonNode(v) for v in range(pres.size)]
    for v in range(pres.size):
        if pres.succ[v] is not None:
            succ[v] = pres.succ[v]  # ports are wired to their chain below

    def alloc(el: Element) -> int:
        origin.append(el)
        return len(origin) - 1

    for v in range(pres.size):
        for fam in range(pres.rays[v]):
            below = v
            for j in range(1, depth + 1):
                idx = alloc(RayNode(v, fam, j))
                succ[idx] = below
                below = idx
        if v in pres.fans:
            for length in range(1, depth + 1):
                below = v
                for j in range(1, length + 1):
                    idx = alloc(FanNode(v, length, j))
                    succ[idx] = below
                    below = idx
        if pres.succ[v] is None:
            prev = v
            for j in range(1, depth + 1):
                idx = alloc(ForwardNode(v, j))
                succ[prev] = idx
                prev = idx
            succ[prev] = prev  # truncation artifact: close with a self-loop

    assert len(origin) == total
    return UnfoldMap(FiniteAlgebra(tuple(succ)), tuple(origin), depth)


# ---------------------------------------------------------------------------
# Canonical encodings of the recurring infinite examples


def bi_infinite_path() -> Presentation:
    """The two-way infinite path: one port carrying one backward ray."""
    return Presentation((None,), (1,))


def nat_with_decrement() -> Presentation:
    """Non-negative integers under clamped decrement: a fixpoint carrying
    one backward ray."""
    return Presentation((0,), (1,))


def comb() -> Presentation:
    """A forward ray whose base is the endpoint of one finite chain of every
    length: backwards eternal without any infinite backward path."""
    return Presentation((None,), (), frozenset({0}))


def merging_rays() -> Presentation:
    """Two backward rays merging into a forward ray; the textbook failure
    of residual finiteness."""
    return Presentation((None,), (2,))


def fan_on_loop() -> Presentation:
    """Every finite line glued at a looped zero: subalgebra separable but
    not completely separable."""
    return Presentation((0,), (), frozenset({0}))


def bounded_forest() -> Presentation:
    """Two chains joining and draining into a forward ray; backwards-bounded."""
    return Presentation((2, 2, 3, None))
