"""Symbolic decision procedures over presentations.

Everything here evaluates the separability criteria structurally, without
materialising the (possibly infinite) denoted algebra:

* residual finiteness: every node has at most one backwards-eternal
  immediate preimage;
* subalgebra separability: every backwards-eternal element lies in a cycle;
* complete separability: no node admits first-arrival paths of unbounded
  length, which in this annotation language means no rays and no fans.

The oracle module cross-checks these rules against brute-force computation
on truncations; a disagreement there is a bug here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .core import FiniteAlgebra
from .presentation import (
    Cycle,
    Element,
    Presentation,
    RayNode,
    SkeletonNode,
    component_cycle,
    skeleton_algebra,
    terminal_kind,
)

RF = "RF"
SS = "SS"
CS = "CS"

REASON_RF_OK = "at-most-one-eternal-preimage"
REASON_RF_FAIL = "two-eternal-preimages"
REASON_SS_OK = "eternal-only-in-cycles"
REASON_SS_FAIL = "eternal-outside-cycle"
REASON_CS_OK = "first-arrivals-bounded"
REASON_CS_FAIL_RAY = "backward-ray"
REASON_CS_FAIL_FAN = "fan"


@dataclass(frozen=True)
class Verdict:
    """Outcome of one separability criterion, with a witness on failure."""

    prop: str
    holds: bool
    witness: tuple[Element, Element] | Element | None
    reason: str

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class HasCycle:
    length: int


@dataclass(frozen=True)
class BiEternal:
    pass


@dataclass(frozen=True)
class BackwardsBounded:
    pass


ComponentClass = HasCycle | BiEternal | BackwardsBounded


# ---------------------------------------------------------------------------
# Backwards eternality


@lru_cache(maxsize=None)
def _eternal_set(pres: Presentation) -> frozenset[int]:
    """Skeleton nodes with non-empty preimages at every depth: cycle nodes,
    carriers of a ray or fan, and everything forward of those."""
    base: set[int] = set()
    for comp in pres.components:
        cyc = component_cycle(pres, comp)
        if cyc:
            base.update(cyc)
    for v in range(pres.size):
        if pres.rays[v] > 0 or v in pres.fans:
            base.add(v)
    out = set(base)
    stack = list(base)
    while stack:
        v = stack.pop()
        nxt = pres.succ[v]
        if nxt is not None and nxt not in out:
            out.add(nxt)
            stack.append(nxt)
    return frozenset(out)


def backwards_eternal(pres: Presentation, x: int) -> bool:
    """Whether f^{-n}(x) is non-empty for every n."""
    pres._check(x)
    return x in _eternal_set(pres)


def classify(pres: Presentation, component) -> ComponentClass:
    """Exactly one of: the component has a cycle, it is bi-eternal, or it is
    backwards-bounded."""
    kind = terminal_kind(pres, component)
    if isinstance(kind, Cycle):
        return HasCycle(kind.length)
    eternal = _eternal_set(pres)
    if any(v in eternal for v in component):
        return BiEternal()
    return BackwardsBounded()


def is_backwards_bounded(pres: Presentation) -> bool:
    """No element of the denoted algebra is backwards eternal."""
    return not _eternal_set(pres)


def is_bi_eternal(pres: Presentation) -> bool:
    """Some element has an injective forward orbit and is backwards eternal."""
    return any(
        isinstance(classify(pres, comp), BiEternal) for comp in pres.components
    )


# ---------------------------------------------------------------------------
# The three criteria


def _eternal_preimages(pres: Presentation, v: int) -> list[Element]:
    """Backwards-eternal members of f^{-1}(v), in canonical order: skeleton
    predecessors ascending, then the roots of attached backward rays.  Fan
    lines are all finite, so they never contribute."""
    eternal = _eternal_set(pres)
    out: list[Element] = [SkeletonNode(p) for p in pres.preds[v] if p in eternal]
    out.extend(RayNode(v, fam, 1) for fam in range(pres.rays[v]))
    return out


def is_rf(pres: Presentation) -> Verdict:
    """Residual finiteness: at most one backwards-eternal element in each
    immediate preimage.  Ray interiors have a single preimage each and so
    never violate the criterion on their own."""
    for v in range(pres.size):
        eternal = _eternal_preimages(pres, v)
        if len(eternal) >= 2:
            return Verdict(RF, False, (eternal[0], eternal[1]), REASON_RF_FAIL)
    return Verdict(RF, True, None, REASON_RF_OK)


def is_ss(pres: Presentation) -> Verdict:
    """Subalgebra separability: every backwards-eternal element is in a
    cycle.  Any backward ray fails outright (its interior nodes are eternal
    and acyclic); a fan fails exactly when its target is outside a cycle."""
    eternal = _eternal_set(pres)
    cyclic: set[int] = set()
    for comp in pres.components:
        cyc = component_cycle(pres, comp)
        if cyc:
            cyclic.update(cyc)
    for v in range(pres.size):
        if v in eternal and v not in cyclic:
            return Verdict(SS, False, SkeletonNode(v), REASON_SS_FAIL)
        if pres.rays[v] > 0:
            return Verdict(SS, False, RayNode(v, 0, 1), REASON_SS_FAIL)
    return Verdict(SS, True, None, REASON_SS_OK)


def is_cs(pres: Presentation) -> Verdict:
    """Complete separability: first-arrival path lengths are bounded at
    every node, which holds exactly when there are no rays and no fans."""
    for v in range(pres.size):
        if pres.rays[v] > 0:
            return Verdict(CS, False, SkeletonNode(v), REASON_CS_FAIL_RAY)
        if v in pres.fans:
            return Verdict(CS, False, SkeletonNode(v), REASON_CS_FAIL_FAN)
    return Verdict(CS, True, None, REASON_CS_OK)


# ---------------------------------------------------------------------------
# Symbolic preimage predicates (the analysis-side half of oracle checks)


def preimage_is_empty(pres: Presentation, x: int, n: int) -> bool:
    """Whether f^{-n}(x) of the denoted algebra is empty.  A ray or fan met
    at backward depth m feeds elements at every depth beyond m."""
    pres._check(x)
    frontier = {x}
    for _ in range(n):
        if any(pres.rays[v] or v in pres.fans for v in frontier):
            return False
        frontier = {p for v in frontier for p in pres.preds[v]}
        if not frontier:
            return True
    return not frontier


def _skeleton_arrivals(pres: Presentation, x: int) -> dict[int, int]:
    depth = {x: 0}
    frontier = [x]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for y in frontier:
            for p in pres.preds[y]:
                if p not in depth:
                    depth[p] = d
                    nxt.append(p)
        frontier = nxt
    return depth


def bn_is_empty(pres: Presentation, x: int, n: int) -> bool:
    """Whether the denoted algebra has no element first arriving at x in
    exactly n steps.  A ray or fan whose target first arrives in m steps
    contributes first arrivals at every depth beyond m."""
    pres._check(x)
    arrivals = _skeleton_arrivals(pres, x)
    if any(d == n for d in arrivals.values()):
        return False
    return not any(
        (pres.rays[v] or v in pres.fans) and m < n for v, m in arrivals.items()
    )


# ---------------------------------------------------------------------------
# Direct products, decided by the component theorems


def _product_holds(a: Presentation, b: Presentation, prop) -> bool:
    if prop(a).holds and prop(b).holds:
        return True
    return is_backwards_bounded(a) or is_backwards_bounded(b)


def rf_product(a: Presentation, b: Presentation) -> bool:
    """Residual finiteness of the direct product: both factors have it, or
    one factor is backwards-bounded and dominates."""
    return _product_holds(a, b, is_rf)


def ss_product(a: Presentation, b: Presentation) -> bool:
    return _product_holds(a, b, is_ss)


def cs_product(a: Presentation, b: Presentation) -> bool:
    return _product_holds(a, b, is_cs)


def rf_product_n(factors) -> bool:
    """Residual finiteness of an arbitrary finite direct product."""
    factors = list(factors)
    if all(is_rf(p).holds for p in factors):
        return True
    return any(is_backwards_bounded(p) for p in factors)


# ---------------------------------------------------------------------------
# Variety classification


@dataclass(frozen=True)
class V0:
    """At most one element; the identity x = y holds."""


@dataclass(frozen=True)
class Vk:
    """f^k is constant: connected onto a fixpoint with tails of depth <= k."""

    k: int


@dataclass(frozen=True)
class Vkd:
    """f^{k+d} == f^k: tails of depth <= k into cycles of length dividing d."""

    k: int
    d: int


@dataclass(frozen=True)
class VAll:
    """Only the trivial identity x = x holds."""


Variety = V0 | Vk | Vkd | VAll


def classify_variety(pres: Presentation) -> Variety:
    """Least variety containing the denoted algebra, minimising k then d.
    Any ray, fan or port defeats every non-trivial identity, because some
    element then has arbitrarily long injective forward or backward runs."""
    if pres.size == 0:
        return V0()
    if pres.is_annotated():
        return VAll()
    alg = skeleton_algebra(pres)
    if alg.size == 1:
        return V0()
    lengths = [len(alg.cycle_of(comp)) for comp in alg.components]
    k = _max_tail_depth(alg)
    if len(alg.components) == 1 and all(c == 1 for c in lengths) and k >= 1:
        return Vk(k)
    return Vkd(k, math.lcm(*lengths))


def _max_tail_depth(alg: FiniteAlgebra) -> int:
    cyclic: set[int] = set()
    for comp in alg.components:
        cyclic.update(alg.cycle_of(comp))
    depth = {v: 0 for v in cyclic}
    frontier = list(cyclic)
    d = 0
    while frontier:
        d += 1
        nxt = []
        for y in frontier:
            for p in alg.preds[y]:
                if p not in depth:
                    depth[p] = d
                    nxt.append(p)
        frontier = nxt
    return max(depth.values())
