"""Executable separating homomorphisms.

A homomorphism into a finite codomain is stored as a table on skeleton
nodes plus one rule per annotation family (ray, fan, forward ray).  Rules
are depth-affine: value = base + slope * depth, reduced modulo the
codomain's cycle length or clamped at zero for line-shaped codomains.
That is enough to express every construction used here:

* ``lambda_hom``: grade the back-cone of a non-eternal element by depth;
  separates that element from everything else.
* ``cycle_hom``: project a cycle-bearing component onto its cycle.
* ``z_mod_hom``: reduce the two-way infinite path modulo m.
* ``separate_points``: dispatch between the above, falling back to a
  signed-position map composed with a modular reduction when both points
  are backwards eternal in an acyclic component.
* ``cs_separator``: relabel by first-arrival depth, giving a map whose
  fibre over the chosen element is a singleton.

``verify`` replays any certificate on a finite unfolding: the commuting
square is checked at every materialised node (except across the artificial
self-loop closing a truncated forward ray) and the separation claim is
checked literally.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import FiniteAlgebra, cycle as cycle_algebra, line as line_algebra, trivial
from .errors import (
    BackwardsEternal,
    BrokenHom,
    EqualPoints,
    NoCycle,
    NotCS,
    NotRF,
    OutOfRange,
    SeparationFailed,
)
from .presentation import (
    DEFAULT_UNFOLD_CAP,
    Element,
    FanNode,
    ForwardNode,
    Presentation,
    RayNode,
    SkeletonNode,
    as_element,
    component_cycle,
    unfold,
)
from . import analysis

POINT_POINT = "point-point"
POINT_SUBALGEBRA = "point-subalgebra"
COMPLETE = "complete"


@dataclass(frozen=True)
class FamilyRule:
    """value(depth) = base + slope*depth, reduced mod ``modulus`` when set,
    otherwise clamped at zero (for line-shaped codomains)."""

    base: int
    slope: int
    modulus: int | None = None

    def value(self, depth: int) -> int:
        v = self.base + self.slope * depth
        if self.modulus is not None:
            return v % self.modulus
        return max(0, v)


# Rule keys: ("ray", node, family) | ("fan", node) | ("fan", node, length)
# | ("fwd", port).  A ("fan", node, length) entry overrides the family
# default on that single line.
FamilyKey = tuple


@dataclass(frozen=True, eq=False)
class Homomorphism:
    """Finite table on the skeleton plus closed-form rules on families."""

    codomain: FiniteAlgebra
    skeleton_map: tuple[int, ...]
    family_rules: dict[FamilyKey, FamilyRule]

    def at(self, el: int | Element) -> int:
        """Image of any element of the denoted algebra."""
        el = as_element(el)
        if isinstance(el, SkeletonNode):
            return self.skeleton_map[el.node]
        if isinstance(el, RayNode):
            return self.family_rules[("ray", el.node, el.family)].value(el.depth)
        if isinstance(el, FanNode):
            rule = self.family_rules.get(("fan", el.node, el.length))
            if rule is None:
                rule = self.family_rules[("fan", el.node)]
            return rule.value(el.depth)
        return self.family_rules[("fwd", el.port)].value(el.depth)


@dataclass(frozen=True, eq=False)
class SeparationCertificate:
    """A homomorphism together with what it claims to separate."""

    hom: Homomorphism
    kind: str
    x: Element
    y: Element | None = None
    subalgebra: frozenset[Element] | None = None


# ---------------------------------------------------------------------------
# Element utilities


def _check_element(pres: Presentation, el: Element) -> None:
    if isinstance(el, SkeletonNode):
        pres._check(el.node)
        return
    if isinstance(el, RayNode):
        pres._check(el.node)
        if not 0 <= el.family < pres.rays[el.node] or el.depth < 1:
            raise OutOfRange(f"{el} does not address a ray element")
        return
    if isinstance(el, FanNode):
        pres._check(el.node)
        if el.node not in pres.fans or not 1 <= el.depth <= el.length:
            raise OutOfRange(f"{el} does not address a fan element")
        return
    pres._check(el.port)
    if pres.succ[el.port] is not None or el.depth < 1:
        raise OutOfRange(f"{el} does not address a forward-ray element")


def _attachment(el: Element) -> int:
    return el.port if isinstance(el, ForwardNode) else el.node


def _element_eternal(pres: Presentation, el: Element) -> bool:
    if isinstance(el, RayNode):
        return True
    if isinstance(el, FanNode):
        return False
    return analysis.backwards_eternal(pres, _attachment(el))


def _default_rules(pres: Presentation, rule_for) -> dict[FamilyKey, FamilyRule]:
    """One rule per family, produced by rule_for(kind, node)."""
    rules: dict[FamilyKey, FamilyRule] = {}
    for v in range(pres.size):
        for fam in range(pres.rays[v]):
            rules[("ray", v, fam)] = rule_for("ray", v)
        if v in pres.fans:
            rules[("fan", v)] = rule_for("fan", v)
        if pres.succ[v] is None:
            rules[("fwd", v)] = rule_for("fwd", v)
    return rules


def _backcone_depths(pres: Presentation, x: int) -> dict[int, int]:
    """Unique backward depth of every skeleton node that reaches x; only
    meaningful when x is not backwards eternal (then the cone is a finite
    tree and carries no annotations)."""
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


# ---------------------------------------------------------------------------
# The named constructions


def lambda_hom(pres: Presentation, a: int | Element) -> Homomorphism:
    """Grade the back-cone of ``a`` by depth + 1 and send everything else
    to 0, landing in a line long enough that no value is ever clamped
    inside the cone.  The fibre over 1 is exactly {a}."""
    el = as_element(a)
    _check_element(pres, el)
    if _element_eternal(pres, el):
        raise BackwardsEternal(f"{el} has non-empty preimages at every depth")

    skeleton = [0] * pres.size
    rules = _default_rules(pres, lambda kind, v: FamilyRule(0, 0, None))
    if isinstance(el, SkeletonNode):
        cone = _backcone_depths(pres, el.node)
        shift = 0
    elif isinstance(el, ForwardNode):
        cone = _backcone_depths(pres, el.port)
        shift = el.depth
        # chain nodes below a: depth j maps to (shift + 1) - j, clamped
        rules[("fwd", el.port)] = FamilyRule(el.depth + 1, -1, None)
    else:  # FanNode: the cone is the tail of its own line
        cone = {}
        shift = 0
        rules[("fan", el.node, el.length)] = FamilyRule(1 - el.depth, 1, None)
    for v, d in cone.items():
        if pres.rays[v] or v in pres.fans:
            raise BackwardsEternal(f"annotation at {v} inside the cone of {el}")
        skeleton[v] = d + shift + 1
    if isinstance(el, FanNode):
        bound = el.length - el.depth + 1
    else:
        bound = shift + max(cone.values()) + 1
    return Homomorphism(line_algebra(bound + 1), tuple(skeleton), rules)


def _with_sink(table: list[int], multi: bool) -> FiniteAlgebra:
    """Append a disjoint fixpoint for the other components when needed."""
    if multi:
        table = table + [len(table)]
    return FiniteAlgebra(tuple(table))


def cycle_hom(pres: Presentation, component) -> Homomorphism:
    """Project a cycle-bearing component onto its cycle by walk distance to
    an anchor; other components, if any, go to an extra fixpoint."""
    comp = tuple(sorted(component))
    cyc = component_cycle(pres, comp)
    if cyc is None:
        raise NoCycle("component terminates in a forward ray")
    k = len(cyc)
    anchor = cyc[0]
    multi = len(pres.components) > 1
    cod = _with_sink([(i + 1) % k for i in range(k)], multi)
    sink = k

    skeleton = [sink] * pres.size
    for v in comp:
        steps = 0
        w = v
        while w != anchor:
            w = pres.succ[w]
            steps += 1
        skeleton[v] = (-steps) % k

    comp_set = set(comp)

    def rule_for(kind: str, v: int) -> FamilyRule:
        if v not in comp_set:
            return FamilyRule(sink, 0, None)
        # a cycle-bearing component has no ports, so kind is ray or fan
        return FamilyRule(skeleton[v], -1, k)

    return Homomorphism(cod, tuple(skeleton), _default_rules(pres, rule_for))


def integer_element(n: int) -> Element:
    """Address of the integer n in the canonical two-way-infinite-path
    presentation (skeleton node 0, backward ray 0, forward ray at 0)."""
    if n == 0:
        return SkeletonNode(0)
    if n < 0:
        return RayNode(0, 0, -n)
    return ForwardNode(0, n)


def z_mod_hom(a: int, b: int) -> Homomorphism:
    """Reduce the two-way infinite path modulo m = |b - a| + 1; the images
    of a and b then differ."""
    if a == b:
        raise EqualPoints(f"points are both {a}")
    m = abs(b - a) + 1
    rules = {
        ("ray", 0, 0): FamilyRule(0, -1, m),
        ("fwd", 0): FamilyRule(0, 1, m),
    }
    return Homomorphism(cycle_algebra(m), (0,), rules)


def _component_indicator(pres: Presentation, comp_id: int) -> Homomorphism:
    """Send one component to 0 and the rest to 1 inside two fixpoints."""
    skeleton = tuple(
        0 if pres.component_index[v] == comp_id else 1 for v in range(pres.size)
    )
    rules = _default_rules(
        pres, lambda kind, v: FamilyRule(skeleton[v], 0, None)
    )
    return Homomorphism(trivial(2), skeleton, rules)


def _positions(pres: Presentation, comp) -> dict[int, int]:
    """Signed distance to the component's port: 0 at the port, negative
    upstream.  Only defined for acyclic components."""
    port = next(v for v in comp if pres.succ[v] is None)
    return {v: -d for v, d in _backcone_depths(pres, port).items()}


def _element_position(pres: Presentation, pos: dict[int, int], el: Element) -> int:
    if isinstance(el, SkeletonNode):
        return pos[el.node]
    if isinstance(el, (RayNode, FanNode)):
        return pos[el.node] - el.depth
    return el.depth  # ForwardNode: past the port


def _signed_offset_hom(
    pres: Presentation, comp_id: int, ref: int, m: int
) -> Homomorphism:
    """Map each element of an acyclic component to its signed offset from a
    reference position, reduced mod m; other components go to a fixpoint."""
    comp = pres.components[comp_id]
    pos = _positions(pres, comp)
    multi = len(pres.components) > 1
    cod = _with_sink([(i + 1) % m for i in range(m)], multi)
    sink = m
    skeleton = [sink] * pres.size
    for v in comp:
        skeleton[v] = (pos[v] - ref) % m

    comp_set = set(comp)

    def rule_for(kind: str, v: int) -> FamilyRule:
        if v not in comp_set:
            return FamilyRule(sink, 0, None)
        if kind == "fwd":
            return FamilyRule(skeleton[v], 1, m)
        return FamilyRule(skeleton[v], -1, m)

    return Homomorphism(cod, tuple(skeleton), _default_rules(pres, rule_for))


def separate_points(
    pres: Presentation, x: int | Element, y: int | Element
) -> SeparationCertificate:
    """A certificate separating two distinct elements of a residually
    finite presentation.  Dispatch: different components get an indicator
    map; two cycle elements get the cycle projection; a non-eternal element
    gets its back-cone grading; two eternal elements of an acyclic
    component are forward-related and get the signed-offset map reduced
    modulo (offset difference + 1)."""
    verdict = analysis.is_rf(pres)
    if not verdict.holds:
        raise NotRF(f"criterion fails at {verdict.witness}")
    ex, ey = as_element(x), as_element(y)
    _check_element(pres, ex)
    _check_element(pres, ey)
    if ex == ey:
        raise EqualPoints(f"points are both {ex}")

    cx = pres.component_index[_attachment(ex)]
    cy = pres.component_index[_attachment(ey)]
    if cx != cy:
        return SeparationCertificate(_component_indicator(pres, cx), POINT_POINT, ex, ey)

    comp = pres.components[cx]
    cyc = component_cycle(pres, comp)
    if (
        cyc is not None
        and isinstance(ex, SkeletonNode)
        and isinstance(ey, SkeletonNode)
        and ex.node in cyc
        and ey.node in cyc
    ):
        return SeparationCertificate(cycle_hom(pres, comp), POINT_POINT, ex, ey)
    if not _element_eternal(pres, ex):
        return SeparationCertificate(lambda_hom(pres, ex), POINT_POINT, ex, ey)
    if not _element_eternal(pres, ey):
        return SeparationCertificate(lambda_hom(pres, ey), POINT_POINT, ex, ey)

    # Both eternal in a residually finite algebra: the component is acyclic
    # (otherwise both would be cycle elements) and the two points are
    # forward-related, so their positions differ.
    assert cyc is None
    pos = _positions(pres, comp)
    px = _element_position(pres, pos, ex)
    py = _element_position(pres, pos, ey)
    assert px != py, "eternal elements at equal positions contradict the criterion"
    m = abs(px - py) + 1
    hom = _signed_offset_hom(pres, cx, py, m)
    return SeparationCertificate(hom, POINT_POINT, ex, ey)


def cs_separator(pres: Presentation, a: int | Element) -> SeparationCertificate:
    """A certificate whose map's fibre over the image of ``a`` is {a}.  For
    a non-cycle element this is the back-cone grading; for a cycle element,
    relabel its component by first-arrival depth."""
    verdict = analysis.is_cs(pres)
    if not verdict.holds:
        raise NotCS(f"criterion fails at {verdict.witness}")
    el = as_element(a)
    _check_element(pres, el)
    comp = pres.components[pres.component_index[_attachment(el)]]
    cyc = component_cycle(pres, comp)
    if not (isinstance(el, SkeletonNode) and cyc is not None and el.node in cyc):
        return SeparationCertificate(lambda_hom(pres, el), COMPLETE, el)

    k = len(cyc)
    arrivals = _backcone_depths(pres, el.node)  # covers the whole component
    bound = max(arrivals.values()) + 1  # least depth with no first arrivals
    multi = len(pres.components) > 1
    table = [k - 1 if v == 0 else v - 1 for v in range(bound)]
    cod = _with_sink(table, multi)
    sink = bound
    skeleton = [sink] * pres.size
    for v, d in arrivals.items():
        skeleton[v] = d
    # complete separability rules out rays and fans; only foreign forward
    # rays can exist, and they sit in other components
    rules = _default_rules(pres, lambda kind, v: FamilyRule(sink, 0, None))
    return SeparationCertificate(
        Homomorphism(cod, tuple(skeleton), rules), COMPLETE, el
    )


# ---------------------------------------------------------------------------
# Replay on finite truncations


def hom_on_unfold(hom: Homomorphism, pres: Presentation, depth: int,
                  cap: int = DEFAULT_UNFOLD_CAP) -> list[int]:
    """Evaluate a homomorphism on every node of the depth-``depth``
    unfolding, checking the commuting square everywhere except across the
    artificial self-loop that closes a truncated forward ray.  Returns the
    value table, raises BrokenHom on any defect."""
    unfolded = unfold(pres, depth, cap)
    cod = hom.codomain
    values = []
    for el in unfolded.origin:
        try:
            v = hom.at(el)
        except (KeyError, IndexError) as exc:
            raise BrokenHom(f"no value for {el}") from exc
        if not 0 <= v < cod.size:
            raise BrokenHom(f"value {v} at {el} outside codomain")
        values.append(v)
    for i, el in enumerate(unfolded.origin):
        if isinstance(el, ForwardNode) and el.depth == depth:
            continue  # truncation artifact, not an edge of the real algebra
        j = unfolded.truncated.succ[i]
        if cod.succ[values[i]] != values[j]:
            raise BrokenHom(
                f"commuting fails at {el}: "
                f"g({values[i]}) = {cod.succ[values[i]]} != {values[j]}"
            )
    return values


def verify(
    cert: SeparationCertificate,
    pres: Presentation,
    depth: int,
    cap: int = DEFAULT_UNFOLD_CAP,
) -> None:
    """Check, on the depth-``depth`` unfolding, that the certificate's map
    is a homomorphism at every materialised node and that its separation
    claim holds literally."""
    unfolded = unfold(pres, depth, cap)
    values = hom_on_unfold(cert.hom, pres, depth, cap)

    def locate(el: Element) -> int:
        idx = unfolded.materialize(el)
        if idx is None:
            raise SeparationFailed(f"{el} is not materialised at depth {depth}")
        return idx

    if cert.kind == POINT_POINT:
        assert cert.y is not None
        ix, iy = locate(cert.x), locate(cert.y)
        if values[ix] == values[iy]:
            raise SeparationFailed(
                f"{cert.x} and {cert.y} both map to {values[ix]}"
            )
    elif cert.kind == COMPLETE:
        ix = locate(cert.x)
        for i, v in enumerate(values):
            if v == values[ix] and i != ix:
                raise SeparationFailed(
                    f"{unfolded.origin[i]} shares value {v} with {cert.x}"
                )
    elif cert.kind == POINT_SUBALGEBRA:
        assert cert.subalgebra is not None
        ix = locate(cert.x)
        image = {values[locate(s)] for s in cert.subalgebra}
        if values[ix] in image:
            raise SeparationFailed(
                f"value {values[ix]} of {cert.x} lies in the subalgebra image"
            )
    else:
        raise SeparationFailed(f"unknown certificate kind {cert.kind!r}")
