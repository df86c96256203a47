"""Brute-force ground truth.

Nothing in this module knows how the symbolic rules work: homomorphisms
are found by backtracking over raw value tables, separability is tested by
definition, and the structural lemmas are replayed on finite truncations.
Agreement with the analysis module is the package's primary correctness
argument; ``cross_validate`` raises ``Mismatch`` on any disagreement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .core import FiniteAlgebra, pair_index, product
from .errors import CapExceeded, Mismatch
from .presentation import DEFAULT_UNFOLD_CAP, Presentation, from_algebra, unfold
from .witness import FamilyRule, Homomorphism
from . import analysis
from .core import cycle as cycle_algebra

DEFAULT_HOM_CAP = 8
DEFAULT_DOMAIN_CAP = 64
DEFAULT_CODOMAIN_CAP = 4
ENUMERATION_CAP = 6


def _iter_homs(dom: FiniteAlgebra, cod: FiniteAlgebra) -> Iterator[tuple[int, ...]]:
    """All commuting maps, emitted in lexicographic order.  Backtracking
    assigns nodes in index order and prunes any assignment that already
    contradicts an assigned successor or predecessor."""
    n = dom.size
    if n == 0:
        yield ()
        return
    if cod.size == 0:
        return
    assign = [-1] * n
    preds = dom.preds

    def consistent(x: int, v: int) -> bool:
        y = dom.succ[x]
        if y == x:
            if cod.succ[v] != v:
                return False
        elif assign[y] >= 0 and cod.succ[v] != assign[y]:
            return False
        for p in preds[x]:
            if p != x and assign[p] >= 0 and cod.succ[assign[p]] != v:
                return False
        return True

    def extend(x: int) -> Iterator[tuple[int, ...]]:
        if x == n:
            yield tuple(assign)
            return
        for v in range(cod.size):
            if consistent(x, v):
                assign[x] = v
                yield from extend(x + 1)
                assign[x] = -1

    yield from extend(0)


def enumerate_homs(
    dom: FiniteAlgebra, cod: FiniteAlgebra, cap: int = DEFAULT_HOM_CAP
) -> list[tuple[int, ...]]:
    """Every homomorphism between two small algebras."""
    if dom.size > cap or cod.size > cap:
        raise CapExceeded(f"sizes {dom.size}, {cod.size} exceed cap {cap}")
    return list(_iter_homs(dom, cod))


def brute_separable(
    alg: FiniteAlgebra,
    x: int,
    y: int,
    codomain_cap: int = DEFAULT_CODOMAIN_CAP,
    domain_cap: int = DEFAULT_DOMAIN_CAP,
) -> tuple[FiniteAlgebra, tuple[int, ...]] | None:
    """First homomorphism separating x and y, over codomains enumerated by
    size then lexicographic table.  None means exhaustively verified
    non-separable within the cap."""
    alg._check(x)
    alg._check(y)
    if alg.size > domain_cap:
        raise CapExceeded(f"domain size {alg.size} exceeds cap {domain_cap}")
    for size in range(1, codomain_cap + 1):
        for table in itertools.product(range(size), repeat=size):
            cod = FiniteAlgebra(table)
            for hom in _iter_homs(alg, cod):
                if hom[x] != hom[y]:
                    return cod, hom
    return None


def enumerate_algebras(
    n: int, up_to_iso: bool = False, cap: int = ENUMERATION_CAP
) -> Iterator[FiniteAlgebra]:
    """All n^n value tables on n points, optionally deduplicated by the
    lexicographically least relabelling."""
    if n > cap:
        raise CapExceeded(f"size {n} exceeds cap {cap}")
    if n == 0:
        yield FiniteAlgebra(())
        return
    if not up_to_iso:
        for table in itertools.product(range(n), repeat=n):
            yield FiniteAlgebra(table)
        return
    perms = list(itertools.permutations(range(n)))
    seen: set[tuple[int, ...]] = set()
    for table in itertools.product(range(n), repeat=n):
        canon = min(
            tuple(p[table[q[i]]] for i in range(n))
            for p in perms
            for q in [_inverse(p)]
        )
        if canon not in seen:
            seen.add(canon)
            yield FiniteAlgebra(canon)


def _inverse(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, v in enumerate(perm):
        inv[v] = i
    return tuple(inv)


# ---------------------------------------------------------------------------
# Symbolic family-rule homomorphisms, enumerated by brute force


def _rule_candidates(cod: FiniteAlgebra, start: int, clamp_span: int = 8):
    """Depth-affine rules whose value at depth 0 is ``start``, deduplicated
    by their value sequence on a window long enough to expose any later
    disagreement."""
    window = 2 * cod.size + clamp_span + 4
    seen: set[tuple[int, ...]] = set()
    for slope in (-1, 0, 1):
        for modulus in range(1, cod.size + 1):
            for base in range(modulus):
                rule = FamilyRule(base, slope, modulus)
                if rule.value(0) != start:
                    continue
                key = tuple(rule.value(j) for j in range(window))
                if key not in seen:
                    seen.add(key)
                    yield rule
        for base in range(-clamp_span, clamp_span + 1):
            rule = FamilyRule(base, slope, None)
            if rule.value(0) != start:
                continue
            key = tuple(rule.value(j) for j in range(window))
            if key not in seen:
                seen.add(key)
                yield rule


def _rule_valid(cod: FiniteAlgebra, rule: FamilyRule, backward: bool) -> bool:
    """Whether the rule's value sequence is an infinite f-walk of the
    codomain: backward families need g(value(j+1)) == value(j), forward
    chains need g(value(j)) == value(j+1).  The sequence is eventually
    periodic, so a bounded window decides it."""
    window = 2 * cod.size + abs(rule.base) + 4
    for j in range(window):
        a, b = rule.value(j), rule.value(j + 1)
        if not (0 <= a < cod.size and 0 <= b < cod.size):
            return False
        if backward and cod.succ[b] != a:
            return False
        if not backward and cod.succ[a] != b:
            return False
    return True


def enumerate_symbolic_homs(
    pres: Presentation, cod: FiniteAlgebra
) -> list[Homomorphism]:
    """Every homomorphism from the denoted algebra into ``cod`` whose
    family behaviour is depth-affine (one default rule per family).  The
    skeleton table ranges over all commuting assignments; each family rule
    must trace an infinite walk of the codomain anchored at its attachment
    value."""
    families: list[tuple] = []
    for v in range(pres.size):
        for fam in range(pres.rays[v]):
            families.append(("ray", v, fam))
        if v in pres.fans:
            families.append(("fan", v))
        if pres.succ[v] is None:
            families.append(("fwd", v))

    out: list[Homomorphism] = []
    for skeleton in _iter_skeleton_maps(pres, cod):
        pools = []
        for key in families:
            v = key[1]
            backward = key[0] != "fwd"
            pool = [
                r
                for r in _rule_candidates(cod, skeleton[v])
                if _rule_valid(cod, r, backward)
            ]
            pools.append(pool)
        for combo in itertools.product(*pools):
            out.append(Homomorphism(cod, skeleton, dict(zip(families, combo))))
    return out


def _iter_skeleton_maps(
    pres: Presentation, cod: FiniteAlgebra
) -> Iterator[tuple[int, ...]]:
    n = pres.size
    if n == 0:
        yield ()
        return
    assign = [-1] * n
    preds = pres.preds

    def consistent(x: int, v: int) -> bool:
        y = pres.succ[x]
        if y == x:
            if cod.succ[v] != v:
                return False
        elif y is not None and assign[y] >= 0 and cod.succ[v] != assign[y]:
            return False
        for p in preds[x]:
            if p != x and assign[p] >= 0 and cod.succ[assign[p]] != v:
                return False
        return True

    def extend(x: int) -> Iterator[tuple[int, ...]]:
        if x == n:
            yield tuple(assign)
            return
        for v in range(cod.size):
            if consistent(x, v):
                assign[x] = v
                yield from extend(x + 1)
                assign[x] = -1

    yield from extend(0)


# ---------------------------------------------------------------------------
# Cross-validation of the symbolic rules


@dataclass
class Report:
    """Line-oriented PASS/FAIL record of every checked identity."""

    lines: list[tuple[bool, str]] = field(default_factory=list)

    def record(self, ok: bool, text: str) -> None:
        self.lines.append((ok, text))

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.lines)

    def failures(self) -> list[str]:
        return [text for ok, text in self.lines if not ok]

    def text(self) -> str:
        return "\n".join(
            ("PASS " if ok else "FAIL ") + line for ok, line in self.lines
        )

    __str__ = text


def preimage_lemma_report(alg: FiniteAlgebra, n_max: int, report: Report, tag: str) -> None:
    """Replay the structural preimage facts on one finite algebra: images
    of preimages collapse, emptiness is monotone, cycle elements are
    backwards eternal, acyclic preimage sets are disjoint, and membership
    shifts across one application."""
    cyclic: set[int] = set()
    for comp in alg.components:
        cyclic.update(alg.cycle_of(comp))
    pre = {
        a: [alg.preimage(a, n) for n in range(n_max + 2)] for a in range(alg.size)
    }

    ok, where = True, ""
    for a in range(alg.size):
        for m in range(n_max + 1):
            for n in range(n_max + 1):
                img = {alg.image(b, n) for b in pre[a][m]}
                target = (
                    {alg.image(a, n - m)} if n >= m else set(pre[a][m - n])
                )
                if not img <= target:
                    ok, where = False, f" at a={a} n={n} m={m}"
                    break
    report.record(ok, f"{tag} image-of-preimage collapse{where}")

    ok, where = True, ""
    for a in range(alg.size):
        empty_from = None
        for n in range(n_max + 1):
            if not pre[a][n]:
                empty_from = n
                break
        if empty_from is not None:
            for m in range(empty_from, n_max + 1):
                if pre[a][m]:
                    ok, where = False, f" at a={a} m={m}"
    report.record(ok, f"{tag} emptiness is monotone{where}")

    ok, where = True, ""
    for a in cyclic:
        for n in range(n_max + 1):
            if not pre[a][n]:
                ok, where = False, f" at a={a} n={n}"
    report.record(ok, f"{tag} cycle elements backwards eternal{where}")

    ok, where = True, ""
    for a in range(alg.size):
        if a in cyclic:
            continue
        for n in range(n_max + 1):
            for m in range(n + 1, n_max + 1):
                if pre[a][n] & pre[a][m]:
                    ok, where = False, f" at a={a} n={n} m={m}"
    report.record(ok, f"{tag} acyclic preimages disjoint{where}")

    ok, where = True, ""
    for a in range(alg.size):
        for x in range(alg.size):
            for n in range(n_max + 1):
                if (alg.succ[x] in pre[a][n]) != (x in pre[a][n + 1]):
                    ok, where = False, f" at a={a} x={x} n={n}"
    report.record(ok, f"{tag} membership shifts by one application{where}")


def product_lemma_report(
    left: FiniteAlgebra, right: FiniteAlgebra, n_max: int, report: Report, tag: str
) -> None:
    """Check the product identities on a full direct product.

    Preimages factor coordinatewise exactly.  For first arrivals the exact
    law is the set-difference form

        B_n(a,b) = (f1^-n(a) x f2^-n(b)) \\ U_{m<n} (f1^-m(a) x f2^-m(b)),

    and the two-sided union (B_n(a) x f2^-n(b)) u (f1^-n(a) x B_n(b)) is a
    subset of B_n(a,b), with equality whenever a or b lies outside every
    cycle.  The unrestricted two-sided equality is false: when both
    coordinates sit in cycles of mismatched lengths, an element can first
    arrive only when the two periods first align, later than either
    coordinate's own first arrival (C_2 x C_3 at n = 3 is the smallest
    counterexample); see bn_product_two_sided_violations.
    """
    prod = product(left, right)
    bs = right.size
    pre_l = {x: [left.preimage(x, n) for n in range(n_max + 1)] for x in range(left.size)}
    pre_r = {y: [right.preimage(y, n) for n in range(n_max + 1)] for y in range(right.size)}
    bn_l = {x: [left.bn_set(x, n) for n in range(n_max + 1)] for x in range(left.size)}
    bn_r = {y: [right.bn_set(y, n) for n in range(n_max + 1)] for y in range(right.size)}
    cyclic_l: set[int] = set()
    for comp in left.components:
        cyclic_l.update(left.cycle_of(comp))
    cyclic_r: set[int] = set()
    for comp in right.components:
        cyclic_r.update(right.cycle_of(comp))

    factor_ok, factor_at = True, ""
    exact_ok, exact_at = True, ""
    subset_ok, subset_at = True, ""
    offcycle_ok, offcycle_at = True, ""
    for x in range(left.size):
        for y in range(right.size):
            p = pair_index(x, y, bs)
            shallower: set[int] = set()
            for n in range(n_max + 1):
                got = prod.preimage(p, n)
                want = {
                    pair_index(u, v, bs)
                    for u in pre_l[x][n]
                    for v in pre_r[y][n]
                }
                if factor_ok and got != want:
                    factor_ok, factor_at = False, f" at ({x},{y}) n={n}"

                bn_got = prod.bn_set(p, n)
                if exact_ok and bn_got != want - shallower:
                    exact_ok, exact_at = False, f" at ({x},{y}) n={n}"
                shallower |= want

                two_sided = {
                    pair_index(u, v, bs)
                    for u in bn_l[x][n]
                    for v in pre_r[y][n]
                } | {
                    pair_index(u, v, bs)
                    for u in pre_l[x][n]
                    for v in bn_r[y][n]
                }
                if subset_ok and not two_sided <= bn_got:
                    subset_ok, subset_at = False, f" at ({x},{y}) n={n}"
                if (
                    offcycle_ok
                    and (x not in cyclic_l or y not in cyclic_r)
                    and two_sided != bn_got
                ):
                    offcycle_ok, offcycle_at = False, f" at ({x},{y}) n={n}"
    report.record(factor_ok, f"{tag} product preimages factor{factor_at}")
    report.record(exact_ok, f"{tag} first-arrival set-difference identity{exact_at}")
    report.record(subset_ok, f"{tag} first-arrival two-sided union is a subset{subset_at}")
    report.record(
        offcycle_ok,
        f"{tag} first-arrival two-sided equality off cycles{offcycle_at}",
    )


def bn_product_two_sided_violations(
    left: FiniteAlgebra, right: FiniteAlgebra, n_max: int
) -> list[str]:
    """Coordinates where B_n(a,b) != (B_n(a) x f2^-n(b)) u (f1^-n(a) x B_n(b)).

    Empty only when no pair of cycles with mismatched periods produces a
    late first alignment; kept as an explicit probe because the two-sided
    equality is tempting but false in general.
    """
    prod = product(left, right)
    bs = right.size
    out = []
    for x in range(left.size):
        for y in range(right.size):
            p = pair_index(x, y, bs)
            for n in range(n_max + 1):
                two_sided = {
                    pair_index(u, v, bs)
                    for u in left.bn_set(x, n)
                    for v in right.preimage(y, n)
                } | {
                    pair_index(u, v, bs)
                    for u in left.preimage(x, n)
                    for v in right.bn_set(y, n)
                }
                if prod.bn_set(p, n) != two_sided:
                    out.append(f"({x},{y}) n={n}")
    return out


def cross_validate(
    pres: Presentation,
    depth: int,
    n_max: int,
    product_with: Presentation | None = None,
    strict: bool = True,
    cap: int = DEFAULT_UNFOLD_CAP,
) -> Report:
    """Compare every symbolic prediction against brute-force computation on
    the depth-``depth`` unfolding: per-node preimage and first-arrival
    emptiness, the preimage lemma suite, and the product lemmas on a
    product of unfoldings.  Raises Mismatch when strict and anything fails.
    """
    if n_max > depth // 2:
        raise CapExceeded(f"n_max {n_max} exceeds depth/2 = {depth // 2}")
    report = Report()
    unfolded = unfold(pres, depth, cap)
    alg = unfolded.truncated

    for x in range(pres.size):
        for n in range(n_max + 1):
            sym = analysis.preimage_is_empty(pres, x, n)
            got = not alg.preimage(x, n)
            report.record(
                sym == got,
                f"preimage emptiness x={x} n={n}: symbolic={sym} unfold={got}",
            )
            sym = analysis.bn_is_empty(pres, x, n)
            got = not alg.bn_set(x, n)
            report.record(
                sym == got,
                f"first-arrival emptiness x={x} n={n}: symbolic={sym} unfold={got}",
            )

    preimage_lemma_report(alg, n_max, report, "unfold")

    partner = product_with if product_with is not None else from_algebra(cycle_algebra(3))
    other = unfold(partner, depth, cap)
    product_lemma_report(alg, other.truncated, n_max, report, "unfold-product")

    if strict and not report.ok:
        raise Mismatch(
            "; ".join(report.failures()[:3]) or "cross-validation failed", report
        )
    return report
