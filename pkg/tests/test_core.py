import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muna import core
from muna.core import (
    DisjointBackcones,
    FiniteAlgebra,
    ForwardRelated,
    cycle,
    is_homomorphism,
    line,
    make,
    pair_index,
    product,
    trichotomy,
    trivial,
    unpair_index,
)
from muna.errors import BadArity, NotConnected, OutOfRange


# -- independent oracles -----------------------------------------------------


def naive_image(alg, x, n):
    for _ in range(n):
        x = alg.succ[x]
    return x


def naive_preimage(alg, x, n):
    return frozenset(b for b in range(alg.size) if naive_image(alg, b, n) == x)


def naive_bn(alg, x, n):
    shallower = set()
    for i in range(n):
        shallower |= naive_preimage(alg, x, i)
    return naive_preimage(alg, x, n) - shallower


def orbit_shortcut(alg, x, n):
    """Independent big-exponent evaluation via explicit orbit detection."""
    seen = {}
    v = x
    t = 0
    while v not in seen:
        seen[v] = t
        v = alg.succ[v]
        t += 1
    start = seen[v]
    period = t - start
    if n < start:
        return naive_image(alg, x, n)
    reduced = start + (n - start) % period
    return naive_image(alg, x, reduced)


def small_algebras(max_size=3):
    for n in range(max_size + 1):
        for table in itertools.product(range(n), repeat=n):
            yield FiniteAlgebra(table)


# -- constructors ------------------------------------------------------------


def test_make_validates():
    assert make([1, 2, 3, 0]).succ == (1, 2, 3, 0)
    assert make([]).size == 0
    assert make([0, 0, 1, 2]).succ == line(4).succ
    with pytest.raises(OutOfRange):
        make([0, 4, 1, 2])
    with pytest.raises(OutOfRange):
        make([-1])


def test_named_constructors():
    assert cycle(1) == trivial(1)
    assert line(4).succ == (0, 0, 1, 2)
    assert trivial(3).succ == (0, 1, 2)
    assert cycle(4).succ == (1, 2, 3, 0)
    for bad in (line, cycle, trivial):
        with pytest.raises(BadArity):
            bad(0)


# -- image -------------------------------------------------------------------


def test_image_examples():
    assert cycle(4).image(1, 7) == 0
    for alg in (cycle(4), line(4), trivial(2)):
        for x in range(alg.size):
            assert alg.image(x, 0) == x
    assert line(4).image(3, 5) == naive_image(line(4), 3, 5) == 0


def test_image_astronomical_exponent():
    big = 10**30
    for alg in (cycle(7), line(5), make([1, 2, 0, 2, 1, 0])):
        for x in range(alg.size):
            assert alg.image(x, big) == orbit_shortcut(alg, x, big)


def test_image_errors():
    with pytest.raises(OutOfRange):
        cycle(3).image(3, 1)
    with pytest.raises(OutOfRange):
        cycle(3).image(0, -1)
    with pytest.raises(OutOfRange):
        make([]).image(0, 0)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_image_matches_naive(data):
    n = data.draw(st.integers(1, 12))
    table = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    alg = make(table)
    x = data.draw(st.integers(0, n - 1))
    steps = data.draw(st.integers(0, 40))
    assert alg.image(x, steps) == naive_image(alg, x, steps)
    big = data.draw(st.integers(10**6, 10**18))
    assert alg.image(x, big) == orbit_shortcut(alg, x, big)


# -- preimage ----------------------------------------------------------------


def test_preimage_examples():
    assert cycle(4).preimage(0, 1) == {3}
    assert line(4).preimage(0, 1) == {0, 1}
    assert line(4).preimage(3, 1) == frozenset()
    with pytest.raises(OutOfRange):
        line(4).preimage(4, 1)


def test_preimage_matches_naive_exhaustively():
    for alg in small_algebras():
        for x in range(alg.size):
            for n in range(2 * alg.size + 4):
                assert alg.preimage(x, n) == naive_preimage(alg, x, n)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_preimage_matches_naive_random(data):
    n = data.draw(st.integers(1, 10))
    table = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    alg = make(table)
    x = data.draw(st.integers(0, n - 1))
    steps = data.draw(st.integers(0, 25))
    assert alg.preimage(x, steps) == naive_preimage(alg, x, steps)


# -- first arrivals ----------------------------------------------------------


def test_bn_examples():
    assert cycle(4).bn_set(0, 4) == frozenset()
    for alg in (cycle(4), line(4)):
        for x in range(alg.size):
            assert alg.bn_set(x, 0) == {x}
    # scan-based value: f^-2(0) = {0,1,2} minus f^-0 u f^-1 = {0,1}
    assert naive_bn(line(4), 0, 2) == {2}
    assert line(4).bn_set(0, 2) == {2}


def test_bn_matches_naive_exhaustively():
    for alg in small_algebras():
        for x in range(alg.size):
            for n in range(7):
                assert alg.bn_set(x, n) == naive_bn(alg, x, n)


def test_bn_vanishes_beyond_size():
    for alg in small_algebras():
        for x in range(alg.size):
            assert alg.bn_set(x, alg.size + 1) == frozenset()


def test_bn_partitions_reachable_sets_by_first_arrival():
    # the first-arrival sets are pairwise disjoint and cover exactly the
    # union of all preimage sets
    for alg in small_algebras():
        for x in range(alg.size):
            levels = [alg.bn_set(x, n) for n in range(alg.size + 1)]
            for a, b in itertools.combinations(levels, 2):
                assert not a & b
            reach_by_bn = frozenset().union(*levels) if levels else frozenset()
            reach_by_pre = frozenset().union(
                *(alg.preimage(x, n) for n in range(alg.size + 1))
            )
            assert reach_by_bn == reach_by_pre
            for n, level in enumerate(levels):
                assert all(
                    min(k for k in range(alg.size + 1) if naive_image(alg, b, k) == x) == n
                    for b in level
                )


# -- components, cycles, generated -------------------------------------------


def test_components_and_cycles():
    assert cycle(4).components == ((0, 1, 2, 3),)
    assert cycle(4).cycle_of((0, 1, 2, 3)) == (0, 1, 2, 3)
    assert line(4).cycle_of(line(4).components[0]) == (0,)
    both = make([1, 0, 3, 4, 2])  # C2 next to C3
    assert both.components == ((0, 1), (2, 3, 4))
    assert len(both.cycle_of(both.components[0])) == 2
    assert len(both.cycle_of(both.components[1])) == 3
    assert make([]).components == ()


def test_generated():
    assert cycle(4).generated({2}) == {0, 1, 2, 3}
    assert line(4).generated({2}) == {0, 1, 2}
    assert line(4).generated(set()) == frozenset()


# -- products ----------------------------------------------------------------


def test_product_c2_c3_is_c6():
    prod = product(cycle(2), cycle(3))
    seen = set()
    v = pair_index(0, 0, 3)
    for _ in range(6):
        seen.add(v)
        v = prod.succ[v]
    assert v == pair_index(0, 0, 3) and len(seen) == 6 == prod.size


def test_product_with_one_point_is_identity():
    for alg in (cycle(4), line(3)):
        assert product(alg, trivial(1)).succ == alg.succ


def test_product_preimage_example():
    prod = product(cycle(2), cycle(3))
    assert prod.preimage(pair_index(0, 0, 3), 1) == {pair_index(1, 2, 3)}
    assert unpair_index(pair_index(1, 2, 3), 3) == (1, 2)


# -- trichotomy --------------------------------------------------------------


def test_trichotomy_forward():
    assert trichotomy(line(4), 3, 1) == ForwardRelated(3, 1, 2)
    # distance 2 both ways on the 4-cycle: direction from the smaller index
    assert trichotomy(cycle(4), 0, 2) == ForwardRelated(0, 2, 2)
    assert trichotomy(cycle(4), 2, 0) == ForwardRelated(0, 2, 2)


def test_trichotomy_disjoint_backcones():
    # x=0 and y=1 both map onto 2, which runs into a fixpoint
    alg = make([2, 2, 3, 3])
    assert trichotomy(alg, 0, 1) == DisjointBackcones(2, 1, 1)


def test_trichotomy_errors():
    both = make([1, 0, 3, 4, 2])
    with pytest.raises(NotConnected):
        trichotomy(both, 0, 3)
    with pytest.raises(ValueError):
        trichotomy(cycle(3), 1, 1)


def test_trichotomy_exhaustive_exactly_one_case():
    for alg in small_algebras():
        for comp in alg.components:
            for a in comp:
                for b in comp:
                    if a == b:
                        continue
                    t = trichotomy(alg, a, b)
                    if isinstance(t, ForwardRelated):
                        assert alg.image(t.source, t.steps) == t.target
                        for k in range(t.steps):
                            assert alg.image(t.source, k) != t.target
                    else:
                        assert alg.image(a, t.offset_a) == t.meet
                        assert alg.image(b, t.offset_b) == t.meet
                        cone_a = set().union(
                            *(naive_preimage(alg, a, n) for n in range(alg.size + 1))
                        )
                        cone_b = set().union(
                            *(naive_preimage(alg, b, n) for n in range(alg.size + 1))
                        )
                        assert not cone_a & cone_b


# -- homomorphism check ------------------------------------------------------


def test_is_homomorphism():
    assert is_homomorphism(cycle(4), cycle(4), [0, 1, 2, 3])
    # reduction of the 8-cycle onto the 4-cycle
    assert is_homomorphism(cycle(8), cycle(4), [x % 4 for x in range(8)])
    # constant map onto a non-fixpoint breaks the square
    assert not is_homomorphism(cycle(2), cycle(2), [0, 0])
    with pytest.raises(OutOfRange):
        is_homomorphism(cycle(2), cycle(2), [0])
    with pytest.raises(OutOfRange):
        is_homomorphism(cycle(2), cycle(2), [0, 5])
