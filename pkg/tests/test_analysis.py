import pytest

from muna import core
from muna.analysis import (
    BackwardsBounded,
    BiEternal,
    HasCycle,
    V0,
    VAll,
    Vk,
    Vkd,
    backwards_eternal,
    bn_is_empty,
    classify,
    classify_variety,
    cs_product,
    is_backwards_bounded,
    is_bi_eternal,
    is_cs,
    is_rf,
    is_ss,
    preimage_is_empty,
    rf_product,
    rf_product_n,
    ss_product,
)
from muna.errors import OutOfRange
from muna.presentation import (
    Presentation,
    RayNode,
    SkeletonNode,
    bi_infinite_path,
    bounded_forest,
    comb,
    fan_on_loop,
    from_algebra,
    merging_rays,
    nat_with_decrement,
    unfold,
)

Z = bi_infinite_path()
N = nat_with_decrement()
COMB = comb()
MERGE = merging_rays()
FANLOOP = fan_on_loop()
FOREST = bounded_forest()
C4 = from_algebra(core.cycle(4))
L4 = from_algebra(core.line(4))


def test_backwards_eternal():
    assert backwards_eternal(COMB, 0)  # the fan target on the spine
    assert not backwards_eternal(L4, 3)  # the source of the line
    for v in range(4):
        assert backwards_eternal(C4, v)
    assert backwards_eternal(N, 0)
    assert not any(backwards_eternal(FOREST, v) for v in range(FOREST.size))
    with pytest.raises(OutOfRange):
        backwards_eternal(Z, 1)


def test_classify_components():
    assert classify(Z, Z.components[0]) == BiEternal()
    assert classify(L4, L4.components[0]) == HasCycle(1)
    assert classify(C4, C4.components[0]) == HasCycle(4)
    assert classify(FOREST, FOREST.components[0]) == BackwardsBounded()
    assert classify(COMB, COMB.components[0]) == BiEternal()
    assert classify(FANLOOP, FANLOOP.components[0]) == HasCycle(1)


def test_algebra_level_classes():
    assert is_backwards_bounded(FOREST)
    assert not is_backwards_bounded(Z)
    assert not is_backwards_bounded(C4)  # cycle elements are eternal
    assert is_bi_eternal(Z) and is_bi_eternal(COMB)
    assert not is_bi_eternal(C4) and not is_bi_eternal(FOREST)
    empty = Presentation(())
    assert is_backwards_bounded(empty) and not is_bi_eternal(empty)


def test_rf_verdicts():
    assert is_rf(Z).holds
    assert is_rf(COMB).holds
    merge = is_rf(MERGE)
    assert not merge.holds
    assert merge.witness == (RayNode(0, 0, 1), RayNode(0, 1, 1))
    nat = is_rf(N)
    assert not nat.holds
    assert nat.witness == (SkeletonNode(0), RayNode(0, 0, 1))
    assert is_rf(FANLOOP).holds and is_rf(FOREST).holds


def test_ss_verdicts():
    z = is_ss(Z)
    assert not z.holds and z.witness == SkeletonNode(0)
    cmb = is_ss(COMB)
    assert not cmb.holds and cmb.witness == SkeletonNode(0)
    nat = is_ss(N)
    assert not nat.holds and nat.witness == RayNode(0, 0, 1)
    assert is_ss(C4).holds and is_ss(L4).holds
    assert is_ss(FANLOOP).holds
    assert is_ss(FOREST).holds


def test_cs_verdicts():
    loop = is_cs(FANLOOP)
    assert not loop.holds and loop.witness == SkeletonNode(0)
    assert is_cs(C4).holds and is_cs(L4).holds
    assert is_cs(FOREST).holds  # forward rays alone keep arrivals bounded
    assert not is_cs(COMB).holds and not is_cs(Z).holds


def test_symbolic_preimage_predicates_against_unfolds():
    for pres in (Z, N, COMB, MERGE, FANLOOP, FOREST, C4, L4):
        alg = unfold(pres, 10).truncated
        for x in range(pres.size):
            for n in range(6):
                assert preimage_is_empty(pres, x, n) == (not alg.preimage(x, n))
                assert bn_is_empty(pres, x, n) == (not alg.bn_set(x, n))


def test_product_predicates():
    assert rf_product(Z, N) is False
    assert ss_product(Z, C4) is False
    for other in (Z, N, COMB, C4, L4, MERGE):
        assert rf_product(other, FOREST) and rf_product(FOREST, other)
        assert ss_product(other, FOREST) and cs_product(FOREST, other)
    assert rf_product(Z, C4) is True  # both residually finite
    assert cs_product(C4, L4) is True
    assert ss_product(COMB, C4) is False  # comb is bi-eternal


def test_product_rule_on_finite_algebras_matches_direct_analysis():
    for left in (core.cycle(2), core.cycle(3), core.line(3), core.trivial(2)):
        for right in (core.cycle(2), core.line(4)):
            direct = from_algebra(core.product(left, right))
            assert rf_product(from_algebra(left), from_algebra(right)) == is_rf(direct).holds


def test_rf_product_n():
    assert rf_product_n([Z, N, FOREST])  # one backwards-bounded factor wins
    assert not rf_product_n([Z, N, C4])
    assert rf_product_n([Z, Z, C4])
    assert rf_product_n([])


def test_variety_classification():
    assert classify_variety(Presentation(())) == V0()
    assert classify_variety(from_algebra(core.trivial(1))) == V0()
    assert classify_variety(from_algebra(core.line(1))) == V0()
    for n in range(2, 6):
        assert classify_variety(from_algebra(core.cycle(n))) == Vkd(0, n)
        assert classify_variety(from_algebra(core.line(n))) == Vk(n - 1)
    for pres in (Z, N, COMB, MERGE, FANLOOP):
        assert classify_variety(pres) == VAll()
    assert classify_variety(from_algebra(core.trivial(2))) == Vkd(0, 1)
    tailed = from_algebra(core.make([1, 2, 3, 0, 0]))  # 4-cycle plus one tail
    assert classify_variety(tailed) == Vkd(1, 4)


def test_vkd_identity_holds_by_direct_iteration():
    tailed = core.make([1, 2, 3, 0, 0])
    for x in range(tailed.size):
        assert tailed.image(x, 1 + 4) == tailed.image(x, 1)


def test_ss_equivalence_on_fixtures():
    for pres in (Z, N, COMB, MERGE, FANLOOP, FOREST, C4, L4):
        assert is_ss(pres).holds == (is_rf(pres).holds and not is_bi_eternal(pres))
        if is_cs(pres).holds:
            assert is_ss(pres).holds
        if is_ss(pres).holds:
            assert is_rf(pres).holds


def test_component_class_split_is_consistent():
    from muna.presentation import Cycle, terminal_kind

    for pres in (Z, N, COMB, MERGE, FANLOOP, FOREST, C4, L4):
        for comp in pres.components:
            kind = classify(pres, comp)
            has_cycle = isinstance(terminal_kind(pres, comp), Cycle)
            assert isinstance(kind, HasCycle) == has_cycle
            eternal_free = not any(backwards_eternal(pres, v) for v in comp)
            if isinstance(kind, BackwardsBounded):
                assert eternal_free and not has_cycle
            if isinstance(kind, BiEternal):
                assert not has_cycle and not eternal_free


def test_criteria_reduce_to_components():
    from product_fixtures import disjoint_union

    singles = [Z, N, COMB, MERGE, FANLOOP, FOREST, C4, L4]
    for left in singles:
        for right in singles:
            union = disjoint_union(left, right)
            for prop in (is_rf, is_ss, is_cs):
                assert prop(union).holds == (prop(left).holds and prop(right).holds)
