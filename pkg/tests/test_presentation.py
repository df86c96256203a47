import pytest

from muna import analysis, core
from muna.errors import BadArity, DanglingPort, OutOfRange, Overflow
from muna.presentation import (
    Cycle,
    FanNode,
    ForwardNode,
    ForwardRay,
    Presentation,
    RayNode,
    SkeletonNode,
    bi_infinite_path,
    bounded_forest,
    comb,
    component_cycle,
    fan_on_loop,
    from_algebra,
    make_presentation,
    merging_rays,
    nat_with_decrement,
    skeleton_algebra,
    terminal_kind,
    unfold,
    unfold_size,
    validate,
)


def test_construction_and_validate():
    z = bi_infinite_path()
    assert validate(z) is z
    assert z.ports == (0,) and z.rays == (1,)
    assert validate(nat_with_decrement()).succ == (0,)
    with pytest.raises(OutOfRange):
        Presentation((5,))
    with pytest.raises(OutOfRange):
        Presentation((0,), (-1,))
    with pytest.raises(OutOfRange):
        Presentation((0,), (), frozenset({3}))


def test_make_presentation_port_bookkeeping():
    p = make_presentation(2, {0: 1}, ports=[1], rays={1: 2})
    assert p.succ == (1, None) and p.rays == (0, 2)
    with pytest.raises(DanglingPort):
        make_presentation(2, {0: 1, 1: 0}, ports=[1])
    with pytest.raises(DanglingPort):
        make_presentation(2, {0: 1})  # node 1 has no successor, no port mark
    with pytest.raises(OutOfRange):
        make_presentation(1, {0: 3})


def test_annotation_free_presentations_denote_their_skeleton():
    for alg in (core.cycle(4), core.line(4), core.make([1, 0, 3, 4, 2])):
        pres = from_algebra(alg)
        assert not pres.is_annotated()
        assert skeleton_algebra(pres) == alg
        unfolded = unfold(pres, 5)
        assert unfolded.truncated == alg
        assert all(isinstance(el, SkeletonNode) for el in unfolded.origin)
    with pytest.raises(BadArity):
        skeleton_algebra(bi_infinite_path())


def test_unfold_sizes_match_formula():
    assert unfold(bi_infinite_path(), 3).truncated.size == 7
    assert unfold_size(fan_on_loop(), 3) == 1 + 6  # lines of lengths 1,2,3
    for pres in (comb(), merging_rays(), bounded_forest()):
        for d in (1, 4, 9):
            assert unfold(pres, d).truncated.size == unfold_size(pres, d)
    with pytest.raises(BadArity):
        unfold(comb(), 0)
    with pytest.raises(Overflow):
        unfold(bi_infinite_path(), 5, cap=5)


def test_unfold_of_decrement_algebra_matches_explicit_prefix():
    # the denoted algebra is the non-negative integers under clamped
    # decrement; depth d materialises exactly the prefix {0..d}
    d = 9
    unfolded = unfold(nat_with_decrement(), d)
    explicit = core.line(d + 1)
    to_int = {}
    for idx, el in enumerate(unfolded.origin):
        to_int[idx] = 0 if isinstance(el, SkeletonNode) else el.depth
    assert sorted(to_int.values()) == list(range(d + 1))
    for idx, value in to_int.items():
        assert to_int[unfolded.truncated.succ[idx]] == explicit.succ[value]


def test_unfold_origin_addresses_round_trip():
    unfolded = unfold(comb(), 4)
    assert unfolded.materialize(0) == 0
    assert unfolded.materialize(FanNode(0, 3, 2)) is not None
    assert unfolded.materialize(FanNode(0, 5, 2)) is None  # beyond horizon
    assert unfolded.materialize(ForwardNode(0, 4)) is not None
    for idx, el in enumerate(unfolded.origin):
        assert unfolded.materialize(el) == idx


def test_unfold_ray_and_chain_wiring():
    unfolded = unfold(bi_infinite_path(), 3)
    alg = unfolded.truncated
    r1 = unfolded.materialize(RayNode(0, 0, 1))
    r2 = unfolded.materialize(RayNode(0, 0, 2))
    f1 = unfolded.materialize(ForwardNode(0, 1))
    f3 = unfolded.materialize(ForwardNode(0, 3))
    assert alg.succ[r2] == r1 and alg.succ[r1] == 0
    assert alg.succ[0] == f1
    assert alg.succ[f3] == f3  # truncation closes with a self-loop


def test_unfold_preserves_skeleton_substructure():
    # skeleton nodes keep their indices and their mutual edges
    for pres in (comb(), merging_rays(), bounded_forest(), fan_on_loop()):
        unfolded = unfold(pres, 6)
        for v in range(pres.size):
            assert unfolded.origin[v] == SkeletonNode(v)
            if pres.succ[v] is not None:
                assert unfolded.truncated.succ[v] == pres.succ[v]


def test_forward_ray_materialisation_keeps_skeleton_preimages():
    pres = bounded_forest()
    small = unfold(pres, 4).truncated
    large = unfold(pres, 9).truncated
    for x in range(pres.size):
        for n in range(4):
            assert small.preimage(x, n) == large.preimage(x, n)


def test_unfold_emptiness_agrees_with_symbolic_rules():
    for pres in (bi_infinite_path(), comb(), merging_rays(), fan_on_loop()):
        d = 8
        alg = unfold(pres, d).truncated
        for x in range(pres.size):
            for n in range(d + 1):
                assert (not alg.preimage(x, n)) == analysis.preimage_is_empty(
                    pres, x, n
                )


def test_generated_subalgebra_of_product_prefix():
    # The two-ray merge times the decrement algebra has a residually finite
    # subdirect product (pair the overline ray with even heights), but that
    # subalgebra needs annotations on virtual nodes and is representable
    # here only as a finite prefix: build one on truncations and check the
    # separation criterion shape directly.
    d = 8
    ua = unfold(merging_rays(), d)
    un = unfold(nat_with_decrement(), d)
    prod = core.product(ua.truncated, un.truncated)
    bs = un.truncated.size
    zero_height = un.materialize(SkeletonNode(0))
    spine_part = [
        i
        for i, el in enumerate(ua.origin)
        if not (isinstance(el, RayNode) and el.family == 1)
    ]
    seeds = {core.pair_index(a, zero_height, bs) for a in spine_part}
    for m in range(1, d // 2 + 1):
        seeds.add(
            core.pair_index(
                ua.materialize(RayNode(0, 1, m)),
                un.materialize(RayNode(0, 0, 2 * m)),
                bs,
            )
        )
    sub_nodes = sorted(prod.generated(seeds))
    index = {orig: i for i, orig in enumerate(sub_nodes)}
    sub = core.make([index[prod.succ[orig]] for orig in sub_nodes])

    # the window is subdirect: both projections cover everything they can
    assert {core.unpair_index(orig, bs)[1] for orig in sub_nodes} == set(
        range(un.truncated.size)
    )
    covered_left = {core.unpair_index(orig, bs)[0] for orig in sub_nodes}
    expected_left = set(spine_part) | {
        ua.materialize(RayNode(0, 1, m)) for m in range(1, d // 2 + 1)
    }
    assert covered_left == expected_left

    # every element off the spine has a bounded back-cone inside the
    # subalgebra; spine elements with materialisation margin keep
    # predecessors (window-edge ray nodes necessarily run dry)
    spine = {index[core.pair_index(a, zero_height, bs)] for a in spine_part}
    deep_spine = {
        index[core.pair_index(a, zero_height, bs)]
        for a in spine_part
        if not (isinstance(ua.origin[a], RayNode) and ua.origin[a].depth > d - 3)
    }
    for i in range(sub.size):
        if i in deep_spine:
            assert all(sub.preimage(i, n) for n in range(3))
        elif i not in spine:
            assert any(not sub.preimage(i, n) for n in range(sub.size + 1))


def test_components_and_terminal_kind():
    z = bi_infinite_path()
    assert z.components == ((0,),)
    assert terminal_kind(z, z.components[0]) == ForwardRay()
    m = merging_rays()
    assert terminal_kind(m, m.components[0]) == ForwardRay()
    c4 = from_algebra(core.cycle(4))
    assert terminal_kind(c4, c4.components[0]) == Cycle(4)
    assert component_cycle(c4, c4.components[0]) == (0, 1, 2, 3)
    l4 = from_algebra(core.line(4))
    assert component_cycle(l4, l4.components[0]) == (0,)
    assert component_cycle(z, z.components[0]) is None
    forest = bounded_forest()
    assert forest.components == ((0, 1, 2, 3),)
    assert terminal_kind(forest, forest.components[0]) == ForwardRay()
