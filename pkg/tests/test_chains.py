import random

import pytest

from chaingeo import algebra as alg
from chaingeo import chains as ch
from chaingeo.projline import Mat2, act

from conftest import bits, random_distant_triple


def test_standard_chain_sizes(geom_q2, geom_q3):
    assert len(ch.standard_chain(geom_q2)) == 5
    assert len(ch.standard_chain(geom_q3)) == 10


def test_standard_chain_contains_standard_points(geom_q2):
    c = set(ch.standard_chain(geom_q2))
    assert {geom_q2.infinity, geom_q2.zero, geom_q2.one} <= c


def test_fan_count_q2(geom_q2):
    assert len(ch.chains_through_standard_triple(geom_q2)) == 1


def test_fan_count_q3(geom_q3):
    assert len(ch.chains_through_standard_triple(geom_q3)) == (9 - 3) // 2


def test_normalizer_elements_fix_standard_chain(geom_q2, geom_q3):
    for g in (geom_q2, geom_q3):
        for n in g.norm.elements:
            image = g.apply_to_chain(g.standard, Mat2.diag(g.ring, n, n))
            assert image == g.standard


def test_transversal_elements_give_distinct_chains(geom_q3):
    g = geom_q3
    images = {
        g.apply_to_chain(g.standard, Mat2.diag(g.ring, u, u)) for u in g.transversal
    }
    assert len(images) == len(g.transversal)


@pytest.mark.parametrize("fixture,expected", [("geom_q2", 1), ("geom_q3", 3)])
def test_chains_through_random_triples(fixture, expected, request):
    g = request.getfixturevalue(fixture)
    rng = random.Random(17)
    for _ in range(50):
        p, q, r = random_distant_triple(g.line, rng)
        fan = ch.chains_through_triple(g, p, q, r)
        assert len(fan) == expected
        for chain in fan:
            assert {p, q, r} <= set(chain)


def test_field_geometry_has_single_chain(geom_gf4):
    g = geom_gf4
    whole_line = tuple(range(g.line.n))
    assert ch.all_chains(g) == (whole_line,)
    fan = ch.chains_through_triple(g, 0, 1, 2)
    assert fan == (whole_line,)


def test_all_chains_q2_count_from_triple_count(geom_q2):
    line = geom_q2.line
    ordered_triples = 0
    for i in range(line.n):
        for j in bits(line.neighbors(i)):
            ordered_triples += (line.neighbors(i) & line.neighbors(j)).bit_count()
    # with a unique chain per triple, each 5-point chain carries 5*4*3 of them
    assert ordered_triples // (5 * 4 * 3) == 56
    assert len(ch.all_chains(geom_q2)) == 56


def test_all_chains_have_subfield_size_plus_one(geom_q3):
    for chain in ch.all_chains(geom_q3):
        assert len(chain) == 10


def test_chain_points_pairwise_distant(geom_q2, geom_q3):
    for g in (geom_q2, geom_q3):
        line = g.line
        for chain in ch.all_chains(g):
            for i, p in enumerate(chain):
                for q in chain[i + 1 :]:
                    assert line.distant(p, q)


def test_chain_set_closed_under_generators(geom_q2):
    from chaingeo.projline import act_permutation, gl2_generators

    chains = set(ch.all_chains(geom_q2))
    for m in gl2_generators(geom_q2.ring):
        perm = act_permutation(geom_q2.line, m)
        for chain in chains:
            assert tuple(sorted(int(perm[p]) for p in chain)) in chains


def test_all_chains_cap(geom_q2):
    g = ch.ChainGeometry(geom_q2.emb, line=geom_q2.line)
    with pytest.raises(ValueError):
        ch.all_chains(g, cap=10)


def test_triple_intersection_q3_is_core_chain(geom_q3):
    g = geom_q3
    inter = ch.triple_intersection(g, g.infinity, g.zero, g.one)
    core = alg.core_field(g.emb)
    expected = frozenset({g.infinity} | {g.ring_to_point(x) for x in core})
    assert len(inter) == len(core) + 1 == 4
    assert inter == expected


def test_triple_intersection_q3_random_triple(geom_q3):
    g = geom_q3
    rng = random.Random(23)
    core = alg.core_field(g.emb)
    core_chain = [g.infinity] + [g.ring_to_point(x) for x in sorted(core)]
    from chaingeo.projline import transitivity_witness

    for _ in range(10):
        p, q, r = random_distant_triple(g.line, rng)
        w = transitivity_witness(g.line, p, q, r)
        expected = frozenset(act(g.line, pt, w) for pt in core_chain)
        assert ch.triple_intersection(g, p, q, r) == expected


def test_triple_intersection_q2_is_the_unique_chain(geom_q2):
    g = geom_q2
    inter = ch.triple_intersection(g, g.infinity, g.zero, g.one)
    (only_chain,) = ch.chains_through_standard_triple(g)
    assert inter == frozenset(only_chain)


def test_triple_intersection_contains_triple(geom_q3):
    g = geom_q3
    rng = random.Random(31)
    p, q, r = random_distant_triple(g.line, rng)
    assert {p, q, r} <= ch.triple_intersection(g, p, q, r)


def test_is_chain_space(geom_q2, geom_q3, geom_gf4):
    assert ch.is_chain_space(geom_q2)
    assert not ch.is_chain_space(geom_q3)
    assert ch.is_chain_space(geom_gf4)


def test_sharply_3_transitive(geom_gf5, geom_gf4, geom_q2):
    assert ch.is_sharply_3_transitive(geom_gf5)
    assert ch.is_sharply_3_transitive(geom_gf4)
    assert not ch.is_sharply_3_transitive(geom_q2)


def test_sharp3_direct_check_agrees(geom_gf5, geom_gf4, geom_q2, geom_q3):
    for g in (geom_gf5, geom_gf4, geom_q2, geom_q3):
        assert ch.triple_stabilizer_acts_trivially(g) == ch.is_sharply_3_transitive(g)


def test_maximal_cliques_q2_are_exactly_the_chains(geom_q2):
    cliques = ch.maximal_distant_cliques(geom_q2)
    assert set(cliques) == set(ch.all_chains(geom_q2))


def test_maximal_cliques_gf4_whole_line(geom_gf4):
    assert ch.maximal_distant_cliques(geom_gf4) == (tuple(range(5)),)


def test_chains_are_cliques_q3(geom_q3):
    line = geom_q3.line
    for chain in ch.all_chains(geom_q3):
        for i, p in enumerate(chain):
            for q in chain[i + 1 :]:
                assert line.distant(p, q)


def test_clique_cap(geom_q3):
    with pytest.raises(ValueError):
        ch.maximal_distant_cliques(geom_q3, cap=100)


def _pair_chain_index(chains):
    table = {}
    for idx, chain in enumerate(chains):
        for i, p in enumerate(chain):
            for q in chain[i + 1 :]:
                table.setdefault((p, q), []).append(idx)
    return table


def test_cs2_exhaustive_q2(geom_q2):
    # every pairwise-distant triple lies on exactly one chain
    line = geom_q2.line
    chains = ch.all_chains(geom_q2)
    table = _pair_chain_index(chains)
    sets = [set(c) for c in chains]
    triples = 0
    for i in range(line.n):
        for j in bits(line.neighbors(i) >> (i + 1) << (i + 1)):
            common = (line.neighbors(i) & line.neighbors(j)) >> (j + 1) << (j + 1)
            for r in bits(common):
                triples += 1
                assert sum(1 for idx in table[(i, j)] if r in sets[idx]) == 1
    assert triples == 560


def test_chain_count_sampled_q3(geom_q3):
    rng = random.Random(1009)
    for _ in range(1000):
        p, q, r = random_distant_triple(geom_q3.line, rng)
        assert len(ch.chains_through_triple(geom_q3, p, q, r)) == 3


def test_joined_by_chain_iff_distant_q2(geom_q2):
    line = geom_q2.line
    table = _pair_chain_index(ch.all_chains(geom_q2))
    for i in range(line.n):
        for j in range(i + 1, line.n):
            assert ((i, j) in table) == line.distant(i, j)


def test_two_chains_share_at_most_two_points_when_unique(geom_q2):
    chains = [set(c) for c in ch.all_chains(geom_q2)]
    for i, c1 in enumerate(chains):
        for c2 in chains[i + 1 :]:
            assert len(c1 & c2) <= 2


def test_shared_triples_count_toward_the_fan_q3(geom_q3):
    g = geom_q3
    fan = set(ch.chains_through_standard_triple(g))
    # the three chains through the standard triple pairwise share those points,
    # and the chains through any shared distant triple are exactly the fan
    assert len(fan) == 3
    for chain in fan:
        assert {g.infinity, g.zero, g.one} <= set(chain)
    assert set(ch.chains_through_triple(g, g.infinity, g.zero, g.one)) == fan
