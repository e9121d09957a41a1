import random

import numpy as np
import pytest

from chaingeo import algebra as alg
from chaingeo import projline as pl

from conftest import bits, random_distant_triple


def brute_force_invertible(ring, m):
    """Search all |R|^4 matrices for a two-sided inverse, via the tables."""
    size = ring.size
    ids = np.arange(size * size * size * size, dtype=np.int64)
    xa = ids % size
    xb = ids // size % size
    xc = ids // (size * size) % size
    xd = ids // (size * size * size)
    mul = ring.mul_table.astype(np.int64)
    add = ring.add_table.astype(np.int64)

    def prod(p, q, r, s, t, u, v, w):
        return (
            add[mul[p, t], mul[q, v]],
            add[mul[p, u], mul[q, w]],
            add[mul[r, t], mul[s, v]],
            add[mul[r, u], mul[s, w]],
        )

    a, b, c, d = m.entries()
    la, lb, lc, ld = prod(a, b, c, d, xa, xb, xc, xd)
    ra, rb, rc, rd = prod(xa, xb, xc, xd, a, b, c, d)
    ok = (la == 1) & (lb == 0) & (lc == 0) & (ld == 1)
    ok &= (ra == 1) & (rb == 0) & (rc == 0) & (rd == 1)
    return bool(ok.any())


def test_gl2_invertible_identity(ring_q2):
    assert pl.gl2_invertible(pl.Mat2.identity(ring_q2))


def test_gl2_invertible_non_unit_diagonal(ring_q2):
    non_unit = next(a for a in range(2, 16) if not ring_q2.is_unit(a))
    assert not pl.gl2_invertible(pl.Mat2.diag(ring_q2, 1, non_unit))


def test_gl2_invertible_matches_brute_force(ring_q2):
    rng = random.Random(2024)
    for _ in range(200):
        m = pl.Mat2(ring_q2, *(rng.randrange(16) for _ in range(4)))
        assert pl.gl2_invertible(m) == brute_force_invertible(ring_q2, m)


def test_canonical_point_fixed_representatives(ring_q2):
    assert pl.canonical_pair(ring_q2, 1, 0) == (1, 0)
    for u in ring_q2.units:
        assert pl.canonical_pair(ring_q2, u, 0) == (1, 0)


def test_canonical_point_unit_invariance(geom_q3):
    ring = geom_q3.ring
    rng = random.Random(5)
    for _ in range(100):
        a, b = geom_q3.line.pairs[rng.randrange(geom_q3.line.n)]
        for u in ring.units:
            ua, ub = ring.mul(u, a), ring.mul(u, b)
            assert pl.canonical_pair(ring, ua, ub) == (a, b)


def test_is_point_basic(ring_q2):
    assert pl.is_point(ring_q2, 1, 0)
    assert not pl.is_point(ring_q2, 0, 0)


def test_is_point_complementary_idempotents(ring_q2):
    e = ring_q2.id_of_matrix(((1, 0), (0, 0)))
    f = ring_q2.id_of_matrix(((0, 0), (0, 1)))
    assert pl.is_point(ring_q2, e, f)
    assert not pl.is_point(ring_q2, e, e)


def test_line_sizes(geom_q2, geom_q3, geom_gf4):
    assert geom_gf4.line.n == 5
    assert geom_q2.line.n == 35
    assert geom_q3.line.n == 130


@pytest.mark.parametrize("pn,expected", [((2, 1), 3), ((3, 1), 4), ((2, 2), 5), ((5, 1), 6), ((3, 2), 10)])
def test_field_line_has_q_plus_one_points(pn, expected):
    ring = alg.ring_from_field(alg.make_field(*pn))
    assert pl.build_projective_line(ring).n == expected


def test_orbit_equals_oracle(ring_q2):
    line = pl.build_projective_line(ring_q2, crosscheck=False)
    assert pl.oracle_point_set(ring_q2) == set(line.pairs)


def test_line_builds_run_the_crosscheck(geom_q2, geom_q3):
    assert geom_q2.line.oracle_checked
    assert geom_q3.line.oracle_checked


def test_generators_act_transitively_on_distant_pairs(geom_q2):
    line = geom_q2.line
    perms = [pl.act_permutation(line, m) for m in pl.gl2_generators(line.ring)]
    start = (geom_q2.infinity, geom_q2.zero)
    seen = {start}
    frontier = [start]
    while frontier:
        new = []
        for p, q in frontier:
            for perm in perms:
                im = (int(perm[p]), int(perm[q]))
                if im not in seen:
                    seen.add(im)
                    new.append(im)
        frontier = new
    total = sum(line.degree(i) for i in range(line.n))
    assert len(seen) == total


def test_generators_induce_all_of_pgl2_gf4(f4):
    ring = alg.ring_from_field(f4)
    line = pl.build_projective_line(ring)
    perms = [tuple(int(x) for x in pl.act_permutation(line, m)) for m in pl.gl2_generators(ring)]
    ident = tuple(range(line.n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        new = []
        for g in frontier:
            for h in perms:
                im = tuple(h[i] for i in g)
                if im not in seen:
                    seen.add(im)
                    new.append(im)
        frontier = new
    assert len(seen) == 60  # |PGL2(GF(4))|


def test_group_closure_contains_identity(ring_q2):
    rows = pl.group_closure(ring_q2, pl.gl2_generators(ring_q2))
    assert [1, 0, 0, 1] in rows.tolist()


def test_distant_basics(geom_q2):
    line = geom_q2.line
    assert line.distant(geom_q2.infinity, geom_q2.zero)
    assert not line.distant(geom_q2.infinity, geom_q2.infinity)


def test_distant_degree_is_ring_size(geom_q2, geom_q3):
    for g in (geom_q2, geom_q3):
        for i in range(g.line.n):
            assert g.line.degree(i) == g.ring.size


def test_distant_on_field_is_inequality(geom_gf4):
    line = geom_gf4.line
    for i in range(line.n):
        for j in range(line.n):
            assert line.distant(i, j) == (i != j)


def test_act_identity(geom_q2):
    line = geom_q2.line
    ident = pl.Mat2.identity(line.ring)
    for i in range(line.n):
        assert pl.act(line, i, ident) == i


def test_act_swap_exchanges_infinity_and_zero(geom_q2):
    line = geom_q2.line
    swap = pl.Mat2.swap(line.ring)
    assert pl.act(line, geom_q2.infinity, swap) == geom_q2.zero
    assert pl.act(line, geom_q2.zero, swap) == geom_q2.infinity


def test_act_preserves_distant_random_matrices(geom_q2):
    line = geom_q2.line
    gens = pl.gl2_generators(line.ring)
    rng = random.Random(99)
    for _ in range(50):
        m = pl.Mat2.identity(line.ring)
        for _ in range(6):
            m = m * rng.choice(gens)
        perm = pl.act_permutation(line, m)
        for i in range(line.n):
            for j in bits(line.neighbors(i)):
                assert line.distant(int(perm[i]), int(perm[j]))


def test_distant_invariant_under_every_generator(geom_q2):
    line = geom_q2.line
    for m in pl.gl2_generators(line.ring):
        perm = pl.act_permutation(line, m)
        for i in range(line.n):
            for j in range(line.n):
                assert line.distant(i, j) == line.distant(int(perm[i]), int(perm[j]))


def test_witness_on_standard_triple(geom_q2):
    line = geom_q2.line
    w = pl.transitivity_witness(line, geom_q2.infinity, geom_q2.zero, geom_q2.one)
    assert pl.act(line, geom_q2.infinity, w) == geom_q2.infinity
    assert pl.act(line, geom_q2.zero, w) == geom_q2.zero
    assert pl.act(line, geom_q2.one, w) == geom_q2.one


def test_witness_random_triples_q2(geom_q2):
    line = geom_q2.line
    rng = random.Random(12)
    for _ in range(100):
        p, q, r = random_distant_triple(line, rng)
        w = pl.transitivity_witness(line, p, q, r)
        assert pl.act(line, geom_q2.infinity, w) == p
        assert pl.act(line, geom_q2.zero, w) == q
        assert pl.act(line, geom_q2.one, w) == r


def test_witness_rejects_non_distant(geom_q2):
    with pytest.raises(ValueError):
        pl.transitivity_witness(geom_q2.line, geom_q2.infinity, geom_q2.infinity, geom_q2.one)


def test_witness_gf4_reaches_every_ordered_triple(geom_gf4):
    line = geom_gf4.line
    inf, zero, one = geom_gf4.infinity, geom_gf4.zero, geom_gf4.one
    reached = set()
    for p in range(5):
        for q in range(5):
            for r in range(5):
                if len({p, q, r}) < 3:
                    continue
                w = pl.transitivity_witness(line, p, q, r)
                reached.add(
                    (pl.act(line, inf, w), pl.act(line, zero, w), pl.act(line, one, w))
                )
    assert len(reached) == 5 * 4 * 3


def test_standard_triple_stabilizer_in_generated_group(ring_q2):
    line = pl.build_projective_line(ring_q2)
    inf, zero, one = line.point_id(1, 0), line.point_id(0, 1), line.point_id(1, 1)
    rows = pl.group_closure(ring_q2, pl.gl2_generators(ring_q2))
    assert len(rows) == 20160  # |GL4(GF(2))|
    stab = set()
    for a, b, c, d in rows.tolist():
        m = pl.Mat2(ring_q2, a, b, c, d)
        if (
            pl.act(line, inf, m) == inf
            and pl.act(line, zero, m) == zero
            and pl.act(line, one, m) == one
        ):
            stab.add((a, b, c, d))
    expected = {(u, 0, 0, u) for u in ring_q2.units}
    assert stab == expected


def test_canonical_point_api(geom_q2):
    pt = pl.canonical_point(geom_q2.line, 1, 0)
    assert pt.pair == (1, 0)
    assert pt.index == geom_q2.infinity
    with pytest.raises(ValueError):
        pl.canonical_point(geom_q2.line, 0, 0)


def test_mat2_inverse_round_trip(geom_q3):
    ring = geom_q3.ring
    rng = random.Random(3)
    gens = pl.gl2_generators(ring)
    for _ in range(25):
        m = pl.Mat2.identity(ring)
        for _ in range(5):
            m = m * rng.choice(gens)
        assert m * m.inv() == pl.Mat2.identity(ring)
        assert m.inv() * m == pl.Mat2.identity(ring)
