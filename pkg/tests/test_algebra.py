import numpy as np
import pytest

from chaingeo import algebra as alg


def test_gf2_elements(f2):
    assert f2.q == 2
    assert f2.add(1, 1) == 0
    assert f2.mul(1, 1) == 1


def test_gf4_modulus_is_the_unique_irreducible(f4):
    assert f4.modulus == (1, 1, 1)


def test_gf9_nonzero_elements_have_order_dividing_8(f9):
    for x in range(1, 9):
        acc = 1
        for _ in range(8):
            acc = f9.mul(acc, x)
        assert acc == 1


@pytest.mark.parametrize("pn", [(2, 2), (3, 2), (5, 1)])
def test_field_axioms_exhaustive(pn):
    f = alg.make_field(*pn)
    for a in range(f.q):
        for b in range(f.q):
            assert f.add(a, b) == f.add(b, a)
            assert f.mul(a, b) == f.mul(b, a)
            for c in range(f.q):
                assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    for a in range(1, f.q):
        assert f.mul(a, f.inv(a)) == 1


def test_frobenius_is_additive(f9):
    cube = {a: f9.mul(f9.mul(a, a), a) for a in range(9)}
    for a in range(9):
        for b in range(9):
            assert cube[f9.add(a, b)] == f9.add(cube[a], cube[b])


def test_make_field_rejects_composite_characteristic():
    with pytest.raises(ValueError):
        alg.make_field(4, 1)


def test_make_field_rejects_oversized_order():
    with pytest.raises(ValueError):
        alg.make_field(2, 3, max_order=4)


def test_matrix_ring_m2f2_counts(ring_q2):
    assert ring_q2.size == 16
    assert len(ring_q2.units) == 6
    # the center is {0, I}, a two-element field
    assert ring_q2.center == (0, 1)
    assert ring_q2.add(1, 1) == 0


def test_matrix_ring_m2f3_unit_count(ring_q3):
    assert len(ring_q3.units) == (9 - 1) * (9 - 3)


def test_matrix_ring_center_is_scalars(ring_q2, ring_q3, f2, f3):
    for ring, f in ((ring_q2, f2), (ring_q3, f3)):
        scalars = {ring.id_of_matrix(((c, 0), (0, c))) for c in range(f.q)}
        assert set(ring.center) == scalars


def test_matrix_ring_cap():
    f2 = alg.make_field(2, 1)
    with pytest.raises(ValueError):
        alg.make_matrix_ring(f2, 3, max_size=100)


def test_ring_axioms_exhaustive_m2f2(ring_q2):
    r = ring_q2
    for a in range(16):
        for b in range(16):
            for c in range(16):
                assert r.mul(r.mul(a, b), c) == r.mul(a, r.mul(b, c))
                assert r.mul(a, r.add(b, c)) == r.add(r.mul(a, b), r.mul(a, c))
                assert r.mul(r.add(a, b), c) == r.add(r.mul(a, c), r.mul(b, c))


def test_units_are_two_sided(ring_q2):
    r = ring_q2
    for a in range(r.size):
        has_two_sided = any(
            r.mul(a, s) == 1 and r.mul(s, a) == 1 for s in range(r.size)
        )
        assert has_two_sided == r.is_unit(a)


def test_embed_quadratic_q2(emb_q2, ring_q2):
    img = emb_q2.image
    assert len(img) == 4
    assert len(emb_q2.image_units) == 3
    for x in img:
        for y in img:
            assert ring_q2.mul(x, y) in img
    # K* has index 2 in R*
    assert len(ring_q2.units) // len(emb_q2.image_units) == 2


def test_embed_quadratic_q3(emb_q3, ring_q3):
    img = emb_q3.image
    assert len(img) == 9
    assert len(emb_q3.image_units) == 8
    for x in img:
        for y in img:
            assert ring_q3.mul(x, y) in img
            assert ring_q3.add(x, y) in img


def test_embed_quadratic_reducible_pair_rejected(f2):
    # x^2 - 1 = (x - 1)^2 over GF(2)
    with pytest.raises(ValueError):
        alg.embed_quadratic(f2, 1, 0)


def test_embed_quadratic_default_params(f2, f3):
    assert alg.embed_quadratic(f2).params == (1, 1)
    assert alg.embed_quadratic(f3).params == (1, 1)


def test_embedding_is_homomorphism(emb_q3, ring_q3, f9):
    e = emb_q3
    for a in range(9):
        for b in range(9):
            assert e.apply(f9.add(a, b)) == ring_q3.add(e.apply(a), e.apply(b))
            assert e.apply(f9.mul(a, b)) == ring_q3.mul(e.apply(a), e.apply(b))


def test_normalizer_q2_is_whole_unit_group(emb_q2, ring_q2):
    n = alg.normalizer(emb_q2)
    assert n.elements == ring_q2.units
    assert n.normal_in_units


def test_normalizer_q3_order(emb_q3):
    n = alg.normalizer(emb_q3)
    assert len(n) == 2 * (9 - 1)
    assert not n.normal_in_units


def test_normalizer_of_identity_embedding(f4):
    e = alg.embed_identity(f4)
    n = alg.normalizer(e)
    assert n.elements == e.ring.units
    assert n.normal_in_units


def test_normalizer_subgroup_properties(emb_q3, ring_q3):
    n = set(alg.normalizer(emb_q3).elements)
    assert 1 in n
    for a in n:
        assert ring_q3.inverse(a) in n
        for b in n:
            assert ring_q3.mul(a, b) in n
    kstar = emb_q3.image_units
    assert kstar <= n
    for a in n:
        assert ring_q3.conjugate_set(kstar, a) == kstar  # K* normal in N


def test_normal_flag_matches_pointwise_definition(emb_q2, emb_q3):
    for e in (emb_q2, emb_q3):
        flag = alg.normalizer(e).normal_in_units
        pointwise = all(
            e.ring.conjugate_set(e.image, u) == e.image for u in e.ring.units
        )
        assert flag == pointwise


def test_core_field_q2_is_whole_subfield(emb_q2):
    assert alg.core_field(emb_q2) == emb_q2.image


def test_core_field_q3_is_center(emb_q3, ring_q3):
    core = alg.core_field(emb_q3)
    assert core == frozenset(ring_q3.center)
    assert len(core) == 3


def test_core_field_transversal_equals_full(emb_q2, emb_q3):
    for e in (emb_q2, emb_q3):
        assert alg.core_field(e) == alg.core_field(e, use_transversal=False)


def test_core_field_sandwich(emb_q2, emb_q3):
    for e in (emb_q2, emb_q3):
        core = alg.core_field(e)
        meet = e.image & frozenset(e.ring.center)
        assert meet <= core <= e.image


def test_inverse_of_one(ring_q2):
    assert ring_q2.inverse(1) == 1


def test_unit_count_m2f2(ring_q2):
    assert sum(ring_q2.is_unit(a) for a in range(16)) == 6


def test_inverse_raises_on_non_unit(ring_q2):
    non_unit = next(a for a in range(2, 16) if not ring_q2.is_unit(a))
    with pytest.raises(ValueError):
        ring_q2.inverse(non_unit)


def test_conjugate_set_fixed_by_normalizer(emb_q3, ring_q3):
    n = alg.normalizer(emb_q3)
    for u in n.elements:
        assert ring_q3.conjugate_set(emb_q3.image, u) == emb_q3.image


def test_coset_transversal_covers_units(emb_q3, ring_q3):
    n = alg.normalizer(emb_q3)
    reps = alg.coset_transversal(ring_q3, n.elements)
    assert len(reps) == len(ring_q3.units) // len(n)
    covered = set()
    for u in reps:
        covered |= {ring_q3.mul(x, u) for x in n.elements}
    assert covered == set(ring_q3.units)


def test_embedding_rejects_non_homomorphism(f4, ring_q2):
    bad_map = np.array([0, 1, 3, 2])
    with pytest.raises(ValueError):
        alg.SubfieldEmbedding(f4, ring_q2, bad_map)
