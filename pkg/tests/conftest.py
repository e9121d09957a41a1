import pytest

from chaingeo import algebra as alg
from chaingeo.chains import ChainGeometry


@pytest.fixture(scope="session")
def f2():
    return alg.make_field(2, 1)


@pytest.fixture(scope="session")
def f3():
    return alg.make_field(3, 1)


@pytest.fixture(scope="session")
def f4():
    return alg.make_field(2, 2)


@pytest.fixture(scope="session")
def f5():
    return alg.make_field(5, 1)


@pytest.fixture(scope="session")
def f9():
    return alg.make_field(3, 2)


@pytest.fixture(scope="session")
def ring_q2(f2):
    return alg.make_matrix_ring(f2, 2)


@pytest.fixture(scope="session")
def ring_q3(f3):
    return alg.make_matrix_ring(f3, 2)


@pytest.fixture(scope="session")
def emb_q2(f2, ring_q2):
    return alg.embed_quadratic(f2, 1, 1, ring=ring_q2)


@pytest.fixture(scope="session")
def emb_q3(f3, ring_q3):
    return alg.embed_quadratic(f3, 2, 0, ring=ring_q3)


@pytest.fixture(scope="session")
def geom_q2(emb_q2):
    return ChainGeometry(emb_q2)


@pytest.fixture(scope="session")
def geom_q3(emb_q3):
    return ChainGeometry(emb_q3)


@pytest.fixture(scope="session")
def geom_gf4(f4):
    return ChainGeometry(alg.embed_identity(f4))


@pytest.fixture(scope="session")
def geom_gf5(f5):
    return ChainGeometry(alg.embed_identity(f5))


def random_distant_triple(line, rng):
    while True:
        p = rng.randrange(line.n)
        nb = line.neighbors(p)
        if not nb:
            continue
        q = rng.choice(bits(nb))
        common = nb & line.neighbors(q)
        if not common:
            continue
        return p, q, rng.choice(bits(common))


def bits(mask):
    out = []
    while mask:
        out.append((mask & -mask).bit_length() - 1)
        mask &= mask - 1
    return out
