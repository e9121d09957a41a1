"""Finite fields, matrix rings, subfield embeddings and unit-group machinery.

Elements of every structure are dense integer ids and all arithmetic is
table lookup.  Field ids encode coefficient vectors in base p; matrix-ring
ids encode entry vectors in base |F| and are then relabelled so that id 0
is always the zero element and id 1 the multiplicative identity.  Every
ring carries a faithful matrix representation over its prime field; rank
of the represented matrix decides invertibility, and the tables are
cross-checked against that criterion exhaustively at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import modmat

# exhaustive-structure checks up to this many elements, random sampling above
_EXHAUSTIVE_LIMIT = 100
_SAMPLE_TRIPLES = 200_000
_VALIDATE_SEED = 0x5EED


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def factor_prime_power(q: int) -> tuple[int, int]:
    """Write q = p^n for a prime p; raises ValueError otherwise."""
    fs = _prime_factors(q)
    if len(fs) != 1:
        raise ValueError("%d is not a prime power" % q)
    p = fs[0]
    n = 0
    while q > 1:
        q //= p
        n += 1
    return p, n


def _poly_rem(num: list[int], den: list[int], p: int) -> list[int]:
    # remainder of num by monic den, coefficients ascending, mod p
    rem = [c % p for c in num]
    dd = len(den) - 1
    for k in range(len(rem) - 1, dd - 1, -1):
        c = rem[k]
        if c:
            for i in range(dd + 1):
                rem[k - dd + i] = (rem[k - dd + i] - c * den[i]) % p
    return rem[:dd]


def _is_irreducible(coeffs: list[int], p: int) -> bool:
    # trial division by every monic polynomial of degree 1 .. deg/2
    n = len(coeffs) - 1
    if n == 1:
        return True
    for d in range(1, n // 2 + 1):
        for k in range(p**d):
            den = [(k // p**i) % p for i in range(d)] + [1]
            if not any(_poly_rem(coeffs, den, p)):
                return False
    return True


def smallest_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree n over GF(p).

    Candidates are ordered by their low-coefficient vector read as a base-p
    integer, i.e. compared from the x^(n-1) coefficient downwards, so the
    result is deterministic across runs.
    """
    for k in range(p**n):
        coeffs = [(k // p**i) % p for i in range(n)] + [1]
        if _is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise RuntimeError("no irreducible polynomial found (impossible)")


class FiniteField:
    """GF(p^n) presented by full addition/multiplication tables.

    The id of the element with coefficient vector (c_0, ..., c_{n-1}) over
    GF(p) is sum(c_i * p**i), so 0 and 1 are the two identities and the
    prime subfield occupies ids 0..p-1.  Multiplication runs through
    discrete logs of a primitive element, which doubles as the proof that
    the modulus really is irreducible.
    """

    def __init__(self, p: int, n: int, modulus):
        if len(modulus) != n + 1 or modulus[-1] % p != 1:
            raise ValueError("modulus must be monic of degree n")
        self.p = int(p)
        self.n = int(n)
        self.q = p**n
        self.modulus = tuple(int(c) % p for c in modulus)
        self._pow_p = p ** np.arange(n, dtype=np.int64)
        ids = np.arange(self.q, dtype=np.int64)
        self.digits = (ids[:, None] // self._pow_p[None, :]) % p
        self._build_tables()
        self._validate()

    # -- construction -----------------------------------------------------

    def _poly_mul_ids(self, a: int, b: int) -> int:
        p, n = self.p, self.n
        ca = [(a // p**i) % p for i in range(n)]
        cb = [(b // p**i) % p for i in range(n)]
        prod = [0] * (2 * n - 1)
        for i, x in enumerate(ca):
            if x:
                for j, y in enumerate(cb):
                    prod[i + j] = (prod[i + j] + x * y) % p
        for k in range(len(prod) - 1, n - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for i in range(n):
                    prod[k - n + i] = (prod[k - n + i] - c * self.modulus[i]) % p
        return sum(c * p**i for i, c in enumerate(prod[:n]))

    def _pow_id(self, a: int, e: int) -> int:
        out = 1
        base = a
        while e:
            if e & 1:
                out = self._poly_mul_ids(out, base)
            base = self._poly_mul_ids(base, base)
            e >>= 1
        return out

    def _find_primitive(self) -> int:
        order = self.q - 1
        fs = _prime_factors(order)
        for g in range(1, self.q):
            if g == 1 and order > 1:
                continue
            if all(self._pow_id(g, order // f) != 1 for f in fs):
                return g
        raise ValueError(
            "modulus %r is not irreducible over GF(%d)" % (self.modulus, self.p)
        )

    def _build_tables(self):
        q, p = self.q, self.p
        order = q - 1
        self.add_table = np.empty((q, q), dtype=np.int32)
        chunk = max(1, (1 << 22) // max(q, 1))
        for s in range(0, q, chunk):
            blk = (self.digits[s : s + chunk, None, :] + self.digits[None, :, :]) % p
            self.add_table[s : s + chunk] = blk @ self._pow_p
        self.neg_table = (((p - self.digits) % p) @ self._pow_p).astype(np.int32)

        self.generator = self._find_primitive()
        exp = np.zeros(order, dtype=np.int64)
        e = 1
        for k in range(order):
            exp[k] = e
            e = self._poly_mul_ids(e, self.generator)
        if e != 1 or len(set(exp.tolist())) != order:
            raise ValueError(
                "modulus %r is not irreducible over GF(%d)" % (self.modulus, self.p)
            )
        log = np.full(q, -1, dtype=np.int64)
        log[exp] = np.arange(order)
        self.exp, self.log = exp, log

        self.mul_table = np.zeros((q, q), dtype=np.int32)
        if order:
            la = log[1:]
            self.mul_table[1:, 1:] = exp[(la[:, None] + la[None, :]) % order]
        self.inv_table = np.zeros(q, dtype=np.int32)
        if order:
            self.inv_table[1:] = exp[(order - log[1:]) % order]

    def _validate(self):
        q, p = self.q, self.p
        ids = np.arange(q)
        assert (self.add_table[0] == ids).all() and (self.mul_table[1] == ids).all()
        assert (self.mul_table[self.inv_table[1:], np.arange(1, q)] == 1).all()
        if q <= 4096:
            assert (self.mul_table == self.mul_table.T).all()
            frob = np.zeros(q, dtype=np.int64)
            if q > 1:
                frob[1:] = self.exp[(p * self.log[1:]) % (q - 1)]
            assert (frob[self.add_table] == self.add_table[frob[:, None], frob[None, :]]).all()
        if q <= _EXHAUSTIVE_LIMIT:
            m, a = self.mul_table.astype(np.int64), self.add_table.astype(np.int64)
            assert (m[m] == m[:, m]).all(), "multiplication is not associative"
            assert (m[:, a] == a[m[:, :, None], m[:, None, :]]).all()
        else:
            rng = np.random.default_rng(_VALIDATE_SEED)
            i, j, k = rng.integers(0, q, size=(3, _SAMPLE_TRIPLES))
            m, a = self.mul_table, self.add_table
            assert (m[m[i, j], k] == m[i, m[j, k]]).all()
            assert (m[i, a[j, k]] == a[m[i, j], m[i, k]]).all()

    # -- arithmetic ---------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.inv_table[a])

    def coeffs(self, a: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.digits[a])

    @property
    def units(self) -> range:
        return range(1, self.q)

    def regular_rep(self) -> np.ndarray:
        """Matrices of left multiplication in the monomial basis, over GF(p)."""
        basis = self._pow_p  # ids of 1, x, ..., x^(n-1)
        cols = self.mul_table[:, basis]  # (q, n) ids of e * x^j
        return self.digits[cols].transpose(0, 2, 1).astype(np.int32)

    def __repr__(self):
        return "GF(%d^%d)" % (self.p, self.n) if self.n > 1 else "GF(%d)" % self.p


def make_field(p: int, n: int, max_order: int = 1 << 16) -> FiniteField:
    """GF(p^n) with the lexicographically smallest irreducible modulus."""
    if not _is_prime(p):
        raise ValueError("%d is not prime" % p)
    if n < 1:
        raise ValueError("degree must be positive")
    if p**n > max_order:
        raise ValueError("p^n = %d exceeds the cap %d" % (p**n, max_order))
    return FiniteField(p, n, smallest_irreducible(p, n))


class FiniteRing:
    """Finite associative unital ring on dense element ids.

    Ids run 0..size-1 with 0 the zero and 1 the one.  `rep` is a faithful
    representation by square matrices over GF(p) that reflects
    invertibility (an element is a unit exactly if its matrix is
    invertible); the constructor verifies this against the raw tables for
    every element.  All data is immutable after construction.
    """

    def __init__(self, p, add_table, mul_table, rep, mats=None, base_field=None, name=""):
        self.p = int(p)
        self.add_table = np.asarray(add_table, dtype=np.int32)
        self.mul_table = np.asarray(mul_table, dtype=np.int32)
        self.size = self.add_table.shape[0]
        self.rep = np.ascontiguousarray(rep, dtype=np.int32)
        self.rep_dim = self.rep.shape[1]
        self.mats = mats
        self.base_field = base_field
        self.name = name or "ring[%d]" % self.size

        self.neg_table = np.argmax(self.add_table == 0, axis=1).astype(np.int32)
        ranks = modmat.rank_batch(self.rep, self.p)
        unit_mask = ranks == self.rep_dim
        self.units_arr = np.nonzero(unit_mask)[0].astype(np.int64)
        self.units = tuple(int(u) for u in self.units_arr)
        self.unit_set = frozenset(self.units)
        self.inv_table = np.full(self.size, -1, dtype=np.int32)
        if len(self.units):
            pos = np.argmax(self.mul_table[self.units_arr] == 1, axis=1)
            if not (self.mul_table[self.units_arr, pos] == 1).all() or not (
                self.mul_table[pos, self.units_arr] == 1
            ).all():
                raise RuntimeError("representation does not reflect invertibility")
            self.inv_table[self.units_arr] = pos
        self.center = tuple(
            int(z) for z in np.nonzero((self.mul_table == self.mul_table.T).all(axis=1))[0]
        )
        # scalar(k) = k * 1 embeds the prime field
        scal = [0]
        for _ in range(self.p - 1):
            scal.append(int(self.add_table[scal[-1], 1]))
        self.scalar_ids = tuple(scal)
        self.rep_index = {
            np.ascontiguousarray(self.rep[e]).tobytes(): e for e in range(self.size)
        }
        if mats is not None:
            self._mat_index = {
                np.ascontiguousarray(mats[e]).tobytes(): e for e in range(self.size)
            }
        self._validate()

    def _validate(self):
        s = self.size
        ids = np.arange(s)
        assert (self.add_table[0] == ids).all(), "0 is not the zero element"
        assert (self.mul_table[1] == ids).all() and (self.mul_table[:, 1] == ids).all()
        assert (self.mul_table[0] == 0).all() and (self.mul_table[:, 0] == 0).all()
        assert (self.add_table == self.add_table.T).all()
        assert (self.add_table[ids, self.neg_table] == 0).all()
        if len(self.rep_index) != s:
            raise RuntimeError("representation is not injective")
        # units computed by rank must coincide with two-sided invertibility
        row_has_one = (self.mul_table == 1).any(axis=1)
        col_has_one = (self.mul_table == 1).any(axis=0)
        mask = np.zeros(s, dtype=bool)
        mask[list(self.units)] = True
        if not ((row_has_one == mask).all() and (col_has_one == mask).all()):
            raise RuntimeError("representation does not reflect invertibility")
        m = self.mul_table.astype(np.int64)
        a = self.add_table.astype(np.int64)
        if s <= _EXHAUSTIVE_LIMIT:
            assert (m[m] == m[:, m]).all(), "multiplication is not associative"
            assert (m[:, a] == a[m[:, :, None], m[:, None, :]]).all()
            assert (m[a] == a[m[:, None, :], m[None, :, :]]).all()
        else:
            rng = np.random.default_rng(_VALIDATE_SEED)
            i, j, k = rng.integers(0, s, size=(3, _SAMPLE_TRIPLES))
            assert (m[m[i, j], k] == m[i, m[j, k]]).all()
            assert (m[i, a[j, k]] == a[m[i, j], m[i, k]]).all()
            assert (m[a[i, j], k] == a[m[i, k], m[j, k]]).all()
        # the representation is a ring homomorphism
        if s <= 256:
            prod = (self.rep[:, None].astype(np.int64) @ self.rep[None, :].astype(np.int64)) % self.p
            assert (self.rep[self.mul_table] == prod).all()
            sums = (self.rep[:, None].astype(np.int64) + self.rep[None, :]) % self.p
            assert (self.rep[self.add_table] == sums).all()
        else:
            rng = np.random.default_rng(_VALIDATE_SEED + 1)
            i, j = rng.integers(0, s, size=(2, 50_000))
            prod = (self.rep[i].astype(np.int64) @ self.rep[j]) % self.p
            assert (self.rep[self.mul_table[i, j]] == prod).all()
            assert (self.rep[self.add_table[i, j]] == (self.rep[i].astype(np.int64) + self.rep[j]) % self.p).all()

    # -- arithmetic ---------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def is_unit(self, a: int) -> bool:
        return a in self.unit_set

    def inverse(self, a: int) -> int:
        v = int(self.inv_table[a])
        if v < 0:
            raise ValueError("element %d is not a unit" % a)
        return v

    def conjugate(self, x: int, u: int) -> int:
        """u^(-1) x u."""
        return int(self.mul_table[self.mul_table[self.inverse(u), x], u])

    def conjugate_set(self, elems, u: int) -> frozenset[int]:
        """u^(-1) S u as a set of element ids."""
        ui = self.inverse(u)
        arr = np.fromiter(elems, dtype=np.int64)
        return frozenset(int(x) for x in self.mul_table[self.mul_table[ui, arr], u])

    def scalar(self, k: int) -> int:
        return self.scalar_ids[k % self.p]

    # -- matrix-ring extras ---------------------------------------------------

    def matrix_of(self, e: int) -> tuple[tuple[int, ...], ...]:
        if self.mats is None:
            raise ValueError("not a matrix ring")
        return tuple(tuple(int(x) for x in row) for row in self.mats[e])

    def id_of_matrix(self, rows) -> int:
        if self.mats is None:
            raise ValueError("not a matrix ring")
        arr = np.ascontiguousarray(rows, dtype=self.mats.dtype)
        return self._mat_index[arr.tobytes()]

    def __repr__(self):
        return "FiniteRing(%s, size=%d)" % (self.name, self.size)


def ring_from_field(f: FiniteField) -> FiniteRing:
    """View a finite field as a table ring (regular representation over GF(p))."""
    return FiniteRing(
        f.p, f.add_table, f.mul_table, f.regular_rep(), base_field=f, name=repr(f)
    )


def make_matrix_ring(f: FiniteField, n: int, max_size: int = 10_000) -> FiniteRing:
    """Ring of n x n matrices over a finite field, as a table ring.

    Units are exactly the invertible matrices and the center the scalar
    matrices; both are recomputed from the tables rather than assumed.
    """
    if n < 1:
        raise ValueError("matrix dimension must be positive")
    size = f.q ** (n * n)
    if size > max_size:
        raise ValueError("ring would have %d elements, exceeding the cap %d" % (size, max_size))
    k = n * n
    powq = f.q ** np.arange(k, dtype=np.int64)
    ids = np.arange(size, dtype=np.int64)
    mats_nat = ((ids[:, None] // powq) % f.q).reshape(size, n, n)
    one_nat = int(np.eye(n, dtype=np.int64).reshape(-1) @ powq)
    relabel = np.arange(size, dtype=np.int64)
    if one_nat != 1:
        relabel[1], relabel[one_nat] = one_nat, 1
    # relabel is an involution, so it converts ids in both directions
    mats = np.ascontiguousarray(mats_nat[relabel], dtype=np.int32)

    def encode(entry_blocks):
        flat = entry_blocks.reshape(entry_blocks.shape[:-2] + (k,))
        return relabel[flat.astype(np.int64) @ powq]

    add_table = np.empty((size, size), dtype=np.int32)
    mul_table = np.empty((size, size), dtype=np.int32)
    chunk = max(1, (1 << 21) // size)
    addf = f.add_table.astype(np.int64)
    mulf = f.mul_table.astype(np.int64)
    for s in range(0, size, chunk):
        blk = mats[s : s + chunk]
        add_table[s : s + chunk] = encode(addf[blk[:, None], mats[None, :]])
        acc = None
        for t in range(n):
            term = mulf[blk[:, None, :, t, None], mats[None, :, None, t, :]]
            acc = term if acc is None else addf[acc, term]
        mul_table[s : s + chunk] = encode(acc)

    frep = f.regular_rep()  # (q, m, m)
    m = f.n
    rep = frep[mats].transpose(0, 1, 3, 2, 4).reshape(size, n * m, n * m)
    return FiniteRing(
        f.p, add_table, mul_table, rep, mats=mats, base_field=f,
        name="M(%dx%d,%s)" % (n, n, repr(f)),
    )


class SubfieldEmbedding:
    """Injective unital homomorphism of a finite field into a ring.

    The image is recorded as a plain id set; all geometric constructions
    downstream depend on the image only.
    """

    def __init__(self, field: FiniteField, ring: FiniteRing, id_map):
        self.field = field
        self.ring = ring
        self.id_map = np.asarray(id_map, dtype=np.int64)
        if self.id_map.shape != (field.q,):
            raise ValueError("id map must list an image for every field element")
        img = [int(x) for x in self.id_map]
        if len(set(img)) != field.q:
            raise ValueError("embedding is not injective")
        if img[0] != 0 or img[1] != 1:
            raise ValueError("embedding must send 0 to 0 and 1 to 1")
        m = self.id_map
        if not (ring.add_table[m[:, None], m[None, :]] == m[field.add_table]).all():
            raise ValueError("embedding is not additive")
        if not (ring.mul_table[m[:, None], m[None, :]] == m[field.mul_table]).all():
            raise ValueError("embedding is not multiplicative")
        self.image = frozenset(img)
        self.image_sorted = tuple(sorted(img))
        self.image_units = frozenset(img) - {0}
        if not self.image_units <= ring.unit_set:
            raise ValueError("nonzero image elements must be units")
        self.params: tuple[int, int] | None = None  # (s, t) for quadratic embeddings

    def apply(self, k: int) -> int:
        return int(self.id_map[k])

    def __repr__(self):
        return "SubfieldEmbedding(%r -> %r)" % (self.field, self.ring)


def embed_identity(f: FiniteField, ring: FiniteRing | None = None) -> SubfieldEmbedding:
    """The identity embedding of a field into itself viewed as a ring."""
    if ring is None:
        ring = ring_from_field(f)
    if ring.size != f.q:
        raise ValueError("ring does not match the field")
    return SubfieldEmbedding(f, ring, np.arange(f.q))


def quad_extension_params(f: FiniteField) -> tuple[int, int]:
    """Smallest (s, t) with x^2 - t*x - s irreducible over f, in lex order."""
    for s in range(f.q):
        for t in range(f.q):
            if _quad_irreducible(f, s, t):
                return s, t
    raise RuntimeError("no irreducible quadratic found (impossible)")


def _quad_irreducible(f: FiniteField, s: int, t: int) -> bool:
    # degree 2: irreducible over f iff no root in f
    for r in range(f.q):
        if f.sub(f.sub(f.mul(r, r), f.mul(t, r)), s) == 0:
            return False
    return True


def embed_quadratic(
    f: FiniteField,
    s: int | None = None,
    t: int | None = None,
    ring: FiniteRing | None = None,
) -> SubfieldEmbedding:
    """Embed GF(q^2) into M(2x2, GF(q)) by the regular representation.

    With i a root of x^2 - t*x - s, the element a + b*i maps to the matrix
    ((a, b), (b*s, a + b*t)).  When s, t are omitted the lexicographically
    smallest valid pair is chosen.  The abstract GF(q^2) produced by
    make_field is identified with the image by locating a root of its
    modulus inside the image subring.
    """
    if (s is None) != (t is None):
        raise ValueError("supply both s and t, or neither")
    if s is None:
        s, t = quad_extension_params(f)
    if not (0 <= s < f.q and 0 <= t < f.q):
        raise ValueError("s, t must be element ids of the base field")
    if not _quad_irreducible(f, s, t):
        raise ValueError("x^2 - t*x - s is reducible over GF(%d)" % f.q)
    if ring is None:
        ring = make_matrix_ring(f, 2)
    else:
        bf = ring.base_field
        if (
            ring.mats is None
            or ring.mats.shape[1] != 2
            or bf is None
            or (bf.p, bf.n, bf.modulus) != (f.p, f.n, f.modulus)
        ):
            raise ValueError("ring must be M(2x2) over the given field")

    image = []
    for a in range(f.q):
        for b in range(f.q):
            rows = ((a, b), (f.mul(b, s), f.add(a, f.mul(b, t))))
            image.append(ring.id_of_matrix(rows))
    if len(set(image)) != f.q * f.q:
        raise RuntimeError("embedding formula produced a collision")

    big = make_field(f.p, 2 * f.n)
    root = None
    for z in sorted(image):
        acc = ring.scalar(big.modulus[-1])
        for c in reversed(big.modulus[:-1]):
            acc = ring.add(ring.mul(acc, z), ring.scalar(c))
        if acc == 0:
            root = z
            break
    if root is None:
        raise RuntimeError("modulus of GF(q^2) has no root in the image subring")
    zpow = [1]
    for _ in range(1, big.n):
        zpow.append(ring.mul(zpow[-1], root))
    id_map = np.zeros(big.q, dtype=np.int64)
    for e in range(big.q):
        acc = 0
        for c, zp in zip(big.digits[e], zpow):
            acc = ring.add(acc, ring.mul(ring.scalar(int(c)), zp))
        id_map[e] = acc
    emb = SubfieldEmbedding(big, ring, id_map)
    if emb.image != frozenset(image):
        raise RuntimeError("identification misses part of the image subring")
    emb.params = (s, t)
    return emb


@dataclass(frozen=True)
class SubgroupOfUnits:
    """A subgroup of the unit group, as a sorted id tuple."""

    elements: tuple[int, ...]
    normal_in_units: bool

    def __len__(self):
        return len(self.elements)

    def __contains__(self, u):
        return u in set(self.elements)


def _check_subgroup(ring: FiniteRing, members: list[int]):
    ms = frozenset(members)
    if 1 not in ms:
        raise RuntimeError("subgroup misses the identity")
    arr = np.array(sorted(ms), dtype=np.int64)
    prods = ring.mul_table[arr[:, None], arr[None, :]]
    if not frozenset(int(x) for x in prods.ravel()) <= ms:
        raise RuntimeError("set is not closed under multiplication")
    if not all(ring.inverse(m) in ms for m in ms):
        raise RuntimeError("set is not closed under inverses")


def normalizer(e: SubfieldEmbedding) -> SubgroupOfUnits:
    """Units u with u^(-1) K u = K, by direct test over the whole unit group."""
    ring = e.ring
    img = np.array(e.image_sorted, dtype=np.int64)
    members = []
    for u in ring.units:
        ui = ring.inverse(u)
        conj = ring.mul_table[ring.mul_table[ui, img], u]
        if np.array_equal(np.sort(conj), img):
            members.append(u)
    _check_subgroup(ring, members)
    if not e.image_units <= frozenset(members):
        raise RuntimeError("normalizer must contain the image units")
    return SubgroupOfUnits(tuple(members), len(members) == len(ring.units))


def coset_transversal(ring: FiniteRing, subgroup) -> tuple[int, ...]:
    """Lexicographically smallest representatives of the right cosets N*u."""
    sub = np.array(sorted(subgroup), dtype=np.int64)
    seen: set[int] = set()
    reps = []
    for u in ring.units:
        if u in seen:
            continue
        reps.append(u)
        seen.update(int(v) for v in ring.mul_table[sub, u])
    return tuple(reps)


def core_field(e: SubfieldEmbedding, use_transversal: bool = True) -> frozenset[int]:
    """Intersection of all unit conjugates of the embedded subfield.

    A transversal of the right cosets of the normalizer suffices, since the
    conjugate depends only on the coset; use_transversal=False forces the
    full intersection for cross-checking.
    """
    ring = e.ring
    if use_transversal:
        units = coset_transversal(ring, normalizer(e).elements)
    else:
        units = ring.units
    core = frozenset(e.image)
    img = np.array(e.image_sorted, dtype=np.int64)
    for u in units:
        ui = ring.inverse(u)
        conj = ring.mul_table[ring.mul_table[ui, img], u]
        core &= frozenset(int(x) for x in conj)
    arr = np.array(sorted(core), dtype=np.int64)
    sums = frozenset(int(x) for x in ring.add_table[arr[:, None], arr[None, :]].ravel())
    prods = frozenset(int(x) for x in ring.mul_table[arr[:, None], arr[None, :]].ravel())
    if not (sums <= core and prods <= core):
        raise RuntimeError("core is not a subring")
    if not all(ring.inverse(x) in core for x in core if x):
        raise RuntimeError("core is not a subfield")
    return core
