"""The projective line over a finite ring and the GL2 action on it.

Points are free cyclic submodules R(a,b) of R^2 admitting a free cyclic
complement, stored as the lexicographically smallest unit multiple of a
representative pair.  The line itself is the orbit of R(1,0) under a
generator set of GL2(R); that orbit is cross-checked point-for-point
against the brute-force completion oracle, so the generator set is an
enforced runtime invariant rather than a theorem taken on trust.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import modmat
from .algebra import FiniteRing


class Mat2:
    """2x2 matrix over a table ring, acting on row vectors from the right."""

    __slots__ = ("ring", "a", "b", "c", "d")

    def __init__(self, ring: FiniteRing, a: int, b: int, c: int, d: int):
        self.ring = ring
        self.a, self.b, self.c, self.d = int(a), int(b), int(c), int(d)

    @classmethod
    def identity(cls, ring):
        return cls(ring, 1, 0, 0, 1)

    @classmethod
    def diag(cls, ring, u, v):
        return cls(ring, u, 0, 0, v)

    @classmethod
    def upper(cls, ring, x):
        return cls(ring, 1, x, 0, 1)

    @classmethod
    def lower(cls, ring, x):
        return cls(ring, 1, 0, x, 1)

    @classmethod
    def swap(cls, ring):
        return cls(ring, 0, 1, 1, 0)

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def apply(self, x: int, y: int) -> tuple[int, int]:
        """Image of the row vector (x, y)."""
        r = self.ring
        return (
            r.add(r.mul(x, self.a), r.mul(y, self.c)),
            r.add(r.mul(x, self.b), r.mul(y, self.d)),
        )

    def __mul__(self, other: "Mat2") -> "Mat2":
        r = self.ring
        return Mat2(
            r,
            r.add(r.mul(self.a, other.a), r.mul(self.b, other.c)),
            r.add(r.mul(self.a, other.b), r.mul(self.b, other.d)),
            r.add(r.mul(self.c, other.a), r.mul(self.d, other.c)),
            r.add(r.mul(self.c, other.b), r.mul(self.d, other.d)),
        )

    def block(self) -> np.ndarray:
        """Image under the ring representation: one (2d x 2d) matrix over GF(p)."""
        return _blocks_for_rows(self.ring, np.array([self.entries()], dtype=np.int64))[0]

    def is_invertible(self) -> bool:
        return modmat.is_invertible(self.block(), self.ring.p)

    def inv(self) -> "Mat2":
        r = self.ring
        try:
            blk = modmat.inv_mod(self.block(), r.p)
        except ValueError:
            raise ValueError("matrix is not invertible") from None
        d = r.rep_dim
        ids = []
        for r0, c0 in ((0, 0), (0, d), (d, 0), (d, d)):
            sub = np.ascontiguousarray(blk[r0 : r0 + d, c0 : c0 + d], dtype=r.rep.dtype)
            ids.append(r.rep_index[sub.tobytes()])
        return Mat2(r, *ids)

    def __eq__(self, other):
        return (
            isinstance(other, Mat2)
            and self.ring is other.ring
            and self.entries() == other.entries()
        )

    def __hash__(self):
        return hash(self.entries())

    def __repr__(self):
        return "Mat2(%d, %d; %d, %d)" % self.entries()


def _blocks_for_rows(ring: FiniteRing, quads: np.ndarray) -> np.ndarray:
    """Stack the representation blocks of (a b; c d) rows into (N, 2d, 2d)."""
    rep, d = ring.rep, ring.rep_dim
    out = np.empty((len(quads), 2 * d, 2 * d), dtype=rep.dtype)
    out[:, :d, :d] = rep[quads[:, 0]]
    out[:, :d, d:] = rep[quads[:, 1]]
    out[:, d:, :d] = rep[quads[:, 2]]
    out[:, d:, d:] = rep[quads[:, 3]]
    return out


def gl2_invertible(m: Mat2) -> bool:
    """Two-sided invertibility over R, via full rank of the represented block."""
    return m.is_invertible()


def is_point(ring: FiniteRing, a: int, b: int, _first: int = 64, _chunk: int = 4096) -> bool:
    """Completion oracle: does some (c, d) make (a b; c d) invertible?

    Exhaustive over all |R|^2 completions, batched; this is the independent
    certificate for the orbit construction of the projective line.
    """
    size = ring.size
    total = size * size
    start, step = 0, _first
    while start < total:
        stop = min(total, start + step)
        ids = np.arange(start, stop, dtype=np.int64)
        quads = np.empty((len(ids), 4), dtype=np.int64)
        quads[:, 0] = a
        quads[:, 1] = b
        quads[:, 2] = ids // size
        quads[:, 3] = ids % size
        blocks = _blocks_for_rows(ring, quads)
        if modmat.invertible_batch(blocks, ring.p).any():
            return True
        start, step = stop, _chunk
    return False


def canonical_pair(ring: FiniteRing, a: int, b: int) -> tuple[int, int]:
    """Lexicographically smallest (ua, ub) over all units u."""
    ua = ring.mul_table[ring.units_arr, a]
    ub = ring.mul_table[ring.units_arr, b]
    keys = ua.astype(np.int64) * ring.size + ub
    i = int(np.argmin(keys))
    return (int(ua[i]), int(ub[i]))


def additive_basis(ring: FiniteRing) -> list[int]:
    """A GF(p)-basis of (R, +), chosen greedily by smallest id."""
    vecs = ring.rep.reshape(ring.size, -1)
    dim = vecs.shape[1]  # rank of the representation space upper bound
    basis: list[int] = []
    rows: list[np.ndarray] = []
    p = ring.p
    inv = modmat.inverse_table(p)
    for e in range(1, ring.size):
        v = vecs[e].astype(np.int64) % p
        for r in rows:
            lead = int(np.argmax(r != 0))
            if v[lead]:
                v = (v - v[lead] * r) % p
        if v.any():
            v = v * int(inv[v[np.argmax(v != 0)]]) % p
            rows.append(v)
            basis.append(e)
        if p ** len(basis) == ring.size:
            break
    if p ** len(basis) != ring.size:
        raise RuntimeError("failed to span the additive group")
    return basis


def unit_group_generators(ring: FiniteRing) -> list[int]:
    """A small generating set of the unit group, greedy by smallest id."""
    target = len(ring.units)
    gens: list[int] = []
    closure = {1}
    for u in ring.units:
        if u in closure:
            continue
        gens.append(u)
        frontier = list(closure | {u})
        closure.add(u)
        while frontier:
            new = []
            for x in frontier:
                for g in gens:
                    y = ring.mul(x, g)
                    if y not in closure:
                        closure.add(y)
                        new.append(y)
                    y = ring.mul(g, x)
                    if y not in closure:
                        closure.add(y)
                        new.append(y)
            frontier = new
        if len(closure) == target:
            break
    return gens


def gl2_generators(ring: FiniteRing) -> list[Mat2]:
    """Elementary transvections over an additive basis plus diagonal units.

    Finite rings have stable rank one, so these generate enough of GL2 to
    sweep out every orbit used here; build_projective_line enforces that
    against the completion oracle instead of trusting the theory.
    """
    xs = additive_basis(ring)
    gens = [Mat2.upper(ring, x) for x in xs]
    gens += [Mat2.lower(ring, x) for x in xs]
    gens += [Mat2.diag(ring, u, 1) for u in unit_group_generators(ring)]
    return gens


def stabilizer_generators(ring: FiniteRing) -> list[Mat2]:
    """Generators of the stabilizer of R(1,0): lower triangular with units."""
    xs = additive_basis(ring)
    gens = [Mat2.lower(ring, x) for x in xs]
    for u in unit_group_generators(ring):
        gens.append(Mat2.diag(ring, u, 1))
        gens.append(Mat2.diag(ring, 1, u))
    return gens


class PLPoint(NamedTuple):
    pair: tuple[int, int]
    index: int


class ProjectiveLine:
    """Canonical points of P(R) with the distant relation stored as bitsets."""

    def __init__(self, ring: FiniteRing, pairs, adj, oracle_checked: bool):
        self.ring = ring
        self.pairs = tuple(pairs)
        self.n = len(self.pairs)
        self.index = {pr: i for i, pr in enumerate(self.pairs)}
        self.adj = tuple(adj)
        self.oracle_checked = oracle_checked
        self._pa = np.array([p[0] for p in self.pairs], dtype=np.int64)
        self._pb = np.array([p[1] for p in self.pairs], dtype=np.int64)

    def point_id(self, a: int, b: int) -> int:
        key = canonical_pair(self.ring, a, b)
        try:
            return self.index[key]
        except KeyError:
            raise ValueError("(%d, %d) is not a point of the line" % (a, b)) from None

    def pair(self, pid: int) -> tuple[int, int]:
        return self.pairs[pid]

    def distant(self, i: int, j: int) -> bool:
        return bool((self.adj[i] >> j) & 1)

    def neighbors(self, i: int) -> int:
        """Bitmask of the points distant from point i."""
        return self.adj[i]

    def degree(self, i: int) -> int:
        return self.adj[i].bit_count()

    def __repr__(self):
        return "ProjectiveLine(%s, %d points)" % (self.ring.name, self.n)


def _distant_bitsets(ring: FiniteRing, pairs) -> list[int]:
    n = len(pairs)
    adj = [0] * n
    if n < 2:
        return adj
    ii, jj = np.triu_indices(n, k=1)
    pa = np.array([p[0] for p in pairs], dtype=np.int64)
    pb = np.array([p[1] for p in pairs], dtype=np.int64)
    quads = np.stack([pa[ii], pb[ii], pa[jj], pb[jj]], axis=1)
    for s in range(0, len(quads), 8192):
        blocks = _blocks_for_rows(ring, quads[s : s + 8192])
        ok = modmat.invertible_batch(blocks, ring.p)
        for t in np.nonzero(ok)[0]:
            i, j = int(ii[s + t]), int(jj[s + t])
            adj[i] |= 1 << j
            adj[j] |= 1 << i
    return adj


def oracle_point_set(ring: FiniteRing) -> set[tuple[int, int]]:
    """Canonical pairs of all points found by the completion oracle.

    Same exhaustive search as is_point on every (a, b), but batched: a
    strided sample of completions settles the completable pairs cheaply,
    and only the remainder pays for the full sweep over R^2.
    """
    size = ring.size
    total = size * size
    prefix = np.unique(np.arange(64, dtype=np.int64) * max(1, total // 64) % total)
    admissible = np.zeros(total, dtype=bool)
    quads = np.empty((len(prefix) * size, 4), dtype=np.int64)
    for a in range(size):
        quads[:, 0] = a
        quads[:, 1] = np.repeat(np.arange(size), len(prefix))
        quads[:, 2] = np.tile(prefix // size, size)
        quads[:, 3] = np.tile(prefix % size, size)
        ok = modmat.invertible_batch(_blocks_for_rows(ring, quads), ring.p)
        admissible[a * size : (a + 1) * size] = ok.reshape(size, len(prefix)).any(axis=1)
    pending = np.nonzero(~admissible)[0]
    for s in range(0, total, 1024):
        if pending.size == 0:
            break
        cand = np.arange(s, min(total, s + 1024), dtype=np.int64)
        quads = np.empty((len(pending) * len(cand), 4), dtype=np.int64)
        quads[:, 0] = np.repeat(pending // size, len(cand))
        quads[:, 1] = np.repeat(pending % size, len(cand))
        quads[:, 2] = np.tile(cand // size, len(pending))
        quads[:, 3] = np.tile(cand % size, len(pending))
        ok = modmat.invertible_batch(_blocks_for_rows(ring, quads), ring.p)
        hit = ok.reshape(len(pending), len(cand)).any(axis=1)
        admissible[pending[hit]] = True
        pending = pending[~hit]
    return {
        canonical_pair(ring, int(ab // size), int(ab % size))
        for ab in np.nonzero(admissible)[0]
    }


def build_projective_line(ring: FiniteRing, crosscheck: bool | None = None) -> ProjectiveLine:
    """Orbit of R(1,0) under the generator set, as canonical sorted pairs.

    For rings of at most 256 elements (or when forced) the point set is
    compared with the completion oracle over all |R|^2 pairs; a mismatch
    aborts, since it would mean the generator set misses part of GL2.
    """
    gens = gl2_generators(ring)
    addT, mulT = ring.add_table, ring.mul_table
    start = canonical_pair(ring, 1, 0)
    seen = {start}
    frontier = [start]
    while frontier:
        new = []
        for x, y in frontier:
            for g in gens:
                im = canonical_pair(
                    ring,
                    int(addT[mulT[x, g.a], mulT[y, g.c]]),
                    int(addT[mulT[x, g.b], mulT[y, g.d]]),
                )
                if im not in seen:
                    seen.add(im)
                    new.append(im)
        frontier = new
    if crosscheck is None:
        crosscheck = ring.size <= 256
    if crosscheck and oracle_point_set(ring) != seen:
        raise RuntimeError(
            "orbit of R(1,0) disagrees with the completion oracle; "
            "the GL2 generator set is insufficient"
        )
    pairs = sorted(seen)
    return ProjectiveLine(ring, pairs, _distant_bitsets(ring, pairs), crosscheck)


def canonical_point(line: ProjectiveLine, a: int, b: int) -> PLPoint:
    """Canonical representative and id of R(a,b); errors on non-points."""
    pid = line.point_id(a, b)
    return PLPoint(line.pairs[pid], pid)


def distant(line: ProjectiveLine, p: int, q: int) -> bool:
    return line.distant(p, q)


def act(line: ProjectiveLine, pid: int, m: Mat2) -> int:
    """Image point id of a point under an invertible matrix."""
    x, y = m.apply(*line.pairs[pid])
    key = canonical_pair(line.ring, x, y)
    try:
        return line.index[key]
    except KeyError:
        raise ValueError("matrix does not map the line to itself (not invertible?)") from None


def act_permutation(line: ProjectiveLine, m: Mat2) -> np.ndarray:
    """The induced permutation of point ids, as an int array."""
    r = line.ring
    va = r.add_table[r.mul_table[line._pa, m.a], r.mul_table[line._pb, m.c]]
    vb = r.add_table[r.mul_table[line._pa, m.b], r.mul_table[line._pb, m.d]]
    U = r.units_arr
    ua = r.mul_table[U[None, :], va[:, None]].astype(np.int64)
    ub = r.mul_table[U[None, :], vb[:, None]].astype(np.int64)
    keys = ua * r.size + ub
    j = np.argmin(keys, axis=1)
    rows = np.arange(line.n)
    perm = np.array(
        [line.index[(int(x), int(y))] for x, y in zip(ua[rows, j], ub[rows, j])],
        dtype=np.int64,
    )
    if len(set(perm.tolist())) != line.n:
        raise ValueError("matrix does not induce a permutation of the line")
    return perm


def transitivity_witness(line: ProjectiveLine, p: int, q: int, r: int) -> Mat2:
    """A matrix mapping R(1,0), R(0,1), R(1,1) to the given distant triple.

    Stack representatives of p and q into an invertible matrix M, pull the
    representative of r back through M^(-1) to a pair of units (x, y), and
    rescale the rows of M by x and y.
    """
    for i, j in ((p, q), (p, r), (q, r)):
        if not line.distant(i, j):
            raise ValueError("points %d, %d are not distant" % (i, j))
    ring = line.ring
    a, b = line.pairs[p]
    c, d = line.pairs[q]
    e, f = line.pairs[r]
    m = Mat2(ring, a, b, c, d)
    x, y = m.inv().apply(e, f)
    if not (ring.is_unit(x) and ring.is_unit(y)):
        raise RuntimeError("witness coefficients are not units despite distant inputs")
    w = Mat2(
        ring,
        ring.mul(x, a), ring.mul(x, b),
        ring.mul(y, c), ring.mul(y, d),
    )
    if (
        act(line, line.point_id(1, 0), w) != p
        or act(line, line.point_id(0, 1), w) != q
        or act(line, line.point_id(1, 1), w) != r
    ):
        raise RuntimeError("constructed witness fails to map the standard triple")
    return w


def group_closure(ring: FiniteRing, gens: list[Mat2], max_size: int = 5_000_000) -> np.ndarray:
    """All products of the generators: the generated subgroup of GL2.

    Returns an (M, 4) array of entry ids.  Forward closure suffices because
    the generated group is finite.
    """
    mulT = ring.mul_table.astype(np.int64)
    addT = ring.add_table.astype(np.int64)
    size = ring.size

    def keys(rows):
        return ((rows[:, 0] * size + rows[:, 1]) * size + rows[:, 2]) * size + rows[:, 3]

    gen_rows = np.array([g.entries() for g in gens], dtype=np.int64)
    ident = np.array([[1, 0, 0, 1]], dtype=np.int64)
    seen = set(keys(ident).tolist())
    out = [ident]
    frontier = ident
    while len(frontier):
        prods = []
        for g in gen_rows:
            fa, fb, fc, fd = frontier.T
            prods.append(
                np.stack(
                    [
                        addT[mulT[fa, g[0]], mulT[fb, g[2]]],
                        addT[mulT[fa, g[1]], mulT[fb, g[3]]],
                        addT[mulT[fc, g[0]], mulT[fd, g[2]]],
                        addT[mulT[fc, g[1]], mulT[fd, g[3]]],
                    ],
                    axis=1,
                )
            )
        allp = np.concatenate(prods)
        ks = keys(allp)
        _, first = np.unique(ks, return_index=True)
        fresh = [i for i in first if int(ks[i]) not in seen]
        frontier = allp[fresh]
        for i in fresh:
            seen.add(int(ks[i]))
        if frontier.size:
            out.append(frontier)
        if len(seen) > max_size:
            raise RuntimeError("group closure exceeded %d elements" % max_size)
    return np.concatenate(out)
