"""Residues, compatibility of chains at a point, and affine-space models.

The residue at infinity identifies the points distant from R(1,0) with the
ring itself; blocks are the chains through infinity with infinity removed.
Two blocks are compatible when the unique affine map x -> x*a + c matching
two chosen points of one to two of the other carries the whole block over.
Each compatibility class, against the matching conjugate-subfield affine
space, is a partial affine space whose surviving lines are exactly the
unit-direction ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import FiniteRing, SubfieldEmbedding
from .chains import ChainGeometry, Chain
from .projline import Mat2, act, act_permutation, stabilizer_generators


@dataclass(frozen=True)
class Residue:
    """Blocks through a base point, identified with subsets of the ring."""

    base: int
    points: tuple[int, ...]
    to_ring: dict
    blocks_points: tuple[frozenset, ...]
    blocks_ring: tuple[frozenset, ...]
    classes: tuple[tuple[int, ...], ...]  # indices into the block lists
    class_units: tuple[int, ...]  # coset representative per class
    class_reps: tuple[frozenset, ...]  # the class block through 0 and 1

    @property
    def n_points(self) -> int:
        return len(self.points)

    def class_blocks_ring(self, i: int) -> tuple[frozenset, ...]:
        return tuple(self.blocks_ring[j] for j in self.classes[i])


def _affine_map(ring: FiniteRing, p: int, q: int, p2: int, q2: int) -> tuple[int, int]:
    """The unique (a, c), a a unit, with p*a + c = p2 and q*a + c = q2."""
    diff = ring.sub(p, q)
    if not ring.is_unit(diff):
        raise ValueError("base points are not distant")
    a = ring.mul(ring.inverse(diff), ring.sub(p2, q2))
    if not ring.is_unit(a):
        raise ValueError("target points are not distant")
    c = ring.sub(p2, ring.mul(p, a))
    if ring.add(ring.mul(q, a), c) != q2:
        raise RuntimeError("affine map construction failed")
    return a, c


def _block_image(ring: FiniteRing, block: frozenset, a: int, c: int) -> frozenset:
    arr = np.fromiter(block, dtype=np.int64)
    return frozenset(
        int(x) for x in ring.add_table[ring.mul_table[arr, a], c]
    )


def _blocks_compatible(ring: FiniteRing, b1: frozenset, b2: frozenset) -> bool:
    p, q = sorted(b1)[:2]
    p2, q2 = sorted(b2)[:2]
    a, c = _affine_map(ring, p, q, p2, q2)
    return _block_image(ring, b1, a, c) == b2


def compatible_at_infinity(g: ChainGeometry, chain1, chain2) -> bool:
    """Compatibility of two chains through infinity.

    Picks two points of each chain, builds the unique x -> x*a + c matching
    them, and asks whether it maps one chain onto the other.  By sharp
    2-transitivity of that map family the answer does not depend on the
    choice of points.
    """
    b1 = g.chain_to_ring(chain1)
    b2 = g.chain_to_ring(chain2)
    return _blocks_compatible(g.ring, b1, b2)


def residue_at_infinity(g: ChainGeometry) -> Residue:
    """Points distant from infinity with the chains through it as blocks.

    Blocks are enumerated as the orbit of the standard chain under the
    stabilizer of infinity, partitioned into compatibility classes via the
    unique representative through 0 and 1.
    """
    if g._residue_inf is not None:
        return g._residue_inf
    line = g.line
    ring = g.ring
    perms = [act_permutation(line, m) for m in stabilizer_generators(ring)]
    start = g.standard
    seen = {start}
    frontier = [start]
    while frontier:
        new = []
        for chain in frontier:
            base = np.array(chain)
            for perm in perms:
                im = tuple(sorted(int(x) for x in perm[base]))
                if im not in seen:
                    seen.add(im)
                    new.append(im)
        frontier = new

    chains_inf = sorted(seen)
    to_ring = {}
    pts = []
    mask = line.neighbors(g.infinity)
    while mask:
        pid = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        pts.append(pid)
        to_ring[pid] = g.point_to_ring(pid)
    blocks_points = []
    blocks_ring = []
    for chain in chains_inf:
        if g.infinity not in chain:
            raise RuntimeError("stabilizer orbit left the chains through infinity")
        bp = frozenset(pt for pt in chain if pt != g.infinity)
        blocks_points.append(bp)
        blocks_ring.append(frozenset(to_ring[pt] for pt in bp))
    order = sorted(range(len(blocks_ring)), key=lambda i: sorted(blocks_ring[i]))
    blocks_points = tuple(blocks_points[i] for i in order)
    blocks_ring = tuple(blocks_ring[i] for i in order)

    # canonical representative of each block: its image through (0, 1)
    rep_of = []
    block_set = set(blocks_ring)
    for b in blocks_ring:
        p, q = sorted(b)[:2]
        a, c = _affine_map(ring, p, q, 0, 1)
        rep = _block_image(ring, b, a, c)
        if rep not in block_set or not {0, 1} <= rep:
            raise RuntimeError("canonical representative is not a block")
        rep_of.append(rep)
    reps = sorted(set(rep_of), key=sorted)
    classes = tuple(
        tuple(i for i, r in enumerate(rep_of) if r == rep) for rep in reps
    )
    class_units = []
    for rep in reps:
        u_match = [u for u in g.transversal if ring.conjugate_set(g.emb.image, u) == rep]
        if len(u_match) != 1:
            raise RuntimeError("class representative is not a conjugate of the subfield")
        class_units.append(u_match[0])
    _check_partition_consistency(ring, blocks_ring, classes, reps)

    res = Residue(
        base=g.infinity,
        points=tuple(pts),
        to_ring=to_ring,
        blocks_points=blocks_points,
        blocks_ring=blocks_ring,
        classes=classes,
        class_units=tuple(class_units),
        class_reps=tuple(reps),
    )
    g._residue_inf = res
    return res


def _check_partition_consistency(ring, blocks_ring, classes, reps):
    # compatibility must be an equivalence relation: verify pairwise inside
    # classes and between the class representatives (cheap at desk scale)
    if len(blocks_ring) > 400:
        return
    for cls in classes:
        for i in cls:
            for j in cls:
                if i < j and not _blocks_compatible(ring, blocks_ring[i], blocks_ring[j]):
                    raise RuntimeError("compatibility is not transitive within a class")
    for i, r1 in enumerate(reps):
        for r2 in reps[i + 1 :]:
            if _blocks_compatible(ring, r1, r2):
                raise RuntimeError("distinct classes have compatible representatives")


def compatibility_classes(res: Residue) -> tuple[tuple[frozenset, ...], ...]:
    """The partition of the blocks, one tuple of ring-id blocks per class."""
    return tuple(res.class_blocks_ring(i) for i in range(len(res.classes)))


def residue_at(g: ChainGeometry, pid: int, witness: Mat2 | None = None) -> Residue:
    """The residue at an arbitrary point, transported from infinity.

    The witness maps infinity to the point; any choice yields the same
    partition because the affine stabilizer is normal in the full one.
    """
    if pid == g.infinity and witness is None:
        return residue_at_infinity(g)
    line = g.line
    res_inf = residue_at_infinity(g)
    if witness is None:
        mask = line.neighbors(pid)
        q = (mask & -mask).bit_length() - 1
        pa, pb = line.pairs[pid]
        qa, qb = line.pairs[q]
        witness = Mat2(g.ring, pa, pb, qa, qb)
    if act(line, g.infinity, witness) != pid:
        raise ValueError("witness does not map infinity to the point")
    perm = act_permutation(line, witness)
    inv_perm = np.zeros(line.n, dtype=np.int64)
    inv_perm[perm] = np.arange(line.n)
    pts = []
    mask = line.neighbors(pid)
    while mask:
        t = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        pts.append(t)
    to_ring = {t: res_inf.to_ring[int(inv_perm[t])] for t in pts}
    blocks_points = tuple(
        frozenset(int(perm[pt]) for pt in b) for b in res_inf.blocks_points
    )
    return Residue(
        base=pid,
        points=tuple(pts),
        to_ring=to_ring,
        blocks_points=blocks_points,
        blocks_ring=res_inf.blocks_ring,
        classes=res_inf.classes,
        class_units=res_inf.class_units,
        class_reps=res_inf.class_reps,
    )


def double_compatibility(g: ChainGeometry, a: int) -> bool:
    """Is the chain scaled by diag(a, 1) compatible with the standard one at
    both infinity and zero?  Holds exactly for a in the normalizer."""
    ring = g.ring
    if not ring.is_unit(a):
        raise ValueError("element %d is not a unit" % a)
    scaled = g.apply_to_chain(g.standard, Mat2.diag(ring, a, 1))
    at_inf = compatible_at_infinity(g, g.standard, scaled)
    swap = Mat2.swap(ring)
    at_zero = compatible_at_infinity(
        g,
        g.apply_to_chain(g.standard, swap),
        g.apply_to_chain(scaled, swap),
    )
    return at_inf and at_zero


class AffineSpaceModel:
    """Point set with lines L*x + y over a subfield L, in parallel classes.

    `unit_class_ids` marks the classes whose direction is L*x for a unit x;
    residue classes must realize exactly those.  Models built from plain
    line data (no ring) leave it as None and skip that criterion.
    """

    def __init__(self, points, classes, unit_class_ids=None, scalars=None, ring=None):
        self.points = tuple(sorted(points))
        self.classes = tuple(tuple(sorted(cls, key=sorted)) for cls in classes)
        self.lines = frozenset(l for cls in self.classes for l in cls)
        self.unit_class_ids = (
            frozenset(unit_class_ids) if unit_class_ids is not None else None
        )
        self.scalars = frozenset(scalars) if scalars is not None else None
        self.ring = ring
        pset = set(self.points)
        sizes = {len(l) for l in self.lines}
        if len(sizes) > 1:
            raise ValueError("lines of mixed sizes")
        for cls in self.classes:
            covered: set = set()
            for l in cls:
                if covered & l:
                    raise ValueError("parallel class with overlapping lines")
                covered |= l
            if covered != pset:
                raise ValueError("parallel class does not cover the points")

    @property
    def line_size(self) -> int:
        return len(next(iter(self.lines)))

    def class_of(self, line: frozenset) -> int:
        for i, cls in enumerate(self.classes):
            if line in cls:
                return i
        raise ValueError("not a line of the model")


def _subfield_check(ring: FiniteRing, elems: frozenset):
    if not {0, 1} <= elems:
        raise ValueError("scalar set must contain 0 and 1")
    arr = np.array(sorted(elems), dtype=np.int64)
    prods = frozenset(int(x) for x in ring.mul_table[arr[:, None], arr[None, :]].ravel())
    if not prods <= elems:
        raise ValueError("scalar set is not multiplicatively closed")
    sums = frozenset(int(x) for x in ring.add_table[arr[:, None], arr[None, :]].ravel())
    if not sums <= elems:
        raise ValueError("scalar set is not additively closed")
    for x in elems:
        if x and (not ring.is_unit(x) or ring.inverse(x) not in elems):
            raise ValueError("scalar set is not a subfield")


def affine_space(scalars, ring: FiniteRing, points=None) -> AffineSpaceModel:
    """The affine space A(L, V): lines {l*x + y : l in L} on the point set V.

    V defaults to the whole ring; any additively closed subset with
    L*V <= V works (the embedded subfield itself, for trace spaces).
    Parallel classes are keyed by the direction subgroup L*x, so the
    grouping is independent of the chosen direction vector.
    """
    L = frozenset(int(x) for x in scalars)
    _subfield_check(ring, L)
    pts = tuple(sorted(points)) if points is not None else tuple(range(ring.size))
    pset = frozenset(pts)
    Ls = np.array(sorted(L), dtype=np.int64)
    directions: dict[frozenset, bool] = {}
    for x in pts:
        if x == 0:
            continue
        d = frozenset(int(v) for v in ring.mul_table[Ls, x])
        is_unit_dir = ring.is_unit(x)
        if d in directions:
            if directions[d] != is_unit_dir:
                raise RuntimeError("direction arises from both unit and non-unit")
        else:
            directions[d] = is_unit_dir
    classes = []
    unit_ids = []
    for i, d in enumerate(sorted(directions, key=sorted)):
        darr = np.array(sorted(d), dtype=np.int64)
        covered: set[int] = set()
        lines = []
        for y in pts:
            if y in covered:
                continue
            line = frozenset(int(v) for v in ring.add_table[darr, y])
            if not line <= pset:
                raise ValueError("points are not closed under the line translations")
            lines.append(line)
            covered |= line
        classes.append(lines)
        if directions[d]:
            unit_ids.append(i)
    return AffineSpaceModel(pts, classes, unit_ids, scalars=L, ring=ring)


def partial_affine_check(blocks, model: AffineSpaceModel) -> bool:
    """Do the blocks form the model minus whole parallel classes?

    Three conditions: every block is a line; classes are all-in or all-out;
    and, when the model marks unit directions, the surviving classes are
    exactly those.
    """
    bset = {frozenset(b) for b in blocks}
    if not bset <= model.lines:
        return False
    present = [i for i, cls in enumerate(model.classes) if any(l in bset for l in cls)]
    for i in present:
        if not all(l in bset for l in model.classes[i]):
            return False
    if model.unit_class_ids is not None:
        return set(present) == set(model.unit_class_ids)
    return True


def missing_parallel_classes(blocks, model: AffineSpaceModel) -> int:
    """How many parallel classes of the model contribute no block."""
    bset = {frozenset(b) for b in blocks}
    present = sum(1 for cls in model.classes if any(l in bset for l in cls))
    return len(model.classes) - present


@dataclass(frozen=True)
class TraceSpace:
    """Incidence structure induced on a block by the lines of a model."""

    points: tuple[int, ...]
    blocks: tuple[frozenset, ...]


def trace_space(block, model: AffineSpaceModel) -> TraceSpace:
    """Intersections of the model's lines with the block, kept if >= 2 points."""
    b = frozenset(block)
    traces = {b & l for l in model.lines}
    blocks = tuple(sorted((t for t in traces if len(t) >= 2), key=sorted))
    return TraceSpace(points=tuple(sorted(b)), blocks=blocks)


def verify_trace_isomorphism(e: SubfieldEmbedding, u: int, a: int = 1) -> bool:
    """Check k -> u^(-1) k u a against the trace geometry, both directions.

    The block is the line (u^(-1) K u) * a through 0 of the conjugated
    model; the trace induced on it by A(K, R) must be carried onto the
    affine space over K with scalars K meet u K u^(-1), exhaustively.
    """
    ring = e.ring
    if not (ring.is_unit(u) and ring.is_unit(a)):
        raise ValueError("u and a must be units")
    K = e.image
    Lu = ring.conjugate_set(K, u)
    model_u = affine_space(Lu, ring)
    block = frozenset(ring.mul(x, a) for x in Lu)
    if block not in model_u.lines:
        raise ValueError("block is not a line of the conjugated model")
    trace = trace_space(block, affine_space(K, ring))
    F_u = K & ring.conjugate_set(K, ring.inverse(u))  # K meet u K u^(-1)
    inner = affine_space(F_u, ring, points=sorted(K))
    iota = {k: ring.mul(ring.conjugate(k, u), a) for k in K}
    if sorted(iota.values()) != list(trace.points):
        return False
    mapped = {frozenset(iota[x] for x in line) for line in inner.lines}
    return mapped == set(trace.blocks)


def class_models(g: ChainGeometry) -> tuple[AffineSpaceModel, ...]:
    """One affine model per compatibility class: A(u^(-1) K u, R)."""
    res = residue_at_infinity(g)
    return tuple(
        affine_space(g.ring.conjugate_set(g.emb.image, u), g.ring)
        for u in res.class_units
    )


def cs3_provider(g: ChainGeometry):
    """Provider for the residue axiom: blocks over the ring plus candidate models."""
    models = class_models(g)

    def provide(pid: int):
        res = residue_at(g, pid)
        return res.blocks_ring, models

    return provide
