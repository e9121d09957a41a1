"""Chain geometries over a ring with a distinguished subfield.

A chain is stored extensionally as a sorted tuple of point ids.  The
standard chain is the embedded projective line over the subfield; its
GL2 orbit is the chain set.  The number of chains through a fixed
pairwise-distant triple equals the number of right cosets of the
normalizer of the subfield's unit group, which drives every uniqueness
criterion here.
"""

from __future__ import annotations

import numpy as np

from .algebra import (
    FiniteRing,
    SubfieldEmbedding,
    coset_transversal,
    normalizer,
)
from .projline import (
    Mat2,
    ProjectiveLine,
    act,
    act_permutation,
    build_projective_line,
    transitivity_witness,
)

Chain = tuple  # sorted tuple of point ids


class ChainGeometry:
    """Projective line over R together with the chain orbit data for K.

    Immutable after construction; the full chain set and the residue at
    infinity are built lazily and cached.
    """

    def __init__(
        self,
        emb: SubfieldEmbedding,
        line: ProjectiveLine | None = None,
        crosscheck: bool | None = None,
    ):
        self.emb = emb
        self.ring: FiniteRing = emb.ring
        self.subfield = emb.field
        self.line = line if line is not None else build_projective_line(self.ring, crosscheck)
        if self.line.ring is not self.ring:
            raise ValueError("line was built over a different ring")
        self.infinity = self.line.point_id(1, 0)
        self.zero = self.line.point_id(0, 1)
        self.one = self.line.point_id(1, 1)
        pts = {self.infinity}
        for k in emb.image_sorted:
            pts.add(self.line.point_id(k, 1))
        self.standard: Chain = tuple(sorted(pts))
        if len(self.standard) != emb.field.q + 1:
            raise RuntimeError("standard chain has the wrong size")
        self.norm = normalizer(emb)
        self.norm_set = frozenset(self.norm.elements)
        self.transversal = coset_transversal(self.ring, self.norm.elements)
        self._std_fan: tuple[Chain, ...] | None = None
        self._all_chains: tuple[Chain, ...] | None = None
        self._residue_inf = None  # filled by residue.residue_at_infinity

    def point_to_ring(self, pid: int) -> int:
        """Identify a point distant from infinity with a ring element."""
        a, b = self.line.pairs[pid]
        if not self.ring.is_unit(b):
            raise ValueError("point %d is not distant from infinity" % pid)
        return self.ring.mul(self.ring.inverse(b), a)

    def ring_to_point(self, x: int) -> int:
        return self.line.point_id(x, 1)

    def chain_to_ring(self, chain) -> frozenset[int]:
        """Drop infinity from a chain through it and read off ring elements."""
        if self.infinity not in chain:
            raise ValueError("chain does not pass through infinity")
        return frozenset(self.point_to_ring(pt) for pt in chain if pt != self.infinity)

    def apply_to_chain(self, chain, m: Mat2) -> Chain:
        return tuple(sorted(act(self.line, pt, m) for pt in chain))

    def __repr__(self):
        return "ChainGeometry(K=%r, R=%s)" % (self.subfield, self.ring.name)


def standard_chain(g: ChainGeometry) -> Chain:
    """The embedded projective line over the subfield."""
    return g.standard


def chains_through_standard_triple(g: ChainGeometry) -> tuple[Chain, ...]:
    """Images of the standard chain under diag(u, u), u over coset reps.

    Distinct coset representatives give distinct chains; the count is the
    index of the normalizer in the unit group.
    """
    if g._std_fan is None:
        fan = []
        for u in g.transversal:
            fan.append(g.apply_to_chain(g.standard, Mat2.diag(g.ring, u, u)))
        if len(set(fan)) != len(fan):
            raise RuntimeError("distinct cosets produced equal chains")
        for ch in fan:
            if not {g.infinity, g.zero, g.one} <= set(ch):
                raise RuntimeError("fan chain misses a standard point")
        g._std_fan = tuple(sorted(fan))
    return g._std_fan


def chains_through_triple(g: ChainGeometry, p: int, q: int, r: int) -> tuple[Chain, ...]:
    """All chains through a pairwise-distant triple, via a witness matrix."""
    w = transitivity_witness(g.line, p, q, r)
    return tuple(sorted(g.apply_to_chain(ch, w) for ch in chains_through_standard_triple(g)))


def all_chains(g: ChainGeometry, cap: int = 100_000) -> tuple[Chain, ...]:
    """The full chain set: orbit of the standard chain under the generators."""
    if g._all_chains is None:
        from .projline import gl2_generators

        perms = [act_permutation(g.line, m) for m in gl2_generators(g.ring)]
        start = g.standard
        seen = {start}
        frontier = [start]
        while frontier:
            new = []
            for ch in frontier:
                base = np.array(ch)
                for perm in perms:
                    im = tuple(sorted(int(x) for x in perm[base]))
                    if im not in seen:
                        seen.add(im)
                        new.append(im)
                        if len(seen) > cap:
                            raise ValueError("chain orbit exceeded the cap %d" % cap)
            frontier = new
        g._all_chains = tuple(sorted(seen))
    return g._all_chains


def triple_intersection(g: ChainGeometry, p: int, q: int, r: int) -> frozenset[int]:
    """Common points of all chains through a pairwise-distant triple."""
    fan = chains_through_triple(g, p, q, r)
    out = set(fan[0])
    for ch in fan[1:]:
        out &= set(ch)
    return frozenset(out)


def is_chain_space(g: ChainGeometry) -> bool:
    """Uniqueness of the chain through a triple, by normality of K* in R*."""
    return g.norm.normal_in_units


def is_sharply_3_transitive(g: ChainGeometry) -> bool:
    """Whether the induced action is sharply transitive on distant triples.

    Equivalent to the unit group lying in the center; the direct stabilizer
    test below must agree.
    """
    return frozenset(g.ring.units) <= frozenset(g.ring.center)


def triple_stabilizer_acts_trivially(g: ChainGeometry) -> bool:
    """Direct test: every diag(a, a), a a unit, fixes the line pointwise."""
    ident = np.arange(g.line.n)
    for u in g.ring.units:
        perm = act_permutation(g.line, Mat2.diag(g.ring, u, u))
        if not (perm == ident).all():
            return False
    return True


def maximal_distant_cliques(g: ChainGeometry, cap: int = 500) -> tuple[tuple[int, ...], ...]:
    """All maximal cliques of the distant graph (Bron-Kerbosch with pivot)."""
    line = g.line
    if line.n > cap:
        raise ValueError("line has %d points, exceeding the clique cap %d" % (line.n, cap))
    adj = line.adj
    out: list[int] = []

    def expand(r_bits: int, p_bits: int, x_bits: int):
        if p_bits == 0 and x_bits == 0:
            out.append(r_bits)
            return
        pool = p_bits | x_bits
        pivot, best = -1, -1
        probe = pool
        while probe:
            v = (probe & -probe).bit_length() - 1
            probe &= probe - 1
            score = (p_bits & adj[v]).bit_count()
            if score > best:
                pivot, best = v, score
        cand = p_bits & ~adj[pivot]
        while cand:
            v = (cand & -cand).bit_length() - 1
            vbit = 1 << v
            cand &= cand - 1
            expand(r_bits | vbit, p_bits & adj[v], x_bits & adj[v])
            p_bits &= ~vbit
            x_bits |= vbit

    expand(0, (1 << line.n) - 1, 0)
    cliques = []
    for bits in out:
        ids = []
        while bits:
            v = (bits & -bits).bit_length() - 1
            ids.append(v)
            bits &= bits - 1
        cliques.append(tuple(ids))
    return tuple(sorted(cliques))
