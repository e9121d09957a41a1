"""Generic incidence-structure checks: the three chain-space axioms.

A structure is a point count plus a list of blocks.  Two points are
distant when they are different and lie on a common block; the axioms ask
that every point is covered and blocks have three or more points (CS1),
that every pairwise-distant triple lies on exactly one block (CS2), and
that every residue is a partial affine space (CS3, checked constructively
against caller-supplied candidate models).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .residue import partial_affine_check


@dataclass(frozen=True)
class IncidenceStructure:
    num_points: int
    blocks: tuple[tuple[int, ...], ...]


def structure(num_points: int, blocks) -> IncidenceStructure:
    """Validate and normalize a structure: sorted, deduplicated blocks."""
    norm = set()
    for b in blocks:
        tb = tuple(sorted(set(int(x) for x in b)))
        if tb and not (0 <= tb[0] and tb[-1] < num_points):
            raise ValueError("block contains an out-of-range point id")
        norm.add(tb)
    return IncidenceStructure(int(num_points), tuple(sorted(norm)))


def structure_from_json(text_or_dict) -> IncidenceStructure:
    """Parse {"points": n, "blocks": [[...], ...]}."""
    data = json.loads(text_or_dict) if isinstance(text_or_dict, str) else text_or_dict
    try:
        return structure(data["points"], data["blocks"])
    except (KeyError, TypeError) as exc:
        raise ValueError("expected keys 'points' and 'blocks'") from exc


def structure_to_json(s: IncidenceStructure) -> str:
    return json.dumps(
        {"points": s.num_points, "blocks": [list(b) for b in s.blocks]},
        sort_keys=True,
    )


def adjacency(s: IncidenceStructure) -> list[int]:
    """Derived distant relation as bitmasks: joined by a block and different."""
    adj = [0] * s.num_points
    for b in s.blocks:
        for i in b:
            for j in b:
                if i != j:
                    adj[i] |= 1 << j
    return adj


def distant_pairs(s: IncidenceStructure) -> frozenset[tuple[int, int]]:
    adj = adjacency(s)
    out = set()
    for i in range(s.num_points):
        mask = adj[i] >> (i + 1) << (i + 1)
        while mask:
            j = (mask & -mask).bit_length() - 1
            mask &= mask - 1
            out.add((i, j))
    return frozenset(out)


def check_cs1(s: IncidenceStructure) -> bool:
    """Every point on a block, every block with at least three points."""
    covered = set()
    for b in s.blocks:
        if len(b) < 3:
            return False
        covered.update(b)
    return covered == set(range(s.num_points))


def check_cs2(s: IncidenceStructure, triple_cap: int = 2_000_000) -> tuple[bool, bool]:
    """(existence, uniqueness) of a block through each pairwise-distant triple."""
    adj = adjacency(s)
    pair_blocks: dict[tuple[int, int], list[int]] = {}
    block_sets = [frozenset(b) for b in s.blocks]
    for bi, b in enumerate(s.blocks):
        for x in range(len(b)):
            for y in range(x + 1, len(b)):
                pair_blocks.setdefault((b[x], b[y]), []).append(bi)
    n_triples = 0
    for i in range(s.num_points):
        j_mask = adj[i] >> (i + 1) << (i + 1)
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask &= j_mask - 1
            common = (adj[i] & adj[j]) >> (j + 1) << (j + 1)
            n_triples += common.bit_count()
    if n_triples > triple_cap:
        raise ValueError("%d distant triples exceed the cap %d" % (n_triples, triple_cap))
    existence = True
    uniqueness = True
    for i in range(s.num_points):
        mask_j = adj[i] >> (i + 1) << (i + 1)
        while mask_j:
            j = (mask_j & -mask_j).bit_length() - 1
            mask_j &= mask_j - 1
            through_ij = pair_blocks.get((i, j), [])
            mask_r = (adj[i] & adj[j]) >> (j + 1) << (j + 1)
            while mask_r:
                r = (mask_r & -mask_r).bit_length() - 1
                mask_r &= mask_r - 1
                cnt = sum(1 for bi in through_ij if r in block_sets[bi])
                if cnt == 0:
                    existence = False
                elif cnt > 1:
                    uniqueness = False
                if not existence and not uniqueness:
                    return (False, False)
    return (existence, uniqueness)


def check_cs3(s: IncidenceStructure, residue_provider) -> bool:
    """Every residue is a partial affine space in some supplied model.

    The provider maps a point id to (blocks, candidate models), with the
    blocks already written over the model's point universe.  Without a
    provider the question is a recognition problem out of scope here, so
    it is an error rather than a silent true/false.
    """
    if residue_provider is None:
        raise ValueError("no affine model proposed; cannot decide CS3")
    for p in range(s.num_points):
        blocks, models = residue_provider(p)
        if not any(partial_affine_check(blocks, m) for m in models):
            return False
    return True


def is_chain_space_axiomatic(
    s: IncidenceStructure, residue_provider, triple_cap: int = 2_000_000
) -> bool:
    """CS1 and both halves of CS2 and CS3, checked directly."""
    if not check_cs1(s):
        return False
    exist, unique = check_cs2(s, triple_cap)
    if not (exist and unique):
        return False
    return check_cs3(s, residue_provider)


def from_chain_geometry(g, cap: int = 100_000) -> IncidenceStructure:
    """The chain geometry as a bare incidence structure."""
    from .chains import all_chains

    return structure(g.line.n, all_chains(g, cap))
