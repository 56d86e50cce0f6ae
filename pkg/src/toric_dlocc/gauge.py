"""The abelian gauge group generated by star operators and its subgroups.

A group element is a product of stars. Because the product of all ``L^2``
stars is the identity, the last vertex's star is dropped and an element is
identified by a ``generator_mask`` over the remaining ``L^2 - 1`` stars. Its
``edge_mask`` lists the spins it flips, which are exactly the edges with one
endpoint inside the chosen star set.

For a bipartition ``A | B`` the subgroups ``G_A`` and ``G_B`` are computed
exactly: an element is supported in ``A`` iff its star set is a union of
connected components of the graph whose edges are ``B``. This contains the
group generated by the stars interior to ``A`` but can be strictly larger
(the ring of edges around two adjacent stars already supports one such
element without containing a full star).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree

from .errors import CapacityError
from .lattice import Bipartition, TorusLattice, edges_from_mask, mask_from_edges

MAX_ENUMERATION_L = 4


@dataclass(frozen=True)
class GroupElement:
    generator_mask: int
    edge_mask: int

    @property
    def loop_length(self) -> int:
        return int(self.edge_mask).bit_count()

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.generator_mask ^ other.generator_mask, self.edge_mask ^ other.edge_mask)


def num_generators(lat: TorusLattice) -> int:
    return lat.num_vertices - 1


def group_order(lat: TorusLattice) -> int:
    return 1 << num_generators(lat)


def _check_capacity(lat: TorusLattice) -> None:
    if lat.L > MAX_ENUMERATION_L:
        raise CapacityError(
            f"enumerating 2^{num_generators(lat)} gauge-group elements (L={lat.L}) is not supported; "
            f"exact enumeration is limited to L <= {MAX_ENUMERATION_L}, use the closed-form "
            "large/small-lambda expressions instead"
        )


def element_from_stars(lat: TorusLattice, stars: Sequence[int]) -> GroupElement:
    """Product of the given stars, expressed in the reduced generator basis."""
    gen = 0
    for s in stars:
        gen ^= 1 << int(s)
    dropped = 1 << num_generators(lat)
    if gen & dropped:
        gen = (~gen) & (dropped - 1)
    return element_from_generator_mask(lat, gen)


def element_from_generator_mask(lat: TorusLattice, gen: int) -> GroupElement:
    edge = 0
    for s in range(num_generators(lat)):
        if gen >> s & 1:
            edge ^= lat.star_masks[s]
    return GroupElement(int(gen), edge)


def loop_length(g: GroupElement) -> int:
    return g.loop_length


def overlap_parity(g: GroupElement | int, z: int | Sequence[int]) -> int:
    """Parity of the number of spins shared by ``g`` and the sigma-z string ``z``.

    ``z`` is either an edge bitmask or a sequence of edge indices.
    """
    gm = g.edge_mask if isinstance(g, GroupElement) else int(g)
    zm = int(z) if isinstance(z, (int, np.integer)) else mask_from_edges(z)
    return (gm & zm).bit_count() & 1


def group_edge_masks(lat: TorusLattice) -> np.ndarray:
    """Edge masks of all group elements, indexed by generator mask (uint64)."""
    _check_capacity(lat)
    n = num_generators(lat)
    masks = np.zeros(1 << n, dtype=np.uint64)
    for i in range(n):
        masks[1 << i: 1 << (i + 1)] = masks[: 1 << i] ^ np.uint64(lat.star_masks[i])
    return masks


def group_loop_lengths(lat: TorusLattice) -> np.ndarray:
    return np.bitwise_count(group_edge_masks(lat)).astype(np.int64)


def enumerate_group(lat: TorusLattice) -> Iterator[GroupElement]:
    """Yield all ``2^(L^2-1)`` elements, identity first, ordered by generator mask."""
    masks = group_edge_masks(lat)
    for gen, m in enumerate(masks.tolist()):
        yield GroupElement(gen, int(m))


def _components(lat: TorusLattice, edge_mask: int) -> np.ndarray:
    """Connected-component label of every vertex in the graph with the given edges."""
    edges = edges_from_mask(edge_mask)
    ends = lat.endpoints_array[edges] if edges else np.zeros((0, 2), dtype=np.int64)
    nv = lat.num_vertices
    graph = coo_matrix((np.ones(len(edges)), (ends[:, 0], ends[:, 1])), shape=(nv, nv))
    _, labels = connected_components(graph, directed=False)
    return labels


def _subgroup_generators(lat: TorusLattice, complement_mask: int) -> tuple[GroupElement, ...]:
    """Generators of the elements whose edges avoid ``complement_mask``."""
    labels = _components(lat, complement_mask)
    dropped = num_generators(lat)
    gens = []
    for comp in range(labels.max() + 1):
        if labels[dropped] == comp:
            continue
        stars = np.flatnonzero(labels == comp)
        gens.append(element_from_stars(lat, stars))
    return tuple(gens)


def _forest_edges(lat: TorusLattice, edge_mask: int) -> tuple[int, ...]:
    """Edges of a spanning forest of the graph with the given edges."""
    edges = edges_from_mask(edge_mask)
    if not edges:
        return ()
    nv = lat.num_vertices
    # weight = 1 + position keeps parallel edges (L=2) distinguishable
    rows, cols, w = [], [], []
    for i, e in enumerate(edges):
        a, b = lat.edge_endpoints(e)
        if a == b:
            continue
        rows.append(min(a, b))
        cols.append(max(a, b))
        w.append(1.0 + i)
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for a, b, wt, e in zip(rows, cols, w, edges):
        if (a, b) not in best:
            best[(a, b)] = (wt, e)
    keys = list(best)
    graph = coo_matrix(
        ([best[k][0] for k in keys], ([k[0] for k in keys], [k[1] for k in keys])), shape=(nv, nv)
    ).tocsr()
    tree = minimum_spanning_tree(graph).tocoo()
    return tuple(sorted(best[(min(a, b), max(a, b))][1] for a, b in zip(tree.row, tree.col)))


def gf2_basis(vectors: Sequence[int]) -> dict[int, int]:
    """Row-reduced GF(2) basis keyed by pivot bit (the highest set bit)."""
    basis: dict[int, int] = {}
    for v in vectors:
        v = int(v)
        while v:
            p = v.bit_length() - 1
            if p in basis:
                v ^= basis[p]
            else:
                for q in list(basis):
                    if basis[q] >> p & 1:
                        basis[q] ^= v
                basis[p] = v
                break
    return basis


@dataclass(frozen=True)
class SubgroupSpec:
    """Generators and orders of ``G_A``, ``G_B`` and ``Z_A`` for one bipartition.

    ``za_generators`` are single-edge sigma-z strings on the edges of a
    spanning forest of ``A``; two strings in ``A`` differing by a closed loop
    inside ``A`` act identically on gauge-sector states, so these edges give
    one representative per class.
    """

    lattice: TorusLattice
    bipartition: Bipartition
    ga_generators: tuple[GroupElement, ...]
    gb_generators: tuple[GroupElement, ...]
    za_generators: tuple[int, ...]

    @property
    def order_g(self) -> int:
        return group_order(self.lattice)

    @property
    def order_ga(self) -> int:
        return 1 << len(self.ga_generators)

    @property
    def order_gb(self) -> int:
        return 1 << len(self.gb_generators)

    @property
    def order_za(self) -> int:
        return 1 << len(self.za_generators)

    @property
    def num_cosets(self) -> int:
        return self.order_g // (self.order_ga * self.order_gb)

    @cached_property
    def ga_elements(self) -> tuple[GroupElement, ...]:
        return span_elements(self.ga_generators)

    @cached_property
    def gb_elements(self) -> tuple[GroupElement, ...]:
        return span_elements(self.gb_generators)

    @cached_property
    def za_masks(self) -> tuple[int, ...]:
        """All ``|Z_A|`` representative strings as edge masks, indexed by subset bits."""
        out = [0]
        for e in self.za_generators:
            out += [m | (1 << e) for m in out]
        return tuple(out)


def span_elements(generators: Sequence[GroupElement]) -> tuple[GroupElement, ...]:
    out = [GroupElement(0, 0)]
    for g in generators:
        out += [h * g for h in out]
    return tuple(out)


def subgroup_spec(lat: TorusLattice, bip: Bipartition) -> SubgroupSpec:
    return SubgroupSpec(
        lattice=lat,
        bipartition=bip,
        ga_generators=_subgroup_generators(lat, bip.b_mask),
        gb_generators=_subgroup_generators(lat, bip.a_mask),
        za_generators=_forest_edges(lat, bip.a_mask),
    )


def subgroup_alternating_sum(generators: Sequence[GroupElement] | SubgroupSpec, z: int | Sequence[int],
                             which: str = "A") -> int:
    """``sum_{g in R} (-1)^{|g & z|}`` for the subgroup ``R`` spanned by ``generators``.

    The sum is a character sum over a group: it is ``|R|`` when ``z`` overlaps
    every generator evenly and ``0`` otherwise. Passing a ``SubgroupSpec``
    selects ``G_A`` or ``G_B`` via ``which``.
    """
    if isinstance(generators, SubgroupSpec):
        generators = generators.ga_generators if which == "A" else generators.gb_generators
    if any(overlap_parity(g, z) for g in generators):
        return 0
    return 1 << len(generators)


def coset_labels(lat: TorusLattice, spec: SubgroupSpec) -> tuple[np.ndarray, int]:
    """Coset index (0..|Q|-1) of every group element, indexed by generator mask.

    Labels are assigned in order of first appearance, so the identity coset is 0.
    """
    _check_capacity(lat)
    basis = gf2_basis([g.generator_mask for g in spec.ga_generators + spec.gb_generators])
    reduced = np.arange(group_order(lat), dtype=np.int64)
    for p in sorted(basis, reverse=True):
        reduced ^= ((reduced >> p) & 1) * basis[p]
    _, first, inverse = np.unique(reduced, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].astype(np.int64), len(first)


def coset_representatives(lat: TorusLattice, bip: Bipartition) -> list[GroupElement]:
    """One element (the smallest generator mask) from each coset of ``G_A x G_B``."""
    spec = subgroup_spec(lat, bip)
    labels, nq = coset_labels(lat, spec)
    masks = group_edge_masks(lat)
    first = np.full(nq, -1, dtype=np.int64)
    for gen in range(len(labels) - 1, -1, -1):
        first[labels[gen]] = gen
    return [GroupElement(int(g), int(masks[g])) for g in first]


def boundary_vertices(lat: TorusLattice, z_mask: int) -> list[int]:
    """Vertices where a sigma-z string has an open end (odd degree)."""
    deg = np.zeros(lat.num_vertices, dtype=np.int64)
    for e in edges_from_mask(z_mask):
        a, b = lat.edge_endpoints(e)
        deg[a] += 1
        deg[b] += 1
    return [int(v) for v in np.flatnonzero(deg % 2)]
