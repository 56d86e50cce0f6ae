"""Geometry of the L x L periodic square lattice with spins on edges.

Edge ids follow ``2 * (row * L + col) + orientation`` where orientation 0 is
the horizontal edge leaving vertex ``(row, col)`` to the right and 1 is the
vertical edge leaving it downwards (towards ``row + 1``). Vertex ``(row, col)``
has index ``row * L + col``; plaquette ``(row, col)`` is the cell whose
top-left corner is that vertex.

Subsystems are arbitrary edge subsets and are carried around as Python-int
bitmasks over the ``2 L^2`` edges.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidBipartitionError, InvalidSizeError

HORIZONTAL = 0
VERTICAL = 1


def mask_from_edges(edges: Iterable[int]) -> int:
    mask = 0
    for e in edges:
        mask |= 1 << int(e)
    return mask


def edges_from_mask(mask: int) -> list[int]:
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return out


@dataclass(frozen=True)
class TorusLattice:
    """Spins on the edges of an ``L x L`` torus."""

    L: int

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise InvalidSizeError(f"torus size must be an integer >= 2, got {self.L!r}")

    @property
    def num_edges(self) -> int:
        return 2 * self.L * self.L

    @property
    def num_vertices(self) -> int:
        return self.L * self.L

    num_stars = num_vertices
    num_plaquettes = num_vertices

    @property
    def all_edges_mask(self) -> int:
        return (1 << self.num_edges) - 1

    def vertex(self, row: int, col: int) -> int:
        return (row % self.L) * self.L + (col % self.L)

    def vertex_coords(self, v: int) -> tuple[int, int]:
        return divmod(v, self.L)

    def edge(self, row: int, col: int, orientation: int) -> int:
        return 2 * self.vertex(row, col) + orientation

    def edge_coords(self, e: int) -> tuple[int, int, int]:
        v, o = divmod(e, 2)
        r, c = divmod(v, self.L)
        return r, c, o

    def edge_endpoints(self, e: int) -> tuple[int, int]:
        r, c, o = self.edge_coords(e)
        if o == HORIZONTAL:
            return self.vertex(r, c), self.vertex(r, c + 1)
        return self.vertex(r, c), self.vertex(r + 1, c)

    @cached_property
    def star_incidence(self) -> tuple[tuple[int, int, int, int], ...]:
        stars = []
        for v in range(self.num_vertices):
            r, c = self.vertex_coords(v)
            stars.append((
                self.edge(r, c, HORIZONTAL),
                self.edge(r, c - 1, HORIZONTAL),
                self.edge(r, c, VERTICAL),
                self.edge(r - 1, c, VERTICAL),
            ))
        return tuple(stars)

    @cached_property
    def plaquette_incidence(self) -> tuple[tuple[int, int, int, int], ...]:
        plaqs = []
        for p in range(self.num_vertices):
            r, c = self.vertex_coords(p)
            plaqs.append((
                self.edge(r, c, HORIZONTAL),
                self.edge(r + 1, c, HORIZONTAL),
                self.edge(r, c, VERTICAL),
                self.edge(r, c + 1, VERTICAL),
            ))
        return tuple(plaqs)

    @cached_property
    def star_masks(self) -> tuple[int, ...]:
        return tuple(mask_from_edges(s) for s in self.star_incidence)

    @cached_property
    def plaquette_masks(self) -> tuple[int, ...]:
        return tuple(mask_from_edges(p) for p in self.plaquette_incidence)

    @cached_property
    def horizontal_edges(self) -> tuple[int, ...]:
        return tuple(range(0, self.num_edges, 2))

    @cached_property
    def vertical_edges(self) -> tuple[int, ...]:
        return tuple(range(1, self.num_edges, 2))

    @cached_property
    def endpoints_array(self) -> np.ndarray:
        """``(num_edges, 2)`` array of vertex indices joined by each edge."""
        return np.array([self.edge_endpoints(e) for e in range(self.num_edges)], dtype=np.int64)

    def row_loop_mask(self, row: int = 0) -> int:
        """Horizontal edges of one row: a non-contractible loop on the direct lattice."""
        return mask_from_edges(self.edge(row, c, HORIZONTAL) for c in range(self.L))

    def column_loop_mask(self, col: int = 0) -> int:
        return mask_from_edges(self.edge(r, col, VERTICAL) for r in range(self.L))


def build_torus(L: int) -> TorusLattice:
    return TorusLattice(L)


class SubsystemClass(enum.Enum):
    THIN = "thin"
    BULK = "bulk"


@dataclass(frozen=True)
class Bipartition:
    """Edge subset ``A`` of a torus together with its star bookkeeping.

    ``n_a`` / ``n_b`` count stars whose four edges all lie in ``A`` / ``B``;
    every remaining star straddles the cut and is counted in
    ``boundary_star_count``.
    """

    lattice: TorusLattice
    subsystem_edges: tuple[int, ...]
    interior_stars_a: tuple[int, ...]
    interior_stars_b: tuple[int, ...]
    boundary_stars: tuple[int, ...] = field(repr=False)

    @property
    def a_mask(self) -> int:
        return mask_from_edges(self.subsystem_edges)

    @property
    def b_mask(self) -> int:
        return self.lattice.all_edges_mask & ~self.a_mask

    @property
    def complement_edges(self) -> tuple[int, ...]:
        return tuple(edges_from_mask(self.b_mask))

    @property
    def n_a(self) -> int:
        return len(self.interior_stars_a)

    @property
    def n_b(self) -> int:
        return len(self.interior_stars_b)

    @property
    def n_ab(self) -> int:
        return self.n_a + self.n_b

    @property
    def boundary_star_count(self) -> int:
        return len(self.boundary_stars)

    @property
    def subsystem_class(self) -> SubsystemClass:
        return SubsystemClass.THIN if self.n_a == 0 else SubsystemClass.BULK

    @property
    def is_thin(self) -> bool:
        return self.subsystem_class is SubsystemClass.THIN

    def complement(self) -> "Bipartition":
        return classify_bipartition(self.lattice, self.complement_edges)

    def to_list(self) -> list[int]:
        return list(self.subsystem_edges)

    def label(self) -> str:
        return "edges:" + ",".join(str(e) for e in self.subsystem_edges)


def classify_bipartition(lat: TorusLattice, edges: Iterable[int]) -> Bipartition:
    edges = tuple(sorted(set(int(e) for e in edges)))
    if not edges:
        raise InvalidBipartitionError("subsystem A is empty")
    if edges[0] < 0 or edges[-1] >= lat.num_edges:
        raise InvalidBipartitionError(f"edge index out of range for L={lat.L}: {edges}")
    if len(edges) == lat.num_edges:
        raise InvalidBipartitionError("subsystem A contains every edge")
    a_mask = mask_from_edges(edges)
    b_mask = lat.all_edges_mask & ~a_mask
    ia, ib, bd = [], [], []
    for s, smask in enumerate(lat.star_masks):
        if smask & b_mask == 0:
            ia.append(s)
        elif smask & a_mask == 0:
            ib.append(s)
        else:
            bd.append(s)
    return Bipartition(lat, edges, tuple(ia), tuple(ib), tuple(bd))


def _check_vertex(lat: TorusLattice, v: int) -> None:
    if not 0 <= v < lat.num_vertices:
        raise InvalidBipartitionError(f"vertex/cell index {v} out of range for L={lat.L}")


def plaquette_subsystem(lat: TorusLattice, cell: int) -> Bipartition:
    """The four edges bounding one cell (a thin subsystem)."""
    _check_vertex(lat, cell)
    return classify_bipartition(lat, lat.plaquette_incidence[cell])


def two_star_subsystem(lat: TorusLattice, vertex: int, neighbor: int | None = None) -> Bipartition:
    """Union of the edges of two adjacent stars; ``neighbor`` defaults to the right neighbour."""
    _check_vertex(lat, vertex)
    if neighbor is None:
        r, c = lat.vertex_coords(vertex)
        neighbor = lat.vertex(r, c + 1)
    _check_vertex(lat, neighbor)
    shared = set(lat.star_incidence[vertex]) & set(lat.star_incidence[neighbor])
    if not shared or vertex == neighbor:
        raise InvalidBipartitionError(f"vertices {vertex} and {neighbor} are not adjacent")
    return classify_bipartition(lat, set(lat.star_incidence[vertex]) | set(lat.star_incidence[neighbor]))


def plaquette_plus_two_subsystem(lat: TorusLattice, cell: int) -> Bipartition:
    """A plaquette plus the two edges leaving its north-east corner (six spins)."""
    _check_vertex(lat, cell)
    r, c = lat.vertex_coords(cell)
    extra = (lat.edge(r, c + 1, HORIZONTAL), lat.edge(r - 1, c + 1, VERTICAL))
    return classify_bipartition(lat, set(lat.plaquette_incidence[cell]) | set(extra))


def random_bipartition(lat: TorusLattice, rng: np.random.Generator, size: int | None = None) -> Bipartition:
    n = lat.num_edges
    if size is None:
        size = int(rng.integers(1, n))
    edges = rng.choice(n, size=size, replace=False)
    return classify_bipartition(lat, edges)


def parse_bipartition(lat: TorusLattice, text: str) -> Bipartition:
    """Parse ``plaquette:CELL``, ``twostar:V[,W]``, ``plaqplus2:CELL`` or ``edges:E1,E2,...``.

    A bare comma-separated list is read as an edge list.
    """
    text = text.strip()
    kind, _, rest = text.partition(":")
    if not rest:
        kind, rest = "edges", text
    try:
        nums = [int(x) for x in rest.replace(" ", "").split(",") if x != ""]
    except ValueError as exc:
        raise InvalidBipartitionError(f"cannot parse bipartition {text!r}") from exc
    kind = kind.lower()
    if kind == "edges":
        return classify_bipartition(lat, nums)
    if kind == "plaquette" and len(nums) == 1:
        return plaquette_subsystem(lat, nums[0])
    if kind == "plaqplus2" and len(nums) == 1:
        return plaquette_plus_two_subsystem(lat, nums[0])
    if kind == "twostar" and len(nums) in (1, 2):
        return two_star_subsystem(lat, *nums)
    raise InvalidBipartitionError(f"cannot parse bipartition {text!r}")


def bipartition_from_list(lat: TorusLattice, edges: Sequence[int]) -> Bipartition:
    return classify_bipartition(lat, edges)
