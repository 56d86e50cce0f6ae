"""Entanglement of the toric code with a field on horizontal edges.

In the gauge sector (every plaquette +1, contractible and non-contractible
sigma-z loops +1) the map ``A_s -> tau^z_s``, ``sigma^z_e -> tau^x_a tau^x_b``
for an edge joining vertices ``a, b`` is an isomorphism onto the even
subspace of ``prod tau^z``. The row field becomes one transverse-field Ising
chain per row of vertices, and any gauge-group element times a sigma-z string
becomes a product of per-row Pauli strings whose expectation factorizes.

Purities follow from the gauge-sector formula
``Tr rho_A^2 = (1/|Z_A|) sum_{g in G_A, z in Z_A} |<g z>|^2`` and its
higher-power generalization.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, DomainError
from .freefermion import (
    THERMO_MAX_L,
    THERMO_START_L,
    THERMO_TOL,
    IsingChainSolution,
    PauliString,
    nn_xx_correlator_thermo,
    pauli_string_expectation,
    solve_chain,
)
from .gauge import GroupElement, SubgroupSpec, boundary_vertices, group_edge_masks, subgroup_spec
from .lattice import Bipartition, TorusLattice, two_star_subsystem
from .spectra import renyi_from_spectrum

GAUGE_SUM_BUDGET = 10_000_000

Expectation = Callable[[GroupElement, int], complex]


# ---------------------------------------------------------------- sigma -> tau


@dataclass(frozen=True)
class SigmaTauMap:
    """Rewrites ``(prod of stars) x (sigma-z string)`` as per-row tau strings.

    Vertex ``(r, c)`` becomes site ``c`` of chain ``r``.
    """

    lattice: TorusLattice

    def star_image(self, s: int) -> dict[int, PauliString]:
        r, c = self.lattice.vertex_coords(s)
        return {r: PauliString(((c, "z"),))}

    def edge_image(self, e: int) -> dict[int, PauliString]:
        _, rows = self.map(stars=(), z_mask=1 << e)
        return rows

    def map(self, stars: Sequence[int], z_mask: int) -> tuple[complex, dict[int, PauliString]]:
        """Image of the operator ``(prod_s A_s) (prod_{e in z} sigma^z_e)``."""
        lat = self.lattice
        per_row: dict[int, list[tuple[int, str]]] = {}
        for s in stars:
            r, c = lat.vertex_coords(int(s))
            per_row.setdefault(r, []).append((c, "z"))
        for v in boundary_vertices(lat, z_mask):
            r, c = lat.vertex_coords(v)
            per_row.setdefault(r, []).append((c, "x"))
        phase = 1 + 0j
        rows: dict[int, PauliString] = {}
        for r in sorted(per_row):
            ph, ps = PauliString.from_pairs(per_row[r])
            phase *= ph
            if ps.ops:
                rows[r] = ps
        return phase, rows


def sigma_string_to_tau(lat: TorusLattice, edges: Sequence[int] | int = (),
                        stars: Sequence[int] = ()) -> tuple[complex, dict[int, PauliString]]:
    """tau-picture image of ``(prod stars) (prod sigma^z on edges)`` as ``(phase, {row: string})``."""
    z_mask = edges if isinstance(edges, int) else sum(1 << int(e) for e in set(edges))
    return SigmaTauMap(lat).map(stars, z_mask)


def _star_set(lat: TorusLattice, g: GroupElement) -> list[int]:
    """Smaller of the two star sets representing ``g`` (they differ by all stars)."""
    stars = [s for s in range(lat.num_vertices - 1) if g.generator_mask >> s & 1]
    if len(stars) > lat.num_vertices // 2:
        stars = [s for s in range(lat.num_vertices) if s not in set(stars)]
    return stars


def tau_expectation(lat: TorusLattice, sol: IsingChainSolution, g: GroupElement, z_mask: int) -> complex:
    """``<g z>`` in the product of identical per-row chain ground states."""
    phase, rows = SigmaTauMap(lat).map(_star_set(lat, g), z_mask)
    val = phase
    for ps in rows.values():
        if ps.flip_odd:
            return 0.0
        val *= pauli_string_expectation(sol, ps)
        if val == 0:
            return 0.0
    return complex(val)


# ---------------------------------------------------------------- thin subsystems


def plaquette_rdm_diagonal(T: float) -> np.ndarray:
    """Eight eigenvalues ``(1/8)(1 + s1 T)(1 + s3 T)`` of a plaquette's reduced state, descending."""
    if not 0.0 <= T <= 1.0:
        raise DomainError(f"nearest-neighbour correlator must lie in [0, 1], got {T}")
    vals = [(1 + s1 * T) * (1 + s3 * T) / 8 for s1 in (1, -1) for _ in (1, -1) for s3 in (1, -1)]
    return np.sort(np.array(vals))[::-1]


def plaquette_correlator(lam: float) -> float:
    if lam == 0:
        return 0.0
    return nn_xx_correlator_thermo(lam)


def plaquette_renyi(lam: float, alpha: float, T: float | None = None) -> float:
    """``S_alpha`` of a single plaquette in the infinite-lattice ground state.

    Equivalent to ``log[(2(1+T)^{2a} + 2(1-T)^{2a} + 4(1-T^2)^a) / 8^a] / (1-a)``.
    """
    if T is None:
        T = plaquette_correlator(lam)
    return renyi_from_spectrum(plaquette_rdm_diagonal(min(max(T, 0.0), 1.0)), alpha)


def plaquette_renyi_closed_form(T: float, alpha: float) -> float:
    if alpha == 1:
        return renyi_from_spectrum(plaquette_rdm_diagonal(T), 1.0)
    inner = 2 * (1 + T) ** (2 * alpha) + 2 * (1 - T) ** (2 * alpha) + 4 * (1 - T * T) ** alpha
    return math.log(inner / 2 ** (3 * alpha)) / (1 - alpha)


# ---------------------------------------------------------------- gauge-sector formulas


class GaugeStateExpectation:
    """``<psi| g z |psi>`` for a state stored in the gauge-reduced basis.

    ``amplitudes[i]`` multiplies ``g_i |0>`` with ``i`` a generator mask.
    """

    def __init__(self, lat: TorusLattice, amplitudes: np.ndarray):
        self.lattice = lat
        self.psi = np.asarray(amplitudes, dtype=complex)
        self.masks = group_edge_masks(lat)
        if len(self.psi) != len(self.masks):
            raise ValueError("amplitude vector does not match the gauge-reduced basis size")

    def __call__(self, g: GroupElement, z_mask: int) -> complex:
        idx = np.arange(len(self.psi)) ^ g.generator_mask
        signs = 1 - 2 * (np.bitwise_count(self.masks & np.uint64(z_mask)) & 1).astype(float)
        return complex(np.sum(np.conj(self.psi[idx]) * signs * self.psi))

    def table(self, spec: SubgroupSpec) -> np.ndarray:
        zs = np.array(spec.za_masks, dtype=np.uint64)
        signs = 1 - 2 * (np.bitwise_count(self.masks[:, None] & zs[None, :]) & 1).astype(float)
        base = np.arange(len(self.psi))
        rows = []
        for g in spec.ga_elements:
            v = np.conj(self.psi[base ^ g.generator_mask]) * self.psi
            rows.append(v @ signs)
        return np.array(rows)


def expectation_table(expect: Expectation | GaugeStateExpectation, spec: SubgroupSpec) -> np.ndarray:
    """``T[a, b] = <g_a z_b>`` over ``G_A x Z_A`` in subset-bit order."""
    if hasattr(expect, "table"):
        return expect.table(spec)
    return np.array([[expect(g, z) for z in spec.za_masks] for g in spec.ga_elements], dtype=complex)


def _overlap_signs(spec: SubgroupSpec) -> np.ndarray:
    gm = np.array([g.edge_mask for g in spec.ga_elements], dtype=np.uint64)
    zm = np.array(spec.za_masks, dtype=np.uint64)
    return 1 - 2 * (np.bitwise_count(gm[:, None] & zm[None, :]) & 1).astype(float)


def purity_gauge_formula(expect: Expectation | GaugeStateExpectation, spec: SubgroupSpec,
                         table: np.ndarray | None = None) -> float:
    """``(|G_B| / |G|) sum_{g in G_A, z in Z_A} |<g z>|^2``."""
    T = expectation_table(expect, spec) if table is None else table
    return float(np.sum(np.abs(T) ** 2) * spec.order_gb / spec.order_g)


def renyi_n_gauge_formula(expect: Expectation | GaugeStateExpectation, spec: SubgroupSpec, n: int,
                          table: np.ndarray | None = None, budget: int = GAUGE_SUM_BUDGET) -> float:
    """``Tr rho_A^n`` from the chained gauge-sector expectation values.

    The summand is ``<g1 z1...z_{n-1}> <g2 z1 g1> ... <g_{n-1} z_{n-2} g_{n-2}> <z_{n-1} g_{n-1}>``;
    moving each ``z`` through a ``g`` costs the sign ``(-1)^{|g & z|}``.
    """
    if int(n) != n or n < 2:
        raise DomainError(f"power must be an integer >= 2, got {n}")
    nG, nZ = spec.order_ga, spec.order_za
    if (nG * nZ) ** (n - 1) > budget:
        raise CapacityError(f"{(nG * nZ) ** (n - 1)} terms exceed the budget of {budget}")
    T = expectation_table(expect, spec) if table is None else table
    S = _overlap_signs(spec)
    if n == 2:
        return float(np.sum(np.abs(T) ** 2) * spec.order_gb / spec.order_g)
    m = n - 1
    zgrid = np.indices((nZ,) * m).reshape(m, -1)
    zprod = np.bitwise_xor.reduce(zgrid, axis=0)
    total = 0.0 + 0j
    for gs in itertools.product(range(nG), repeat=m):
        term = T[gs[0], zprod]
        for i in range(1, m):
            term = term * S[gs[i - 1], zgrid[i - 1]] * T[gs[i] ^ gs[i - 1], zgrid[i - 1]]
        term = term * S[gs[-1], zgrid[-1]] * T[gs[-1], zgrid[-1]]
        total += term.sum()
    pref = (spec.order_gb / spec.order_g) ** m
    return float(np.real(total) * pref)


# ---------------------------------------------------------------- two adjacent stars


TWO_STAR_LATTICE_L = 4
TWO_STAR_VERTEX = 5  # (row 1, col 1) on the 4x4 geometry, neighbour (1, 2)


@lru_cache(maxsize=8)
def _two_star_geometry(L: int) -> tuple[TorusLattice, Bipartition, SubgroupSpec]:
    lat = TorusLattice(L)
    v = lat.vertex(1, 1)
    bip = two_star_subsystem(lat, v)
    return lat, bip, subgroup_spec(lat, bip)


@lru_cache(maxsize=64)
def _cached_solution(L: int, lam: float) -> IsingChainSolution:
    return solve_chain(L, lam)


def _two_star_purity_at(lam: float, chain_length: int, torus_L: int) -> float:
    lat, _, spec = _two_star_geometry(torus_L)
    sol = _cached_solution(chain_length, lam)
    return purity_gauge_formula(lambda g, z: tau_expectation(lat, sol, g, z), spec)


def two_star_purity(lam: float, chain_length: int | None = None) -> float:
    """Purity of two horizontally adjacent stars (seven spins) in the row-field ground state.

    ``chain_length=None`` gives the infinite lattice: rows are chains of
    length 256, doubled until the purity changes by less than ``1e-8``. A
    finite ``chain_length`` (>= 3) is the ``L x L`` torus.
    """
    if lam < 0:
        raise DomainError(f"field ratio must be >= 0, got {lam}")
    lam = float(lam)
    if chain_length is not None:
        return _two_star_purity_at(lam, chain_length, chain_length)
    L = THERMO_START_L
    prev = _two_star_purity_at(lam, L, TWO_STAR_LATTICE_L)
    while L < THERMO_MAX_L:
        L *= 2
        cur = _two_star_purity_at(lam, L, TWO_STAR_LATTICE_L)
        if abs(cur - prev) < THERMO_TOL:
            return cur
        prev = cur
    return prev


def two_star_renyi2(lam: float, chain_length: int | None = None) -> float:
    return -math.log(two_star_purity(lam, chain_length))


def two_star_terms(lam: float, chain_length: int = THERMO_START_L) -> list[dict]:
    """Nonzero purity contributions classified by the number of stars in ``g``.

    Types follow the count of full stars in ``g``: 0 (i), 1 (ii), 2 (iii).
    """
    lat, bip, spec = _two_star_geometry(TWO_STAR_LATTICE_L)
    sol = _cached_solution(chain_length, float(lam))
    out = []
    stars = set(bip.interior_stars_a)
    for g in spec.ga_elements:
        nstars = len(set(_star_set(lat, g)) & stars)
        for z in spec.za_masks:
            val = tau_expectation(lat, sol, g, z)
            if abs(val) > 0:
                phase, rows = SigmaTauMap(lat).map(_star_set(lat, g), z)
                out.append({
                    "type": ("i", "ii", "iii")[nstars],
                    "g": g.generator_mask,
                    "z": z,
                    "tau": {r: str(p) for r, p in rows.items()},
                    "value": val,
                })
    return out


def printed_two_star_purity(lam: float, chain_length: int = THERMO_START_L) -> float:
    """The thirteen-correlator two-star expression exactly as printed in the literature.

    Kept only for the validation report: at ``lam -> 0`` it evaluates to
    ``3/128``, while the flat ``2^5`` spectrum requires ``4/128``; the star
    term ``<tau^z>^2`` should appear once per star.
    """
    sol = _cached_solution(chain_length, float(lam))

    def ev(*pairs):
        phase, ps = PauliString.from_pairs(pairs)
        return float(np.real(phase * pauli_string_expectation(sol, ps)))

    t12 = ev((1, "x"), (2, "x"))
    inner = (
        1 + 3 * t12 ** 2 + 2 * ev((1, "x"), (3, "x")) ** 2 + ev((1, "x"), (4, "x")) ** 2
        + ev((1, "x"), (2, "x"), (3, "x"), (4, "x")) ** 2 + ev((2, "z")) ** 2
        + ev((1, "x"), (2, "z"), (3, "x")) ** 2 + ev((2, "z"), (3, "x"), (4, "x")) ** 2
        + ev((1, "x"), (2, "z"), (4, "x")) ** 2 + ev((2, "z"), (3, "z")) ** 2
        + ev((2, "z"), (3, "z"), (2, "x"), (3, "x")) ** 2
        + ev((2, "z"), (3, "z"), (1, "x"), (4, "x")) ** 2
        + ev((2, "z"), (3, "z"), (1, "x"), (2, "x"), (3, "x"), (4, "x"))
    )
    return (1 + t12 ** 2) ** 2 * inner / 2 ** 7


def _local_bits(edges: Sequence[int], subsystem: Sequence[int]) -> int:
    pos = {e: k for k, e in enumerate(subsystem)}
    return sum(1 << pos[e] for e in edges)


def subsystem_rdm(lat: TorusLattice, bip: Bipartition, expect: Expectation,
                  max_qubits: int = 10) -> np.ndarray:
    """Explicit ``rho_A = 2^{-n_A} sum_{g in G_A, T subset A} <g Z_T> (g Z_T)^dagger``.

    Only operators of this form have nonzero expectation in the gauge sector.
    Qubit ``k`` of the local basis is the ``k``-th subsystem edge.
    """
    A = bip.subsystem_edges
    nA = len(A)
    if nA > max_qubits:
        raise CapacityError(f"explicit rho_A on {nA} qubits exceeds {max_qubits}")
    spec = subgroup_spec(lat, bip)
    dim = 1 << nA
    idx = np.arange(dim)
    rho = np.zeros((dim, dim), dtype=complex)
    for g in spec.ga_elements:
        xm = _local_bits([e for e in range(lat.num_edges) if g.edge_mask >> e & 1], A)
        for t in range(dim):
            zmask = sum(1 << A[k] for k in range(nA) if t >> k & 1)
            val = expect(g, zmask)
            if val == 0:
                continue
            # (g Z_T)^dagger = Z_T g: <b ^ xm| Z_T g |b> = (-1)^{|(b ^ xm) & t|}
            signs = 1 - 2 * (np.bitwise_count((idx ^ xm) & t).astype(np.int64) & 1)
            rho[idx ^ xm, idx] += np.conj(val) * signs
    return rho / dim


def two_star_rdm(lam: float, chain_length: int = THERMO_START_L) -> np.ndarray:
    """The 128 x 128 reduced state of two adjacent stars from chain expectation values."""
    torus_L = TWO_STAR_LATTICE_L if chain_length > TWO_STAR_LATTICE_L else chain_length
    lat, bip, _ = _two_star_geometry(torus_L)
    sol = _cached_solution(chain_length, float(lam))
    return subsystem_rdm(lat, bip, lambda g, z: tau_expectation(lat, sol, g, z))


def two_star_spectrum(lam: float, chain_length: int | None = None) -> np.ndarray:
    """Entanglement spectrum of two adjacent stars, descending.

    ``chain_length=None`` doubles the chain from 256 until the spectrum moves
    by less than ``1e-8``.
    """
    def spec_at(n):
        ev = np.linalg.eigvalsh(two_star_rdm(lam, n))
        return np.sort(np.maximum(ev, 0.0))[::-1]

    if chain_length is not None:
        return spec_at(chain_length)
    n = THERMO_START_L
    prev = spec_at(n)
    while n < THERMO_MAX_L:
        n *= 2
        cur = spec_at(n)
        if np.max(np.abs(cur - prev)) < THERMO_TOL:
            return cur
        prev = cur
    return prev
