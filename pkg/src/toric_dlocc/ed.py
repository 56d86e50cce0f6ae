"""Brute-force exact diagonalization oracle.

Two bases are used. The full computational basis has bit ``e`` of the index
equal to the z-state of qubit ``e`` (0 = up). It handles every perturbation
but is limited to 18 qubits. The gauge-reduced basis spans ``g|0>`` for
``g`` in the star group (index = generator mask); it is exact for the gauge
invariant perturbations ``V1`` and ``V2`` and reaches ``L = 4``.

Hamiltonians are stored as a diagonal plus a list of "hops" ``x -> x ^ m``
with per-configuration coefficients, which covers every Pauli-product term
without ever forming the full sparse matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import CapacityError, SectorAmbiguityError
from .gauge import group_edge_masks, num_generators
from .lattice import HORIZONTAL, VERTICAL, Bipartition, TorusLattice
from .spectra import EntanglementSpectrum, clip_eigenvalues, renyi_from_spectrum

MAX_FULL_QUBITS = 18
MAX_GAUGE_L = 4
DENSE_LIMIT = 4096
TIE_THRESHOLD = 1e-6
EIGSH_SEED = 12345

__all__ = [
    "V1", "V2", "V3", "Cluster", "HamiltonianSpec", "XorOperator", "SectorSelector", "GaugeState",
    "SquareSiteLattice", "build_hamiltonian", "ground_state", "lowest_eigenpairs",
    "entanglement_spectrum", "renyi_from_spectrum", "EntanglementSpectrum", "pauli_sum",
    "tfim_chain_hamiltonian", "cluster_hamiltonian", "pauli_expectation",
]


# ---------------------------------------------------------------- operators


class XorOperator(LinearOperator):
    """``H = diag + sum_k c_k(x) |x ^ m_k><x|`` on ``2^n`` configurations."""

    def __init__(self, dim: int, diag: np.ndarray, hops: Sequence[tuple[int, np.ndarray]]):
        self.dim = int(dim)
        self.diag = np.asarray(diag, dtype=float)
        self.hops = [(int(m), np.broadcast_to(np.asarray(c, dtype=float), (self.dim,))) for m, c in hops]
        self._idx = np.arange(self.dim)
        super().__init__(dtype=np.float64, shape=(self.dim, self.dim))

    def _matvec(self, v):
        v = np.asarray(v).reshape(-1)
        out = self.diag * v
        for m, c in self.hops:
            # (H v)[x ^ m] += c[x] v[x]
            out[self._idx ^ m] += c * v
        return out

    def _matmat(self, V):
        return np.column_stack([self._matvec(V[:, j]) for j in range(V.shape[1])])

    def _adjoint(self):
        return self

    def tocsr(self) -> csr_matrix:
        rows = [self._idx]
        cols = [self._idx]
        data = [self.diag]
        for m, c in self.hops:
            rows.append(self._idx ^ m)
            cols.append(self._idx)
            data.append(np.asarray(c))
        H = coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                       shape=self.shape)
        return H.tocsr()

    def toarray(self) -> np.ndarray:
        return self.tocsr().toarray()


def pauli_sum(n: int, terms: Sequence[tuple[float, int, int]], diag: np.ndarray | None = None) -> XorOperator:
    """Sum of ``coeff * X^x_mask Z^z_mask`` (Z applied first) on ``n`` qubits.

    ``X^x Z^z |b> = (-1)^{|b & z|} |b ^ x>``.
    """
    if n > MAX_FULL_QUBITS + 2:
        raise CapacityError(f"{n} qubits exceed the full-basis limit of {MAX_FULL_QUBITS}")
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    d = np.zeros(dim) if diag is None else np.array(diag, dtype=float)
    grouped: dict[int, np.ndarray] = {}
    for coeff, xm, zm in terms:
        vec = coeff * (1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)) if zm else np.full(dim, float(coeff))
        if xm == 0:
            d += vec
        elif xm in grouped:
            grouped[xm] = grouped[xm] + vec
        else:
            grouped[xm] = vec.astype(float)
    return XorOperator(dim, d, list(grouped.items()))


def _bits(positions: Sequence[int]) -> int:
    m = 0
    for p in positions:
        m |= 1 << int(p)
    return m


def tfim_chain_hamiltonian(L: int, lam: float) -> XorOperator:
    """Periodic chain ``-sum Z_j - lam sum X_j X_{j+1}`` in the full basis."""
    terms = [(-1.0, 0, 1 << j) for j in range(L)]
    terms += [(-lam, _bits([j, (j + 1) % L]), 0) for j in range(L)]
    return pauli_sum(L, terms)


# ---------------------------------------------------------------- model specs


@dataclass(frozen=True)
class V1:
    """``sum_s exp(-lam sum_{i in s} sigma^z_i)``."""

    lam: float


@dataclass(frozen=True)
class V2:
    """``-lam sum_{h horizontal} sigma^z_h``."""

    lam: float


@dataclass(frozen=True)
class V3:
    """``-sum_{i, mu} (lam_x X_i X_{i+mu} + lam_z Z_i Z_{i+mu})``; ``i + mu`` is ``i`` translated by one cell."""

    lam_x: float
    lam_z: float


@dataclass(frozen=True)
class Cluster:
    """Cluster-state Hamiltonian with an Ising-type perturbation on a square site lattice."""

    lam: float
    zz_ratio: float = 0.5


Perturbation = Union[V1, V2, V3, Cluster]


@dataclass(frozen=True)
class SquareSiteLattice:
    """Qubits on the sites of an ``lx x ly`` periodic square lattice; site ``(x, y) -> y * lx + x``."""

    lx: int
    ly: int

    @property
    def num_sites(self) -> int:
        return self.lx * self.ly

    def site(self, x: int, y: int) -> int:
        return (y % self.ly) * self.lx + (x % self.lx)

    def block(self, x0: int, y0: int, wx: int, wy: int) -> list[int]:
        return sorted(self.site(x0 + dx, y0 + dy) for dy in range(wy) for dx in range(wx))


@dataclass(frozen=True)
class HamiltonianSpec:
    lattice: TorusLattice | SquareSiteLattice
    perturbation: Perturbation
    basis: str = "auto"  # "full", "gauge" or "auto"

    @property
    def resolved_basis(self) -> str:
        if self.basis != "auto":
            return self.basis
        if isinstance(self.perturbation, (V1, V2)):
            return "gauge"
        return "full"


def _translate_edge(lat: TorusLattice, e: int, direction: int) -> int:
    r, c, o = lat.edge_coords(e)
    return lat.edge(r, c + 1, o) if direction == HORIZONTAL else lat.edge(r + 1, c, o)


def toric_terms(lat: TorusLattice) -> list[tuple[float, int, int]]:
    terms = [(-1.0, m, 0) for m in lat.star_masks]
    terms += [(-1.0, 0, m) for m in lat.plaquette_masks]
    return terms


def cluster_hamiltonian(sl: SquareSiteLattice, lam: float, zz_ratio: float = 0.5) -> XorOperator:
    terms = []
    for y in range(sl.ly):
        for x in range(sl.lx):
            i = sl.site(x, y)
            nbrs = [sl.site(x - 1, y), sl.site(x + 1, y), sl.site(x, y + 1), sl.site(x, y - 1)]
            zm = 0
            for j in nbrs:
                zm ^= 1 << j
            terms.append((-1.0, 1 << i, zm))
            for j in (sl.site(x + 1, y), sl.site(x, y + 1)):
                terms.append((-lam, (1 << i) | (1 << j), 0))
                terms.append((-lam * zz_ratio, 0, (1 << i) | (1 << j)))
    return pauli_sum(sl.num_sites, terms)


def _full_toric(lat: TorusLattice, pert: Perturbation) -> XorOperator:
    n = lat.num_edges
    if n > MAX_FULL_QUBITS:
        raise CapacityError(f"full basis needs {n} qubits > {MAX_FULL_QUBITS}; use the gauge basis or a smaller L")
    terms = toric_terms(lat)
    diag = None
    if isinstance(pert, V1):
        idx = np.arange(1 << n, dtype=np.int64)
        diag = np.zeros(1 << n)
        for m in lat.star_masks:
            diag += np.exp(-pert.lam * (4 - 2 * np.bitwise_count(idx & m).astype(np.int64)))
    elif isinstance(pert, V2):
        terms += [(-pert.lam, 0, 1 << h) for h in lat.horizontal_edges]
    elif isinstance(pert, V3):
        for e in range(n):
            for mu in (HORIZONTAL, VERTICAL):
                f = _translate_edge(lat, e, mu)
                terms.append((-pert.lam_x, (1 << e) ^ (1 << f), 0))
                terms.append((-pert.lam_z, 0, (1 << e) ^ (1 << f)))
    else:
        raise TypeError(f"unsupported perturbation {pert!r} on a torus")
    return pauli_sum(n, terms, diag)


def _gauge_toric(lat: TorusLattice, pert: Perturbation) -> XorOperator:
    if lat.L > MAX_GAUGE_L:
        raise CapacityError(f"gauge basis limited to L <= {MAX_GAUGE_L}")
    if not isinstance(pert, (V1, V2)):
        raise ValueError("the gauge-reduced basis only supports gauge-invariant V1 and V2")
    masks = group_edge_masks(lat)
    k = num_generators(lat)
    dim = 1 << k
    hops = [(1 << s, np.full(dim, -1.0)) for s in range(k)]
    hops.append((dim - 1, np.full(dim, -1.0)))  # dropped star = product of all the others
    diag = np.full(dim, -float(lat.num_vertices))  # every plaquette is +1
    if isinstance(pert, V1):
        for m in lat.star_masks:
            diag += np.exp(-pert.lam * (4 - 2 * np.bitwise_count(masks & np.uint64(m)).astype(float)))
    else:
        hmask = np.uint64(_bits(lat.horizontal_edges))
        flipped = np.bitwise_count(masks & hmask).astype(float)
        diag += -pert.lam * (len(lat.horizontal_edges) - 2 * flipped)
    return XorOperator(dim, diag, hops)


def build_hamiltonian(spec: HamiltonianSpec) -> XorOperator:
    lat, pert = spec.lattice, spec.perturbation
    if isinstance(pert, Cluster):
        if not isinstance(lat, SquareSiteLattice):
            raise TypeError("the cluster model lives on a SquareSiteLattice")
        if lat.num_sites > MAX_FULL_QUBITS:
            raise CapacityError(f"{lat.num_sites} qubits exceed {MAX_FULL_QUBITS}")
        return cluster_hamiltonian(lat, pert.lam, pert.zz_ratio)
    if spec.resolved_basis == "gauge":
        return _gauge_toric(lat, pert)
    return _full_toric(lat, pert)


# ---------------------------------------------------------------- eigensolver and sectors


def lowest_eigenpairs(H: XorOperator, k: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``k`` eigenpairs, ascending; dense below ``DENSE_LIMIT``."""
    dim = H.shape[0]
    k = min(k, dim)
    if dim <= DENSE_LIMIT:
        w, v = np.linalg.eigh(H.toarray())
        return w[:k], v[:, :k]
    v0 = np.random.default_rng(EIGSH_SEED).standard_normal(dim)
    w, v = eigsh(H, k=k, which="SA", v0=v0, tol=1e-12, maxiter=20000)
    order = np.argsort(w)
    return w[order], v[:, order]


@dataclass(frozen=True)
class SectorSelector:
    """Target signs of the two non-contractible sigma-z loops.

    Candidates are eigenvectors within ``energy_window`` of the lowest
    eigenvalue. The selected state maximizes ``t1 <W1> + t2 <W2>`` inside that
    span; a tie within ``TIE_THRESHOLD`` raises ``SectorAmbiguityError``.
    """

    w1: int = 1
    w2: int = 1
    energy_window: float = 0.5
    num_candidates: int = 8
    min_loop_expectation: float = 0.5


def loop_operator_diagonals(lat: TorusLattice) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << lat.num_edges, dtype=np.int64)
    w1 = 1 - 2 * (np.bitwise_count(idx & lat.row_loop_mask(0)).astype(np.int64) & 1)
    w2 = 1 - 2 * (np.bitwise_count(idx & lat.column_loop_mask(0)).astype(np.int64) & 1)
    return w1.astype(float), w2.astype(float)


def ground_state(H: XorOperator, sector: SectorSelector | None = None,
                 lattice: TorusLattice | None = None) -> np.ndarray:
    """Ground state; in the full toric basis the loop sector is selected explicitly."""
    if sector is None or lattice is None:
        w, v = lowest_eigenpairs(H, k=2)
        if len(w) > 1 and w[1] - w[0] < TIE_THRESHOLD:
            raise SectorAmbiguityError(f"ground state is degenerate within {TIE_THRESHOLD}: {w[:2]}")
        psi = v[:, 0]
        return _fix_phase(psi)
    w, v = lowest_eigenpairs(H, k=sector.num_candidates)
    sel = w <= w[0] + sector.energy_window
    V = v[:, sel]
    d1, d2 = loop_operator_diagonals(lattice)
    O = V.conj().T @ ((sector.w1 * d1 + sector.w2 * d2)[:, None] * V)
    ow, ov = np.linalg.eigh((O + O.conj().T) / 2)
    if len(ow) > 1 and ow[-1] - ow[-2] < TIE_THRESHOLD:
        raise SectorAmbiguityError(
            f"loop operators cannot separate the {int(sel.sum())} candidate states (top values {ow[-2:]})")
    psi = V @ ov[:, -1]
    psi /= np.linalg.norm(psi)
    e1 = float(np.real(np.vdot(psi, d1 * psi)))
    e2 = float(np.real(np.vdot(psi, d2 * psi)))
    if sector.w1 * e1 < sector.min_loop_expectation or sector.w2 * e2 < sector.min_loop_expectation:
        raise SectorAmbiguityError(f"selected state has loop expectations ({e1:.3f}, {e2:.3f})")
    return _fix_phase(psi)


def _fix_phase(psi: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(psi)))
    return psi * (abs(psi[i]) / psi[i])


# ---------------------------------------------------------------- states and spectra


@dataclass(frozen=True)
class GaugeState:
    """Amplitudes over ``g|0>`` indexed by generator mask."""

    lattice: TorusLattice
    amplitudes: np.ndarray = field(repr=False)

    def to_full(self) -> np.ndarray:
        n = self.lattice.num_edges
        if n > MAX_FULL_QUBITS:
            raise CapacityError(f"expanding to {n} qubits exceeds {MAX_FULL_QUBITS}")
        full = np.zeros(1 << n, dtype=np.asarray(self.amplitudes).dtype)
        full[group_edge_masks(self.lattice).astype(np.int64)] = self.amplitudes
        return full


def _compress(values: np.ndarray, positions: Sequence[int]) -> np.ndarray:
    out = np.zeros(len(values), dtype=np.int64)
    for k, p in enumerate(positions):
        out |= ((values >> p) & 1) << k
    return out


def _gram_spectrum(M: np.ndarray) -> np.ndarray:
    if M.shape[0] <= M.shape[1]:
        rho = M @ M.conj().T
    else:
        rho = M.conj().T @ M
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2)


def reduced_density_matrix(psi: np.ndarray, subsystem: Sequence[int], n: int) -> np.ndarray:
    """Explicit ``rho_A`` of a full-basis vector (qubit ``q`` = bit ``q`` of the index)."""
    M = _full_matrix(psi, subsystem, n)
    return M @ M.conj().T


def _full_matrix(psi: np.ndarray, A: Sequence[int], n: int) -> np.ndarray:
    A = sorted(int(q) for q in A)
    B = [q for q in range(n) if q not in set(A)]
    t = np.asarray(psi).reshape([2] * n)
    axes = [n - 1 - q for q in reversed(A)] + [n - 1 - q for q in reversed(B)]
    return t.transpose(axes).reshape(1 << len(A), 1 << len(B))


def entanglement_spectrum(state, bip: Bipartition | Sequence[int], num_qubits: int | None = None) -> EntanglementSpectrum:
    """Eigenvalues of ``rho_A`` for a full-basis vector or a ``GaugeState``.

    ``bip`` is a ``Bipartition`` or a plain list of subsystem qubits (then
    ``num_qubits`` is required for full-basis vectors).
    """
    A = bip.subsystem_edges if isinstance(bip, Bipartition) else tuple(sorted(int(q) for q in bip))
    if isinstance(state, GaugeState):
        lat = state.lattice
        masks = group_edge_masks(lat).astype(np.int64)
        Bq = [e for e in range(lat.num_edges) if e not in set(A)]
        a_cfg = _compress(masks, A)
        b_cfg = _compress(masks, Bq)
        ua, ia = np.unique(a_cfg, return_inverse=True)
        ub, ib = np.unique(b_cfg, return_inverse=True)
        amps = np.asarray(state.amplitudes)
        if min(len(ua), len(ub)) > DENSE_LIMIT:
            raise CapacityError("reduced density matrix too large for dense diagonalization")
        M = np.zeros((len(ua), len(ub)), dtype=amps.dtype)
        np.add.at(M, (ia, ib), amps)
        ev = _gram_spectrum(M)
    else:
        psi = np.asarray(state)
        n = num_qubits if num_qubits is not None else int(round(np.log2(len(psi))))
        if isinstance(bip, Bipartition):
            n = bip.lattice.num_edges
        ev = _gram_spectrum(_full_matrix(psi, A, n))
    return EntanglementSpectrum(clip_eigenvalues(ev))


def expectation_diagonal(psi: np.ndarray, diag: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, diag * psi)))


def pauli_expectation(psi: np.ndarray, ops: Sequence[tuple[int, str]]) -> complex:
    """``<psi| P |psi>`` for a product of single-qubit Paulis ``[(qubit, "x"|"y"|"z"), ...]``.

    Uses ``Y = i X Z`` so that ``P = i^{n_y} X^x Z^z``.
    """
    psi = np.asarray(psi)
    xm = zm = ny = 0
    for q, o in ops:
        bit = 1 << int(q)
        if o in "xy":
            xm ^= bit
        if o in "yz":
            zm ^= bit
        ny += o == "y"
    idx = np.arange(len(psi), dtype=np.int64)
    signs = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
    return complex((1j ** ny) * np.sum(np.conj(psi[idx ^ xm]) * signs * psi))
