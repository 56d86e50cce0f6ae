"""Exact Renyi entropies of the Castelnovo-Chamon ground state.

The state is a weighted superposition of loop configurations ``g|0>`` with
probabilities proportional to ``exp(-lam * E_g)``, ``E_g`` the number of
flipped spins. Since every group element factors as ``q h k`` with
``E_{qhk} = E_A(qh) + E_B(qk)``, the reduced density matrix is block
diagonal over the cosets ``q`` of ``G_A x G_B`` with one nonzero eigenvalue
per block, ``nu_q = w_q / Z``, where ``w_q`` sums the Boltzmann weights of
the coset.

``lam`` here is the exponent of the loop-length weights. The Hamiltonian
``H_TC + sum_s exp(-beta sum_{i in s} sigma^z_i)`` has this state as ground
state at ``lam = 2 beta`` (see ``hamiltonian_coupling_to_lambda``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError
from .gauge import coset_labels, group_loop_lengths, subgroup_spec
from .lattice import Bipartition, TorusLattice

LAMBDA_MIN_LARGE = 2.0


def hamiltonian_coupling_to_lambda(beta: float) -> float:
    return 2.0 * beta


@dataclass(frozen=True)
class CosetData:
    energies: np.ndarray  # E_g indexed by generator mask
    labels: np.ndarray  # coset index of each element
    num_cosets: int
    order_ga: int
    order_gb: int

    @property
    def order_g(self) -> int:
        return len(self.energies)


@lru_cache(maxsize=256)
def _coset_data_cached(L: int, edges: tuple[int, ...]) -> CosetData:
    from .lattice import classify_bipartition

    lat = TorusLattice(L)
    bip = classify_bipartition(lat, edges)
    spec = subgroup_spec(lat, bip)
    labels, nq = coset_labels(lat, spec)
    E = group_loop_lengths(lat)
    E.flags.writeable = False
    labels.flags.writeable = False
    return CosetData(E, labels, nq, spec.order_ga, spec.order_gb)


def coset_data(lat: TorusLattice, bip: Bipartition) -> CosetData:
    return _coset_data_cached(lat.L, bip.subsystem_edges)


@dataclass(frozen=True)
class CCPartitionData:
    """Partition sums at one coupling, kept in log form for stability."""

    lam: float
    log_z: float
    log_w: np.ndarray  # per coset
    coset_energy: np.ndarray  # <E>_w on each coset
    mean_energy: float  # <E>_Z

    @property
    def Z(self) -> float:
        return math.exp(self.log_z)

    @property
    def log_nu(self) -> np.ndarray:
        return self.log_w - self.log_z

    def log_ztilde(self, alpha: float) -> float:
        return float(logsumexp(alpha * self.log_w))

    def Ztilde(self, alpha: float) -> float:
        return math.exp(self.log_ztilde(alpha))


def partition_data(energies: np.ndarray, labels: np.ndarray, lam: float,
                   num_cosets: int | None = None) -> CCPartitionData:
    E = np.asarray(energies, dtype=float)
    labels = np.asarray(labels)
    nq = int(labels.max()) + 1 if num_cosets is None else num_cosets
    emin = np.full(nq, np.inf)
    np.minimum.at(emin, labels, E)
    rel = np.exp(-lam * (E - emin[labels]))
    s0 = np.bincount(labels, weights=rel, minlength=nq)
    s1 = np.bincount(labels, weights=rel * E, minlength=nq)
    log_w = np.log(s0) - lam * emin
    log_z = float(logsumexp(log_w))
    coset_energy = s1 / s0
    nu = np.exp(log_w - log_z)
    return CCPartitionData(float(lam), log_z, log_w, coset_energy, float(np.dot(nu, coset_energy)))


def _check_alpha(alpha: float) -> None:
    if not alpha >= 0:
        raise DomainError(f"Renyi index must be >= 0, got {alpha}")


def _renyi_from_log_nu(log_nu: np.ndarray, alpha: float) -> float:
    if alpha == 0:
        return math.log(len(log_nu))
    if alpha == 1:
        return float(-np.dot(np.exp(log_nu), log_nu))
    return float(logsumexp(alpha * log_nu)) / (1.0 - alpha)


def renyi_from_energies(energies: np.ndarray, labels: np.ndarray, lam: float, alpha: float) -> float:
    """``S_alpha`` from raw loop energies and coset labels (any additive energy offset)."""
    _check_alpha(alpha)
    return _renyi_from_log_nu(partition_data(energies, labels, lam).log_nu, alpha)


def cc_partition(lat: TorusLattice, bip: Bipartition, lam: float) -> CCPartitionData:
    d = coset_data(lat, bip)
    return partition_data(d.energies, d.labels, lam, d.num_cosets)


def cc_spectrum(lat: TorusLattice, bip: Bipartition, lam: float) -> np.ndarray:
    """Nonzero entanglement eigenvalues, sorted descending."""
    nu = np.exp(cc_partition(lat, bip, lam).log_nu)
    return np.sort(nu)[::-1]


def renyi_cc(lat: TorusLattice, bip: Bipartition, lam: float, alpha: float) -> float:
    """``S_alpha = log(Ztilde / Z^alpha) / (1 - alpha)``; ``alpha = 1`` is von Neumann."""
    _check_alpha(alpha)
    return _renyi_from_log_nu(cc_partition(lat, bip, lam).log_nu, alpha)


def renyi_derivative_from_partition(data: CCPartitionData, alpha: float) -> float:
    _check_alpha(alpha)
    log_nu = data.log_nu
    nu = np.exp(log_nu)
    if alpha == 1:
        return float(-np.dot(nu * (data.mean_energy - data.coset_energy), log_nu))
    if alpha == 0:
        return 0.0
    # weights of the Ztilde average, normalized per coset
    wt = np.exp(alpha * log_nu - logsumexp(alpha * log_nu))
    avg_tilde = float(np.dot(wt, data.coset_energy))
    # <<E>_w>_Ztilde: the inner average is constant on cosets, so it coincides with <E>_Ztilde
    avg_avg = float(np.dot(wt, data.coset_energy))
    return avg_avg + alpha / (1 - alpha) * data.mean_energy - avg_tilde / (1 - alpha)


def renyi_derivative_cc(lat: TorusLattice, bip: Bipartition, lam: float, alpha: float) -> float:
    """Exact ``d S_alpha / d lam``."""
    return renyi_derivative_from_partition(cc_partition(lat, bip, lam), alpha)


def construct_cc_state(lat: TorusLattice, lam: float) -> np.ndarray:
    """Normalized amplitudes ``exp(-lam E_g / 2)`` over the gauge-reduced basis.

    Entry ``i`` is the amplitude of ``g|0>`` with generator mask ``i``.
    """
    E = group_loop_lengths(lat).astype(float)
    logp = -lam * E
    psi = np.exp(0.5 * (logp - logsumexp(logp)))
    return psi / np.linalg.norm(psi)


def small_lambda_coeffs(lat: TorusLattice, bip: Bipartition) -> tuple[float, float]:
    """Coefficients ``(C1, C2)`` of the small-coupling expansion.

    With ``S_q`` the sum of ``E_g`` over coset ``q`` and ``m = |G_A||G_B|``::

        C1 = (sum E)^2 / |G|^2 - sum_q S_q^2 / (|G| m)
        C2 = -sum E^2 / |G| + sum_q S_q^2 / (|G| m)

    Both are non-positive (Cauchy-Schwarz over cosets and over the group).
    """
    d = coset_data(lat, bip)
    return _small_lambda_from(d.energies, d.labels, d.order_ga * d.order_gb)


def _small_lambda_from(E: np.ndarray, labels: np.ndarray, m: int) -> tuple[float, float]:
    E = np.asarray(E, dtype=float)
    G = len(E)
    Sq = np.bincount(labels, weights=E)
    cross = float(np.dot(Sq, Sq)) / (G * m)
    c1 = (E.sum() / G) ** 2 - cross
    c2 = -float(np.dot(E, E)) / G + cross
    return c1, c2


def small_lambda_derivative(lat: TorusLattice, bip: Bipartition, lam: float, alpha: float) -> float:
    """Leading small-coupling slope ``lam * alpha * C1``.

    Expanding ``S_alpha`` directly gives no ``C2`` contribution at this order:
    ``S_0 = log|Q|`` is exactly constant, while ``C2`` is generically
    negative. ``C2`` is still reported by ``small_lambda_coeffs``.
    """
    c1, _ = small_lambda_coeffs(lat, bip)
    return lam * alpha * c1


def large_lambda_derivative(lat: TorusLattice, bip: Bipartition, lam: float, alpha: float) -> float:
    """Leading large-coupling form of ``d S_alpha / d lam`` in terms of ``L^2``, ``n_AB``, ``L_dA``."""
    if alpha == 1:
        raise DomainError("the large-lambda form is singular at alpha = 1; use a neighbouring alpha")
    _check_alpha(alpha)
    if lam < LAMBDA_MIN_LARGE:
        raise DomainError(f"large-lambda form requires lam >= {LAMBDA_MIN_LARGE}, got {lam}")
    L2 = lat.L ** 2
    n = bip.n_ab
    lb = bip.boundary_star_count
    e = math.exp(-4 * lam)
    pref = 4 * alpha * e / (1 - alpha)
    if alpha > 1:
        num = (L2 - n) + (alpha - 1) * n * L2 * e
        den = (1 + L2 * e) * (1 + alpha * n * e)
    else:
        num = (L2 - n) - lb * math.exp(-4 * lam * (alpha - 1))
        den = (1 + L2 * e) * (1 + alpha * n * e + lb * math.exp(-4 * lam * alpha))
    return pref * num / den
