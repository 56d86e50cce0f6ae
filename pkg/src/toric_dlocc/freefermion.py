"""Free-fermion solution of the periodic transverse-field Ising chain.

``H = -sum_j tau^z_j - lam sum_j tau^x_j tau^x_{j+1}`` is mapped by the
Jordan-Wigner transformation onto Majoranas ``A_j = a_{2j}`` and
``B_j = a_{2j+1}`` with ``tau^z_j = -i A_j B_j`` and
``tau^x_j tau^x_{j+1} = -i B_j A_{j+1}``. In the even-parity sector the
boundary bond is antiperiodic, so momenta are ``k = pi (2n + 1) / L``.

The ground-state two-point function is ``<a_j a_k> = delta_jk + i M_jk``
with ``M`` real antisymmetric. Multi-point functions follow from Wick's
theorem as Pfaffians of sub-blocks of ``M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, InvalidSizeError

THERMO_START_L = 256
THERMO_MAX_L = 1 << 16
THERMO_TOL = 1e-8


def pfaffian(mat: np.ndarray) -> complex | float:
    """Pfaffian of a skew-symmetric matrix by Parlett-Reid elimination with pivoting."""
    A = np.array(mat, dtype=np.result_type(mat, float), copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("pfaffian needs a square matrix")
    if n % 2:
        return 0.0
    result = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(A[k + 1:, k]).argmax())
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            result = -result
        pivot = A[k + 1, k]
        if pivot == 0:
            return 0.0 * result
        result *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            # eliminate row/column k using row/column k+1
            A[k + 2:, k + 2:] += np.outer(tau, A[k + 2:, k + 1]) - np.outer(A[k + 2:, k + 1], tau)
    if isinstance(result, complex) or np.iscomplexobj(A):
        return complex(result)
    return float(result)


_OP_CODES = {"x": 1, "y": 2, "z": 3}


@dataclass(frozen=True)
class PauliString:
    """Product of single-site Pauli operators on one chain, sites strictly increasing."""

    ops: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        sites = [s for s, _ in self.ops]
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise ValueError(f"sites must be strictly increasing: {sites}")
        if any(o not in _OP_CODES for _, o in self.ops):
            raise ValueError(f"unknown Pauli label in {self.ops}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, str]]) -> tuple[complex, "PauliString"]:
        """Multiply an arbitrary product (repeats allowed, any order) into canonical form.

        Returns the phase picked up and the canonical string.
        """
        phase = 1 + 0j
        per_site: dict[int, list[str]] = {}
        for s, o in pairs:
            per_site.setdefault(int(s), []).append(o.lower())
        # operators on different sites commute, so only the per-site order matters
        out = []
        for s in sorted(per_site):
            ph, op = _multiply_site(per_site[s])
            phase *= ph
            if op != "i":
                out.append((s, op))
        return phase, cls(tuple(out))

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse e.g. ``"x1 z2 x3"``."""
        pairs = [(int(tok[1:]), tok[0]) for tok in text.split()]
        phase, s = cls.from_pairs(pairs)
        if phase != 1:
            raise ValueError(f"{text!r} is not a canonical Hermitian string")
        return s

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.ops)

    @property
    def flip_odd(self) -> bool:
        """True when the string anticommutes with the global spin flip ``prod tau^z``."""
        return sum(o in "xy" for _, o in self.ops) % 2 == 1

    def shifted(self, offset: int, L: int) -> "PauliString":
        return PauliString(tuple(sorted(((s + offset) % L, o) for s, o in self.ops)))

    def __str__(self) -> str:
        return " ".join(f"{o}{s}" for s, o in self.ops) or "1"


_PAULI_TABLE = {
    ("x", "y"): (1j, "z"), ("y", "x"): (-1j, "z"),
    ("y", "z"): (1j, "x"), ("z", "y"): (-1j, "x"),
    ("z", "x"): (1j, "y"), ("x", "z"): (-1j, "y"),
}


def _multiply_site(ops: Sequence[str]) -> tuple[complex, str]:
    phase, cur = 1 + 0j, "i"
    for o in ops:
        if cur == "i":
            cur = o
        elif cur == o:
            cur = "i"
        else:
            ph, cur = _PAULI_TABLE[(cur, o)]
            phase *= ph
    return phase, cur


def string_to_majoranas(s: PauliString) -> tuple[complex, list[int]]:
    """Write a Pauli string as ``phase * a_{i1} a_{i2} ...`` with increasing indices."""
    phase = 1 + 0j
    word: list[int] = []
    for site, op in s.ops:
        if op == "z":
            phase *= -1j
            word += [2 * site, 2 * site + 1]
            continue
        # Jordan-Wigner string prod_{k<site} (-i A_k B_k)
        phase *= (-1j) ** site
        for k in range(site):
            word += [2 * k, 2 * k + 1]
        word.append(2 * site if op == "x" else 2 * site + 1)
    sign, canon = _canonicalize(word)
    return phase * sign, canon


def _canonicalize(word: list[int]) -> tuple[int, list[int]]:
    """Sort a Majorana word with anticommutation signs and cancel squares."""
    w = list(word)
    sign = 1
    # bubble sort, counting transpositions of distinct Majoranas
    n = len(w)
    for i in range(n):
        for j in range(n - 1 - i):
            if w[j] > w[j + 1]:
                w[j], w[j + 1] = w[j + 1], w[j]
                sign = -sign
    out: list[int] = []
    for x in w:
        if out and out[-1] == x:
            out.pop()
        else:
            out.append(x)
    return sign, out


def _chain_g(L: int, lam: float, r: np.ndarray) -> np.ndarray:
    """``M[B_j, A_{j+r}]`` for the antiperiodic (even-parity) vacuum."""
    k = np.pi * (2 * np.arange(L) + 1) / L
    r = np.atleast_1d(np.asarray(r, dtype=float))
    den = np.sqrt(1 + lam * lam - 2 * lam * np.cos(k))
    num = lam * np.cos(np.outer(r - 1, k)) - np.cos(np.outer(r, k))
    return (num / den).sum(axis=1) / L


@dataclass(frozen=True)
class IsingChainSolution:
    """Even-parity ground state of the periodic chain of length ``chain_length``."""

    chain_length: int
    lam: float
    _g_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @cached_property
    def mode_momenta(self) -> np.ndarray:
        return np.pi * (2 * np.arange(self.chain_length) + 1) / self.chain_length

    @cached_property
    def mode_energies(self) -> np.ndarray:
        k = self.mode_momenta
        return 2 * np.sqrt(1 + self.lam ** 2 - 2 * self.lam * np.cos(k))

    @cached_property
    def bogoliubov_angles(self) -> np.ndarray:
        k = self.mode_momenta
        return np.arctan2(self.lam * np.sin(k), 1 - self.lam * np.cos(k))

    @property
    def ground_energy(self) -> float:
        return float(-0.5 * self.mode_energies.sum())

    @property
    def gap(self) -> float:
        return energy_gap(self.lam, self.chain_length)

    def g(self, r: int) -> float:
        """``M[B_j, A_{j+r}]`` for a signed offset ``-L < r < L``."""
        if r not in self._g_cache:
            self._g_cache[r] = float(_chain_g(self.chain_length, self.lam, np.array([r]))[0])
        return self._g_cache[r]

    def correlation(self, p: int, q: int) -> float:
        """Entry ``M[p, q]`` of the Majorana correlation matrix."""
        if p == q:
            return 0.0
        jp, bp = divmod(p, 2)
        jq, bq = divmod(q, 2)
        if bp == bq:
            return 0.0
        if bp == 1:
            return self.g(jq - jp)
        return -self.g(jp - jq)

    @cached_property
    def majorana_correlation(self) -> np.ndarray:
        L = self.chain_length
        r = np.arange(-L + 1, L)
        gvals = _chain_g(L, self.lam, r)
        j = np.arange(L)
        off = j[None, :] - j[:, None]  # l - j
        M = np.zeros((2 * L, 2 * L))
        M[1::2, 0::2] = gvals[off + L - 1]
        M[0::2, 1::2] = -M[1::2, 0::2].T
        M.flags.writeable = False
        return M

    def submatrix(self, idx: Sequence[int]) -> np.ndarray:
        n = len(idx)
        sub = np.zeros((n, n))
        for a in range(n):
            for b in range(a + 1, n):
                sub[a, b] = self.correlation(idx[a], idx[b])
                sub[b, a] = -sub[a, b]
        return sub


def solve_chain(L: int, lam: float) -> IsingChainSolution:
    if int(L) != L or L < 2:
        raise InvalidSizeError(f"chain length must be an integer >= 2, got {L!r}")
    if lam < 0:
        raise DomainError(f"field ratio must be >= 0, got {lam}")
    return IsingChainSolution(int(L), float(lam))


def majorana_expectation(sol: IsingChainSolution, idx: Sequence[int]) -> complex:
    """``<a_{i1} ... a_{i2n}>`` for strictly increasing indices."""
    n = len(idx)
    if n % 2:
        return 0.0
    if n == 0:
        return 1.0
    return (1j ** (n // 2)) * pfaffian(sol.submatrix(idx))


def _rotate_compact(s: PauliString, L: int) -> PauliString:
    """Translate a string so the largest empty arc of the ring straddles the boundary."""
    sites = s.sites
    if len(sites) < 2:
        return s.shifted(-sites[0], L) if sites else s
    gaps = [(sites[(i + 1) % len(sites)] - sites[i]) % L for i in range(len(sites))]
    i = int(np.argmax(gaps))
    return s.shifted(-sites[(i + 1) % len(sites)], L)


def pauli_string_expectation(sol: IsingChainSolution, s: PauliString) -> float:
    """Ground-state expectation of a Pauli string; zero for flip-odd strings."""
    if s.flip_odd:
        return 0.0
    if not s.ops:
        return 1.0
    L = sol.chain_length
    if max(s.sites) >= L or min(s.sites) < 0:
        raise ValueError(f"string {s} does not fit on a chain of length {L}")
    s = _rotate_compact(s, L)
    phase, word = string_to_majoranas(s)
    val = phase * majorana_expectation(sol, word)
    return float(np.real(val))


def pauli_string_expectation_thermo(lam: float, s: PauliString, start_L: int = THERMO_START_L,
                                    tol: float = THERMO_TOL, max_L: int = THERMO_MAX_L) -> float:
    """Infinite-chain limit by doubling the chain until successive values agree to ``tol``."""
    L = start_L
    prev = pauli_string_expectation(solve_chain(L, lam), s)
    while L < max_L:
        L *= 2
        cur = pauli_string_expectation(solve_chain(L, lam), s)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


def nn_xx_correlator_thermo(lam: float) -> float:
    """``T(lam) = <tau^x_i tau^x_{i+1}>`` on the infinite chain by adaptive quadrature."""
    if not lam > 0:
        raise DomainError(f"T(lam) needs lam > 0, got {lam}")
    if math.isinf(lam):
        return 1.0
    return _nn_xx_thermo_cached(float(lam))


@lru_cache(maxsize=4096)
def _nn_xx_thermo_cached(lam: float) -> float:
    def f(phi):
        return (lam - math.cos(phi)) / math.sqrt(1 - 2 * lam * math.cos(phi) + lam * lam)

    points = [0.0] if abs(lam - 1) < 1e-12 else None
    val, _ = integrate.quad(f, 0.0, math.pi, epsabs=1e-12, epsrel=1e-12, limit=200, points=points)
    return val / math.pi


def _sector_levels(L: int, lam: float, parity: int) -> list[float]:
    """Two lowest energies of the spin chain within one global-flip sector."""
    K = np.zeros((2 * L, 2 * L))
    for j in range(L):
        K[2 * j, 2 * j + 1] = 2.0
        if j < L - 1:
            K[2 * j + 1, 2 * j + 2] = 2.0 * lam
        else:
            K[2 * j + 1, 0] += -2.0 * lam * parity
    K = K - K.T
    evals, vecs = np.linalg.eigh(1j * K)
    eps = np.sort(np.abs(evals[evals > 0]))
    if len(eps) < L:
        eps = np.sort(np.abs(evals))[::2][:L]
    e0 = -0.5 * eps.sum()
    if eps[0] < 1e-12:
        return [e0, e0 + eps[1]]
    sgn = np.where(evals > 0, 1.0, -1.0)
    M = np.real(-1j * (vecs * sgn) @ vecs.conj().T)
    vac_parity = int(round(float(pfaffian(M))))
    if vac_parity == parity:
        return [e0, e0 + eps[0] + eps[1]]
    return [e0 + eps[0], e0 + eps[1]]


def chain_low_levels(L: int, lam: float) -> list[float]:
    levels = sorted(_sector_levels(L, lam, +1) + _sector_levels(L, lam, -1))
    return levels


def energy_gap(lam: float, L: int) -> float:
    """Absolute gap between the two lowest eigenvalues of the periodic chain."""
    if lam < 0:
        raise DomainError(f"field ratio must be >= 0, got {lam}")
    levels = chain_low_levels(int(L), float(lam))
    return float(levels[1] - levels[0])


def even_sector_gap(lam: float, L: int) -> float:
    """Gap above the ground state inside the ``prod tau^z = +1`` sector.

    This is the sector the gauge-fixed toric code maps onto, so it stays
    finite in the ordered phase where the full-chain gap closes.
    """
    if lam < 0:
        raise DomainError(f"field ratio must be >= 0, got {lam}")
    e0, e1 = _sector_levels(int(L), float(lam), +1)
    return float(e1 - e0)
