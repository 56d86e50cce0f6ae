"""Majorization, catalytic-majorization and differential local convertibility.

A family ``|psi(lam)>`` is differentially locally convertible (dLOCC) along a
path when ``sign d S_alpha / d lam`` is the same for every Renyi index.
When the sign depends on ``alpha`` the crossover index ``alpha_c`` splits
the two behaviours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, GridError, MultiCrossingError
from .spectra import renyi_from_spectrum

NORMALIZATION_TOL = 1e-9
MAJORIZATION_TOL = 1e-12
EPSILON_ANALYTIC = 1e-8
EPSILON_ED = 1e-6
ALPHA_C_WIDTH = 1e-2
DEFAULT_ALPHAS = (0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0, 1.3, 2.0, 3.0, 5.0, 10.0)
SCHUR_ALPHAS = (0.1, 0.5, 1.0, 2.0, 10.0)
ANALYTIC_SOURCES = ("cc", "rowfield")

Evaluator = Callable[[int, float], float]


# ---------------------------------------------------------------- majorization


def _probability(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > NORMALIZATION_TOL:
        raise DomainError("expected a non-negative vector summing to 1")
    return p


def majorizes(p, q) -> bool:
    """True iff ``q`` majorizes ``p`` (``p`` is reachable from ``q`` by LOCC).

    Both vectors are sorted descending and the shorter one is zero-padded.
    """
    p, q = _probability(p), _probability(q)
    n = max(p.size, q.size)
    ps = np.zeros(n)
    qs = np.zeros(n)
    ps[:p.size] = np.sort(p)[::-1]
    qs[:q.size] = np.sort(q)[::-1]
    return bool(np.all(np.cumsum(qs) >= np.cumsum(ps) - MAJORIZATION_TOL))


def _renyi_exact(p: np.ndarray, alpha: float) -> float:
    pos = p[p > 0]
    if alpha == 1:
        return float(-np.dot(pos, np.log(pos)))
    return float(np.log(np.sum(pos ** alpha)) / (1 - alpha))


def schur_concavity_check(p, q, alphas: Sequence[float] = SCHUR_ALPHAS) -> bool:
    """Whether ``p < q`` (majorization) implies ``S_alpha(p) >= S_alpha(q)`` on ``alphas``."""
    if not majorizes(p, q):
        return True
    p, q = _probability(p), _probability(q)
    return all(_renyi_exact(p, a) >= _renyi_exact(q, a) - 1e-10 for a in alphas)


# ---------------------------------------------------------------- surfaces


@dataclass(frozen=True)
class RenyiSurface:
    """``S_alpha`` sampled on a parameter path.

    ``parameter_grid`` has shape ``(n,)`` for a single coupling or ``(n, 2)``
    for ``(lam_x, lam_z)``. ``evaluator(i, alpha)`` recomputes ``S_alpha`` at
    grid point ``i`` and is used to refine ``alpha_c``.
    """

    parameter_grid: np.ndarray
    alpha_grid: np.ndarray
    values: np.ndarray
    source: str
    bipartition: str = ""
    evaluator: Evaluator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.parameter_grid, dtype=float)
        alphas = np.asarray(self.alpha_grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(grid), len(alphas)):
            raise GridError(f"values shape {values.shape} does not match grid {(len(grid), len(alphas))}")
        object.__setattr__(self, "parameter_grid", grid)
        object.__setattr__(self, "alpha_grid", alphas)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid, alphas, fn: Evaluator, source: str, bipartition: str = "") -> "RenyiSurface":
        alphas = np.asarray(alphas, dtype=float)
        values = np.array([[fn(i, a) for a in alphas] for i in range(len(grid))])
        return cls(np.asarray(grid, dtype=float), alphas, values, source, bipartition, fn)

    @classmethod
    def from_spectra(cls, grid, alphas, spectra: Sequence[np.ndarray], source: str,
                     bipartition: str = "") -> "RenyiSurface":
        spectra = [np.asarray(s, dtype=float) for s in spectra]
        return cls.from_function(grid, alphas, lambda i, a: renyi_from_spectrum(spectra[i], a),
                                 source, bipartition)

    @property
    def path_coordinate(self) -> np.ndarray:
        """Cumulative distance along the grid, starting at zero at the first point."""
        g = self.parameter_grid
        steps = np.abs(np.diff(g)) if g.ndim == 1 else np.linalg.norm(np.diff(g, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(steps)])

    @property
    def radial_coordinate(self) -> np.ndarray:
        g = self.parameter_grid
        return g if g.ndim == 1 else np.linalg.norm(g, axis=1)

    def alpha_ordering_violation(self) -> float:
        """Largest increase of ``S_alpha`` between consecutive ``alpha`` (0 when ordered)."""
        order = np.argsort(self.alpha_grid)
        d = np.diff(self.values[:, order], axis=1)
        return float(max(d.max(initial=0.0), 0.0))

    def reversed(self) -> "RenyiSurface":
        n = len(self.parameter_grid)
        ev = None if self.evaluator is None else (lambda i, a, f=self.evaluator: f(n - 1 - i, a))
        return RenyiSurface(self.parameter_grid[::-1], self.alpha_grid, self.values[::-1],
                            self.source, self.bipartition, ev)


def default_epsilon(source: str) -> float:
    return EPSILON_ANALYTIC if source in ANALYTIC_SOURCES else EPSILON_ED


@dataclass(frozen=True)
class SignMap:
    """Signs of ``d S_alpha / ds`` along the grid, with ``|d| < epsilon -> 0``."""

    surface: RenyiSurface = field(repr=False)
    derivatives: np.ndarray
    signs: np.ndarray
    epsilon: float

    def column(self, i: int) -> np.ndarray:
        return self.signs[i]


def _path_derivative(values: np.ndarray, s: np.ndarray) -> np.ndarray:
    # central differences inside, one-sided at the ends
    return np.gradient(values, s, axis=0, edge_order=1)


def sign_map(surface: RenyiSurface, epsilon: float | None = None) -> SignMap:
    if len(surface.parameter_grid) < 3:
        raise GridError("a sign map needs at least 3 grid points")
    s = surface.path_coordinate
    if np.any(np.diff(s) <= 0):
        raise GridError("grid points must be distinct")
    eps = default_epsilon(surface.source) if epsilon is None else float(epsilon)
    d = _path_derivative(surface.values, s)
    signs = np.where(np.abs(d) < eps, 0, np.sign(d)).astype(np.int8)
    return SignMap(surface, d, signs, eps)


def _derivative_at(surface: RenyiSurface, i: int, alpha: float) -> float:
    n = len(surface.parameter_grid)
    idx = [j for j in (i - 1, i, i + 1) if 0 <= j < n]
    col = np.array([surface.evaluator(j, alpha) for j in idx])
    s = surface.path_coordinate[idx]
    return float(_path_derivative(col, s)[idx.index(i)])


def detect_alpha_c(signs: SignMap, point: int) -> float | None:
    """Crossover index at grid point ``point``, or ``None`` if all signs agree.

    The bracket between the two grid indices where the sign flips is bisected
    by recomputing the derivative at the midpoint until it is narrower than
    ``1e-2``. Without an evaluator the crossing is interpolated linearly.
    """
    alphas = signs.surface.alpha_grid
    order = np.argsort(alphas)
    col = signs.signs[point, order]
    nz = [k for k in range(len(order)) if col[k] != 0]
    changes = [(nz[j], nz[j + 1]) for j in range(len(nz) - 1) if col[nz[j]] != col[nz[j + 1]]]
    if not changes:
        return None
    if len(changes) > 1:
        raise MultiCrossingError(
            f"{len(changes)} sign changes over alpha at grid point {point}: {col.tolist()}")
    k_lo, k_hi = changes[0]
    lo, hi = float(alphas[order[k_lo]]), float(alphas[order[k_hi]])
    s_lo = int(col[k_lo])
    surface = signs.surface
    if surface.evaluator is None:
        d_lo = signs.derivatives[point, order[k_lo]]
        d_hi = signs.derivatives[point, order[k_hi]]
        return lo + (hi - lo) * d_lo / (d_lo - d_hi)
    while hi - lo >= ALPHA_C_WIDTH:
        mid = 0.5 * (lo + hi)
        d = _derivative_at(surface, point, mid)
        if abs(d) < signs.epsilon:
            return mid
        if int(np.sign(d)) == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def is_dlocc_region(surface: RenyiSurface | SignMap, lo: float, hi: float,
                    epsilon: float | None = None) -> bool:
    """True iff the nonzero signs agree over every ``alpha`` and every point with coordinate in ``[lo, hi]``.

    The coordinate is ``lam`` on one-parameter grids and ``|(lam_x, lam_z)|`` otherwise.
    """
    sm = surface if isinstance(surface, SignMap) else sign_map(surface, epsilon)
    r = sm.surface.radial_coordinate
    if lo > hi or lo < r.min() - 1e-12 or hi > r.max() + 1e-12:
        raise GridError(f"sub-range [{lo}, {hi}] lies outside the grid [{r.min()}, {r.max()}]")
    block = sm.signs[(r >= lo - 1e-12) & (r <= hi + 1e-12)]
    nonzero = block[block != 0]
    return bool(nonzero.size == 0 or np.all(nonzero == nonzero[0]))


def alpha_c_profile(sm: SignMap) -> list[float | None]:
    """``detect_alpha_c`` at every grid point; multi-crossings are reported as ``nan``."""
    out: list[float | None] = []
    for i in range(len(sm.signs)):
        try:
            out.append(detect_alpha_c(sm, i))
        except MultiCrossingError:
            out.append(math.nan)
    return out
