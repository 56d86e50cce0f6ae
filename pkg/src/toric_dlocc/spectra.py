"""Entanglement spectra and Renyi entropies of probability vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SUPPORT_THRESHOLD = 1e-10
CLIP = -1e-12


@dataclass(frozen=True)
class EntanglementSpectrum:
    """Eigenvalues of a reduced density matrix, sorted descending."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("spectrum must be one-dimensional")
        v = np.sort(clip_eigenvalues(v))[::-1]
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.values > SUPPORT_THRESHOLD))

    def renyi(self, alpha: float) -> float:
        return renyi_from_spectrum(self.values, alpha)


def clip_eigenvalues(ev: np.ndarray) -> np.ndarray:
    """Clip tiny negative round-off at ``-1e-12``, then floor at zero."""
    ev = np.asarray(ev, dtype=float)
    return np.maximum(np.maximum(ev, CLIP), 0.0)


def renyi_from_spectrum(nu, alpha: float) -> float:
    """``S_alpha = log(sum nu^alpha) / (1 - alpha)`` with the ``alpha = 0, 1`` limits.

    Values at or below ``SUPPORT_THRESHOLD`` count as zero, so that round-off
    noise does not dominate small ``alpha`` and ``S_alpha -> S_0``.
    """
    if not alpha >= 0:
        raise DomainError(f"Renyi index must be >= 0, got {alpha}")
    nu = np.asarray(nu, dtype=float)
    if alpha == 0:
        return math.log(int(np.count_nonzero(nu > SUPPORT_THRESHOLD)))
    pos = nu[nu > SUPPORT_THRESHOLD]
    if alpha == 1:
        return float(-np.dot(pos, np.log(pos)))
    if math.isinf(alpha):
        return float(-math.log(pos.max()))
    return float(math.log(np.sum(pos ** alpha)) / (1.0 - alpha))
