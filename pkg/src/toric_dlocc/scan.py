"""Scenario configuration and Renyi-surface scans for every model."""

from __future__ import annotations

import dataclasses
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cc_model, ed, rowfield
from .convertibility import DEFAULT_ALPHAS, RenyiSurface, SignMap, sign_map
from .errors import ConfigError, InvalidBipartitionError
from .freefermion import PauliString, even_sector_gap, pauli_string_expectation, solve_chain
from .lattice import Bipartition, TorusLattice, parse_bipartition

MODELS = ("cc", "rowfield-thin", "rowfield-bulk", "v3-ed", "cluster-ed")
CSV_COLUMNS = ("model", "L", "bipartition", "param1", "param2", "alpha", "S", "dS_sign")
GAP_CHAIN_DEFAULT = 256


def parse_grid(text: str) -> tuple[float, ...]:
    """``"0.1,0.2,0.5"`` or ``"linspace:start:stop:num"``."""
    text = str(text).strip()
    try:
        if text.startswith("linspace:"):
            _, a, b, n = text.split(":")
            return tuple(float(x) for x in np.linspace(float(a), float(b), int(n)))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}") from exc


@dataclass(frozen=True)
class ScanConfig:
    model: str
    L: int = 3
    bipartition: str = "plaquette:0"
    lam: tuple[float, ...] = (0.1, 0.2, 0.3)
    lam_z: tuple[float, ...] | None = None  # v3-ed only; defaults to lam
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    chain_length: int = 0  # rowfield: 0 = infinite lattice
    lx: int = 6  # cluster-ed
    ly: int = 3
    block: str = "0,0,3,3"  # cluster-ed: x0,y0,wx,wy
    epsilon: float | None = None
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODELS}")
        for name, grid in (("lam", self.lam), ("alphas", self.alphas)):
            if len(grid) == 0 or np.any(np.diff(grid) <= 0):
                raise ConfigError(f"{name} grid must be non-empty and strictly increasing")
        if min(self.alphas) < 0:
            raise ConfigError("Renyi indices must be >= 0")
        if self.lam_z is not None and len(self.lam_z) != len(self.lam):
            raise ConfigError("lam_z must have the same length as lam")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @property
    def points(self) -> np.ndarray:
        if self.model == "v3-ed":
            lz = self.lam if self.lam_z is None else self.lam_z
            return np.column_stack([self.lam, lz])
        return np.asarray(self.lam, dtype=float)

    def replace(self, **kw) -> "ScanConfig":
        return dataclasses.replace(self, **kw)


_FIELD_TYPES = {
    "model": str, "L": int, "bipartition": str, "lam": parse_grid, "lam_z": parse_grid,
    "alphas": parse_grid, "chain_length": int, "lx": int, "ly": int, "block": str,
    "epsilon": float, "threads": int, "out": str,
}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(io.StringIO(text), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


def config_from_mapping(values: dict) -> ScanConfig:
    kwargs = {}
    for k, v in values.items():
        if k not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {k!r}")
        try:
            kwargs[k] = _FIELD_TYPES[k](v) if isinstance(v, str) else v
        except ValueError as exc:
            raise ConfigError(f"bad value for {k}: {v!r}") from exc
    if "model" not in kwargs:
        raise ConfigError("config must set model")
    return ScanConfig(**kwargs)


# ---------------------------------------------------------------- per-model surfaces


def _bipartition(cfg: ScanConfig) -> tuple[TorusLattice, Bipartition]:
    try:
        lat = TorusLattice(cfg.L)
        return lat, parse_bipartition(lat, cfg.bipartition)
    except (InvalidBipartitionError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _cluster_block(cfg: ScanConfig) -> tuple[ed.SquareSiteLattice, list[int]]:
    try:
        x0, y0, wx, wy = (int(v) for v in cfg.block.split(","))
    except ValueError as exc:
        raise ConfigError(f"block must be x0,y0,wx,wy, got {cfg.block!r}") from exc
    sl = ed.SquareSiteLattice(cfg.lx, cfg.ly)
    if not (0 < wx <= cfg.lx and 0 < wy <= cfg.ly):
        raise ConfigError("cluster block does not fit the lattice")
    return sl, sl.block(x0, y0, wx, wy)


def _parallel(fn: Callable[[int], object], n: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def point_spectra(cfg: ScanConfig) -> list[np.ndarray]:
    """Entanglement spectrum at every grid point (spectral models only)."""
    pts = cfg.points
    if cfg.model == "rowfield-thin":
        lat, bip = _bipartition(cfg)
        if not bip.is_thin or bip.a_mask not in lat.plaquette_masks:
            raise ConfigError("rowfield-thin requires a single-plaquette (thin) bipartition")

        def one(i):
            lam = float(pts[i])
            if cfg.chain_length:
                T = float(pauli_string_expectation(solve_chain(cfg.chain_length, lam),
                                                   PauliString.parse("x0 x1")))
            else:
                T = rowfield.plaquette_correlator(lam)
            return rowfield.plaquette_rdm_diagonal(min(max(T, 0.0), 1.0))
    elif cfg.model == "rowfield-bulk":
        if not cfg.bipartition.startswith("twostar"):
            raise ConfigError("rowfield-bulk is defined for the two-star bipartition")

        def one(i):
            return rowfield.two_star_spectrum(float(pts[i]), cfg.chain_length or None)
    elif cfg.model == "v3-ed":
        lat, bip = _bipartition(cfg)
        selector = ed.SectorSelector()

        def one(i):
            lx, lz = pts[i]
            H = ed.build_hamiltonian(ed.HamiltonianSpec(lat, ed.V3(float(lx), float(lz))))
            return ed.entanglement_spectrum(ed.ground_state(H, selector, lat), bip).values
    elif cfg.model == "cluster-ed":
        sl, block = _cluster_block(cfg)

        def one(i):
            H = ed.build_hamiltonian(ed.HamiltonianSpec(sl, ed.Cluster(float(pts[i]))))
            return ed.entanglement_spectrum(ed.ground_state(H), block, sl.num_sites).values
    else:
        lat, bip = _bipartition(cfg)
        return [cc_model.cc_spectrum(lat, bip, float(p)) for p in pts]
    return _parallel(one, len(pts), cfg.threads)


def _source(model: str) -> str:
    return {"cc": "cc", "rowfield-thin": "rowfield", "rowfield-bulk": "rowfield",
            "v3-ed": "ed", "cluster-ed": "cluster"}[model]


def build_surface(cfg: ScanConfig) -> RenyiSurface:
    if cfg.model == "cc":
        lat, bip = _bipartition(cfg)
        lams = cfg.points
        return RenyiSurface.from_function(
            lams, cfg.alphas, lambda i, a: cc_model.renyi_cc(lat, bip, float(lams[i]), a),
            "cc", bip.label())
    spectra = point_spectra(cfg)
    return RenyiSurface.from_spectra(cfg.points, cfg.alphas, spectra, _source(cfg.model), cfg.bipartition)


@dataclass
class ScanResult:
    config: ScanConfig
    surface: RenyiSurface
    signs: SignMap | None
    extra: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def columns(self) -> tuple[str, ...]:
        return CSV_COLUMNS + tuple(self.extra)

    def rows(self) -> list[tuple]:
        cfg = self.config
        pts = self.surface.parameter_grid
        L = f"{cfg.lx}x{cfg.ly}" if cfg.model == "cluster-ed" else str(cfg.L)
        bip = cfg.block if cfg.model == "cluster-ed" else (self.surface.bipartition or cfg.bipartition)
        out = []
        for i in range(len(pts)):
            p1, p2 = (pts[i][0], pts[i][1]) if pts.ndim == 2 else (pts[i], "")
            for j, a in enumerate(self.surface.alpha_grid):
                sign = "" if self.signs is None else int(self.signs.signs[i, j])
                row = (cfg.model, L, bip, p1, p2, a, self.surface.values[i, j], sign)
                row += tuple(col[i] for col in self.extra.values())
                out.append(row)
        return out

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows():
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    s = str(v)
    return f'"{s}"' if "," in s else s


def run_scan(cfg: ScanConfig) -> ScanResult:
    surface = build_surface(cfg)
    signs = sign_map(surface, cfg.epsilon) if len(surface.parameter_grid) >= 3 else None
    extra = {}
    if cfg.model == "rowfield-bulk":
        n = cfg.chain_length or GAP_CHAIN_DEFAULT
        extra["inv_gap"] = np.array([1.0 / even_sector_gap(float(l), n) for l in surface.parameter_grid])
    return ScanResult(cfg, surface, signs, extra)


def spectrum_for(cfg: ScanConfig, index: int = 0) -> np.ndarray:
    """Entanglement spectrum at one grid point of a scan config."""
    if not 0 <= index < len(cfg.points):
        raise ConfigError(f"grid index {index} out of range")
    return point_spectra(cfg.replace(lam=(cfg.lam[index],),
                                     lam_z=None if cfg.lam_z is None else (cfg.lam_z[index],)))[0]

