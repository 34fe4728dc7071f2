"""Electromagnetic (reconfigurable-antenna) precoding layer.

Three antenna models are provided, each as a single-antenna config plus an
array layer that maps ``n_feed`` physical feeds to radiating elements:

* dynamic metasurface antenna (DMA): a leaky waveguide with ``slots`` tunable
  slots whose weights sit on the Lorentzian circle ``|w - j/2| = 1/2``;
* ESPAR / parasitic array: one driven element plus reactively loaded
  parasitics excited through the mutual-impedance matrix;
* switched-pattern antenna: a small library of tabulated patterns.

All layers expose the same duck-typed interface used by the optimizer and the
link model: ``response(az, el)``, ``feed_matrix()``, ``eta``,
``state_sizes()``, ``state()``, ``with_state(state)`` and ``check_feasible()``.
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .geometry import ArrayGeometry, steering_matrix, unit_vector

TERMINATIONS = ("radiating", "absorbing")
CIRCLE_TOL = 1e-12


class SingularCouplingError(np.linalg.LinAlgError):
    """The loaded impedance matrix of a parasitic array cannot be inverted."""


def lorentzian_weight(phi):
    """Tunable element weight ``(j + exp(j phi)) / 2``."""
    return (1j + np.exp(1j * np.asarray(phi, dtype=float))) / 2


def phase_grid(bits: int) -> np.ndarray:
    """Uniform phase grid ``2 pi k / 2**bits``, anchored at 0."""
    if bits < 1:
        raise ValueError(f"phase resolution must be >= 1 bit, got {bits}")
    return 2 * np.pi * np.arange(2**bits) / 2**bits


def phase_index(phi, bits: int) -> np.ndarray:
    """Index of the nearest grid phase (wrapping at 2 pi)."""
    levels = 2**bits
    return np.mod(np.rint(np.asarray(phi) / (2 * np.pi / levels)), levels).astype(int)


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(np.ascontiguousarray(p).tobytes())
        else:
            h.update(repr(p).encode())
    return h.hexdigest()[:16]


# --------------------------------------------------------------------------
# Dynamic metasurface antenna


@dataclass(frozen=True)
class DmaConfig:
    """One waveguide-fed DMA.

    ``leakage`` is the fraction of the remaining guided power radiated by each
    slot; ``guide_phase`` is the guided-wave phase advance between adjacent
    slots (radians). ``phases`` default to pi/2, the unit-magnitude weight.
    """

    slots: int = 2
    leakage: float = 0.5
    guide_phase: float = 0.0
    termination: str = "radiating"
    phases: tuple[float, ...] | None = None
    phase_bits: int | None = None
    spacing: float = 0.2

    def __post_init__(self):
        if self.slots < 1:
            raise ValueError("a DMA needs at least one slot")
        if not 0 < self.leakage <= 1:
            raise ValueError(f"normalized_leakage must be in (0, 1], got {self.leakage}")
        if self.termination not in TERMINATIONS:
            raise ValueError(f"termination must be one of {TERMINATIONS}")
        if self.phase_bits is not None and self.phase_bits < 1:
            raise ValueError("phase_bits must be >= 1 when quantization is enabled")
        if not self.spacing > 0:
            raise ValueError("slot spacing must be positive")
        if self.phases is None:
            object.__setattr__(self, "phases", (np.pi / 2,) * self.slots)
        else:
            object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if len(self.phases) != self.slots:
            raise ValueError(f"expected {self.slots} slot phases, got {len(self.phases)}")
        if not all(np.isfinite(self.phases)):
            raise ValueError("slot phases must be finite")

    def effective_phases(self) -> np.ndarray:
        phases = np.mod(np.asarray(self.phases), 2 * np.pi)
        if self.phase_bits is None:
            return phases
        return phase_grid(self.phase_bits)[phase_index(phases, self.phase_bits)]

    def weights(self) -> np.ndarray:
        return lorentzian_weight(self.effective_phases())

    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry.ula(self.slots, self.spacing)


def slot_power_fractions(leakage: float, slots: int, termination: str = "radiating") -> np.ndarray:
    if not 0 < leakage <= 1:
        raise ValueError(f"normalized_leakage must be in (0, 1], got {leakage}")
    n = np.arange(slots)
    p = leakage * (1 - leakage) ** n
    if termination == "radiating":
        p[-1] = (1 - leakage) ** (slots - 1)
    return p


def dma_slot_excitations(cfg: DmaConfig) -> np.ndarray:
    """Guided-wave excitation of each slot, ``sqrt(p_n) exp(-j beta d (n-1))``."""
    p = slot_power_fractions(cfg.leakage, cfg.slots, cfg.termination)
    return np.sqrt(p) * np.exp(-1j * cfg.guide_phase * np.arange(cfg.slots))


def dma_transmission_coefficient(cfg: DmaConfig) -> complex:
    """Scattered field over feed excitation, ``T = sum_n w_n e_n``."""
    return complex(np.sum(cfg.weights() * dma_slot_excitations(cfg)))


def dma_directional_response(cfg: DmaConfig, geometry: ArrayGeometry, az, el=0.0):
    """Far-field response of one DMA feed toward (az, el).

    Scalar for a scalar direction, otherwise one value per direction.
    """
    if geometry.n_elements != cfg.slots:
        raise ValueError(
            f"slot count mismatch: config has {cfg.slots}, geometry {geometry.n_elements}"
        )
    coeff = cfg.weights() * dma_slot_excitations(cfg)
    g = steering_matrix(geometry, az, el) @ coeff
    return complex(g[0]) if np.ndim(az) == 0 and np.ndim(el) == 0 else g


def dma_coefficient_grid(
    leakage: float,
    resolution: int,
    guide_phase: float = 0.0,
    termination: str = "radiating",
) -> tuple[np.ndarray, np.ndarray]:
    """T(phi_1, phi_2) of a two-slot DMA on a cell-centred phase grid.

    Returns ``(phi, T)`` with ``T[i, k] = T(phi[i], phi[k])``. The grid is
    ``2 pi (k + 1/2) / resolution``; cell centring keeps the nodes off the
    isolated zero of the weight at phi = 3 pi / 2.
    """
    if resolution < 8:
        raise ValueError("map resolution must be >= 8")
    phi = 2 * np.pi * (np.arange(resolution) + 0.5) / resolution
    e = dma_slot_excitations(
        DmaConfig(2, leakage, guide_phase, termination)
    )
    w = lorentzian_weight(phi)
    return phi, e[0] * w[:, None] + e[1] * w[None, :]


# --------------------------------------------------------------------------
# ESPAR / parasitic array


@dataclass(frozen=True, eq=False)
class EsparConfig:
    """Parasitic array with one driven element.

    ``reactances`` lists the loads (ohms) of the parasitic elements in element
    order, skipping the active one. With ``source_resistance > 0`` the input
    power is the available source power, so the radiated fraction includes the
    mismatch loss; with an ideal source it is the delivered power.
    """

    impedance: np.ndarray
    reactances: tuple[float, ...]
    active: int = 0
    v0: complex = 1.0
    source_resistance: float = 0.0
    loss_resistance: float = 0.0

    def __post_init__(self):
        z = np.array(self.impedance, dtype=complex)
        n = z.shape[0]
        if z.shape != (n, n):
            raise ValueError("impedance matrix must be square")
        if not np.allclose(z, z.T, rtol=0, atol=1e-9 * max(1.0, np.abs(z).max())):
            raise ValueError("impedance matrix must be symmetric (reciprocity)")
        if np.linalg.eigvalsh(z.real).min() < -1e-9 * max(1.0, np.abs(z).max()):
            raise ValueError("Re(Z) must be positive semidefinite (passivity)")
        if not 0 <= self.active < n:
            raise ValueError(f"active element index {self.active} out of range")
        x = tuple(float(v) for v in self.reactances)
        if len(x) != n - 1:
            raise ValueError(f"expected {n - 1} parasitic reactances, got {len(x)}")
        if self.source_resistance < 0 or self.loss_resistance < 0:
            raise ValueError("resistances must be nonnegative")
        z.setflags(write=False)
        object.__setattr__(self, "impedance", z)
        object.__setattr__(self, "reactances", x)

    @property
    def n_elements(self) -> int:
        return self.impedance.shape[0]

    def load_vector(self) -> np.ndarray:
        x = np.zeros(self.n_elements)
        x[np.arange(self.n_elements) != self.active] = self.reactances
        return x


def synthetic_impedance(
    n: int,
    spacing: float = 0.25,
    self_impedance: complex = 73.0 + 42.5j,
    mutual_reactance: float = -20.0,
    decay: float = 0.4,
) -> np.ndarray:
    """Exponentially decaying mutual-impedance matrix for ``n`` collinear elements.

    ``Re(Z)_mn = Re(Z_self) exp(-d_mn / decay)`` is an exponential kernel and
    therefore positive semidefinite for any element spacing.
    """
    d = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]) * spacing
    k = np.exp(-d / decay)
    z = self_impedance.real * k + 1j * mutual_reactance * k
    np.fill_diagonal(z, self_impedance)
    return z


def _espar_system(cfg: EsparConfig) -> np.ndarray:
    a = cfg.impedance + np.diag(1j * cfg.load_vector() + cfg.loss_resistance)
    a[cfg.active, cfg.active] += cfg.source_resistance
    return a


def espar_currents(cfg: EsparConfig) -> np.ndarray:
    """Element currents ``(Z + j diag(x))^-1 v`` for a single driven element."""
    a = _espar_system(cfg)
    v = np.zeros(cfg.n_elements, dtype=complex)
    v[cfg.active] = cfg.v0
    try:
        if np.linalg.cond(a) > 1e13:
            raise np.linalg.LinAlgError("ill-conditioned")
        return np.linalg.solve(a, v)
    except np.linalg.LinAlgError:
        raise SingularCouplingError(
            f"loaded impedance matrix is singular for reactances {cfg.reactances}"
        ) from None


def espar_power(cfg: EsparConfig) -> tuple[float, float]:
    """``(P_rad, P_in)`` in watts for peak-amplitude phasors."""
    i = espar_currents(cfg)
    p_rad = float(np.real(i.conj() @ cfg.impedance.real @ i)) / 2
    if cfg.source_resistance > 0:
        p_in = abs(cfg.v0) ** 2 / (8 * cfg.source_resistance)
    else:
        p_in = float(np.real(np.conj(cfg.v0) * i[cfg.active])) / 2
    return p_rad, p_in


def espar_response(cfg: EsparConfig, geometry: ArrayGeometry, az, el=0.0, normalized=False):
    """Pattern ``sum_n i_n exp(j 2 pi <r_n, u>)`` of one parasitic array.

    With ``normalized=True`` the currents are scaled by
    ``sqrt(Re(Z_aa) / (2 P_in))``: an isolated, lossless, ideally fed element
    then has a unit-modulus response, the same as a static isotropic element.
    """
    if geometry.n_elements != cfg.n_elements:
        raise ValueError("element count mismatch between config and geometry")
    i = espar_currents(cfg)
    if normalized:
        i = i * _espar_scale(cfg)
    g = steering_matrix(geometry, az, el) @ i
    return complex(g[0]) if np.ndim(az) == 0 and np.ndim(el) == 0 else g


def _espar_scale(cfg: EsparConfig) -> float:
    _, p_in = espar_power(cfg)
    return math.sqrt(cfg.impedance[cfg.active, cfg.active].real / (2 * p_in))


# --------------------------------------------------------------------------
# Switched-pattern antenna


@dataclass(frozen=True, eq=False)
class PatternLibrary:
    """``K`` complex patterns tabulated on a regular (az, el) grid."""

    az: np.ndarray
    el: np.ndarray
    gains: np.ndarray  # (K, n_az, n_el)

    def __post_init__(self):
        az = np.asarray(self.az, dtype=float)
        el = np.asarray(self.el, dtype=float)
        g = np.asarray(self.gains, dtype=complex)
        if g.ndim != 3 or g.shape[1:] != (len(az), len(el)) or g.shape[0] < 1:
            raise ValueError("gains must have shape (K, n_az, n_el)")
        if np.any(np.diff(az) <= 0) or np.any(np.diff(el) <= 0):
            raise ValueError("pattern grids must be strictly increasing")
        if not np.all(np.isfinite(g)):
            raise ValueError("pattern gains must be finite")
        object.__setattr__(self, "az", az)
        object.__setattr__(self, "el", el)
        object.__setattr__(self, "gains", g)

    @property
    def size(self) -> int:
        return self.gains.shape[0]

    def evaluate(self, k: int, az, el, interpolate: bool = True) -> np.ndarray:
        az = np.atleast_1d(np.asarray(az, dtype=float))
        el = np.broadcast_to(np.atleast_1d(np.asarray(el, dtype=float)), az.shape)
        lo_a, hi_a, lo_e, hi_e = self.az[0], self.az[-1], self.el[0], self.el[-1]
        tol = 1e-12
        outside = (az < lo_a - tol) | (az > hi_a + tol) | (el < lo_e - tol) | (el > hi_e + tol)
        if np.any(outside):
            raise ValueError("direction outside the tabulated pattern domain")
        table = self.gains[k]
        if not interpolate:
            ia = np.searchsorted(self.az, az - tol)
            ie = np.searchsorted(self.el, el - tol)
            ia = np.minimum(ia, len(self.az) - 1)
            ie = np.minimum(ie, len(self.el) - 1)
            on_grid = (np.abs(self.az[ia] - az) <= tol) & (np.abs(self.el[ie] - el) <= tol)
            if not np.all(on_grid):
                raise ValueError("direction is off the pattern grid and interpolation is disabled")
            return table[ia, ie]
        az = np.clip(az, lo_a, hi_a)
        el = np.clip(el, lo_e, hi_e)
        if len(self.el) == 1:
            return np.interp(az, self.az, table[:, 0].real) + 1j * np.interp(
                az, self.az, table[:, 0].imag
            )
        pts = np.stack([az, el], axis=-1)
        re = RegularGridInterpolator((self.az, self.el), table.real)(pts)
        im = RegularGridInterpolator((self.az, self.el), table.imag)(pts)
        return re + 1j * im

    def to_tables(self) -> list[list[dict]]:
        tables = []
        for k in range(self.size):
            rows = []
            for i, a in enumerate(self.az):
                for j, e in enumerate(self.el):
                    g = self.gains[k, i, j]
                    rows.append({"az": float(a), "el": float(e),
                                 "gain_re": float(g.real), "gain_im": float(g.imag)})
            tables.append(rows)
        return tables

    @classmethod
    def from_tables(cls, tables: Sequence[Sequence[dict]]) -> "PatternLibrary":
        if not tables:
            raise ValueError("pattern library is empty")
        az = np.unique([r["az"] for r in tables[0]])
        el = np.unique([r["el"] for r in tables[0]])
        gains = np.full((len(tables), len(az), len(el)), np.nan + 0j)
        for k, rows in enumerate(tables):
            for r in rows:
                i = np.searchsorted(az, r["az"])
                j = np.searchsorted(el, r["el"])
                if i >= len(az) or az[i] != r["az"] or j >= len(el) or el[j] != r["el"]:
                    raise ValueError(f"pattern {k} is not on a shared regular grid")
                gains[k, i, j] = r["gain_re"] + 1j * r["gain_im"]
        if np.any(np.isnan(gains)):
            raise ValueError("pattern tables do not cover a full regular grid")
        return cls(az, el, gains)

    @classmethod
    def from_json(cls, path) -> "PatternLibrary":
        data = json.loads(Path(path).read_text())
        if isinstance(data, dict):
            data = data["patterns"]
        return cls.from_tables(data)

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps({"patterns": self.to_tables()}) + "\n")


def directional_library(n_patterns: int = 4, order: float = 4.0, n_az: int = 361) -> PatternLibrary:
    """Synthetic azimuth-only library of beams steered across [-pi/3, pi/3]."""
    az = np.linspace(-np.pi, np.pi, n_az)
    if n_patterns == 1:
        centers = np.zeros(1)
    else:
        centers = np.linspace(-np.pi / 3, np.pi / 3, n_patterns)
    amp = np.abs(np.cos((az[None, :] - centers[:, None]) / 2)) ** order
    amp *= np.sqrt(2.0)  # modest directivity of each beam
    return PatternLibrary(az, np.zeros(1), amp[:, :, None].astype(complex))


@dataclass(frozen=True, eq=False)
class SwitchedPatternConfig:
    library: PatternLibrary
    selected: int = 0
    insertion_loss_db: float = 0.0
    interpolate: bool = True

    def __post_init__(self):
        if not 0 <= self.selected < self.library.size:
            raise ValueError(f"selected pattern {self.selected} not in [0, {self.library.size})")
        if self.insertion_loss_db < 0:
            raise ValueError("insertion loss must be nonnegative")


def switched_pattern_response(cfg: SwitchedPatternConfig, az, el=0.0, position=(0.0, 0.0, 0.0)):
    """Selected pattern times ``sqrt(eta)`` times the element's spatial phase."""
    eta = 10 ** (-cfg.insertion_loss_db / 10)
    g = cfg.library.evaluate(cfg.selected, az, el, cfg.interpolate)
    phase = np.exp(2j * np.pi * (unit_vector(np.atleast_1d(az), np.atleast_1d(el)) @ np.asarray(position, float)))
    out = g * np.sqrt(eta) * phase
    return complex(out[0]) if np.ndim(az) == 0 and np.ndim(el) == 0 else out


# --------------------------------------------------------------------------
# Radiated power fraction


@functools.singledispatch
def radiated_power_fraction(cfg) -> float:
    """Fraction of the feed power that leaves the antenna as radiation."""
    eta = getattr(cfg, "eta", None)
    if eta is None:
        raise TypeError(f"no radiated-power model for {type(cfg).__name__}")
    return float(eta)


@radiated_power_fraction.register
def _(cfg: DmaConfig) -> float:
    # sum_n |w_n|^2 p_n: equals the guide efficiency 1 - (1-a)^N_s (or 1 when
    # the end slot radiates) scaled by the weight-magnitude loss.
    p = slot_power_fractions(cfg.leakage, cfg.slots, cfg.termination)
    return float(np.sum(np.abs(cfg.weights()) ** 2 * p))


@radiated_power_fraction.register
def _(cfg: EsparConfig) -> float:
    p_rad, p_in = espar_power(cfg)
    return float(p_rad / p_in)


@radiated_power_fraction.register
def _(cfg: SwitchedPatternConfig) -> float:
    return 10 ** (-cfg.insertion_loss_db / 10)


# --------------------------------------------------------------------------
# Array layers


def _block_matrix(coeff: np.ndarray) -> np.ndarray:
    """``(n_feed * k, n_feed)`` block-diagonal map from feed coefficients."""
    n_feed, k = coeff.shape
    m = np.zeros((n_feed * k, n_feed), dtype=complex)
    m[np.arange(n_feed * k), np.repeat(np.arange(n_feed), k)] = coeff.ravel()
    return m


class StaticArray:
    """Fixed isotropic elements, one per feed: the identity EM layer."""

    kind = "static"

    def __init__(self, geometry: ArrayGeometry):
        self.geometry = geometry

    @property
    def n_feed(self) -> int:
        return self.geometry.n_elements

    @property
    def n_elements(self) -> int:
        return self.geometry.n_elements

    n_tunable = 0
    control_bits = 0
    n_switched = 0
    eta = 1.0

    def response(self, az, el=0.0) -> np.ndarray:
        return steering_matrix(self.geometry, az, el)

    def feed_coefficients(self) -> np.ndarray:
        return np.ones((self.n_feed, 1), dtype=complex)

    def feed_matrix(self) -> np.ndarray:
        return np.eye(self.n_elements, dtype=complex)

    def state_sizes(self) -> tuple[int, ...]:
        return ()

    def state(self) -> tuple[int, ...]:
        return ()

    def with_state(self, state) -> "StaticArray":
        if len(state):
            raise ValueError("a static layer has no tuning state")
        return self

    def coordinate_feeds(self) -> list[int]:
        return []

    def check_feasible(self) -> None:
        return None

    def digest(self) -> str:
        return _digest("static", self.geometry.positions)


class DmaArray:
    """``n_feed`` waveguides, each with ``config.slots`` slots, sharing one config.

    ``geometry`` lists every slot position, feed-major. ``phases`` has shape
    ``(n_feed, slots)``; the config's own ``phases`` are ignored.
    """

    kind = "dma"

    def __init__(self, geometry: ArrayGeometry, config: DmaConfig, phases=None):
        if geometry.n_elements % config.slots:
            raise ValueError("slot count is not a multiple of slots per feed")
        self.geometry = geometry
        self.config = config
        n_feed = geometry.n_elements // config.slots
        if phases is None:
            phases = np.broadcast_to(np.asarray(config.phases), (n_feed, config.slots))
        phases = np.array(phases, dtype=float).reshape(n_feed, config.slots)
        if config.phase_bits is not None:
            phases = phase_grid(config.phase_bits)[phase_index(phases, config.phase_bits)]
        phases.setflags(write=False)
        self.phases = phases
        self._exc = dma_slot_excitations(config)
        self._coeff = lorentzian_weight(phases) * self._exc

    @classmethod
    def uniform(cls, n_feed: int, config: DmaConfig) -> "DmaArray":
        geom = ArrayGeometry.ula(n_feed * config.slots, config.spacing)
        return cls(geom, config)

    @property
    def n_feed(self) -> int:
        return self.phases.shape[0]

    @property
    def n_elements(self) -> int:
        return self.geometry.n_elements

    @property
    def n_tunable(self) -> int:
        return self.n_elements

    @property
    def control_bits(self) -> int:
        return self.config.phase_bits or 0

    n_switched = 0

    def feed_config(self, f: int) -> DmaConfig:
        return replace(self.config, phases=tuple(self.phases[f]))

    def weights(self) -> np.ndarray:
        return lorentzian_weight(self.phases)

    @property
    def eta(self) -> float:
        p = slot_power_fractions(self.config.leakage, self.config.slots, self.config.termination)
        return float(np.mean(np.abs(self.weights()) ** 2 @ p))

    def response(self, az, el=0.0) -> np.ndarray:
        a = steering_matrix(self.geometry, az, el)
        a = a.reshape(a.shape[0], self.n_feed, self.config.slots)
        return np.einsum("lfs,fs->lf", a, self._coeff)

    def feed_coefficients(self) -> np.ndarray:
        """Per-feed element weights, shape ``(n_feed, slots)``."""
        return self._coeff

    def feed_matrix(self) -> np.ndarray:
        return _block_matrix(self._coeff)

    def _levels(self) -> int:
        if self.config.phase_bits is None:
            raise ValueError("DMA phase_bits must be set for discrete search")
        return 2**self.config.phase_bits

    def state_sizes(self) -> tuple[int, ...]:
        return (self._levels(),) * self.n_elements

    def state(self) -> tuple[int, ...]:
        return tuple(int(i) for i in phase_index(self.phases, self.config.phase_bits).ravel())

    def with_state(self, state) -> "DmaArray":
        levels = self._levels()
        idx = np.asarray(state, dtype=int).reshape(self.n_feed, self.config.slots)
        return DmaArray(self.geometry, self.config, 2 * np.pi * idx / levels)

    def coordinate_feeds(self) -> list[int]:
        return [f for f in range(self.n_feed) for _ in range(self.config.slots)]

    def check_feasible(self) -> None:
        w = self.weights()
        if np.max(np.abs(w - 0.5j)) - 0.5 > CIRCLE_TOL or np.min(np.abs(w - 0.5j)) - 0.5 < -CIRCLE_TOL:
            raise AssertionError("DMA weight off the Lorentzian circle")
        if self.config.phase_bits is not None:
            grid = phase_grid(self.config.phase_bits)
            idx = phase_index(self.phases, self.config.phase_bits)
            if np.max(np.abs(grid[idx] - self.phases)) > 1e-12:
                raise AssertionError("DMA phase off the quantization grid")

    def digest(self) -> str:
        return _digest("dma", self.geometry.positions, repr(self.config), self.phases)


class EsparArray:
    """``n_feed`` identical parasitic arrays with discrete reactance loads."""

    kind = "espar"

    def __init__(
        self,
        geometry: ArrayGeometry,
        base: EsparConfig,
        reactance_levels: Sequence[float],
        reactances=None,
    ):
        k = base.n_elements
        if geometry.n_elements % k:
            raise ValueError("element count is not a multiple of elements per feed")
        self.geometry = geometry
        self.base = base
        self.levels = tuple(float(x) for x in reactance_levels)
        if not self.levels:
            raise ValueError("need at least one reactance level")
        n_feed = geometry.n_elements // k
        if reactances is None:
            reactances = np.broadcast_to(np.asarray(base.reactances), (n_feed, k - 1))
        self.reactances = np.array(reactances, dtype=float).reshape(n_feed, k - 1)
        self.configs = [replace(base, reactances=tuple(r)) for r in self.reactances]
        self._currents = np.array([espar_currents(c) * _espar_scale(c) for c in self.configs])

    @classmethod
    def uniform(cls, n_feed: int, elements_per_feed: int = 3, spacing: float = 0.25,
                bits: int = 2, max_reactance: float = 100.0, **kwargs) -> "EsparArray":
        z = synthetic_impedance(elements_per_feed, spacing)
        levels = np.linspace(-max_reactance, max_reactance, 2**bits)
        base = EsparConfig(z, (float(levels[0]),) * (elements_per_feed - 1), **kwargs)
        geom = ArrayGeometry.ula(n_feed * elements_per_feed, spacing)
        return cls(geom, base, levels)

    @property
    def n_feed(self) -> int:
        return len(self.configs)

    @property
    def n_elements(self) -> int:
        return self.geometry.n_elements

    @property
    def n_tunable(self) -> int:
        return self.reactances.size

    @property
    def control_bits(self) -> int:
        return max(1, math.ceil(math.log2(len(self.levels)))) if len(self.levels) > 1 else 0

    n_switched = 0

    @property
    def eta(self) -> float:
        return float(np.mean([radiated_power_fraction(c) for c in self.configs]))

    def response(self, az, el=0.0) -> np.ndarray:
        a = steering_matrix(self.geometry, az, el)
        k = self.base.n_elements
        a = a.reshape(a.shape[0], self.n_feed, k)
        return np.einsum("lfk,fk->lf", a, self._currents)

    def feed_coefficients(self) -> np.ndarray:
        return self._currents

    def feed_matrix(self) -> np.ndarray:
        return _block_matrix(self._currents)

    def state_sizes(self) -> tuple[int, ...]:
        return (len(self.levels),) * self.n_tunable

    def state(self) -> tuple[int, ...]:
        lv = np.asarray(self.levels)
        return tuple(int(np.argmin(np.abs(lv - x))) for x in self.reactances.ravel())

    def with_state(self, state) -> "EsparArray":
        x = np.asarray(self.levels)[np.asarray(state, dtype=int)]
        return EsparArray(self.geometry, self.base, self.levels, x)

    def coordinate_feeds(self) -> list[int]:
        return [f for f in range(self.n_feed) for _ in range(self.base.n_elements - 1)]

    def check_feasible(self) -> None:
        lv = np.asarray(self.levels)
        if not np.all(np.isin(self.reactances, lv)):
            raise AssertionError("reactance off the discrete load set")

    def digest(self) -> str:
        return _digest("espar", self.geometry.positions, self.base.impedance, self.reactances)


class SwitchedArray:
    """One switched-pattern element per feed."""

    kind = "switched"

    def __init__(self, geometry: ArrayGeometry, library: PatternLibrary,
                 selected=None, insertion_loss_db: float = 1.0, interpolate: bool = True):
        self.geometry = geometry
        self.library = library
        if selected is None:
            selected = np.zeros(geometry.n_elements, dtype=int)
        self.selected = np.asarray(selected, dtype=int).reshape(geometry.n_elements)
        self.insertion_loss_db = insertion_loss_db
        self.interpolate = interpolate
        self.configs = [
            SwitchedPatternConfig(library, int(k), insertion_loss_db, interpolate)
            for k in self.selected
        ]

    @property
    def n_feed(self) -> int:
        return self.geometry.n_elements

    @property
    def n_elements(self) -> int:
        return self.geometry.n_elements

    @property
    def n_tunable(self) -> int:
        return self.n_feed

    @property
    def n_switched(self) -> int:
        return self.n_feed

    @property
    def control_bits(self) -> int:
        return math.ceil(math.log2(self.library.size)) if self.library.size > 1 else 0

    @property
    def eta(self) -> float:
        return 10 ** (-self.insertion_loss_db / 10)

    def response(self, az, el=0.0) -> np.ndarray:
        az = np.atleast_1d(az)
        el = np.broadcast_to(np.atleast_1d(el), az.shape)
        pats = np.stack(
            [self.library.evaluate(k, az, el, self.interpolate) for k in range(self.library.size)],
            axis=-1,
        )  # (L, K)
        g = pats[:, self.selected] * np.sqrt(self.eta)
        return g * steering_matrix(self.geometry, az, el)

    def feed_coefficients(self):
        return None

    def feed_matrix(self):
        return None

    def state_sizes(self) -> tuple[int, ...]:
        return (self.library.size,) * self.n_feed

    def state(self) -> tuple[int, ...]:
        return tuple(int(k) for k in self.selected)

    def with_state(self, state) -> "SwitchedArray":
        return SwitchedArray(self.geometry, self.library, state,
                             self.insertion_loss_db, self.interpolate)

    def coordinate_feeds(self) -> list[int]:
        return list(range(self.n_feed))

    def check_feasible(self) -> None:
        if np.any((self.selected < 0) | (self.selected >= self.library.size)):
            raise AssertionError("pattern index out of range")

    def digest(self) -> str:
        return _digest("switched", self.geometry.positions, self.library.gains, self.selected)
