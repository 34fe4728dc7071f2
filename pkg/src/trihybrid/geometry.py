"""Array geometries, geometric multipath and effective-channel assembly.

Positions are expressed in carrier wavelengths. Directions are (azimuth,
elevation) pairs in radians; azimuth is measured from array boresight, so for a
linear array along x the broadside direction is ``az = 0`` and endfire is
``az = pi/2``::

    u(az, el) = (sin(az) cos(el), cos(az) cos(el), sin(el))

The channel is narrowband and far-field. The propagation part (``PathSet``)
never depends on the reconfigurable antenna state; the transmit side enters
only through a per-direction feed response supplied by the EM layer.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

TOPOLOGIES = ("ula", "upa")


def unit_vector(az, el=0.0) -> np.ndarray:
    """Unit propagation vector(s); shape ``(..., 3)``."""
    az = np.asarray(az, dtype=float)
    el = np.asarray(el, dtype=float)
    az, el = np.broadcast_arrays(az, el)
    return np.stack(
        [np.sin(az) * np.cos(el), np.cos(az) * np.cos(el), np.sin(el)], axis=-1
    )


@dataclass(eq=False)
class ArrayGeometry:
    """Element positions of an array, in wavelengths.

    Use :meth:`ula` or :meth:`upa` rather than building one by hand; the
    constructor only validates.
    """

    positions: np.ndarray
    spacing: float
    topology: str = "ula"

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError(f"positions must have shape (N, 3), got {pos.shape}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if len(pos) > 1:
            diff = pos[:, None, :] - pos[None, :, :]
            dist = np.linalg.norm(diff, axis=-1) + np.eye(len(pos))
            if np.any(dist <= 0):
                raise ValueError("element positions must be pairwise distinct")
        if self.topology == "ula":
            expected = np.zeros_like(pos)
            expected[:, 0] = np.arange(len(pos)) * self.spacing
            if not np.array_equal(pos, expected):
                raise ValueError("ULA positions must be n * spacing along x")
        pos.setflags(write=False)
        self.positions = pos

    @classmethod
    def ula(cls, n: int, spacing: float = 0.5) -> "ArrayGeometry":
        if n < 1:
            raise ValueError("an array needs at least one element")
        pos = np.zeros((n, 3))
        pos[:, 0] = np.arange(n) * spacing
        return cls(pos, spacing, "ula")

    @classmethod
    def upa(cls, nx: int, nz: int, spacing: float = 0.5) -> "ArrayGeometry":
        """Planar array in the x-z plane (boresight along +y)."""
        if nx < 1 or nz < 1:
            raise ValueError("an array needs at least one element")
        ix, iz = np.meshgrid(np.arange(nx), np.arange(nz), indexing="ij")
        pos = np.zeros((nx * nz, 3))
        pos[:, 0] = ix.ravel() * spacing
        pos[:, 2] = iz.ravel() * spacing
        return cls(pos, spacing, "upa")

    @property
    def n_elements(self) -> int:
        return len(self.positions)

    def __len__(self):
        return self.n_elements

    def __eq__(self, other):
        if not isinstance(other, ArrayGeometry):
            return NotImplemented
        return (
            self.topology == other.topology
            and self.spacing == other.spacing
            and np.array_equal(self.positions, other.positions)
        )


def steering_matrix(geometry: ArrayGeometry, az, el=0.0) -> np.ndarray:
    """Array responses for many directions; shape ``(n_directions, N)``."""
    u = unit_vector(np.atleast_1d(az), np.atleast_1d(el))
    return np.exp(2j * np.pi * (u @ geometry.positions.T))


def steering_vector(geometry: ArrayGeometry, direction) -> np.ndarray:
    """Unit-modulus response ``exp(j 2 pi <r_n, u>)`` for one direction.

    ``direction`` is ``(az, el)`` or a bare azimuth.
    """
    if np.ndim(direction) == 0:
        az, el = float(direction), 0.0
    else:
        az, el = direction
    return steering_matrix(geometry, az, el)[0]


@dataclass(frozen=True)
class GainProfile:
    """Settings of the random multipath generator (angle ranges in radians)."""

    aod_az: tuple[float, float] = (-np.pi / 2, np.pi / 2)
    aod_el: tuple[float, float] = (0.0, 0.0)
    aoa_az: tuple[float, float] = (-np.pi / 2, np.pi / 2)
    aoa_el: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ("aod_az", "aoa_az"):
            lo, hi = getattr(self, name)
            if not -np.pi <= lo <= hi <= np.pi:
                raise ValueError(f"{name} must lie within [-pi, pi]")
        for name in ("aod_el", "aoa_el"):
            lo, hi = getattr(self, name)
            if not -np.pi / 2 <= lo <= hi <= np.pi / 2:
                raise ValueError(f"{name} must lie within [-pi/2, pi/2]")


@dataclass(frozen=True, eq=False)
class PathSet:
    gains: np.ndarray
    aod_az: np.ndarray
    aod_el: np.ndarray
    aoa_az: np.ndarray
    aoa_el: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("gains", "aod_az", "aod_el", "aoa_az", "aoa_el"):
            dtype = complex if name == "gains" else float
            a = np.array(getattr(self, name), dtype=dtype).reshape(-1)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        n = len(arrays["gains"])
        if n < 1:
            raise ValueError("a PathSet needs at least one path")
        if any(len(a) != n for a in arrays.values()):
            raise ValueError("all path descriptors must have the same length")
        if not np.all(np.isfinite(arrays["gains"])):
            raise ValueError("path gains must be finite")
        for name in ("aod_az", "aoa_az"):
            if np.any(np.abs(arrays[name]) > np.pi):
                raise ValueError(f"{name} outside [-pi, pi]")
        for name in ("aod_el", "aoa_el"):
            if np.any(np.abs(arrays[name]) > np.pi / 2):
                raise ValueError(f"{name} outside [-pi/2, pi/2]")

    def __len__(self):
        return len(self.gains)

    def __eq__(self, other):
        if not isinstance(other, PathSet):
            return NotImplemented
        return self.digest() == other.digest()

    def scaled(self, c: complex) -> "PathSet":
        return PathSet(self.gains * c, self.aod_az, self.aod_el, self.aoa_az, self.aoa_el)

    def digest(self) -> str:
        h = hashlib.sha256()
        for a in (self.gains, self.aod_az, self.aod_el, self.aoa_az, self.aoa_el):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()[:16]

    def to_records(self) -> list[dict]:
        return [
            {
                "gain_re": float(g.real),
                "gain_im": float(g.imag),
                "aod_az": float(a),
                "aod_el": float(b),
                "aoa_az": float(c),
                "aoa_el": float(d),
            }
            for g, a, b, c, d in zip(
                self.gains, self.aod_az, self.aod_el, self.aoa_az, self.aoa_el
            )
        ]

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> "PathSet":
        keys = ("gain_re", "gain_im", "aod_az", "aod_el", "aoa_az", "aoa_el")
        for i, r in enumerate(records):
            missing = [k for k in keys if k not in r]
            extra = sorted(set(r) - set(keys))
            if missing or extra:
                raise ValueError(f"path record {i}: missing {missing}, unknown {extra}")
        col = {k: np.array([r[k] for r in records], dtype=float) for k in keys}
        return cls(
            col["gain_re"] + 1j * col["gain_im"],
            col["aod_az"],
            col["aod_el"],
            col["aoa_az"],
            col["aoa_el"],
        )

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_records(), indent=1) + "\n")

    @classmethod
    def load_json(cls, path) -> "PathSet":
        return cls.from_records(json.loads(Path(path).read_text()))


def draw_paths(seed: int, n_paths: int, profile: GainProfile | None = None) -> PathSet:
    """Random geometric multipath.

    Gains are i.i.d. CN(0, 1/L) so that E[sum |alpha_l|^2] = 1; angles are
    uniform on the ranges of ``profile``.
    """
    if n_paths < 1:
        raise ValueError(f"need at least one path, got L={n_paths}")
    profile = profile or GainProfile()
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(
        2 * n_paths
    )
    ang = [rng.uniform(*getattr(profile, k), size=n_paths)
           for k in ("aod_az", "aod_el", "aoa_az", "aoa_el")]
    return PathSet(g, *ang)


@dataclass(frozen=True, eq=False)
class EffectiveChannel:
    """Channel between the physical transmit feeds and the receive array."""

    matrix: np.ndarray
    paths_id: str
    em_id: str = "static"

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("effective channel has non-finite entries")

    @property
    def shape(self):
        return self.matrix.shape


def assemble_effective_channel(
    paths: PathSet,
    rx: ArrayGeometry,
    tx_response: Callable[[float, float], np.ndarray],
    em_id: str = "static",
) -> EffectiveChannel:
    """H_eff = sum_l alpha_l a_rx(aoa_l) g(aod_l)^T.

    ``tx_response(az, el)`` returns the length-N_feed directional response of
    the transmit EM layer for one departure direction.
    """
    rows = [np.asarray(tx_response(a, e), dtype=complex).reshape(-1)
            for a, e in zip(paths.aod_az, paths.aod_el)]
    sizes = {len(r) for r in rows}
    if len(sizes) != 1:
        raise ValueError(f"EM response length varies across directions: {sorted(sizes)}")
    g = np.stack(rows)  # (L, N_feed)
    a_rx = steering_matrix(rx, paths.aoa_az, paths.aoa_el)  # (L, N_rx)
    h = (a_rx.T * paths.gains) @ g
    return EffectiveChannel(h, paths.digest(), em_id)


def propagation_matrix(paths: PathSet, rx: ArrayGeometry, elements: ArrayGeometry) -> np.ndarray:
    """Channel from isotropic radiating elements to the receiver, ``(N_rx, M)``."""
    a_rx = steering_matrix(rx, paths.aoa_az, paths.aoa_el)
    a_tx = steering_matrix(elements, paths.aod_az, paths.aod_el)
    return (a_rx.T * paths.gains) @ a_tx
