"""Digital and analog precoding layers and the three-layer stack.

Power convention: the feed-domain precoder ``F = F_A F_D`` satisfies
``||F||_F^2 = n_streams``. Losses of the EM layer are carried by the effective
channel (its responses already include slot excitation and weight magnitude),
so the stack itself never rescales for them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .em import StaticArray, phase_grid, phase_index

KINDS = ("digital", "hybrid", "tri-hybrid")
CONNECTIVITY = ("fully-connected", "subarray")


@dataclass(frozen=True)
class ArchitectureSpec:
    """Transmitter architecture.

    ``n_rf`` is the number of RF chains (logical ports), ``n_feed`` the number
    of physical antenna ports. ``em`` is the EM layer driving the feeds; ``None``
    means static isotropic elements. ``analog=False`` replaces the phase
    shifters of a tri-hybrid array by a fixed in-phase split.
    """

    kind: str
    n_streams: int
    n_rf: int
    n_feed: int
    connectivity: str = "fully-connected"
    phase_bits: int | None = 2
    analog: bool = True
    em: Any = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown architecture kind {self.kind!r}")
        if self.connectivity not in CONNECTIVITY:
            raise ValueError(f"unknown connectivity {self.connectivity!r}")
        if not 1 <= self.n_streams <= self.n_rf <= self.n_feed:
            raise ValueError(
                f"need 1 <= n_streams <= n_rf <= n_feed, got "
                f"{self.n_streams}, {self.n_rf}, {self.n_feed}"
            )
        if self.kind == "digital":
            if self.n_rf != self.n_feed:
                raise ValueError("a digital array has one RF chain per feed")
            if self.em is not None and getattr(self.em, "kind", None) != "static":
                raise ValueError("a digital array uses the static EM layer")
        if self.connectivity == "subarray" and self.n_feed % self.n_rf:
            raise ValueError("subarray connectivity needs n_feed divisible by n_rf")
        if self.phase_bits is not None and self.phase_bits < 1:
            raise ValueError("phase_bits must be >= 1")
        if self.em is not None and self.em.n_feed != self.n_feed:
            raise ValueError(f"EM layer has {self.em.n_feed} feeds, architecture {self.n_feed}")
        if self.kind == "hybrid" and self.em is not None and self.em.kind != "static":
            raise ValueError("a hybrid array uses the static EM layer")

    @property
    def label(self) -> str:
        return self.name or self.kind

    @property
    def has_phase_shifters(self) -> bool:
        return self.kind == "hybrid" or (self.kind == "tri-hybrid" and self.analog)

    def support(self) -> np.ndarray:
        """Boolean ``(n_feed, n_rf)`` mask of analog connections."""
        if self.kind == "digital":
            return np.eye(self.n_feed, dtype=bool)
        if self.connectivity == "fully-connected":
            return np.ones((self.n_feed, self.n_rf), dtype=bool)
        per = self.n_feed // self.n_rf
        mask = np.zeros((self.n_feed, self.n_rf), dtype=bool)
        for r in range(self.n_rf):
            mask[r * per:(r + 1) * per, r] = True
        return mask

    def em_layer(self, geometry=None):
        if self.em is not None:
            return self.em
        if geometry is None:
            raise ValueError("static architecture needs an element geometry")
        return StaticArray(geometry)


@dataclass(frozen=True, eq=False)
class PrecoderStack:
    digital: np.ndarray  # (n_rf, n_streams)
    analog: np.ndarray  # (n_feed, n_rf)
    em: Any = None

    @property
    def n_streams(self) -> int:
        return self.digital.shape[1]


def quantize_phases(analog: np.ndarray, bits: int) -> np.ndarray:
    """Snap every nonzero entry to the nearest ``exp(j 2 pi k / 2**bits)``.

    Exact zeros (off-support entries) stay zero. Idempotent.
    """
    a = np.asarray(analog, dtype=complex)
    grid = phase_grid(bits)
    out = np.exp(1j * grid[phase_index(np.angle(a), bits)])
    return np.where(a == 0, 0, out)


def waterfilling(gains, total_power: float, noise: float = 1.0) -> np.ndarray:
    """Capacity-achieving powers ``p_k = max(0, mu - N0 / sigma_k^2)``.

    ``gains`` are channel amplitude gains sigma_k (not powers).
    """
    s = np.asarray(gains, dtype=float).reshape(-1)
    if s.size == 0:
        raise ValueError("waterfilling needs at least one channel")
    if np.any(s <= 0):
        raise ValueError("channel gains must be positive")
    if not total_power > 0:
        raise ValueError("total power must be positive")
    floor = noise / s**2
    order = np.argsort(floor, kind="stable")
    f = floor[order]
    for k in range(len(f), 0, -1):
        mu = (total_power + f[:k].sum()) / k
        if mu > f[k - 1]:
            break
    p = np.zeros_like(s)
    p[order[:k]] = mu - f[:k]
    return p


def waterfilled_rate(gains, total_power: float, noise: float = 1.0) -> float:
    s = np.asarray(gains, dtype=float)
    s = s[s > 1e-12 * max(1.0, s.max(initial=0.0))]
    if s.size == 0:
        return 0.0
    p = waterfilling(s, total_power, noise)
    return float(np.sum(np.log2(1 + p * s**2 / noise)))


def compose_stack(spec: ArchitectureSpec, stack: PrecoderStack) -> np.ndarray:
    """Feed-domain precoder ``F_A F_D`` scaled to ``||F||_F^2 = n_streams``."""
    fd = np.asarray(stack.digital, dtype=complex)
    if spec.kind == "digital":
        f = fd
    else:
        fa = np.asarray(stack.analog, dtype=complex)
        if fa.shape != (spec.n_feed, spec.n_rf):
            raise ValueError(f"analog precoder shape {fa.shape} != {(spec.n_feed, spec.n_rf)}")
        bad = np.argwhere((fa != 0) & ~spec.support())
        if len(bad):
            raise ValueError(f"nonzero analog entries off the connectivity support at {bad.tolist()}")
        f = fa @ fd
    if f.shape[0] != spec.n_feed:
        raise ValueError(f"precoder has {f.shape[0]} rows, expected {spec.n_feed}")
    norm = np.linalg.norm(f)
    if norm == 0:
        raise ValueError("precoder is identically zero")
    return f * np.sqrt(f.shape[1]) / norm


def _rank(s: np.ndarray) -> int:
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > s[0] * max(s.shape) * 1e-12))


def svd_digital_precoder(h: np.ndarray, n_streams: int, power: float, noise: float) -> PrecoderStack:
    """Right singular vectors with water-filled powers (fully digital)."""
    u, s, vh = np.linalg.svd(np.asarray(h, dtype=complex))
    if _rank(s) < n_streams:
        raise ValueError(f"channel rank {_rank(s)} is below n_streams={n_streams}")
    s = s[:n_streams]
    p = waterfilling(s, power, noise)
    f = vh.conj().T[:, :n_streams] * np.sqrt(n_streams * p / power)
    return PrecoderStack(f, np.eye(h.shape[1], dtype=complex))


def best_digital(h: np.ndarray, analog: np.ndarray, n_streams: int, power: float, noise: float):
    """Optimal digital precoder for a fixed analog precoder.

    Returns ``(F_D, rate)``. The optimum over ``F_D`` with
    ``||F_A F_D||^2 = n_streams`` is the water-filled capacity of ``H`` restricted
    to the column span of ``F_A``.
    """
    fa = np.asarray(analog, dtype=complex)
    uq, sq, _ = np.linalg.svd(fa, full_matrices=False)
    r = _rank(sq)
    q = uq[:, :r]
    _, s, vh = np.linalg.svd(h @ q, full_matrices=False)
    k = min(n_streams, r, len(s))
    s = s[:k]
    keep = s > 1e-12 * max(1.0, s.max(initial=0.0))
    fd_cols = np.zeros((fa.shape[0], n_streams), dtype=complex)
    rate = 0.0
    if np.any(keep):
        p = np.zeros(k)
        p[keep] = waterfilling(s[keep], power, noise)
        rate = float(np.sum(np.log2(1 + p * s**2 / noise)))
        fd_cols[:, :k] = q @ vh.conj().T[:, :k] * np.sqrt(n_streams * p / power)
    else:
        fd_cols[:, 0] = q[:, 0] * np.sqrt(n_streams)
    fd = np.linalg.pinv(fa) @ fd_cols
    return fd, rate


def span_rate(h: np.ndarray, analog: np.ndarray, n_streams: int, power: float, noise: float) -> float:
    """Rate of :func:`best_digital` without forming the precoder."""
    uq, sq, _ = np.linalg.svd(np.asarray(analog, dtype=complex), full_matrices=False)
    q = uq[:, :_rank(sq)]
    s = np.linalg.svd(h @ q, compute_uv=False)[:n_streams]
    return waterfilled_rate(s, power, noise)


def channel_capacity(h: np.ndarray, n_streams: int, power: float, noise: float) -> float:
    """Water-filled rate over the top ``n_streams`` eigenmodes of ``h``."""
    s = np.linalg.svd(np.asarray(h, dtype=complex), compute_uv=False)[:n_streams]
    return waterfilled_rate(s, power, noise)
