"""Spectral efficiency, component power consumption and energy efficiency."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .precoding import ArchitectureSpec


def spectral_efficiency(h: np.ndarray, precoder: np.ndarray, noise: float, power: float,
                        eta: float = 1.0) -> float:
    """Gaussian-signalling rate in bits/s/Hz.

    ``log2 det(I + eta P / (N_s N0) H F F^H H^H)`` where ``F`` is the composed
    feed-domain precoder (``N_s`` columns).
    """
    h = np.asarray(h, dtype=complex)
    f = np.asarray(precoder, dtype=complex)
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(f))):
        raise ValueError("channel and precoder entries must be finite")
    if not noise > 0:
        raise ValueError("noise power must be positive")
    if h.shape[1] != f.shape[0]:
        raise ValueError(f"channel has {h.shape[1]} feeds, precoder {f.shape[0]} rows")
    hf = h @ f
    gram = hf @ hf.conj().T
    lam = np.linalg.eigvalsh(gram * (eta * power / (f.shape[1] * noise)))
    return float(max(0.0, np.sum(np.log2(1 + np.clip(lam, 0, None)))))


@dataclass(frozen=True)
class PowerCatalog:
    """Per-component power draw in watts.

    Defaults are representative values for an upper-midband transmitter, not
    a calibration; comparisons built on them are ordering-level only.
    """

    lo: float = 0.0225
    rf_chain: float = 0.040
    dac: float = 0.050
    phase_shifter: float = 0.0216
    pa: float = 0.050
    switch: float = 0.005
    em_control_per_bit: float = 0.0005
    common: float = 0.200

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v >= 0:
                raise ValueError(f"power entry {k} must be nonnegative, got {v}")


@dataclass(frozen=True)
class PowerBreakdown:
    architecture: str
    terms: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return sum(self.terms.values())


def power_total(spec: ArchitectureSpec, catalog: PowerCatalog) -> PowerBreakdown:
    """Additive consumed-power model of one transmitter."""
    chains = spec.n_feed if spec.kind == "digital" else spec.n_rf
    if not spec.has_phase_shifters:
        shifters = 0
    elif spec.connectivity == "fully-connected":
        shifters = spec.n_rf * spec.n_feed
    else:
        shifters = spec.n_feed
    em = spec.em if spec.kind == "tri-hybrid" else None
    tunable = em.n_tunable if em is not None else 0
    bits = em.control_bits if em is not None else 0
    switched = em.n_switched if em is not None else 0
    terms = {
        "common": catalog.common,
        "lo": catalog.lo,
        "rf_chains": chains * catalog.rf_chain,
        "dacs": 2 * chains * catalog.dac,
        "pas": spec.n_feed * catalog.pa,
        "phase_shifters": shifters * catalog.phase_shifter,
        "em_control": tunable * bits * catalog.em_control_per_bit,
        "switches": switched * catalog.switch,
    }
    return PowerBreakdown(spec.label, terms)


def energy_efficiency(se: float, bandwidth: float, breakdown) -> float:
    """Bits per joule, ``SE * W / P_total``."""
    total = breakdown.total if isinstance(breakdown, PowerBreakdown) else float(breakdown)
    if not total > 0:
        raise ValueError("consumed power must be positive")
    return se * bandwidth / total
