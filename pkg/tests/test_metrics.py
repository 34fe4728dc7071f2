from dataclasses import asdict, replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trihybrid.em import DmaArray, DmaConfig, EsparArray, SwitchedArray, directional_library
from trihybrid.geometry import ArrayGeometry
from trihybrid.metrics import PowerBreakdown, PowerCatalog, energy_efficiency, power_total, spectral_efficiency
from trihybrid.precoding import ArchitectureSpec

ZERO = PowerCatalog(**{k: 0.0 for k in asdict(PowerCatalog())})


def test_se_scalar():
    assert spectral_efficiency(np.array([[1.0]]), np.array([[1.0]]), 1.0, 1.0) == pytest.approx(1.0)


def test_se_zero_channel():
    assert spectral_efficiency(np.zeros((2, 3)), np.ones((3, 1)), 1.0, 5.0) == 0.0


def test_se_identity_two_streams():
    se = spectral_efficiency(np.eye(2), np.eye(2), 1.0, 2.0)
    assert se == pytest.approx(2.0)


def test_se_rejects_bad_inputs():
    with pytest.raises(ValueError):
        spectral_efficiency(np.array([[np.inf]]), np.ones((1, 1)), 1.0, 1.0)
    with pytest.raises(ValueError):
        spectral_efficiency(np.ones((1, 1)), np.ones((1, 1)), 0.0, 1.0)


def test_se_eta_scales_snr():
    h, f = np.array([[2.0]]), np.array([[1.0]])
    assert spectral_efficiency(h, f, 1.0, 1.0, eta=0.25) == pytest.approx(1.0)


@given(seed=st.integers(0, 10**6), p1=st.floats(1e-3, 1e3), p2=st.floats(1e-3, 1e3))
def test_se_monotone_in_power(seed, p1, p2):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    f = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    lo, hi = sorted((p1, p2))
    assert spectral_efficiency(h, f, 1.0, lo) <= spectral_efficiency(h, f, 1.0, hi) + 1e-12


# ---- consumed power -----------------------------------------------------

def test_zero_catalog():
    spec = ArchitectureSpec("hybrid", 2, 2, 8)
    assert power_total(spec, ZERO).total == 0.0


def test_digital_chain_cost():
    spec = ArchitectureSpec("digital", 1, 4, 4, phase_bits=None)
    assert power_total(spec, replace(ZERO, rf_chain=1.0)).total == pytest.approx(4.0)


def test_catalog_rejects_negative():
    with pytest.raises(ValueError, match="pa"):
        PowerCatalog(pa=-1.0)


def dma_tri(n_elements, slots=4, bits=3, conn="fully-connected", n_rf=4):
    em = DmaArray.uniform(n_elements // slots, DmaConfig(slots, 0.5, phase_bits=bits))
    return ArchitectureSpec("tri-hybrid", min(4, n_rf), n_rf, n_elements // slots, conn, 2, em=em)


def hand_total(kind, n_feed, n_rf, c, conn="fully-connected", tunable=0, bits=0, switched=0):
    chains = n_feed if kind == "digital" else n_rf
    total = c.common + c.lo + chains * (c.rf_chain + 2 * c.dac) + n_feed * c.pa
    if kind != "digital":
        total += (n_rf * n_feed if conn == "fully-connected" else n_feed) * c.phase_shifter
    return total + tunable * bits * c.em_control_per_bit + switched * c.switch


def test_totals_match_hand_arithmetic():
    c = PowerCatalog()
    cases = [
        (ArchitectureSpec("digital", 4, 16, 16, phase_bits=None), ("digital", 16, 16, c)),
        (ArchitectureSpec("hybrid", 4, 4, 16), ("hybrid", 16, 4, c)),
        (ArchitectureSpec("hybrid", 4, 4, 16, "subarray"), ("hybrid", 16, 4, c, "subarray")),
        (dma_tri(64), ("tri", 16, 4, c, "fully-connected", 64, 3)),
    ]
    for spec, args in cases:
        assert power_total(spec, c).total == pytest.approx(hand_total(*args), rel=1e-12)


def test_tri_without_phase_shifters():
    em = DmaArray.uniform(4, DmaConfig(2, 0.5, phase_bits=1))
    spec = ArchitectureSpec("tri-hybrid", 1, 1, 4, analog=False, em=em)
    assert power_total(spec, PowerCatalog()).terms["phase_shifters"] == 0


def test_switched_elements_pay_switch_cost():
    em = SwitchedArray(ArrayGeometry.ula(4), directional_library(4))
    spec = ArchitectureSpec("tri-hybrid", 1, 2, 4, em=em)
    terms = power_total(spec, replace(ZERO, switch=1.0, em_control_per_bit=0.5)).terms
    assert terms["switches"] == 4.0
    assert terms["em_control"] == 4 * 2 * 0.5


def test_espar_control_cost():
    em = EsparArray.uniform(2, 3, bits=2)
    spec = ArchitectureSpec("tri-hybrid", 1, 1, 2, em=em)
    assert power_total(spec, replace(ZERO, em_control_per_bit=1.0)).total == 4 * 2


def test_ordering_at_256_elements():
    c = PowerCatalog()
    dig = power_total(ArchitectureSpec("digital", 4, 256, 256, phase_bits=None), c).total
    hyb = power_total(ArchitectureSpec("hybrid", 4, 4, 256), c).total
    tri = power_total(dma_tri(256), c).total
    assert tri < hyb < dig


catalogs = st.builds(PowerCatalog, *[st.floats(0, 2) for _ in range(8)])


@given(cat=catalogs, key=st.sampled_from(list(asdict(PowerCatalog()))), k=st.floats(0, 5))
def test_breakdown_additive_nonnegative_linear(cat, key, k):
    spec = dma_tri(32, slots=2, conn="subarray")
    b = power_total(spec, cat)
    assert b.total == sum(b.terms.values())
    assert all(v >= 0 for v in b.terms.values())
    # total is affine in each entry: f(x + k) - f(x) == k * (f(1) - f(0))
    base = asdict(cat)
    f = lambda v: power_total(spec, PowerCatalog(**{**base, key: v})).total
    assert f(base[key] + k) - f(base[key]) == pytest.approx(k * (f(1.0) - f(0.0)), abs=1e-9)


# ---- energy efficiency ----------------------------------------------------

def test_ee_unit():
    assert energy_efficiency(1.0, 1.0, PowerBreakdown("x", {"a": 1.0})) == 1.0


def test_ee_halves_with_double_power():
    assert energy_efficiency(3.0, 10.0, 2.0) == pytest.approx(energy_efficiency(3.0, 10.0, 1.0) / 2)


def test_ee_rejects_zero_power():
    with pytest.raises(ValueError):
        energy_efficiency(1.0, 1.0, PowerBreakdown("x", {"a": 0.0}))


@given(se=st.floats(0, 50), w=st.floats(1, 1e9), p=st.floats(1e-3, 1e3))
def test_ee_definition_closure(se, w, p):
    assert energy_efficiency(se, w, p) * p == pytest.approx(se * w, rel=1e-12)
