"""Acceptance criteria 1-8, each at its stated tolerance and time limit.

A summary line per criterion is printed at the end of the pytest run.
"""

import hashlib
import json
import time
from pathlib import Path

import numpy as np
import pytest

from trihybrid import cli
from trihybrid.config import ScenarioConfig, validate_scenario
from trihybrid.em import (
    EsparConfig,
    espar_power,
    lorentzian_weight,
    slot_power_fractions,
    synthetic_impedance,
)
from trihybrid.experiments import (
    dma_coefficient_map,
    ee_se_frontier,
    first_exceedance,
    map_grid,
    phase_sensitivity,
    sweep_aperture,
    toy_problem,
)
from trihybrid.optimize import (
    TIE_RTOL,
    AnnealSchedule,
    exhaustive_search,
    random_search_baseline,
    simulated_annealing,
)
from trihybrid.precoding import waterfilling

DEFAULT = ScenarioConfig()


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def powers(result, n):
    return {r[1]: r[2] for r in result.rows if r[0] == n}


@pytest.mark.criterion(1, "power ordering and growing digital/tri-hybrid gap")
def test_power_ordering():
    with Timer() as t:
        ns = [16, 64, 256, 1024]
        res = sweep_aperture(DEFAULT, ns, compute_se=False)
        gap = []
        for n in ns:
            p = powers(res, n)
            if n >= 64:
                assert p["tri-hybrid"] < p["hybrid"] < p["digital"], (n, p)
            gap.append(p["digital"] - p["tri-hybrid"])
        assert all(b > a for a, b in zip(gap, gap[1:])), gap
    assert t.elapsed < 1.0


@pytest.mark.criterion(2, "10 W crossing order digital < hybrid < tri-hybrid")
def test_ten_watt_order():
    with Timer() as t:
        first = first_exceedance(sweep_aperture(DEFAULT, compute_se=False), 10.0)
        assert first["digital"] < first["hybrid"] < first["tri-hybrid"], first
    assert t.elapsed < 1.0


@pytest.fixture(scope="module")
def toy_optima():
    """Exhaustive SE of the three toy architectures on 20 channels."""
    with Timer() as t:
        out = {name: [exhaustive_search(toy_problem(name, s)).objective for s in range(20)]
               for name in ("digital", "hybrid", "tri-hybrid")}
    return out, t.elapsed


@pytest.mark.criterion(3, "constraint nesting SE_dig >= SE_hyb >= SE_tri on 20 channels")
def test_constraint_nesting(toy_optima):
    se, elapsed = toy_optima
    slack = 1 + TIE_RTOL
    violations = [s for s in range(20)
                  if not se["digital"][s] * slack >= se["hybrid"][s]
                  or not se["hybrid"][s] * slack >= se["tri-hybrid"][s]]
    assert violations == []
    assert elapsed < 300


@pytest.mark.criterion(4, "EE/SE frontier geometry of the default scenario")
def test_frontier_geometry():
    with Timer() as t:
        res = ee_se_frontier(DEFAULT)
    for p in DEFAULT.experiment.tx_power_list:
        pts = {r[1]: r for r in res.rows if r[0] == p}
        se = {k: v[2] for k, v in pts.items()}
        ee = {k: v[3] for k, v in pts.items()}
        assert ee["dma-only"] > ee["tri-hybrid"] > ee["hybrid"] > ee["digital"], (p, ee)
        assert se["digital"] >= se["hybrid"] >= se["tri-hybrid"] > se["dma-only"], (p, se)
    assert t.elapsed < 60


@pytest.mark.criterion(5, "DMA coefficient map properties on a 64x64 grid")
def test_dma_map():
    alphas = [0.5, 0.6, 0.75, 0.9, 1.0]
    with Timer() as t:
        res = dma_coefficient_map(alphas, 64, 0.0)
        mag1, _ = map_grid(res, 1.0)
        assert np.max(np.abs(mag1 - mag1[:, :1])) < 1e-12
        mag5, _ = map_grid(res, 0.5)
        assert np.max(np.abs(mag5 - mag5.T)) < 1e-12
        sens = []
        for a in alphas:
            mag, arg = map_grid(res, a)
            sens.append(phase_sensitivity(mag * np.exp(1j * arg)))
        assert all(b > a for a, b in zip(sens, sens[1:])), sens
    assert t.elapsed < 5


@pytest.mark.criterion(6, "power conservation, Lorentzian circle, ESPAR passivity")
def test_conservation_and_constraints():
    rng = np.random.default_rng(6)
    with Timer() as t:
        for n in range(1, 65):
            for a in np.round(np.arange(1, 11) / 10, 1):
                assert abs(slot_power_fractions(a, n, "radiating").sum() - 1) < 1e-12

        w = lorentzian_weight(rng.uniform(0, 2 * np.pi, 10_000))
        assert np.max(np.abs(np.abs(w - 0.5j) - 0.5)) < 1e-12

        z = synthetic_impedance(5, 0.25)
        assert np.linalg.eigvalsh(z.real).min() >= 0
        for _ in range(1000):
            cfg = EsparConfig(z, tuple(rng.uniform(-150, 150, 4)), active=2,
                              source_resistance=float(rng.choice([0.0, 50.0])),
                              loss_resistance=float(rng.uniform(0, 2)))
            p_rad, p_in = espar_power(cfg)
            assert p_rad <= p_in * (1 + 1e-12)
    assert t.elapsed < 10


def kkt_residual(s, power, noise):
    p = waterfilling(s, power, noise)
    floor = noise / np.asarray(s) ** 2
    on = p > 0
    mu = np.mean(p[on] + floor[on])
    res = [abs(p.sum() - power)]
    res += list(np.abs(p[on] + floor[on] - mu))
    res += list(np.maximum(0, mu - floor[~on]))
    return max(res)


@pytest.mark.criterion(7, "optimizer sandwich and water-filling optimality")
def test_optimizer_sandwich():
    with Timer() as t:
        budget = 2000
        for channel in range(4):
            pb = toy_problem("tri-hybrid", channel)
            opt = exhaustive_search(pb).objective
            ann = []
            for seed in range(32):
                a = simulated_annealing(pb, AnnealSchedule(0.3, 0.9, 40, budget, seed)).objective
                r = random_search_baseline(pb, budget, seed).objective
                assert r <= a <= opt * (1 + TIE_RTOL), (channel, seed, r, a, opt)
                ann.append(a)
            assert np.median(ann) >= 0.95 * opt, (channel, np.median(ann), opt)

        rng = np.random.default_rng(7)
        for _ in range(200):
            s = rng.uniform(0.05, 3.0, rng.integers(1, 6))
            power, noise = rng.uniform(0.1, 20), rng.uniform(0.1, 2)
            assert kkt_residual(s, power, noise) < 1e-9

        # two-mode grid oracle for the power split
        s = np.array([1.3, 0.6])
        for power in (0.2, 1.0, 5.0):
            grid = np.linspace(0, power, 100_001)
            rate = np.log2(1 + grid * s[0] ** 2) + np.log2(1 + (power - grid) * s[1] ** 2)
            assert abs(waterfilling(s, power)[0] - grid[np.argmax(rate)]) < 1e-3
    assert t.elapsed < 600


REDUCED = {
    "arrays": {"tx_elements": 16, "rx_elements": 2},
    "channel": {"n_paths": 4},
    "experiment": {"n_list": [16, 32, 64, 128, 256, 512, 1024], "compute_se": False,
                   "n_channels": 1, "tx_power_list": [0.5, 1.0], "optimizer_seeds": 2,
                   "methods": ["annealing", "genetic", "random", "alternating"],
                   "optimizer": {"budget": 150, "rounds": 1, "population": 10}},
}


@pytest.mark.criterion(8, "byte-identical CSV on re-run for every CLI experiment")
def test_determinism(tmp_path):
    scen = tmp_path / "reduced.json"
    scen.write_text(json.dumps(REDUCED))
    validate_scenario(REDUCED)
    with Timer() as t:
        for exp in ("link", "aperture-sweep", "frontier", "dma-map", "optimize"):
            digests = []
            for run in ("a", "b"):
                out = tmp_path / run / exp
                assert cli.main([exp, "--scenario", str(scen), "--out", str(out), "--seed", "3"]) == 0
                digests.append({p.name: hashlib.sha256(p.read_bytes()).hexdigest()
                                for p in sorted(Path(out).glob("*.csv"))})
            assert digests[0] and digests[0] == digests[1], exp
    assert t.elapsed < 60
