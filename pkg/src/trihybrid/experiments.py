"""Figure-level experiments: link evaluation, aperture sweep, EE-SE frontier,
DMA coefficient maps and optimizer comparisons.

Every function here is a pure function of its scenario and seed. Parallel
execution (``jobs > 1``) farms out independent grid points and merges the rows
in a fixed order, so the output does not depend on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ArchitectureConfig, ScenarioConfig
from .em import (
    DmaArray,
    DmaConfig,
    EsparArray,
    PatternLibrary,
    SwitchedArray,
    directional_library,
    dma_coefficient_grid,
)
from .geometry import ArrayGeometry, GainProfile, PathSet, draw_paths
from .metrics import PowerCatalog, energy_efficiency, power_total
from .optimize import (
    AnnealSchedule,
    LinkProblem,
    PopulationConfig,
    alternating_optimization,
    exhaustive_search,
    genetic_search,
    random_search_baseline,
    simulated_annealing,
    steering_codebook,
    two_stage_search,
)
from .precoding import ArchitectureSpec
from .results import SweepResult

# --------------------------------------------------------------------------
# Scenario -> model objects


def catalog_from(cfg: ScenarioConfig) -> PowerCatalog:
    return PowerCatalog(**cfg.power.model_dump())


def rx_geometry(cfg: ScenarioConfig) -> ArrayGeometry:
    return ArrayGeometry.ula(cfg.arrays.rx_elements, cfg.arrays.rx_spacing)


def scenario_paths(cfg: ScenarioConfig, index: int = 0) -> PathSet:
    """Channel realization ``index`` (seeded by ``seed + index``) or the path file."""
    ch = cfg.channel
    if ch.path_file is not None:
        return PathSet.load_json(ch.path_file)
    profile = GainProfile(ch.aod_az, ch.aod_el, ch.aoa_az, ch.aoa_el)
    return draw_paths(cfg.seed + index, ch.n_paths, profile)


def dma_config(cfg: ScenarioConfig) -> DmaConfig:
    d = cfg.em.dma
    return DmaConfig(slots=d.slots, leakage=d.normalized_leakage, guide_phase=d.guide_phase,
                     termination=d.termination, phase_bits=d.phase_bits, spacing=d.spacing)


def _em_layer(cfg: ScenarioConfig, kind: str, n_feed: int):
    if kind == "dma":
        return DmaArray.uniform(n_feed, dma_config(cfg))
    if kind == "espar":
        e = cfg.em.espar
        return EsparArray.uniform(n_feed, e.elements_per_feed, e.spacing, e.bits, e.max_reactance,
                                  source_resistance=e.source_resistance,
                                  loss_resistance=e.loss_resistance)
    s = cfg.em.switched
    lib = (PatternLibrary.from_json(s.pattern_file) if s.pattern_file
           else directional_library(s.n_patterns, s.order))
    return SwitchedArray(ArrayGeometry.ula(n_feed, s.spacing), lib,
                         insertion_loss_db=s.insertion_loss_db)


def elements_per_feed(cfg: ScenarioConfig, arch: ArchitectureConfig) -> int:
    if arch.em == "dma":
        return cfg.em.dma.slots
    if arch.em == "espar":
        return cfg.em.espar.elements_per_feed
    return 1


def build_architecture(cfg: ScenarioConfig, arch: ArchitectureConfig, n_elements: int | None = None):
    """``(ArchitectureSpec, static element geometry or None)`` for an aperture.

    The aperture is the number of radiating elements. Feed counts follow from
    the EM layer; RF chain and stream counts are clamped for tiny apertures.
    """
    n = n_elements or cfg.arrays.tx_elements
    per = elements_per_feed(cfg, arch)
    n_feed = max(1, n // per)
    if arch.kind == "digital":
        n_rf = n_feed
    else:
        n_rf = min(arch.n_rf, n_feed)
        if arch.connectivity == "subarray":
            while n_feed % n_rf:
                n_rf -= 1
    n_streams = min(arch.n_streams, n_rf)
    phase_bits = arch.phase_bits if arch.kind != "digital" else None
    if arch.kind == "tri-hybrid":
        em = _em_layer(cfg, arch.em, n_feed)
        spec = ArchitectureSpec(arch.kind, n_streams, n_rf, n_feed, arch.connectivity,
                                phase_bits, arch.analog, em, arch.name)
        return spec, None
    spec = ArchitectureSpec(arch.kind, n_streams, n_rf, n_feed, arch.connectivity,
                            phase_bits, True, None, arch.name)
    return spec, ArrayGeometry.ula(n_feed, cfg.arrays.tx_spacing)


# --------------------------------------------------------------------------
# Searching one link


@dataclass
class LinkOutcome:
    arch: str
    se: float
    power_w: float
    ee: float
    state: tuple
    evaluations: int


def optimize_link(problem: LinkProblem, cfg: ScenarioConfig, seed: int | None = None):
    """Best configuration found by the scenario's optimizer method."""
    o = cfg.experiment.optimizer
    seed = cfg.seed if seed is None else seed
    if problem.n_coords == 0:
        return exhaustive_search(problem)
    if o.method == "alternating":
        return alternating_optimization(problem, o.rounds, budget=o.budget)
    if o.method == "annealing":
        sched = AnnealSchedule(o.t0, o.cooling, o.steps_per_temperature, o.budget, seed)
        return simulated_annealing(problem, sched, problem.initial_state())
    if o.method == "genetic":
        return genetic_search(problem, PopulationConfig(o.population, o.budget, seed=seed))
    if o.method == "random":
        return random_search_baseline(problem, o.budget, seed)
    if o.method == "two-stage":
        beams = np.linspace(-np.pi / 2, np.pi / 2, 33)[1:-1]
        return two_stage_search(problem, steering_codebook(problem, beams))
    return exhaustive_search(problem, cap=o.cap)


def evaluate_architecture(cfg: ScenarioConfig, arch: ArchitectureConfig, tx_power: float,
                          n_elements: int | None = None, channel: int = 0) -> LinkOutcome:
    spec, elements = build_architecture(cfg, arch, n_elements)
    problem = LinkProblem(spec, scenario_paths(cfg, channel), rx_geometry(cfg), tx_power,
                          cfg.noise_w, elements)
    res = optimize_link(problem, cfg)
    breakdown = power_total(spec, catalog_from(cfg))
    return LinkOutcome(arch.name, res.objective, breakdown.total,
                       energy_efficiency(res.objective, cfg.bandwidth_hz, breakdown),
                       res.state, res.evaluations)


def _mean_se(cfg, arch, tx_power, n_elements=None) -> float:
    return float(np.mean([evaluate_architecture(cfg, arch, tx_power, n_elements, k).se
                          for k in range(cfg.experiment.n_channels)]))


def _map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*tasks)))  # results come back in task order


# --------------------------------------------------------------------------
# Experiments


def run_link(cfg: ScenarioConfig, jobs: int = 1) -> SweepResult:
    tasks = [(cfg, a, cfg.tx_power_w, None) for a in cfg.architectures]
    ses = _map(_mean_se, tasks, jobs)
    rows = []
    for arch, se in zip(cfg.architectures, ses):
        spec, _ = build_architecture(cfg, arch)
        b = power_total(spec, catalog_from(cfg))
        rows.append((arch.name, se, energy_efficiency(se, cfg.bandwidth_hz, b), b.total))
    return SweepResult("link", rows)


def sweep_aperture(cfg: ScenarioConfig, n_list=None, compute_se: bool | None = None,
                   jobs: int = 1) -> SweepResult:
    """Consumed power (and optionally achieved SE) versus aperture size."""
    n_list = list(n_list if n_list is not None else cfg.experiment.n_list)
    if n_list != sorted(n_list):
        raise ValueError("aperture sizes must be ascending")
    compute_se = cfg.experiment.compute_se if compute_se is None else compute_se
    catalog = catalog_from(cfg)
    keys = [(n, a) for n in n_list for a in cfg.architectures]
    if compute_se:
        ses = _map(_mean_se, [(cfg, a, cfg.tx_power_w, n) for n, a in keys], jobs)
    else:
        ses = [float("nan")] * len(keys)
    rows = []
    for (n, a), se in zip(keys, ses):
        spec, _ = build_architecture(cfg, a, n)
        rows.append((n, a.name, power_total(spec, catalog).total, se))
    return SweepResult("aperture-sweep", rows).sorted()


def first_exceedance(result: SweepResult, threshold: float = 10.0) -> dict:
    """Smallest aperture at which each architecture draws more than ``threshold`` W."""
    out = {}
    for n, arch, p, _ in result.rows:
        if p > threshold and arch not in out:
            out[arch] = n
    return out


def ee_se_frontier(cfg: ScenarioConfig, tx_powers=None, jobs: int = 1) -> SweepResult:
    if len(cfg.architectures) < 2:
        raise ValueError("a frontier needs at least two architectures")
    tx_powers = list(tx_powers if tx_powers is not None else cfg.experiment.tx_power_list)
    catalog = catalog_from(cfg)
    keys = [(p, a) for p in tx_powers for a in cfg.architectures]
    ses = _map(_mean_se, [(cfg, a, p, None) for p, a in keys], jobs)
    rows = []
    for (p, a), se in zip(keys, ses):
        spec, _ = build_architecture(cfg, a)
        b = power_total(spec, catalog)
        rows.append((p, a.name, se, energy_efficiency(se, cfg.bandwidth_hz, b), b.total))
    return SweepResult("frontier", rows).sorted()


def dma_coefficient_map(alphas, resolution: int = 64, guide_phase: float = 0.0,
                        termination: str = "radiating") -> SweepResult:
    """Two-slot transmission coefficient over a cell-centred phase grid."""
    rows = []
    for alpha in alphas:
        phi, t = dma_coefficient_grid(alpha, resolution, guide_phase, termination)
        mag, arg = np.abs(t), np.angle(t)
        for i in range(resolution):
            for j in range(resolution):
                rows.append((float(alpha), float(phi[i]), float(phi[j]),
                             float(mag[i, j]), float(arg[i, j])))
    return SweepResult("dma-map", rows).sorted()


def map_grid(result: SweepResult, alpha: float):
    """``(|T|, arg T)`` grids of one leakage value from a map table."""
    rows = [r for r in result.rows if r[0] == alpha]
    n = int(round(np.sqrt(len(rows))))
    if n * n != len(rows) or n == 0:
        raise ValueError(f"no square grid for alpha={alpha}")
    arr = np.array([r[3:] for r in rows]).reshape(n, n, 2)
    return arr[..., 0], arr[..., 1]


def phase_sensitivity(t: np.ndarray, resolution: int | None = None) -> float:
    """Largest finite-difference slope of ``arg T`` along either phase axis."""
    t = np.asarray(t)
    step = 2 * np.pi / (resolution or t.shape[0])
    d1 = np.abs(np.angle(t[1:, :] / t[:-1, :]))
    d2 = np.abs(np.angle(t[:, 1:] / t[:, :-1]))
    return float(max(d1.max(), d2.max()) / step)


# --------------------------------------------------------------------------
# Common-aperture toy link used for the nesting and optimizer checks


def toy_architectures(phase_bits: int = 2, em_bits: int = 3, leakage: float = 0.5,
                      termination: str = "absorbing"):
    """Digital, hybrid and tri-hybrid transmitters on one 8-element aperture.

    The aperture is 8 elements at 0.2 wavelength. Digital drives each element
    with its own chain; hybrid splits it into two 4-element subarrays with
    ``phase_bits`` phase shifters; tri-hybrid groups the elements into four
    2-slot DMA feeds, two feeds per RF chain, with ``em_bits`` slot states.
    Returns ``{name: (spec, element geometry or None)}``.
    """
    elements = ArrayGeometry.ula(8, 0.2)
    dcfg = DmaConfig(slots=2, leakage=leakage, termination=termination,
                     phase_bits=em_bits, spacing=0.2)
    return {
        "digital": (ArchitectureSpec("digital", 2, 8, 8, phase_bits=None), elements),
        "hybrid": (ArchitectureSpec("hybrid", 2, 2, 8, "subarray", phase_bits), elements),
        "tri-hybrid": (ArchitectureSpec("tri-hybrid", 2, 2, 4, "subarray", phase_bits,
                                        em=DmaArray.uniform(4, dcfg)), None),
    }


TOY_SNR = 10.0
TOY_PATHS = 4


def toy_problem(name: str, channel_seed: int, objective: str = "se", **kw) -> LinkProblem:
    spec, elements = toy_architectures(**kw)[name]
    return LinkProblem(spec, draw_paths(channel_seed, TOY_PATHS), ArrayGeometry.ula(2),
                       TOY_SNR, 1.0, elements, objective)


def run_optimizer_comparison(cfg: ScenarioConfig, jobs: int = 1) -> SweepResult:
    """Objective reached by each search method on the scenario's channels."""
    e = cfg.experiment
    tasks = []
    for k in range(e.n_channels):
        for method in e.methods:
            seeds = [0] if method in ("exhaustive", "alternating") else range(e.optimizer_seeds)
            for s in seeds:
                tasks.append((cfg, k, method, cfg.seed + s))
    rows = _map(_compare_one, tasks, jobs)
    return SweepResult("optimize", rows)


def comparison_problem(cfg: ScenarioConfig, channel: int) -> LinkProblem:
    arch = next((a for a in cfg.architectures if a.kind == "tri-hybrid"), cfg.architectures[0])
    spec, elements = build_architecture(cfg, arch)
    return LinkProblem(spec, scenario_paths(cfg, channel), rx_geometry(cfg), cfg.tx_power_w,
                       cfg.noise_w, elements)


def _compare_one(cfg: ScenarioConfig, channel: int, method: str, seed: int):
    o = cfg.experiment.optimizer
    problem = comparison_problem(cfg, channel)
    if method == "exhaustive":
        res = exhaustive_search(problem, cap=o.cap)
    elif method == "annealing":
        res = simulated_annealing(
            problem, AnnealSchedule(o.t0, o.cooling, o.steps_per_temperature, o.budget, seed))
    elif method == "genetic":
        res = genetic_search(problem, PopulationConfig(o.population, o.budget, seed=seed))
    elif method == "random":
        res = random_search_baseline(problem, o.budget, seed)
    else:
        res = alternating_optimization(problem, o.rounds, budget=o.budget)
    return (cfg.seed + channel, method, seed, res.objective, res.evaluations)


def write_trace(problem: LinkProblem, cfg: ScenarioConfig, path) -> Path:
    o = cfg.experiment.optimizer
    res = simulated_annealing(
        problem, AnnealSchedule(o.t0, o.cooling, o.steps_per_temperature, o.budget, cfg.seed))
    return SweepResult("trace", [tuple(t) for t in res.trace]).write(path)
