"""Discrete configuration search for digital / hybrid / tri-hybrid links.

A :class:`LinkProblem` flattens the tunable state of an architecture into a
vector of small integers: first one phase index per analog connection (feed-
major over the connectivity support), then the EM layer's own coordinates
(one per tunable element). For every candidate the digital layer is set
optimally (SVD + water-filling over the span of the analog precoder), so the
searches below only ever move through analog and EM states.

Tie-breaking is first-found / lowest state index everywhere; exhaustive
search treats values within ``TIE_RTOL`` (relative) as tied.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .em import phase_grid, phase_index
from .geometry import ArrayGeometry, PathSet, propagation_matrix, steering_matrix
from .metrics import PowerCatalog, power_total, spectral_efficiency
from .precoding import (
    ArchitectureSpec,
    PrecoderStack,
    best_digital,
    channel_capacity,
    compose_stack,
    span_rate,
)


# Objective values this close (relative) count as ties.
TIE_RTOL = 1e-12


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"exhaustive search needs {required} evaluations, cap is {cap}")
        self.required = required
        self.cap = cap


class FeasibilityError(AssertionError):
    pass


class TraceRow(NamedTuple):
    step: int
    temperature: float  # temperature, generation or round, depending on the method
    objective: float
    accepted: bool


@dataclass
class OptResult:
    state: tuple[int, ...]
    objective: float
    evaluations: int
    trace: list[TraceRow] = field(default_factory=list)
    method: str = ""


@dataclass(frozen=True)
class Codebook:
    """Ordered list of full configuration states."""

    entries: tuple[tuple[int, ...], ...]
    bits: int | None = None
    beams: int | None = None

    def __post_init__(self):
        entries = tuple(tuple(int(v) for v in e) for e in self.entries)
        if not entries:
            raise ValueError("codebook is empty")
        if len(set(entries)) != len(entries):
            raise ValueError("codebook has duplicate entries")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class AnnealSchedule:
    t0: float = 0.2
    cooling: float = 0.9
    steps_per_temperature: int = 40
    budget: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("initial temperature must be positive")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling factor must lie in (0, 1)")
        if self.budget < 1 or self.steps_per_temperature < 1:
            raise ValueError("budget and steps per temperature must be >= 1")


@dataclass(frozen=True)
class PopulationConfig:
    size: int = 20
    budget: int = 2000
    tournament: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # default 1 / n_coordinates
    elite: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("population needs at least two individuals")
        if self.budget < self.size:
            raise ValueError("budget must cover the initial population")
        if not 1 <= self.elite < self.size:
            raise ValueError("elite count must be in [1, size)")


class LinkProblem:
    """Objective over the discrete state of one architecture on one channel.

    ``elements`` is the geometry of the static radiating elements for digital
    and hybrid architectures; tri-hybrid architectures carry their own layer.
    ``objective`` is ``"se"`` (bits/s/Hz) or ``"ee"`` (bits/J); the latter is a
    fixed positive rescaling of the former since consumed power does not
    depend on the tuning state.
    """

    def __init__(
        self,
        spec: ArchitectureSpec,
        paths: PathSet,
        rx: ArrayGeometry,
        power: float,
        noise: float,
        elements: ArrayGeometry | None = None,
        objective: str = "se",
        catalog: PowerCatalog | None = None,
        bandwidth: float = 1e8,
        check: bool = True,
    ):
        if objective not in ("se", "ee"):
            raise ValueError(f"unknown objective {objective!r}")
        self.spec = spec
        self.paths = paths
        self.rx = rx
        self.power = power
        self.noise = noise
        self.check = check
        self.layer0 = spec.em_layer(elements)
        self.scale = 1.0
        if objective == "ee":
            self.scale = bandwidth / power_total(spec, catalog or PowerCatalog()).total
        self.objective_name = objective
        self.evaluations = 0

        self.support = spec.support()
        if spec.kind != "digital" and spec.has_phase_shifters:
            if spec.phase_bits is None:
                raise ValueError("discrete search needs quantized phase shifters")
            self.analog_coords = [tuple(ix) for ix in np.argwhere(self.support)]
            self.levels = 2**spec.phase_bits
        else:
            self.analog_coords = []
            self.levels = 1
        em_sizes = self.layer0.state_sizes() if spec.kind == "tri-hybrid" else ()
        self.n_analog = len(self.analog_coords)
        self.sizes = (self.levels,) * self.n_analog + tuple(em_sizes)

        # Propagation part, computed once; the EM layer only recombines it.
        coeff = self.layer0.feed_coefficients()
        if coeff is not None:
            self._elem = propagation_matrix(paths, rx, self.layer0.geometry)
            n_rx = self._elem.shape[0]
            self._elem_blocks = self._elem.reshape(n_rx, self.layer0.n_feed, -1)
        else:
            self._elem = None
            a_rx = steering_matrix(rx, paths.aoa_az, paths.aoa_el)
            self._rx_gain = a_rx.T * paths.gains  # (N_rx, L)
        self._static_h = None
        if spec.kind != "tri-hybrid":
            self._static_h = self.channel(self.layer0)

    # ---- model -----------------------------------------------------------

    @property
    def n_coords(self) -> int:
        return len(self.sizes)

    @property
    def n_states(self) -> int:
        return math.prod(self.sizes)

    def channel(self, layer) -> np.ndarray:
        """Effective feed-domain channel for an EM layer state."""
        if self._static_h is not None and layer is self.layer0:
            return self._static_h
        coeff = layer.feed_coefficients()
        if coeff is not None:
            return np.einsum("rfk,fk->rf", self._elem_blocks, coeff)
        g = layer.response(self.paths.aod_az, self.paths.aod_el)
        return self._rx_gain @ g

    def analog_matrix(self, state) -> np.ndarray:
        spec = self.spec
        if spec.kind == "digital":
            return np.eye(spec.n_feed, dtype=complex)
        fa = np.zeros((spec.n_feed, spec.n_rf), dtype=complex)
        if self.n_analog:
            grid = phase_grid(spec.phase_bits)
            idx = np.asarray(state[: self.n_analog], dtype=int)
            rows, cols = np.asarray(self.analog_coords).T
            fa[rows, cols] = np.exp(1j * grid[idx])
        else:
            fa[self.support] = 1.0
        return fa

    def decode(self, state):
        """``(F_A, EM layer)`` for a state vector."""
        state = tuple(state)
        if len(state) != self.n_coords:
            raise ValueError(f"state has {len(state)} coordinates, expected {self.n_coords}")
        fa = self.analog_matrix(state)
        layer = self.layer0
        if self.spec.kind == "tri-hybrid" and len(state) > self.n_analog:
            layer = self.layer0.with_state(state[self.n_analog:])
        return fa, layer

    def check_feasible(self, fa: np.ndarray, layer) -> None:
        off = fa[~self.support]
        if np.any(off != 0):
            raise FeasibilityError("analog precoder violates the connectivity support")
        if self.spec.kind != "digital":
            on = fa[self.support]
            if np.max(np.abs(np.abs(on) - 1)) > 1e-12:
                raise FeasibilityError("analog entries are not unit-modulus")
            if self.n_analog:
                grid = phase_grid(self.spec.phase_bits)
                ang = np.mod(np.angle(on), 2 * np.pi)
                snapped = grid[phase_index(ang, self.spec.phase_bits)]
                err = np.abs(np.angle(np.exp(1j * (ang - snapped))))
                if np.max(err) > 1e-9:
                    raise FeasibilityError("analog phase off the quantization grid")
        try:
            layer.check_feasible()
        except AssertionError as exc:
            raise FeasibilityError(str(exc)) from None

    def rate(self, state) -> float:
        fa, layer = self.decode(state)
        if self.check:
            self.check_feasible(fa, layer)
        h = self.channel(layer)
        if self.spec.kind == "digital":
            return channel_capacity(h, self.spec.n_streams, self.power, self.noise)
        return span_rate(h, fa, self.spec.n_streams, self.power, self.noise)

    def __call__(self, state) -> float:
        self.evaluations += 1
        return self.scale * self.rate(state)

    def stack(self, state) -> PrecoderStack:
        fa, layer = self.decode(state)
        h = self.channel(layer)
        fd, _ = best_digital(h, fa, self.spec.n_streams, self.power, self.noise)
        if self.spec.kind == "digital":
            return PrecoderStack(fa @ fd, fa, layer)
        return PrecoderStack(fd, fa, layer)

    def identity_digital_objective(self, state) -> float:
        """Objective with ``F_D`` = first ``n_streams`` columns of the identity."""
        self.evaluations += 1
        fa, layer = self.decode(state)
        if self.check:
            self.check_feasible(fa, layer)
        fd = np.eye(self.spec.n_rf, self.spec.n_streams, dtype=complex)
        f = compose_stack(self.spec, PrecoderStack(fd, fa, layer))
        h = self.channel(layer)
        return self.scale * spectral_efficiency(h, f, self.noise, self.power)

    # ---- starting points ---------------------------------------------------

    def initial_state(self) -> tuple[int, ...]:
        """Quantized phases of the dominant right singular vectors, default EM state."""
        em_state = tuple(self.layer0.state()) if self.spec.kind == "tri-hybrid" else ()
        if not self.n_analog:
            return em_state
        h = self.channel(self.layer0)
        _, _, vh = np.linalg.svd(h)
        v = vh.conj().T
        cols = np.zeros((self.spec.n_feed, self.spec.n_rf), dtype=complex)
        k = min(self.spec.n_rf, v.shape[1])
        cols[:, :k] = v[:, :k]
        idx = [int(phase_index(np.angle(cols[f, r]), self.spec.phase_bits))
               for f, r in self.analog_coords]
        return tuple(idx) + em_state

    def random_state(self, rng: np.random.Generator) -> tuple[int, ...]:
        return tuple(int(rng.integers(s)) for s in self.sizes)

    def state_index(self, state) -> int:
        """Mixed-radix index, first coordinate most significant."""
        idx = 0
        for v, s in zip(state, self.sizes):
            idx = idx * s + int(v)
        return idx


# --------------------------------------------------------------------------
# Exhaustive search


def exhaustive_search(problem: LinkProblem, codebook: Codebook | None = None,
                      cap: int = 500_000_000, method: str = "auto") -> OptResult:
    """Exact argmax over a codebook, or over the whole state space.

    Without a codebook the full space is enumerated directly when it is small
    (or ``method="product"``). For subarray layers with at most two RF chains it
    is enumerated chain by chain instead, using the invariance of the rate under
    a common phase rotation of one RF chain and a closed form for the 2x2
    water-filled capacity. Refuses with :class:`BudgetExceeded`
    when the required number of evaluations is above ``cap``.
    """
    if codebook is not None:
        if len(codebook) > cap:
            raise BudgetExceeded(len(codebook), cap)
        best, best_val, trace = None, -np.inf, []
        for i, entry in enumerate(codebook.entries):
            _validate(problem, entry)
            val = problem(entry)
            improved = val > best_val and not _near(best_val, val)
            if improved:
                best, best_val = entry, val
            trace.append(TraceRow(i, 0.0, val, improved))
        return OptResult(best, best_val, len(codebook), trace, "exhaustive")

    if problem.n_coords == 0:
        val = problem(())
        return OptResult((), val, 1, [TraceRow(0, 0.0, val, True)], "exhaustive")

    if method not in ("auto", "product", "chainwise"):
        raise ValueError(f"unknown enumeration method {method!r}")
    separable = _chain_separable(problem)
    if method == "chainwise" and not separable:
        raise ValueError("chainwise enumeration needs at most two subarray RF chains")
    if method == "product" or not separable or (method == "auto" and problem.n_states <= 4096):
        if problem.n_states > cap:
            raise BudgetExceeded(problem.n_states, cap)
        best, best_val = None, -np.inf
        for state in itertools.product(*(range(s) for s in problem.sizes)):
            val = problem(state)
            if val > best_val and not _near(best_val, val):
                best, best_val = state, val
        return OptResult(best, best_val, problem.n_states,
                         [TraceRow(0, 0.0, best_val, True)], "exhaustive")
    return _chainwise_exhaustive(problem, cap)


def _validate(problem: LinkProblem, state) -> None:
    if len(state) != problem.n_coords or any(not 0 <= v < s for v, s in zip(state, problem.sizes)):
        raise ValueError(f"codebook entry {state} is not a valid state")


def _chain_separable(problem: LinkProblem) -> bool:
    spec = problem.spec
    if spec.kind == "digital" or spec.connectivity != "subarray" and spec.n_rf > 1:
        return False
    if spec.kind == "tri-hybrid" and not hasattr(problem.layer0, "coordinate_feeds"):
        return False
    return spec.n_rf <= 2


def _feed_columns(problem: LinkProblem, feed: int, em_coords: list[int]):
    """Effective channel column of one feed for every state of its EM coordinates."""
    base = list(problem.layer0.state()) if problem.spec.kind == "tri-hybrid" else []
    em_sizes = [problem.sizes[problem.n_analog + c] for c in em_coords]
    combos = list(itertools.product(*(range(s) for s in em_sizes)))
    cols = []
    for combo in combos:
        st = list(base)
        for c, v in zip(em_coords, combo):
            st[c] = v
        layer = problem.layer0.with_state(st) if em_coords else problem.layer0
        cols.append(problem.channel(layer)[:, feed])
    return np.array(cols), np.array(combos, dtype=int).reshape(len(combos), len(em_coords))


def _chain_candidates(problem: LinkProblem, chain: int):
    """Normalized effective columns for every reduced state of one RF chain.

    Returns ``(columns, analog_levels, em_values)`` where the latter two give the
    chain's analog indices (feed order) and EM coordinate values per candidate.
    """
    spec = problem.spec
    feeds = [int(f) for f in np.flatnonzero(problem.support[:, chain])]
    coord_feeds = problem.layer0.coordinate_feeds() if spec.kind == "tri-hybrid" else []
    cols = None
    analog = None
    em_vals = None
    em_order: list[int] = []
    grid = np.exp(1j * phase_grid(spec.phase_bits)) if problem.n_analog else np.ones(1)
    for j, f in enumerate(feeds):
        em_coords = [c for c, cf in enumerate(coord_feeds) if cf == f]
        fc, combos = _feed_columns(problem, f, em_coords)
        if problem.n_analog and j > 0:
            phases = np.arange(problem.levels)
        else:
            phases = np.zeros(1, dtype=int)  # common chain phase fixed at 0
        contrib = grid[phases][:, None, None] * fc[None, :, :]  # (P, S, N_rx)
        if cols is None:
            cols = contrib.reshape(-1, fc.shape[1])
            analog = np.repeat(phases, len(fc))[:, None]
            em_vals = np.tile(combos, (len(phases), 1))
        else:
            n_prev = len(cols)
            cols = (cols[:, None, :] + contrib.reshape(1, -1, fc.shape[1])).reshape(-1, fc.shape[1])
            k = len(phases) * len(fc)
            analog = np.hstack([np.repeat(analog, k, axis=0),
                                np.tile(np.repeat(phases, len(fc))[:, None], (n_prev, 1))])
            em_vals = np.hstack([np.repeat(em_vals, k, axis=0),
                                 np.tile(np.tile(combos, (len(phases), 1)), (n_prev, 1))])
        em_order += em_coords
    return cols / np.sqrt(len(feeds)), analog, em_vals, feeds, em_order


def _pair_values(a, b, c2, snr, n_streams):
    """``2**rate`` of the 2x2 Gram [[a, c], [c*, b]] with water-filling."""
    tr = a + b
    half = (a - b) * 0.5
    disc = np.sqrt(half * half + c2)
    single = (tr * 0.5 + disc) * snr + 1
    if n_streams < 2:
        return single
    det = np.maximum(a * b - c2, 0.0)
    both = snr * det + tr
    both *= both
    with np.errstate(divide="ignore", invalid="ignore"):
        both /= 4 * det
    return np.where((det > 0) & (snr * det >= 2 * disc), both, single)


def _near(value: float, best: float) -> bool:
    return value >= best - TIE_RTOL * abs(best)


def _chainwise_exhaustive(problem: LinkProblem, cap: int) -> OptResult:
    spec = problem.spec
    snr = problem.power / problem.noise
    parts = [_chain_candidates(problem, r) for r in range(spec.n_rf)]
    required = math.prod(len(p[0]) for p in parts)
    if required > cap:
        raise BudgetExceeded(required, cap)

    def assemble(choice) -> tuple[int, ...]:
        state = [0] * problem.n_coords
        for r, i in enumerate(choice):
            cols, analog, em_vals, feeds, em_order = parts[r]
            if problem.n_analog:
                for f, lv in zip(feeds, analog[i]):
                    state[problem.analog_coords.index((f, r))] = int(lv)
            for c, v in zip(em_order, em_vals[i]):
                state[problem.n_analog + c] = int(v)
        return tuple(state)

    if spec.n_rf == 1:
        vals = 1 + snr * np.sum(np.abs(parts[0][0]) ** 2, axis=1)
        m = vals.max()
        cands = [((int(i),), float(vals[i])) for i in np.flatnonzero(vals >= m - TIE_RTOL * m)]
    else:
        # Rows and columns sorted by column energy so the bound
        # 2**rate <= (1 + snr (a + b) / 2)**2 can cut whole blocks.
        u, v = parts[0][0], parts[1][0]
        a = np.sum(np.abs(u) ** 2, axis=1)
        b = np.sum(np.abs(v) ** 2, axis=1)
        ia = np.argsort(-a, kind="stable")
        ib = np.argsort(-b, kind="stable")
        u, a, v, b = u[ia], a[ia], v[ib], b[ib]
        vt = np.ascontiguousarray(v.T)
        neg_b = -b
        best = -np.inf
        cands = []
        for i in range(len(u)):
            if np.isfinite(best):
                need = 2 * (np.sqrt(best * (1 - TIE_RTOL)) - 1) / snr - a[i]
                n_cols = int(np.searchsorted(neg_b, -need, side="right"))
                if n_cols == 0:
                    break
            else:
                n_cols = len(b)
            c = u[i].conj() @ vt[:, :n_cols]
            vals = _pair_values(a[i], b[:n_cols], c.real**2 + c.imag**2, snr, spec.n_streams)
            m = vals.max()
            if m > best:
                best = m
                cands = [t for t in cands if _near(t[1], best)]
            if _near(m, best):
                for j in np.flatnonzero(vals >= best - TIE_RTOL * best):
                    cands.append(((int(ia[i]), int(ib[j])), float(vals[j])))
        cands = [t for t in cands if _near(t[1], best)]
    state = min((assemble(t[0]) for t in cands), key=problem.state_index)
    val = problem(state)
    return OptResult(state, val, required, [TraceRow(0, 0.0, val, True)], "exhaustive")


# --------------------------------------------------------------------------
# Heuristics


def two_stage_search(problem: LinkProblem, codebook: Codebook) -> OptResult:
    """Coarse analog/EM beam selection, then optimal digital refinement."""
    best, best_val, trace = None, -np.inf, []
    for entry in codebook.entries:
        _validate(problem, entry)
        val = problem.identity_digital_objective(entry)
        if val > best_val:
            best, best_val = entry, val
    trace.append(TraceRow(1, 1.0, best_val, True))
    refined = problem(best)
    trace.append(TraceRow(2, 2.0, refined, refined >= best_val))
    return OptResult(best, refined, len(codebook) + 1, trace, "two-stage")


def steering_codebook(problem: LinkProblem, directions: Sequence[float], el: float = 0.0) -> Codebook:
    """Quantized matched beams toward each azimuth, same beam on every chain.

    Only meaningful for static feeds (hybrid); EM coordinates keep their
    default state.
    """
    geom = problem.layer0.geometry
    em = tuple(problem.layer0.state()) if problem.spec.kind == "tri-hybrid" else ()
    entries = []
    for az in directions:
        a = steering_matrix(geom, az, el)[0][: problem.spec.n_feed]
        ph = phase_index(np.angle(a.conj()), problem.spec.phase_bits)
        entries.append(tuple(int(ph[f]) for f, _ in problem.analog_coords) + em)
    return Codebook(tuple(entries), bits=problem.spec.phase_bits, beams=len(directions))


def _movable(problem: LinkProblem) -> list[int]:
    return [i for i, s in enumerate(problem.sizes) if s > 1]


def simulated_annealing(problem: LinkProblem, schedule: AnnealSchedule,
                        initial: Sequence[int] | None = None) -> OptResult:
    """Metropolis search over single-coordinate +-1 steps (wrapping)."""
    rng = np.random.default_rng(schedule.seed)
    state = list(initial) if initial is not None else list(problem.random_state(rng))
    cur = problem(state)
    evals = 1
    best, best_val = tuple(state), cur
    trace = [TraceRow(0, schedule.t0, cur, True)]
    movable = _movable(problem)
    step = 0
    while movable and evals < schedule.budget:
        step += 1
        temp = schedule.t0 * schedule.cooling ** ((step - 1) // schedule.steps_per_temperature)
        i = movable[int(rng.integers(len(movable)))]
        d = 1 if rng.random() < 0.5 else -1
        cand = list(state)
        cand[i] = (cand[i] + d) % problem.sizes[i]
        val = problem(cand)
        evals += 1
        u = rng.random()
        delta = val - cur
        accept = delta >= 0 or u < math.exp(max(delta / temp, -745.0))
        if accept:
            state, cur = cand, val
            if val > best_val:
                best, best_val = tuple(cand), val
        trace.append(TraceRow(step, temp, val, accept))
    return OptResult(best, best_val, evals, trace, "annealing")


def genetic_search(problem: LinkProblem, config: PopulationConfig,
                   initial: Sequence[Sequence[int]] | None = None) -> OptResult:
    """Tournament selection, single-point crossover, per-gene mutation, elitism."""
    rng = np.random.default_rng(config.seed)
    n = problem.n_coords
    rate = config.mutation_rate if config.mutation_rate is not None else 1.0 / max(1, n)
    if initial is not None:
        pop = [tuple(int(v) for v in ind) for ind in initial]
        if len(pop) != config.size:
            raise ValueError("initial population size does not match the config")
    else:
        pop = [problem.random_state(rng) for _ in range(config.size)]
    fit = [problem(ind) for ind in pop]
    evals = len(pop)
    b = int(np.argmax(fit))
    best, best_val = pop[b], fit[b]
    trace = [TraceRow(0, 0, best_val, True)]
    sizes = np.asarray(problem.sizes)
    gen = 0
    while evals + config.size - config.elite <= config.budget:
        gen += 1
        order = sorted(range(len(pop)), key=lambda k: (-fit[k], k))
        children = [pop[k] for k in order[: config.elite]]
        child_fit = [fit[k] for k in order[: config.elite]]
        while len(children) < config.size:
            p1 = _tournament(rng, fit, config.tournament)
            p2 = _tournament(rng, fit, config.tournament)
            a, b_ = list(pop[p1]), list(pop[p2])
            if n > 1 and rng.random() < config.crossover_rate:
                cut = int(rng.integers(1, n))
                a = a[:cut] + b_[cut:]
            if rate > 0 and n:
                mask = rng.random(n) < rate
                if mask.any():
                    new = rng.integers(0, sizes[mask])
                    a = np.asarray(a)
                    a[mask] = new
                    a = a.tolist()
            child = tuple(int(v) for v in a)
            children.append(child)
            child_fit.append(problem(child))
            evals += 1
        pop, fit = children, child_fit
        b = int(np.argmax(fit))
        improved = fit[b] > best_val
        if improved:
            best, best_val = pop[b], fit[b]
        trace.append(TraceRow(gen, gen, best_val, improved))
    return OptResult(best, best_val, evals, trace, "genetic")


def _tournament(rng, fit, k) -> int:
    picks = rng.integers(0, len(fit), size=k)
    return int(max(picks, key=lambda i: (fit[i], -i)))


def _em_blocks(problem: LinkProblem, max_block: int) -> list[list[int]]:
    """EM coordinates grouped by feed; groups too large to scan jointly are split."""
    if problem.spec.kind != "tri-hybrid":
        return []
    groups: dict[int, list[int]] = {}
    for c, f in enumerate(problem.layer0.coordinate_feeds()):
        groups.setdefault(f, []).append(problem.n_analog + c)
    blocks = []
    for g in groups.values():
        if math.prod(problem.sizes[i] for i in g) <= max_block:
            blocks.append(g)
        else:
            blocks += [[i] for i in g]
    return blocks


def alternating_optimization(problem: LinkProblem, rounds: int = 3,
                             initial: Sequence[int] | None = None,
                             budget: int | None = None, max_block: int = 256) -> OptResult:
    """Layer-wise ascent: EM states, then analog phases, then digital.

    EM coordinates of one feed are scanned jointly (when the block has at most
    ``max_block`` states), analog phases one entry at a time over their grid.
    Only strict improvements are taken, so the objective never decreases. The
    digital layer is re-solved optimally inside every evaluation.

    Without ``initial`` the search is restarted from the SVD-quantized analog
    phases combined with each uniform EM level, and the best run is kept.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if initial is not None:
        starts = [list(initial)]
    else:
        first = list(problem.initial_state())
        starts = [first]
        n_em = problem.n_coords - problem.n_analog
        if n_em and len(set(problem.sizes[problem.n_analog:])) == 1:
            for k in range(problem.sizes[-1]):
                s = first[:problem.n_analog] + [k] * n_em
                if s not in starts:
                    starts.append(s)
    blocks = _em_blocks(problem, max_block)
    analog = [[i] for i in range(problem.n_analog)]
    evals = 0
    best, best_val, trace = None, -np.inf, []
    step = 0
    for state in starts:
        if budget is not None and evals >= budget and best is not None:
            break
        cur = problem(state)
        evals += 1
        trace.append(TraceRow(step, 0, cur, True))
        for rnd in range(1, rounds + 1):
            start = cur
            for layer in (blocks, analog):
                before = cur
                for block in layer:
                    for combo in itertools.product(*(range(problem.sizes[i]) for i in block)):
                        if budget is not None and evals >= budget:
                            break
                        cand = list(state)
                        for i, v in zip(block, combo):
                            cand[i] = v
                        if cand == state:
                            continue
                        val = problem(cand)
                        evals += 1
                        if val > cur:
                            state, cur = cand, val
                step += 1
                trace.append(TraceRow(step, rnd, cur, cur > before))
            step += 1
            trace.append(TraceRow(step, rnd, cur, False))  # digital layer: re-solved in place
            if cur == start:
                break
        if cur > best_val:
            best, best_val = tuple(state), cur
    return OptResult(best, best_val, evals, trace, "alternating")


def random_search_baseline(problem: LinkProblem, budget: int, seed: int = 0) -> OptResult:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    best, best_val, trace = None, -np.inf, []
    for k in range(budget):
        state = problem.random_state(rng)
        val = problem(state)
        improved = val > best_val
        if improved:
            best, best_val = state, val
        trace.append(TraceRow(k, 0.0, val, improved))
    return OptResult(best, best_val, budget, trace, "random")
