"""Versioned JSON scenario files.

One file describes one reproducible experiment. Unknown keys are rejected and
all validation problems are reported together, each with its field path.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

SCHEMA_VERSION = 1
HALF_PI = math.pi / 2


class ConfigError(ValueError):
    """Scenario validation failure; ``errors`` lists ``(path, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{p}: {m}" for p, m in errors))

    def as_dict(self) -> dict:
        return {"error": "config", "details": [{"field": p, "message": m} for p, m in self.errors]}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ArraysConfig(_Section):
    tx_elements: int = Field(64, ge=1)
    tx_spacing: float = Field(0.2, gt=0)
    rx_elements: int = Field(4, ge=1)
    rx_spacing: float = Field(0.5, gt=0)


class ChannelConfig(_Section):
    n_paths: int = Field(8, ge=1)
    aod_az: tuple[float, float] = (-HALF_PI, HALF_PI)
    aod_el: tuple[float, float] = (0.0, 0.0)
    aoa_az: tuple[float, float] = (-HALF_PI, HALF_PI)
    aoa_el: tuple[float, float] = (0.0, 0.0)
    path_file: Optional[str] = None

    @model_validator(mode="after")
    def _ranges(self):
        for name, lim in (("aod_az", math.pi), ("aoa_az", math.pi),
                          ("aod_el", HALF_PI), ("aoa_el", HALF_PI)):
            lo, hi = getattr(self, name)
            if not -lim <= lo <= hi <= lim:
                raise ValueError(f"{name} must satisfy -{lim:.4f} <= lo <= hi <= {lim:.4f}")
        return self


class DmaSection(_Section):
    slots: int = Field(4, ge=1)
    normalized_leakage: float = Field(0.5, gt=0, le=1)
    guide_phase: float = 0.0
    termination: Literal["radiating", "absorbing"] = "absorbing"
    phase_bits: int = Field(3, ge=1)
    spacing: float = Field(0.2, gt=0)


class EsparSection(_Section):
    elements_per_feed: int = Field(3, ge=2)
    spacing: float = Field(0.25, gt=0)
    bits: int = Field(2, ge=1)
    max_reactance: float = Field(100.0, gt=0)
    source_resistance: float = Field(50.0, ge=0)
    loss_resistance: float = Field(1.0, ge=0)


class SwitchedSection(_Section):
    n_patterns: int = Field(4, ge=1)
    order: float = Field(4.0, gt=0)
    insertion_loss_db: float = Field(1.0, ge=0)
    spacing: float = Field(0.5, gt=0)
    pattern_file: Optional[str] = None


class EmConfig(_Section):
    dma: DmaSection = DmaSection()
    espar: EsparSection = EsparSection()
    switched: SwitchedSection = SwitchedSection()


class ArchitectureConfig(_Section):
    name: str
    kind: Literal["digital", "hybrid", "tri-hybrid"]
    n_streams: int = Field(4, ge=1)
    n_rf: Optional[int] = Field(None, ge=1)
    connectivity: Literal["fully-connected", "subarray"] = "fully-connected"
    phase_bits: Optional[int] = Field(2, ge=1)
    analog: bool = True
    em: Literal["static", "dma", "espar", "switched"] = "static"

    @model_validator(mode="after")
    def _layers(self):
        if self.kind == "tri-hybrid" and self.em == "static":
            raise ValueError("a tri-hybrid architecture needs a reconfigurable EM layer")
        if self.kind != "tri-hybrid" and self.em != "static":
            raise ValueError(f"a {self.kind} architecture uses static elements")
        if self.kind != "digital" and self.n_rf is None:
            raise ValueError("n_rf is required for hybrid and tri-hybrid architectures")
        return self


class PowerConfig(_Section):
    lo: float = Field(0.0225, ge=0)
    rf_chain: float = Field(0.040, ge=0)
    dac: float = Field(0.050, ge=0)
    phase_shifter: float = Field(0.0216, ge=0)
    pa: float = Field(0.050, ge=0)
    switch: float = Field(0.005, ge=0)
    em_control_per_bit: float = Field(0.0005, ge=0)
    common: float = Field(0.200, ge=0)


class OptimizerConfig(_Section):
    method: Literal["alternating", "annealing", "genetic", "random", "exhaustive", "two-stage"] = "alternating"
    budget: int = Field(2000, ge=1)
    rounds: int = Field(3, ge=1)
    t0: float = Field(0.3, gt=0)
    cooling: float = Field(0.9, gt=0, lt=1)
    steps_per_temperature: int = Field(40, ge=1)
    population: int = Field(20, ge=2)
    cap: int = Field(500_000_000, ge=1)


EXPERIMENTS = ("link", "aperture-sweep", "frontier", "dma-map", "optimize")


class ExperimentConfig(_Section):
    name: Literal["link", "aperture-sweep", "frontier", "dma-map", "optimize"] = "link"
    n_list: list[int] = [16, 32, 64, 128, 256, 512, 1024]
    compute_se: bool = True
    tx_power_list: list[float] = [0.25, 0.5, 1.0]
    n_channels: int = Field(3, ge=1)
    alphas: list[float] = [0.5, 0.75, 1.0]
    resolution: int = Field(64, ge=8)
    methods: list[Literal["exhaustive", "annealing", "genetic", "random", "alternating"]] = [
        "exhaustive", "annealing", "genetic", "random", "alternating"]
    optimizer_seeds: int = Field(4, ge=1)
    optimizer: OptimizerConfig = OptimizerConfig()

    @model_validator(mode="after")
    def _grids(self):
        if any(n < 1 for n in self.n_list) or self.n_list != sorted(self.n_list):
            raise ValueError("n_list must be ascending positive integers")
        if len(set(self.n_list)) != len(self.n_list):
            raise ValueError("n_list has duplicates")
        if not self.tx_power_list or any(not p > 0 for p in self.tx_power_list):
            raise ValueError("tx_power_list must hold positive powers")
        if not self.alphas or any(not 0 < a <= 1 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1] (normalized_leakage range)")
        return self


class OutputConfig(_Section):
    dir: str = "results"


class ScenarioConfig(_Section):
    schema_version: Literal[1] = SCHEMA_VERSION
    seed: int = Field(0, ge=0, lt=2**64)
    carrier_hz: float = Field(15e9, gt=0)
    bandwidth_hz: float = Field(1e8, gt=0)
    tx_power_w: float = Field(1.0, gt=0)
    noise_w: float = Field(1.0, gt=0)
    arrays: ArraysConfig = ArraysConfig()
    channel: ChannelConfig = ChannelConfig()
    architectures: list[ArchitectureConfig] = Field(default_factory=lambda: list(DEFAULT_ARCHITECTURES))
    em: EmConfig = EmConfig()
    power: PowerConfig = PowerConfig()
    experiment: ExperimentConfig = ExperimentConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _names(self):
        names = [a.name for a in self.architectures]
        if not names:
            raise ValueError("at least one architecture is required")
        if len(set(names)) != len(names):
            raise ValueError(f"architecture names must be unique, got {names}")
        return self


DEFAULT_ARCHITECTURES = (
    ArchitectureConfig(name="digital", kind="digital", n_streams=4),
    ArchitectureConfig(name="hybrid", kind="hybrid", n_streams=4, n_rf=4),
    ArchitectureConfig(name="tri-hybrid", kind="tri-hybrid", n_streams=4, n_rf=4, em="dma"),
    ArchitectureConfig(name="dma-only", kind="tri-hybrid", n_streams=1, n_rf=1,
                       analog=False, phase_bits=None, em="dma"),
)


def _loc(loc) -> str:
    return ".".join(str(p) for p in loc) or "<root>"


def validate_scenario(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        errors = []
        for e in exc.errors():
            msg = e["msg"]
            loc = _loc(e["loc"])
            if e["type"] == "extra_forbidden":
                msg = "unknown key"
            errors.append((loc, msg))
        raise ConfigError(errors) from None


def parse_scenario(path) -> ScenarioConfig:
    """Load and validate a scenario file; raises :class:`ConfigError`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError([("<file>", f"scenario file not found: {path}")]) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<file>", f"invalid JSON: {exc}")]) from None
    if not isinstance(data, dict):
        raise ConfigError([("<root>", "scenario must be a JSON object")])
    return validate_scenario(data)


def scenario_dict(cfg: ScenarioConfig) -> dict:
    return cfg.model_dump(mode="json")


def dump_scenario(cfg: ScenarioConfig, path=None) -> str:
    text = json.dumps(scenario_dict(cfg), indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def config_hash(cfg: ScenarioConfig) -> str:
    """SHA-256 of the canonical JSON form of a fully defaulted config.

    The output directory is left out: where results go does not change them.
    """
    data = scenario_dict(cfg)
    data.pop("output")
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
