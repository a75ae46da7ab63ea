"""Scenario configuration: JSON load/dump and the built-in scenarios."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Final, Mapping

import numpy as np

from .swe_reference import LIMITERS, MIN_CELLS_PER_PERIOD
from .unit_cell import PeriodicProfile, PiecewiseConstant, Sampled, Sinusoidal, UnitCellError

BATHYMETRY_KINDS: Final[tuple[str, ...]] = ("piecewise_constant", "sinusoidal", "sampled")
INITIAL_KINDS: Final[tuple[str, ...]] = ("gaussian", "traveling_wave", "samples")


class ScenarioError(Exception):
    """Raised for malformed or unknown scenario configurations."""


@dataclass(frozen=True)
class BathymetrySpec:
    kind: str
    delta: float = 1.0
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    mean: float = 0.0
    amplitude: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in BATHYMETRY_KINDS:
            raise ScenarioError(f"Unknown bathymetry kind {self.kind!r}; choose from {BATHYMETRY_KINDS}.")
        if not self.delta > 0.0:
            raise ScenarioError(f"delta must be positive, got {self.delta}.")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def profile(self) -> PeriodicProfile:
        try:
            if self.kind == "piecewise_constant":
                return PiecewiseConstant(self.breakpoints, self.values)
            if self.kind == "sinusoidal":
                return Sinusoidal(self.mean, self.amplitude, self.phase)
            return Sampled(np.asarray(self.values))
        except UnitCellError as exc:
            raise ScenarioError(f"Invalid bathymetry: {exc}") from exc


@dataclass(frozen=True)
class InitialCondition:
    """η(x, 0) and q(x, 0); ``gaussian`` is A·exp(−((x − x₀)/w)²) at rest."""

    kind: str = "gaussian"
    amplitude: float = 0.025
    width: float = 3.0
    center: float = 0.0
    order: int = 3
    speed_ratio: float | None = None
    x: tuple[float, ...] = ()
    eta: tuple[float, ...] = ()
    q: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in INITIAL_KINDS:
            raise ScenarioError(f"Unknown initial condition {self.kind!r}; choose from {INITIAL_KINDS}.")
        if self.kind == "gaussian" and not self.width > 0.0:
            raise ScenarioError("Gaussian width must be positive.")
        if self.kind == "traveling_wave":
            if self.order not in (3, 5):
                raise ScenarioError(f"Traveling-wave order must be 3 or 5, got {self.order}.")
            if self.speed_ratio is None or not self.speed_ratio > 1.0:
                raise ScenarioError("Traveling-wave initial data needs speed_ratio V/c > 1.")
        if self.kind == "samples":
            if not (len(self.x) == len(self.eta) and len(self.x) >= 2):
                raise ScenarioError("Sampled initial data needs matching x and eta arrays.")
            if self.q and len(self.q) != len(self.x):
                raise ScenarioError("Sampled q must match x.")
        for name in ("x", "eta", "q"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))


@dataclass(frozen=True)
class HomogenizedDomain:
    L: float = 400.0
    M: int = 8192
    orders: tuple[int, ...] = (3, 4, 5)
    rtol: float = 1e-8
    atol: float = 1e-10
    dealias: bool = True
    tableau: str = "dopri54"

    def __post_init__(self) -> None:
        if not self.L > 0.0 or self.M < 16 or self.M & (self.M - 1):
            raise ScenarioError(f"Homogenized domain needs L > 0 and M a power of two, got L={self.L}, M={self.M}.")
        if not self.orders or any(o not in (3, 4, 5) for o in self.orders):
            raise ScenarioError(f"Homogenized orders must be drawn from 3, 4, 5, got {self.orders}.")
        object.__setattr__(self, "orders", tuple(int(o) for o in self.orders))


@dataclass(frozen=True)
class ReferenceDomain:
    length: float = 400.0
    cells_per_period: int = 64
    cfl: float = 0.45
    limiter: str = "minmod"

    def __post_init__(self) -> None:
        if not self.length > 0.0:
            raise ScenarioError(f"Reference length must be positive, got {self.length}.")
        if int(self.cells_per_period) != self.cells_per_period or self.cells_per_period < MIN_CELLS_PER_PERIOD:
            raise ScenarioError(
                f"Reference needs an integer cells_per_period >= {MIN_CELLS_PER_PERIOD}, got {self.cells_per_period}."
            )
        if not 0.0 < self.cfl < 1.0:
            raise ScenarioError(f"Reference cfl must lie in (0, 1), got {self.cfl}.")
        if self.limiter not in LIMITERS:
            raise ScenarioError(f"Unknown limiter {self.limiter!r}; choose from {LIMITERS}.")
        object.__setattr__(self, "cells_per_period", int(self.cells_per_period))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    bathymetry: BathymetrySpec
    initial_condition: InitialCondition = field(default_factory=InitialCondition)
    homogenized: HomogenizedDomain = field(default_factory=HomogenizedDomain)
    reference: ReferenceDomain = field(default_factory=ReferenceDomain)
    output_times: tuple[float, ...] = (25.2,)
    g: float = 9.81
    eta0: float = 0.0

    def __post_init__(self) -> None:
        if not self.g > 0.0:
            raise ScenarioError(f"Gravity must be positive, got {self.g}.")
        times = tuple(float(t) for t in self.output_times)
        if not times or any(t <= 0.0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
            raise ScenarioError(f"Output times must be positive and strictly increasing, got {times}.")
        object.__setattr__(self, "output_times", times)

    @property
    def delta(self) -> float:
        return self.bathymetry.delta

    def profile(self) -> PeriodicProfile:
        return self.bathymetry.profile()

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _section(cls, data: Mapping[str, Any] | None, name: str):
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        raise ScenarioError(f"Section {name!r} must be an object.")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ScenarioError(f"Invalid keys in section {name!r}: {exc}") from exc


def scenario_from_dict(data: Mapping[str, Any]) -> ScenarioConfig:
    if "bathymetry" not in data or "name" not in data:
        raise ScenarioError("A scenario needs 'name' and 'bathymetry'.")
    known = {"name", "bathymetry", "initial_condition", "homogenized", "reference", "output_times", "g", "eta0"}
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"Unknown scenario keys: {sorted(unknown)}.")
    bathy = data["bathymetry"]
    if not isinstance(bathy, Mapping):
        raise ScenarioError("Section 'bathymetry' must be an object.")
    try:
        bathymetry = BathymetrySpec(**bathy)
    except TypeError as exc:
        raise ScenarioError(f"Invalid keys in section 'bathymetry': {exc}") from exc
    return ScenarioConfig(
        name=str(data["name"]),
        bathymetry=bathymetry,
        initial_condition=_section(InitialCondition, data.get("initial_condition"), "initial_condition"),
        homogenized=_section(HomogenizedDomain, data.get("homogenized"), "homogenized"),
        reference=_section(ReferenceDomain, data.get("reference"), "reference"),
        output_times=tuple(data.get("output_times", (25.2,))),
        g=float(data.get("g", 9.81)),
        eta0=float(data.get("eta0", 0.0)),
    )


def dumps_scenario(config: ScenarioConfig) -> str:
    return json.dumps(config.to_dict(), indent=2) + "\n"


def loads_scenario(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"Scenario is not valid JSON: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ScenarioError("A scenario file must hold a JSON object.")
    return scenario_from_dict(data)


def save_scenario(config: ScenarioConfig, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_scenario(config), encoding="utf-8")
    return path


def _builtin() -> dict[str, ScenarioConfig]:
    gaussian = InitialCondition(kind="gaussian", amplitude=1.0 / 40.0, width=3.0, center=0.0)
    times = (25.2, 50.0, 100.0, 150.0, 300.0)
    # wide enough that the t = 300 front stays clear of the ends
    homogenized = HomogenizedDomain(L=800.0, M=16384)
    reference = ReferenceDomain(length=700.0)
    return {
        "scenario_a": ScenarioConfig(
            name="scenario_a",
            bathymetry=BathymetrySpec(kind="piecewise_constant", breakpoints=(0.5, 1.0), values=(1.0, 0.3)),
            initial_condition=gaussian,
            homogenized=homogenized,
            reference=reference,
            output_times=times,
        ),
        "scenario_b": ScenarioConfig(
            name="scenario_b",
            bathymetry=BathymetrySpec(kind="sinusoidal", mean=0.6, amplitude=-0.4),
            initial_condition=gaussian,
            homogenized=homogenized,
            reference=reference,
            output_times=times,
        ),
        "flat": ScenarioConfig(
            name="flat",
            bathymetry=BathymetrySpec(kind="piecewise_constant", breakpoints=(1.0,), values=(1.0,)),
            initial_condition=InitialCondition(kind="gaussian", amplitude=1e-3, width=3.0),
            homogenized=HomogenizedDomain(L=200.0, M=2048),
            reference=ReferenceDomain(length=200.0),
            output_times=(10.0, 20.0),
        ),
    }


BUILTIN_SCENARIOS: Final[tuple[str, ...]] = ("scenario_a", "scenario_b", "flat")


def builtin_scenario(name: str) -> ScenarioConfig:
    scenarios = _builtin()
    if name not in scenarios:
        raise ScenarioError(f"Unknown scenario {name!r}; built-ins are {BUILTIN_SCENARIOS}.")
    return scenarios[name]


def load_scenario(name_or_path: str | Path) -> ScenarioConfig:
    """A built-in scenario by name, or a JSON scenario file."""
    if isinstance(name_or_path, str) and name_or_path in BUILTIN_SCENARIOS:
        return builtin_scenario(name_or_path)
    path = Path(name_or_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"Cannot read scenario {path}: {exc}") from exc
    return loads_scenario(text)
