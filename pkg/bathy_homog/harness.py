"""Scenario orchestration: initial data, homogenized vs reference runs, comparison metrics."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .coefficients import HomogenizedCoefficients, compute
from .homogenized_solver import FieldState, SolverConfig, periodic_grid, simulate
from .scenarios import ScenarioConfig, ScenarioError
from .swe_reference import (
    FVState,
    ReferenceConfig,
    ReferenceSolverError,
    build_state,
    leading_crest,
    period_average,
    run_reference,
)
from .traveling_wave import TravelingWaveSolution, solitary_wave_o3, solitary_wave_o5

logger = logging.getLogger(__name__)


def scenario_coefficients(config: ScenarioConfig) -> HomogenizedCoefficients:
    return compute(config.profile(), config.g)


def initial_wave(config: ScenarioConfig, coeffs: HomogenizedCoefficients) -> TravelingWaveSolution:
    """The solitary wave requested by a ``traveling_wave`` initial condition."""
    ic = config.initial_condition
    if ic.kind != "traveling_wave":
        raise ScenarioError(f"Initial condition {ic.kind!r} is not a traveling wave.")
    V = float(ic.speed_ratio) * coeffs.c
    if ic.order == 3:
        return solitary_wave_o3(coeffs, V, config.delta)
    return solitary_wave_o5(coeffs, V, config.delta)


def _initial_profiles(config: ScenarioConfig, coeffs: HomogenizedCoefficients):
    """(η − η⁰, q) as functions of x."""
    ic = config.initial_condition
    if ic.kind == "gaussian":
        def surface(x: np.ndarray) -> np.ndarray:
            return ic.amplitude * np.exp(-(((x - ic.center) / ic.width) ** 2))

        def discharge(x: np.ndarray) -> np.ndarray:
            return np.zeros_like(x)

    elif ic.kind == "traveling_wave":
        wave = initial_wave(config, coeffs)

        def surface(x: np.ndarray) -> np.ndarray:
            return wave.sample(x, ic.center)

        def discharge(x: np.ndarray) -> np.ndarray:
            return wave.V * wave.sample(x, ic.center)

    else:
        xs, etas = np.asarray(ic.x), np.asarray(ic.eta)
        qs = np.asarray(ic.q) if ic.q else np.zeros_like(xs)

        def surface(x: np.ndarray) -> np.ndarray:
            return np.interp(x, xs, etas, left=0.0, right=0.0)

        def discharge(x: np.ndarray) -> np.ndarray:
            return np.interp(x, xs, qs, left=0.0, right=0.0)

    return surface, discharge


def initial_field(config: ScenarioConfig, coeffs: HomogenizedCoefficients, M: int | None = None) -> FieldState:
    domain = config.homogenized
    x = periodic_grid(domain.L, M or domain.M)
    surface, discharge = _initial_profiles(config, coeffs)
    return FieldState(x, surface(x), discharge(x))


def initial_reference(config: ScenarioConfig, coeffs: HomogenizedCoefficients) -> FVState:
    surface, discharge = _initial_profiles(config, coeffs)
    ref = config.reference
    try:
        return build_state(
            config.profile(),
            config.delta,
            ref.length,
            ref.cells_per_period,
            surface=surface,
            discharge=discharge,
            eta0=config.eta0,
        )
    except ReferenceSolverError as exc:
        raise ScenarioError(f"Invalid reference domain: {exc}") from exc


def solver_config(config: ScenarioConfig, order: int) -> SolverConfig:
    domain = config.homogenized
    return SolverConfig(
        order=order,
        delta=config.delta,
        dealias=domain.dealias,
        rtol=domain.rtol,
        atol=domain.atol,
        tableau=domain.tableau,
        final_time=config.output_times[-1],
    )


def reference_config(config: ScenarioConfig) -> ReferenceConfig:
    return ReferenceConfig(g=config.g, cfl=config.reference.cfl, limiter=config.reference.limiter)


def homogenized_on(state: FieldState, x: np.ndarray) -> np.ndarray:
    """η̄ interpolated onto arbitrary positions using periodicity on [−L, L)."""
    xp = np.append(state.x, state.x[0] + 2.0 * state.L)
    fp = np.append(state.eta_bar, state.eta_bar[0])
    return np.interp(np.mod(x + state.L, 2.0 * state.L) - state.L, xp, fp)


def _crest(x: np.ndarray, eta: np.ndarray, window: tuple[float, float]) -> tuple[float, float]:
    try:
        return leading_crest(x, eta, window)
    except ReferenceSolverError:
        return math.nan, math.nan


@dataclass(frozen=True)
class ComparisonRow:
    order: int
    t: float
    linf: float
    l2: float
    crest_homogenized: float
    crest_reference: float
    amplitude_homogenized: float
    amplitude_reference: float


COMPARISON_COLUMNS = (
    "order",
    "t",
    "linf",
    "l2",
    "crest_homogenized",
    "crest_reference",
    "amplitude_homogenized",
    "amplitude_reference",
)


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    scenario: str
    rows: tuple[ComparisonRow, ...]
    homogenized_seconds: dict[int, float]
    reference_seconds: float
    homogenized: dict[int, list[FieldState]]
    reference: list[FVState]

    def speedup(self, order: int) -> float:
        """Reference wall-clock time over homogenized wall-clock time."""
        seconds = self.homogenized_seconds[order]
        return self.reference_seconds / seconds if seconds > 0.0 else math.inf

    def row(self, order: int, t: float) -> ComparisonRow:
        for r in self.rows:
            if r.order == order and math.isclose(r.t, t):
                return r
        raise KeyError((order, t))

    def table(self) -> np.ndarray:
        return np.array([[getattr(r, name) for name in COMPARISON_COLUMNS] for r in self.rows], dtype=float)


def compare_snapshot(
    state: FieldState, reference: FVState, period: float, order: int = 0
) -> ComparisonRow:
    """Differences of η̄ and the period-averaged reference surface on the overlap of both domains."""
    reach = min(state.L, float(reference.x[-1] + 0.5 * reference.dx))
    inside = reference.x <= reach
    x = reference.x[inside]
    averaged = period_average(reference, period)[inside]
    diff = homogenized_on(state, x) - averaged
    window = (0.0, reach)
    keep = (state.x >= 0.0) & (state.x <= reach)
    crest_h, amp_h = _crest(state.x[keep], state.eta_bar[keep], window)
    crest_r, amp_r = _crest(x, averaged, window)
    return ComparisonRow(
        order=order,
        t=state.t,
        linf=float(np.max(np.abs(diff))),
        l2=float(np.sqrt(np.sum(diff**2) * reference.dx)),
        crest_homogenized=crest_h,
        crest_reference=crest_r,
        amplitude_homogenized=amp_h,
        amplitude_reference=amp_r,
    )


def run_homogenized(
    config: ScenarioConfig, order: int, coeffs: HomogenizedCoefficients | None = None
) -> tuple[list[FieldState], float]:
    coeffs = coeffs or scenario_coefficients(config)
    initial = initial_field(config, coeffs)
    start = time.perf_counter()
    snapshots = simulate(initial, coeffs, solver_config(config, order), config.output_times)
    return snapshots, time.perf_counter() - start


def run_reference_scenario(
    config: ScenarioConfig, coeffs: HomogenizedCoefficients | None = None
) -> tuple[list[FVState], float]:
    coeffs = coeffs or scenario_coefficients(config)
    initial = initial_reference(config, coeffs)
    start = time.perf_counter()
    snapshots = run_reference(initial, config.output_times, reference_config(config))
    return snapshots, time.perf_counter() - start


def run_comparison(config: ScenarioConfig, orders: Sequence[int] | None = None) -> ComparisonReport:
    """Run the reference once and every requested homogenized order, then compare snapshots."""
    orders = tuple(orders) if orders is not None else config.homogenized.orders
    coeffs = scenario_coefficients(config)
    reference, reference_seconds = run_reference_scenario(config, coeffs)
    logger.info("Reference run for %s took %.3f s.", config.name, reference_seconds)

    rows: list[ComparisonRow] = []
    timings: dict[int, float] = {}
    homogenized: dict[int, list[FieldState]] = {}
    for order in orders:
        snapshots, seconds = run_homogenized(config, order, coeffs)
        timings[order] = seconds
        homogenized[order] = snapshots
        logger.info("Order-%d homogenized run took %.3f s.", order, seconds)
        for state, ref in zip(snapshots, reference):
            rows.append(compare_snapshot(state, ref, config.delta, order))
    return ComparisonReport(config.name, tuple(rows), timings, reference_seconds, homogenized, reference)


def refinement_gap(config: ScenarioConfig, order: int) -> float:
    """Largest pointwise change of η̄ when M doubles and the tolerances tighten by 2⁵."""
    coeffs = scenario_coefficients(config)
    coarse = simulate(initial_field(config, coeffs), coeffs, solver_config(config, order), config.output_times)
    domain = config.homogenized
    fine_config = replace(solver_config(config, order), rtol=domain.rtol / 32.0, atol=domain.atol / 32.0)
    fine = simulate(initial_field(config, coeffs, 2 * domain.M), coeffs, fine_config, config.output_times)
    gap = max(float(np.max(np.abs(f.eta_bar[::2] - c.eta_bar))) for c, f in zip(coarse, fine))
    logger.info("Refinement gap for order %d: %.3e", order, gap)
    return gap
