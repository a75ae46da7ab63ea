"""Finite-volume reference solution of the Saint-Venant system with bathymetry.

    h_t + (hu)_x = 0
    (hu)_t + (hu²  + ½gh²)_x = −g h b_x

The scheme is MUSCL–Hancock with an HLL flux and hydrostatic
reconstruction. Pressure and bathymetry source are combined per cell as
½g(h⁻ + h⁺)(η⁺ − η⁻), which vanishes identically for a lake at rest, so
still water over any bottom is preserved exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Final, Sequence

import numpy as np
from scipy.ndimage import uniform_filter1d

from .unit_cell import PeriodicProfile, cell_average

logger = logging.getLogger(__name__)

GHOSTS: Final[int] = 2
MIN_CELLS_PER_PERIOD: Final[int] = 64
LIMITERS: Final[tuple[str, ...]] = ("minmod", "mc")
BOUNDARIES: Final[tuple[str, ...]] = ("wall", "outflow")


class ReferenceSolverError(Exception):
    """Raised when the finite-volume reference run cannot proceed."""


@dataclass(frozen=True)
class ReferenceConfig:
    g: float = 9.81
    cfl: float = 0.45
    limiter: str = "minmod"
    left_boundary: str = "wall"
    right_boundary: str = "outflow"
    max_steps: int = 50_000_000

    def __post_init__(self) -> None:
        if not 0.0 < self.cfl < 1.0:
            raise ReferenceSolverError(f"cfl must lie in (0, 1), got {self.cfl}.")
        if not self.g > 0.0:
            raise ReferenceSolverError(f"Gravity must be positive, got {self.g}.")
        if self.limiter not in LIMITERS:
            raise ReferenceSolverError(f"Unknown limiter {self.limiter!r}; choose from {LIMITERS}.")
        for side in (self.left_boundary, self.right_boundary):
            if side not in BOUNDARIES:
                raise ReferenceSolverError(f"Unknown boundary {side!r}; choose from {BOUNDARIES}.")


@dataclass(frozen=True, eq=False)
class FVState:
    x: np.ndarray
    dx: float
    h: np.ndarray
    hu: np.ndarray
    b: np.ndarray
    t: float = 0.0
    outflow_mass: float = 0.0

    def __post_init__(self) -> None:
        if not (self.x.shape == self.h.shape == self.hu.shape == self.b.shape):
            raise ReferenceSolverError("x, h, hu and b must share one shape.")
        if self.x.size < 4:
            raise ReferenceSolverError("At least four cells are required.")
        if np.any(~np.isfinite(self.h)) or np.any(~np.isfinite(self.hu)):
            raise ReferenceSolverError(f"Non-finite state at t={self.t}.")
        if np.any(self.h <= 0.0):
            i = int(np.argmin(self.h))
            raise ReferenceSolverError(f"Dry cell at x={self.x[i]:.6g} (h={self.h[i]:.3e}) at t={self.t:.6g}.")

    @property
    def eta(self) -> np.ndarray:
        return self.h + self.b

    @property
    def u(self) -> np.ndarray:
        return self.hu / self.h

    def mass(self) -> float:
        return float(np.sum(self.h) * self.dx)


def build_state(
    H: PeriodicProfile,
    delta: float,
    length: float,
    cells_per_period: int,
    surface: Callable[[np.ndarray], np.ndarray] | None = None,
    discharge: Callable[[np.ndarray], np.ndarray] | None = None,
    eta0: float = 0.0,
) -> FVState:
    """Cells on [0, length] with b = η⁰ − H(x/δ) as exact cell averages.

    ``surface`` gives the perturbation of η above η⁰ at cell centres.
    """
    if cells_per_period < MIN_CELLS_PER_PERIOD:
        raise ReferenceSolverError(
            f"Need at least {MIN_CELLS_PER_PERIOD} cells per bathymetry period, got {cells_per_period}."
        )
    if not (delta > 0.0 and length > 0.0):
        raise ReferenceSolverError("delta and length must be positive.")
    periods = length / delta
    if abs(periods - round(periods)) > 1e-9 * max(1.0, periods):
        raise ReferenceSolverError(f"Domain length {length} must hold a whole number of periods of {delta}.")
    n = int(round(periods)) * cells_per_period
    dx = length / n
    edges = dx * np.arange(n + 1)
    x = 0.5 * (edges[:-1] + edges[1:])
    depth = cell_average(H, edges[:-1] / delta, edges[1:] / delta)
    b = eta0 - depth
    bump = np.zeros(n) if surface is None else np.asarray(surface(x), dtype=float)
    h = depth + bump
    hu = np.zeros(n) if discharge is None else np.asarray(discharge(x), dtype=float)
    return FVState(x, dx, h, hu, b)


def _limited_slope(u: np.ndarray, limiter: str) -> np.ndarray:
    """Limited undivided differences for interior entries of a ghost-padded array."""
    left = u[1:-1] - u[:-2]
    right = u[2:] - u[1:-1]
    same = left * right > 0.0
    if limiter == "minmod":
        slope = np.where(same, np.where(np.abs(left) < np.abs(right), left, right), 0.0)
    else:
        centred = 0.5 * (left + right)
        bound = 2.0 * np.minimum(np.abs(left), np.abs(right))
        slope = np.where(same, np.sign(centred) * np.minimum(np.abs(centred), bound), 0.0)
    return slope


def _pad(values: np.ndarray, left: str, right: str, odd: bool) -> np.ndarray:
    sign = -1.0 if odd else 1.0
    lg = sign * values[GHOSTS - 1 :: -1] if left == "wall" else np.repeat(values[:1], GHOSTS)
    rg = sign * values[: -GHOSTS - 1 : -1] if right == "wall" else np.repeat(values[-1:], GHOSTS)
    return np.concatenate((lg, values, rg))


def _hll(
    hL: np.ndarray, huL: np.ndarray, hR: np.ndarray, huR: np.ndarray, g: float
) -> tuple[np.ndarray, np.ndarray]:
    """HLL flux written as F_L − s_L(ΔF − s_R ΔU)/(s_R − s_L); momentum flux excludes ½gh²."""
    uL = huL / hL
    uR = huR / hR
    cL = np.sqrt(g * hL)
    cR = np.sqrt(g * hR)
    sL = np.minimum(np.minimum(uL - cL, uR - cR), 0.0)
    sR = np.maximum(np.maximum(uL + cL, uR + cR), 0.0)
    width = sR - sL
    pL = 0.5 * g * hL * hL
    pR = 0.5 * g * hR * hR
    f_mass = huL - sL * ((huR - huL) - sR * (hR - hL)) / width
    f_mom = huL * uL - sL * ((huR * uR + pR) - (huL * uL + pL) - sR * (huR - huL)) / width
    return f_mass, f_mom


def _face_states(state: FVState, config: ReferenceConfig, dt: float) -> tuple[np.ndarray, ...]:
    """Hancock-predicted face values of (h, η, hu) for cells −1..N (one ghost each side)."""
    left, right = config.left_boundary, config.right_boundary
    h = _pad(state.h, left, right, odd=False)
    hu = _pad(state.hu, left, right, odd=True)
    b = _pad(state.b, left, right, odd=False)
    eta = h + b
    # trim to cells -1..N; slopes need one neighbour on each side
    dh = _limited_slope(h, config.limiter)
    deta = _limited_slope(eta, config.limiter)
    dhu = _limited_slope(hu, config.limiter)
    hc, etac, huc = h[1:-1], eta[1:-1], hu[1:-1]
    hm, hp = hc - 0.5 * dh, hc + 0.5 * dh
    em, ep = etac - 0.5 * deta, etac + 0.5 * deta
    qm, qp = huc - 0.5 * dhu, huc + 0.5 * dhu
    if np.any(hm <= 0.0) or np.any(hp <= 0.0):
        raise ReferenceSolverError(f"Reconstruction produced a dry face at t={state.t:.6g}.")
    g = config.g
    ratio = 0.5 * dt / state.dx
    mass = ratio * (qp - qm)
    momentum = ratio * (qp * qp / hp - qm * qm / hm + 0.5 * g * (hm + hp) * (ep - em))
    return hm - mass, hp - mass, em - mass, ep - mass, qm - momentum, qp - momentum


def max_wave_speed(state: FVState, g: float) -> float:
    return float(np.max(np.abs(state.u) + np.sqrt(g * state.h)))


def fv_step(state: FVState, config: ReferenceConfig, dt_max: float | None = None) -> FVState:
    """Advance one step at dt = cfl·Δx / max|u ± √(gh)|, capped at ``dt_max``."""
    g = config.g
    dt = config.cfl * state.dx / max_wave_speed(state, g)
    if dt_max is not None:
        dt = min(dt, dt_max)
    hm, hp, em, ep, qm, qp = _face_states(state, config, dt)
    # interface k lies between the plus face of cell k-1 and the minus face of cell k
    b_star = np.maximum(ep[:-1] - hp[:-1], em[1:] - hm[1:])
    hL = np.maximum(0.0, ep[:-1] - b_star)
    hR = np.maximum(0.0, em[1:] - b_star)
    if np.any(hL <= 0.0) or np.any(hR <= 0.0):
        raise ReferenceSolverError(f"Hydrostatic reconstruction dried an interface at t={state.t:.6g}.")
    huL = hL * (qp[:-1] / hp[:-1])
    huR = hR * (qm[1:] / hm[1:])
    f_mass, f_mom = _hll(hL, huL, hR, huR, g)

    hm_c, hp_c = hm[1:-1], hp[1:-1]
    em_c, ep_c = em[1:-1], ep[1:-1]
    jump = 0.5 * g * (hL[:-1] ** 2 - hR[:-1] ** 2)
    well_balanced = 0.5 * g * (hm_c + hp_c) * (ep_c - em_c)
    ratio = dt / state.dx
    h_new = state.h - ratio * (f_mass[1:] - f_mass[:-1])
    hu_new = state.hu - ratio * (f_mom[1:] - f_mom[:-1] - jump + well_balanced)
    outflow = state.outflow_mass
    if config.right_boundary == "outflow":
        outflow += dt * float(f_mass[-1])
    if config.left_boundary == "outflow":
        outflow -= dt * float(f_mass[0])
    return FVState(state.x, state.dx, h_new, hu_new, state.b, state.t + dt, outflow)


def run_reference(
    initial: FVState,
    output_times: Sequence[float],
    config: ReferenceConfig | None = None,
) -> list[FVState]:
    """Snapshots of the reference run at the requested (increasing) times."""
    config = config or ReferenceConfig()
    times = [float(t) for t in output_times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ReferenceSolverError("Output times must be strictly increasing.")
    if times and times[0] < initial.t:
        raise ReferenceSolverError(f"Output time {times[0]} precedes the initial time {initial.t}.")
    state = initial
    steps = 0
    snapshots: list[FVState] = []
    for target in times:
        while state.t < target - 1e-12 * max(1.0, target):
            state = fv_step(state, config, dt_max=target - state.t)
            steps += 1
            if steps > config.max_steps:
                raise ReferenceSolverError(f"Exceeded {config.max_steps} steps before t={target}.")
            if steps % 5000 == 0:
                logger.debug("reference step %d: t=%.6g", steps, state.t)
        state = replace(state, t=target)
        snapshots.append(state)
    logger.debug("Reference run finished after %d steps on %d cells.", steps, initial.x.size)
    return snapshots


def period_average(state: FVState, period: float) -> np.ndarray:
    """Moving mean of η over one bathymetry period."""
    width = max(1, int(round(period / state.dx)))
    return uniform_filter1d(state.eta, size=width, mode="nearest")


@dataclass(frozen=True, eq=False)
class SolitaryTrack:
    times: np.ndarray
    crest_positions: np.ndarray
    amplitudes: np.ndarray
    speed: float
    intercept: float
    gauge_x: float
    trace_t: np.ndarray
    trace_eta: np.ndarray
    tau: float

    @property
    def amplitude(self) -> float:
        return float(self.amplitudes[-1])


def leading_crest(x: np.ndarray, eta: np.ndarray, window: tuple[float, float]) -> tuple[float, float]:
    inside = np.nonzero((x >= window[0]) & (x <= window[1]))[0]
    if inside.size < 3:
        raise ReferenceSolverError(f"Window {window} holds fewer than three cells.")
    e = eta[inside]
    interior = np.arange(1, e.size - 1)
    peaks = interior[(e[interior] >= e[interior - 1]) & (e[interior] > e[interior + 1])]
    threshold = 0.5 * float(np.max(e))
    peaks = peaks[e[peaks] >= threshold]
    if peaks.size == 0 or threshold <= 0.0:
        raise ReferenceSolverError(f"No separated crest inside window {window}.")
    j = int(peaks[-1])
    left, mid, right = e[j - 1], e[j], e[j + 1]
    curvature = left - 2.0 * mid + right
    offset = 0.5 * (left - right) / curvature if curvature != 0.0 else 0.0
    dx = float(x[inside[1]] - x[inside[0]])
    position = float(x[inside[j]]) + offset * dx
    height = mid - 0.25 * (left - right) * offset
    return position, float(height)


def crest_train(
    x: np.ndarray, eta: np.ndarray, window: tuple[float, float], fraction: float = 0.2
) -> list[tuple[float, float]]:
    """Separated crests inside ``window``, ordered by position (leading crest last).

    A crest is a local maximum at least ``fraction`` of the window maximum.
    Two neighbours count as separate only when the surface between them drops
    below half the lower of the two; otherwise the higher one is kept.
    """
    inside = np.nonzero((x >= window[0]) & (x <= window[1]))[0]
    if inside.size < 3:
        raise ReferenceSolverError(f"Window {window} holds fewer than three cells.")
    e = eta[inside]
    top = float(np.max(e))
    if top <= 0.0:
        return []
    interior = np.arange(1, e.size - 1)
    peaks = interior[(e[interior] >= e[interior - 1]) & (e[interior] > e[interior + 1])]
    peaks = peaks[e[peaks] >= fraction * top]
    kept: list[int] = []
    for j in peaks:
        if kept:
            i = kept[-1]
            trough = float(np.min(e[i : j + 1]))
            if trough >= 0.5 * min(e[i], e[j]):
                if e[j] > e[i]:
                    kept[-1] = int(j)
                continue
        kept.append(int(j))
    return [(float(x[inside[j]]), float(e[j])) for j in kept]


def extract_solitary(
    snapshots: Sequence[FVState],
    window: tuple[float, float],
    period: float | None = None,
    gauge_x: float | None = None,
) -> SolitaryTrack:
    """Track the rightmost crest (at least half the window maximum) across snapshots.

    With ``period`` the period-averaged surface is tracked. The gauge trace
    η(x̄, t) is shifted by τ, the time the fitted crest passes x̄.
    """
    if len(snapshots) < 2:
        raise ReferenceSolverError("Crest tracking needs at least two snapshots.")
    times = np.array([s.t for s in snapshots])
    crests = []
    for snap in snapshots:
        eta = period_average(snap, period) if period is not None else snap.eta
        crests.append(leading_crest(snap.x, eta, window))
    positions = np.array([p for p, _ in crests])
    amplitudes = np.array([a for _, a in crests])
    speed, intercept = np.polyfit(times, positions, 1)
    gauge = float(positions[-1]) if gauge_x is None else float(gauge_x)
    trace = np.array([float(np.interp(gauge, s.x, s.eta)) for s in snapshots])
    tau = (gauge - intercept) / speed if speed != 0.0 else math.nan
    return SolitaryTrack(
        times=times,
        crest_positions=positions,
        amplitudes=amplitudes,
        speed=float(speed),
        intercept=float(intercept),
        gauge_x=gauge,
        trace_t=times - tau,
        trace_eta=trace,
        tau=float(tau),
    )
