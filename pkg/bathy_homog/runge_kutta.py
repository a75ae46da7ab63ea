"""Explicit embedded Runge–Kutta pairs and the adaptive step controller.

A tableau stores the stage rows of its Butcher table, the propagating
weights and the error weights e = b − b̂. The propagated solution is always
the higher-order one (local extrapolation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Final

import numpy as np

SAFETY: Final[float] = 0.9
MIN_FACTOR: Final[float] = 0.2
MAX_FACTOR: Final[float] = 5.0


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    order: int
    embedded_order: int
    nodes: tuple[float, ...]
    rows: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]
    error_weights: tuple[float, ...]

    @property
    def stages(self) -> int:
        return len(self.nodes)


# Dormand–Prince 5(4), seven stages
DORMAND_PRINCE_54: Final = ButcherTableau(
    name="dopri54",
    order=5,
    embedded_order=4,
    nodes=(0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0),
    rows=(
        (1 / 5,),
        (3 / 40, 9 / 40),
        (44 / 45, -56 / 15, 32 / 9),
        (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
        (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
        (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
    ),
    weights=(35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0),
    error_weights=(71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40),
)

# Cash–Karp 5(4), six stages
CASH_KARP_54: Final = ButcherTableau(
    name="cashkarp54",
    order=5,
    embedded_order=4,
    nodes=(0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8),
    rows=(
        (1 / 5,),
        (3 / 40, 9 / 40),
        (3 / 10, -9 / 10, 6 / 5),
        (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
        (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
    ),
    weights=(37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771),
    error_weights=(-277 / 64512, 0.0, 6925 / 370944, -6925 / 202752, -277 / 14336, 277 / 7084),
)

TABLEAUX: Final[dict[str, ButcherTableau]] = {
    DORMAND_PRINCE_54.name: DORMAND_PRINCE_54,
    CASH_KARP_54.name: CASH_KARP_54,
}


def embedded_step(
    f: Callable[[np.ndarray], np.ndarray],
    y: np.ndarray,
    dt: float,
    tableau: ButcherTableau = DORMAND_PRINCE_54,
) -> tuple[np.ndarray, np.ndarray]:
    """One step of an autonomous system y′ = f(y); returns (y_new, error estimate)."""
    k = [f(y)]
    for row in tableau.rows:
        increment = sum(a * ki for a, ki in zip(row, k) if a != 0.0)
        k.append(f(y + dt * increment))
    y_new = y + dt * sum(b * ki for b, ki in zip(tableau.weights, k) if b != 0.0)
    err = dt * sum(e * ki for e, ki in zip(tableau.error_weights, k) if e != 0.0)
    return y_new, err


def error_norm(err: np.ndarray, y: np.ndarray, y_new: np.ndarray, rtol: float, atol: float) -> float:
    """RMS of the error scaled by atol + rtol·max(|y|, |y_new|)."""
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def step_factor(err: float, order: int) -> float:
    """Standard controller factor, clipped to [MIN_FACTOR, MAX_FACTOR]."""
    if err == 0.0:
        return MAX_FACTOR
    return float(np.clip(SAFETY * err ** (-1.0 / order), MIN_FACTOR, MAX_FACTOR))
