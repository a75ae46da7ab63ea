from __future__ import annotations

import math

import numpy as np
import pytest

from bathy_homog.runge_kutta import (
    MAX_FACTOR,
    MIN_FACTOR,
    TABLEAUX,
    embedded_step,
    error_norm,
    step_factor,
)


@pytest.mark.parametrize("name", sorted(TABLEAUX))
def test_tableau_consistency(name: str) -> None:
    tableau = TABLEAUX[name]

    assert sum(tableau.weights) == pytest.approx(1.0, abs=1e-15)
    assert sum(tableau.error_weights) == pytest.approx(0.0, abs=1e-15)
    for node, row in zip(tableau.nodes[1:], tableau.rows):
        assert sum(row) == pytest.approx(node, abs=1e-15)
    assert len(tableau.weights) == tableau.stages


@pytest.mark.parametrize("name", sorted(TABLEAUX))
def test_fifth_order_convergence(name: str) -> None:
    tableau = TABLEAUX[name]
    y0 = np.array([1.0, 0.0])

    def f(y: np.ndarray) -> np.ndarray:
        return np.array([-y[1], y[0]])

    errors = []
    for dt in (0.2, 0.1):
        y_new, _ = embedded_step(f, y0, dt, tableau)
        errors.append(float(np.max(np.abs(y_new - np.array([math.cos(dt), math.sin(dt)])))))

    # local error of a fifth-order method scales like dt⁶
    assert errors[0] / errors[1] == pytest.approx(64.0, rel=0.15)


def test_error_estimate_tracks_true_error() -> None:
    tableau = TABLEAUX["dopri54"]
    y0 = np.array([1.0])
    y_new, err = embedded_step(lambda y: -y, y0, 0.5, tableau)

    assert abs(float(y_new[0]) - math.exp(-0.5)) < abs(float(err[0]))


def test_error_norm_and_step_factor() -> None:
    y = np.array([1.0, 2.0])
    err = np.array([1e-6, 2e-6])

    assert error_norm(err, y, y, rtol=1e-6, atol=0.0) == pytest.approx(1.0)
    assert step_factor(0.0, 5) == MAX_FACTOR
    assert step_factor(1e9, 5) == MIN_FACTOR
    assert step_factor(1.0, 5) == pytest.approx(0.9)
