from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import matplotlib.pyplot as plt
import numpy as np

from bathy_homog import (
    TravelingWaveError,
    compute,
    load_scenario,
    solitary_wave_o3,
    solitary_wave_o5,
)
from bathy_homog.cli import OUTPUT_DIR_ENV
from bathy_homog.dispersion import FORMS, dispersion_curve, quintic_ratio
from bathy_homog.traveling_wave import gammas, potential, separatrix_amplitude


@dataclass(frozen=True)
class FigureSpec:
    scenario: str
    speed_ratio: float
    label: str


def _figure_specs() -> Iterable[FigureSpec]:
    """Scenarios and wave speeds shown in the documentation figures."""
    return (
        FigureSpec(scenario="scenario_a", speed_ratio=1.024, label="steps"),
        FigureSpec(scenario="scenario_b", speed_ratio=1.024, label="sinusoid"),
    )


def _plot_dispersion(ratio: float, output_path: Path) -> None:
    K = np.linspace(0.0, 5.0, 501)
    fig, (re_ax, im_ax) = plt.subplots(1, 2, figsize=(10, 4))
    for form in FORMS:
        points = dispersion_curve(form, K, ratio if form == "xxt5" else None)
        re = np.array([max((r.real for r in p.roots if np.isfinite(r)), default=np.nan) for p in points])
        im = np.array([max((abs(r.imag) for r in p.roots if np.isfinite(r)), default=np.nan) for p in points])
        re_ax.plot(K, re, label=form)
        im_ax.plot(K, im, label=form)
    re_ax.set_xlabel("K")
    re_ax.set_ylabel("max Re Ω")
    im_ax.set_xlabel("K")
    im_ax.set_ylabel("max |Im Ω|")
    re_ax.legend()
    fig.tight_layout()
    output_path.parent.mkdir(parents=True, exist_ok=True)
    plt.savefig(output_path, dpi=150)
    plt.close(fig)


def _plot_waves(spec: FigureSpec, output_path: Path) -> None:
    scenario = load_scenario(spec.scenario)
    coeffs = compute(scenario.profile(), scenario.g)
    V = spec.speed_ratio * coeffs.c
    tw = gammas(coeffs, V, scenario.delta)
    third = solitary_wave_o3(coeffs, V, scenario.delta)

    fig, (pot_ax, wave_ax) = plt.subplots(1, 2, figsize=(10, 4))
    eta = np.linspace(-0.2, 1.1, 400) * separatrix_amplitude(tw)
    pot_ax.plot(eta, potential(eta, tw)[0])
    pot_ax.axhline(0.0, color="0.6", linewidth=0.8)
    pot_ax.set_xlabel("η")
    pot_ax.set_ylabel("U(η)")

    window = 6.0 * third.half_width()
    keep = np.abs(third.xi) <= window
    wave_ax.plot(third.xi[keep], third.eta[keep], label="order 3")
    try:
        fifth = solitary_wave_o5(coeffs, V, scenario.delta, guess=third)
    except TravelingWaveError as exc:
        print(f"Skipping order-5 wave for {spec.scenario}: {exc}", file=sys.stderr)
    else:
        keep5 = np.abs(fifth.xi) <= window
        wave_ax.plot(fifth.xi[keep5], fifth.eta[keep5], "--", label="order 5")
    wave_ax.set_xlabel("ξ")
    wave_ax.set_ylabel("η")
    wave_ax.legend()
    fig.suptitle(f"{spec.scenario}: V = {spec.speed_ratio:g} c")
    fig.tight_layout()
    output_path.parent.mkdir(parents=True, exist_ok=True)
    plt.savefig(output_path, dpi=150)
    plt.close(fig)


def main() -> int:
    out_dir = Path(os.environ.get(OUTPUT_DIR_ENV) or "generated") / "figures"
    out_dir.mkdir(parents=True, exist_ok=True)

    ratio = quintic_ratio(compute(load_scenario("scenario_a").profile(), 9.81))
    dispersion_path = out_dir / "dispersion.png"
    _plot_dispersion(ratio, dispersion_path)
    print(f"Wrote {dispersion_path} (xxt5 ratio r={ratio:.6g})")

    for spec in _figure_specs():
        path = out_dir / f"waves_{spec.label}.png"
        _plot_waves(spec, path)
        print(f"Wrote {path} for {spec.scenario}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
