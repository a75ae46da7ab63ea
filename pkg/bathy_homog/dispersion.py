"""Linear dispersion relations of the homogenized forms.

Frequencies are reported as Ω = ω/(ck) against K = k·δ·√μ:

* ``ttt``:  Ω² + K²Ω⁴ − 1 = 0 (four roots, one always growing for K ≠ 0)
* ``xxx``:  Ω² + K² − 1 = 0 (unstable for |K| > 1)
* ``xxt``:  Ω²(1 + K²) − 1 = 0
* ``xxt5``: Ω²(1 + K² + rK⁴) − 1 = 0 with r = (ν₁ + ν₂)/μ² − 1

Root order is a convention of this module: real branches first (positive,
then negative), then imaginary branches (positive imaginary part first).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Final, Sequence

import numpy as np

from .coefficients import HomogenizedCoefficients

FORMS: Final[tuple[str, ...]] = ("ttt", "xxx", "xxt", "xxt5")
ROOT_COUNT: Final[dict[str, int]] = {"ttt": 4, "xxx": 2, "xxt": 2, "xxt5": 2}
GROWTH_TOL: Final[float] = 1e-14


class DispersionError(Exception):
    """Raised for malformed dispersion queries."""


@dataclass(frozen=True)
class DispersionPoint:
    K: float
    roots: tuple[complex, ...]
    form: str
    stable: bool
    infinite_roots: int = 0

    def __post_init__(self) -> None:
        if len(self.roots) != ROOT_COUNT[self.form]:
            raise DispersionError(f"Form {self.form} carries {ROOT_COUNT[self.form]} roots.")

    def residuals(self, r: float | None = None) -> list[float]:
        """|P(Ω)| for every finite root, scaled by the largest monomial of P(Ω).

        P is the defining polynomial of the form; the scale is at least 1.
        """
        out = []
        for root in self.roots:
            if cmath.isinf(root):
                continue
            terms = _terms(self.form, self.K, r)(root)
            scale = max(1.0, *(abs(t) for t in terms))
            out.append(abs(sum(terms)) / scale)
        return out


def _terms(form: str, K: float, r: float | None):
    k2 = K * K
    if form == "ttt":
        return lambda w: (w * w, k2 * w**4, -1.0)
    if form == "xxx":
        return lambda w: (w * w, k2, -1.0)
    rr = 0.0 if r is None else r
    return lambda w: (w * w, k2 * w * w, rr * k2 * k2 * w * w, -1.0)


def _growing(roots: Sequence[complex]) -> bool:
    return any(root.imag > GROWTH_TOL for root in roots if not cmath.isinf(root))


def omega_form1(K: float) -> DispersionPoint:
    """Roots of Ω² + K²Ω⁴ − 1 = 0.

    K = 0 degenerates to Ω = ±1 with the two imaginary branches at infinity;
    the point still counts as unstable, since the growth rate is unbounded as K → 0.
    """
    K = float(K)
    if K == 0.0:
        inf = complex(0.0, math.inf)
        return DispersionPoint(0.0, (1 + 0j, -1 + 0j, inf, -inf), "ttt", stable=False, infinite_roots=2)
    root = math.sqrt(1.0 + 4.0 * K * K)
    z_plus = 2.0 / (1.0 + root)
    z_minus = -(1.0 + root) / (2.0 * K * K)
    real = math.sqrt(z_plus)
    imag = math.sqrt(-z_minus)
    roots = (complex(real, 0.0), complex(-real, 0.0), complex(0.0, imag), complex(0.0, -imag))
    return DispersionPoint(K, roots, "ttt", stable=not _growing(roots))


def omega_form2(K: float) -> DispersionPoint:
    """Roots of Ω² + K² = 1; real iff |K| ≤ 1."""
    K = float(K)
    w = cmath.sqrt(1.0 - K * K)
    if w.imag < 0.0:
        w = -w
    roots = (w, -w) if w.real >= 0.0 else (-w, w)
    return DispersionPoint(K, roots, "xxx", stable=not _growing(roots))


def omega_form3(K: float, r: float | None = None) -> DispersionPoint:
    """Roots ±1/√(1 + K² + rK⁴); a nonpositive radicand is reported unstable."""
    K = float(K)
    form = "xxt" if r is None else "xxt5"
    radicand = 1.0 + K * K + (0.0 if r is None else r * K**4)
    if radicand == 0.0:
        inf = complex(math.inf, 0.0)
        return DispersionPoint(K, (inf, -inf), form, stable=False, infinite_roots=2)
    w = 1.0 / cmath.sqrt(radicand)
    if w.imag < 0.0:
        w = -w
    roots = (w, -w)
    return DispersionPoint(K, roots, form, stable=radicand > 0.0)


def dispersion_point(form: str, K: float, r: float | None = None) -> DispersionPoint:
    if form == "ttt":
        return omega_form1(K)
    if form == "xxx":
        return omega_form2(K)
    if form == "xxt":
        return omega_form3(K)
    if form == "xxt5":
        if r is None:
            raise DispersionError("Form xxt5 needs the quintic ratio r.")
        return omega_form3(K, r)
    raise DispersionError(f"Unknown dispersion form {form!r}; choose from {FORMS}.")


def dispersion_curve(form: str, K: Sequence[float] | np.ndarray, r: float | None = None) -> list[DispersionPoint]:
    return [dispersion_point(form, float(k), r) for k in np.asarray(K, dtype=float)]


def curve_columns(points: Sequence[DispersionPoint]) -> tuple[list[str], np.ndarray]:
    """Header and rows (K, Re Ω₁, Im Ω₁, …) of a dispersion curve."""
    if not points:
        raise DispersionError("Empty dispersion curve.")
    count = len(points[0].roots)
    header = ["K"]
    for i in range(1, count + 1):
        header.extend([f"re_omega{i}", f"im_omega{i}"])
    rows = np.empty((len(points), 1 + 2 * count))
    for row, point in zip(rows, points):
        row[0] = point.K
        for i, root in enumerate(point.roots):
            row[1 + 2 * i] = root.real
            row[2 + 2 * i] = root.imag
    return header, rows


def k_max(coeffs: HomogenizedCoefficients, delta: float) -> float:
    """Largest stable wavenumber 1/(δ√μ) of the xxx form; infinite on a flat bottom."""
    if not delta > 0.0:
        raise DispersionError(f"delta must be positive, got {delta}.")
    if coeffs.mu <= 0.0:
        return math.inf
    return 1.0 / (delta * math.sqrt(coeffs.mu))


def quintic_ratio(coeffs: HomogenizedCoefficients) -> float:
    """r = (ν₁ + ν₂)/μ² − 1."""
    if coeffs.mu <= 0.0:
        raise DispersionError("The quintic ratio is undefined for mu = 0.")
    return (coeffs.nu1 + coeffs.nu2) / coeffs.mu**2 - 1.0


def elliptic_symbol(
    k: np.ndarray | float, coeffs: HomogenizedCoefficients, delta: float, order: int
) -> np.ndarray:
    """1 + δ²μk² [+ δ⁴(ν₁ + ν₂ − μ²)k⁴ at order 5]."""
    if order not in (3, 4, 5):
        raise DispersionError(f"order must be 3, 4 or 5, got {order}.")
    k2 = np.asarray(k, dtype=float) ** 2
    symbol = 1.0 + delta**2 * coeffs.mu * k2
    if order == 5:
        symbol = symbol + delta**4 * coeffs.stability_margin * k2**2
    return symbol


def angular_frequency(
    k: np.ndarray | float, coeffs: HomogenizedCoefficients, delta: float, order: int
) -> np.ndarray:
    """Positive-branch ω of the linearized xxt system at the given order."""
    symbol = elliptic_symbol(k, coeffs, delta, order)
    if np.any(symbol <= 0.0):
        raise DispersionError("Nonpositive xxt symbol: the fifth-order system is unstable here.")
    return coeffs.c * np.abs(np.asarray(k, dtype=float)) / np.sqrt(symbol)
