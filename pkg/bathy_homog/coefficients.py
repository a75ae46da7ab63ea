"""Constants of the homogenized shallow-water systems.

All coefficients are built from the inverse-depth moments ⟨H⁻ᵏ⟩ and from
means of products of brackets of H⁻ᵏ, evaluated through :mod:`unit_cell`.
For piecewise-constant profiles the carriers are exact piecewise
polynomials, so every coefficient is exact up to round-off.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields
from typing import Final, NamedTuple

from .unit_cell import (
    DEFAULT_CELL_POINTS,
    PeriodicProfile,
    UnitCellError,
    bracket,
    cell_function,
    mean,
    moment,
    nested_bracket,
)

logger = logging.getLogger(__name__)

MAX_MOMENT: Final[int] = 7
FLAT_TOL: Final[float] = 1e-14


class CoefficientError(Exception):
    """Raised when homogenized coefficients cannot be computed or are missing."""


@dataclass(frozen=True)
class HomogenizedCoefficients:
    """Every constant of the xxt, xxx and ttt homogenized forms for one profile."""

    g: float
    c: float
    mu: float
    gamma: float
    nu1: float
    nu2: float
    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float
    alpha5: float
    alpha6: float
    alpha7: float
    alpha8: float
    alpha9: float
    alpha_hat4: float
    alpha_hat6: float
    alpha_hat8: float
    alpha_hat9: float
    alpha_hat10: float
    alpha_hat11: float
    theta: dict[int, float]
    theta_hat: dict[int, float]
    zeta13: float
    zeta14: float
    zeta22: float
    zeta212: float
    zeta122: float
    zeta311: float
    inverse_moments: tuple[float, ...]
    translation_even: bool
    betas: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not (self.g > 0.0 and self.c > 0.0):
            raise CoefficientError("Gravity and long-wave speed must be positive.")
        if self.betas is not None and len(self.betas) != 14:
            raise CoefficientError(f"Expected 14 beta coefficients, got {len(self.betas)}.")

    def beta(self, i: int) -> float:
        """β_i for i = 1..14; only defined for translation-even profiles."""
        if self.betas is None:
            raise CoefficientError(
                "Fifth-order nonlinear coefficients need a translation-even profile."
            )
        if not 1 <= i <= 14:
            raise CoefficientError(f"beta index must be in 1..14, got {i}.")
        return self.betas[i - 1]

    def hm(self, k: int) -> float:
        """⟨H⁻ᵏ⟩."""
        return self.inverse_moments[k - 1]

    @property
    def stability_margin(self) -> float:
        """ν₁ + ν₂ − μ², positive when every fifth-order mode is stable."""
        return self.nu1 + self.nu2 - self.mu**2

    @property
    def is_flat(self) -> bool:
        return self.mu <= FLAT_TOL

    def as_rows(self) -> list[tuple[str, float]]:
        """Flatten to (name, value) rows for key/value and CSV output."""
        rows: list[tuple[str, float]] = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("theta", "theta_hat"):
                rows.extend((f"{f.name}{j}", v) for j, v in sorted(value.items()))
            elif f.name == "inverse_moments":
                rows.extend((f"hm{k}", v) for k, v in enumerate(value, start=1))
            elif f.name == "betas":
                if value is not None:
                    rows.extend((f"beta{i}", v) for i, v in enumerate(value, start=1))
            elif f.name == "translation_even":
                rows.append((f.name, 1.0 if value else 0.0))
            else:
                rows.append((f.name, float(value)))
        rows.append(("stability_margin", self.stability_margin))
        return rows


def _betas(
    c: float, hm1: float, mu: float, gamma: float, theta: dict[int, float], th: dict[int, float], z: dict[str, float]
) -> tuple[float, ...]:
    t2, t3, t4, t5, t7 = theta[2], theta[3], theta[4], theta[5], theta[7]
    c2 = c * c
    z13, z14, z22 = z["13"], z["14"], z["22"]
    z212, z122, z311 = z["212"], z["122"], z["311"]
    b1 = (
        t3**2
        - 21.0 / 4.0 * t2**2 * t3
        + 1.5 * t2 * t4
        + 1.5 * t3 * th[4]
        + 7.5 * t2 * th[5]
        - 2.5 * th[6]
        - 3.75 * t7 / hm1**2
        + 2.25 * (t2**2 - th[4]) ** 2
    ) / c2
    # θ₃ squared, so β₂ = 0 when H is constant
    b2 = c2 * (t2**4 - 3.0 * t2**2 * t3 + t3**2 + 2.0 * t2 * t4 - t5)
    b3 = (
        -6.0 * t5
        - 15.0 * th[6]
        + 4.5 * t2**4
        - 16.0 * t2**2 * t3
        + 7.0 * t3**2
        + 12.0 * t2 * t4
        - 4.5 * t2**2 * th[4]
        + 3.0 * t3 * th[4]
        + 12.0 * t2 * th[5]
    )
    b4 = (
        -20.0 * th[6]
        + 6.0 * t2**4
        - 22.0 * t2**2 * t3
        + 8.0 * t3**2
        + 12.0 * t2 * t4
        - 6.0 * t2**2 * th[4]
        + 6.0 * t3 * th[4]
        + 16.0 * t2 * th[5]
    ) / c2
    b5 = c2 * (
        -2.0 * z13 + z122 + 2.0 * z212 + z311 + 3.0 * z14 - 3.0 * gamma * t2 - z22
        + 8.0 * mu * t2**2 - 2.0 * mu * t3 - 3.0 * mu * th[4]
    )
    b6 = c2 * (-16.0 * gamma * t2 + 26.0 * mu * t2**2 - 10.0 * mu * t3)
    b7 = c2 * (2.0 * z13 + z22 - 6.0 * gamma * t2 + 5.0 * mu * t2**2 - 2.0 * mu * t3)
    b8 = (
        4.0 * z122 + 8.0 * z212 + 4.0 * z311 + 12.0 * z14 - 12.0 * gamma * t2 - 2.0 * z22
        - 4.0 * z13 + 27.0 * mu * t2**2 - 6.0 * mu * t3 - 9.0 * mu * th[4]
    )
    b9 = 2.0 * t2**4 - 8.0 * t2**2 * t3 + 4.0 * t3**2 + 8.0 * t2 * t4 - 8.0 * t5
    b10 = -4.0 * z13 - 2.0 * z22 - 8.0 * gamma * t2 + 28.0 * mu * t2**2 - 12.0 * mu * t3
    b11 = 2.0 * z13 + z22 - 12.0 * gamma * t2 + 22.0 * mu * t2**2 - 10.0 * mu * t3
    # kept as printed, including the split μθ₃ terms
    b12 = (
        z122 + 2.0 * z212 + z311 + 3.0 * z14 - 3.0 * gamma * t2 + mu * t3 - z22 - 2.0 * z13
        + 7.0 * mu * t2**2 - 2.0 * mu * t3 - 3.0 * mu * th[4]
    )
    b13 = 8.0 * z13 + 4.0 * z22 - 28.0 * gamma * t2 + 24.0 * mu * t2**2 - 8.0 * mu * t3
    b14 = -8.0 * gamma * t2 + 10.0 * mu * t2**2 - 4.0 * mu * t3
    return (b1, b2, b3, b4, b5, b6, b7, b8, b9, b10, b11, b12, b13, b14)


def compute(H: PeriodicProfile, g: float, n: int = DEFAULT_CELL_POINTS) -> HomogenizedCoefficients:
    """Evaluate every homogenized coefficient for the profile H under gravity g."""
    if not (math.isfinite(g) and g > 0.0):
        raise CoefficientError(f"Gravity must be positive, got {g}.")
    try:
        hm = tuple(moment(H, k) for k in range(1, MAX_MOMENT + 1))
        h = {k: cell_function(H, k, n) for k in range(1, 5)}
        b = {k: bracket(h[k]) for k in range(1, 5)}
        bb1 = nested_bracket(h[1], 2)
        translation_even = H.is_translation_even()
    except UnitCellError as exc:
        raise CoefficientError(f"Invalid profile: {exc}") from exc

    hm1, hm2, hm3, hm4, hm5 = hm[:5]
    c = math.sqrt(g / hm1)
    mu = mean(b[1] ** 2) / hm1**2
    gamma = mean(b[1] * b[2]) / hm1**2
    nu1 = mean(h[1] * bb1**2) / hm1**3
    nu2 = 3.0 * mean(bb1**2) / hm1**2

    theta = {j: hm[j - 1] / hm1 for j in range(2, MAX_MOMENT + 1)}
    theta_hat = {j: hm[j - 1] / hm1**2 for j in range(2, MAX_MOMENT + 1)}
    zeta = {
        "13": mean(b[1] * b[3]) / hm1**2,
        "14": mean(b[1] * b[4]) / hm1**3,
        "22": mean(b[2] ** 2) / hm1**2,
        "212": mean(h[2] * b[1] * b[2]) / hm1**3,
        "122": mean(h[1] * b[2] ** 2) / hm1**3,
        "311": mean(h[3] * b[1] ** 2) / hm1**3,
    }
    t2 = theta[2]

    alpha1 = 2.0 * (hm2**2 - 2.0 * hm3 * hm1) / hm1**2
    alpha2 = (3.0 * hm2**2 - 2.0 * hm1 * hm3 - 3.0 * hm4) / (2.0 * hm1**2)
    alpha3 = (hm2**2 - hm3 * hm1) / hm1**3
    alpha4 = (3.0 * hm2**3 - 4.0 * hm1 * hm2 * hm3 - 3.0 * hm2 * hm4 + 4.0 * hm1 * hm5) / hm1**2
    alpha5 = (2.0 * hm2**3 - 6.0 * hm1 * hm2 * hm3 + 6.0 * hm1**2 * hm4) / hm1**3
    alpha6 = (
        3.0 * hm2**3 - 7.0 * hm1 * hm2 * hm3 + 3.0 * hm1**2 * hm4 - 3.0 * hm2 * hm4 + 6.0 * hm1 * hm5
    ) / hm1**3
    alpha7 = (hm2**3 - 2.0 * hm1 * hm2 * hm3 + hm1**2 * hm4) / hm1**4
    alpha8 = 2.0 * (mu * t2 - gamma)
    alpha9 = mu * t2

    betas = _betas(c, hm1, mu, gamma, theta, theta_hat, zeta) if translation_even else None
    coeffs = HomogenizedCoefficients(
        g=float(g),
        c=c,
        mu=mu,
        gamma=gamma,
        nu1=nu1,
        nu2=nu2,
        alpha1=alpha1,
        alpha2=alpha2,
        alpha3=alpha3,
        alpha4=alpha4,
        alpha5=alpha5,
        alpha6=alpha6,
        alpha7=alpha7,
        alpha8=alpha8,
        alpha9=alpha9,
        alpha_hat4=(4.0 * hm5 - 2.0 * hm2 * hm3) / hm1**2,
        alpha_hat6=(5.0 * hm2 * hm3 - 3.0 * hm1 * hm4 - 6.0 * hm5) / hm1**2,
        alpha_hat8=-4.0 * gamma + 10.0 * mu * t2,
        alpha_hat9=8.0 * mu * t2 / hm1,
        alpha_hat10=(3.0 * mu * t2 - 2.0 * gamma) / hm1,
        alpha_hat11=4.0 * mu * t2,
        theta=theta,
        theta_hat=theta_hat,
        zeta13=zeta["13"],
        zeta14=zeta["14"],
        zeta22=zeta["22"],
        zeta212=zeta["212"],
        zeta122=zeta["122"],
        zeta311=zeta["311"],
        inverse_moments=hm,
        translation_even=translation_even,
        betas=betas,
    )
    logger.debug(
        "Coefficients for %s: c=%.12g mu=%.12g nu1=%.12g nu2=%.12g translation_even=%s",
        getattr(H, "kind", type(H).__name__),
        c,
        mu,
        nu1,
        nu2,
        translation_even,
    )
    return coeffs


class PiecewiseConstantForms(NamedTuple):
    mu: float
    nu1: float
    nu2: float
    stability_margin: float


def pwc_closed_form(d1: float, d2: float) -> PiecewiseConstantForms:
    """Closed forms for a cell split in equal halves with inverse depths d1, d2."""
    if not (d1 > 0.0 and d2 > 0.0):
        raise CoefficientError(f"Inverse depths must be positive, got d1={d1}, d2={d2}.")
    s = d1 + d2
    diff2 = (d1 - d2) ** 2
    mu = diff2 / (48.0 * s**2)
    margin = diff2 * (19.0 * d1**2 + 58.0 * d1 * d2 + 19.0 * d2**2) / (11520.0 * s**4)
    return PiecewiseConstantForms(mu=mu, nu1=mu / 40.0, nu2=3.0 * mu / 40.0, stability_margin=margin)


@dataclass(frozen=True)
class SignCheck:
    name: str
    value: float
    passed: bool


@dataclass(frozen=True)
class SignReport:
    status: str
    checks: tuple[SignCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def sign_report(coeffs: HomogenizedCoefficients) -> SignReport:
    """Check the sign guarantees of the coefficients.

    A constant profile sits on the equality boundary of every inequality and
    is reported as ``degenerate-flat`` with non-strict checks.
    """
    hm1, hm2, hm3 = coeffs.hm(1), coeffs.hm(2), coeffs.hm(3)
    # relative slack for quantities that cancel exactly on a flat bottom
    slack = 1e-12 * max(hm2**2, hm1 * hm3)
    if coeffs.is_flat:
        checks = (
            SignCheck("alpha3 <= 0", coeffs.alpha3, coeffs.alpha3 <= slack),
            SignCheck("mu >= 0", coeffs.mu, coeffs.mu >= 0.0),
            SignCheck("nu1 + nu2 - mu^2 >= 0", coeffs.stability_margin, coeffs.stability_margin >= 0.0),
            SignCheck("<H^-2>^2 <= <H^-1><H^-3>", hm2**2 - hm1 * hm3, hm2**2 - hm1 * hm3 <= slack),
        )
        return SignReport("degenerate-flat", checks)
    checks = (
        SignCheck("alpha1 < 0", coeffs.alpha1, coeffs.alpha1 < 0.0),
        SignCheck("alpha2 < 0", coeffs.alpha2, coeffs.alpha2 < 0.0),
        SignCheck("alpha3 <= 0", coeffs.alpha3, coeffs.alpha3 <= 0.0),
        SignCheck("mu > 0", coeffs.mu, coeffs.mu > 0.0),
        SignCheck("nu1 > 0", coeffs.nu1, coeffs.nu1 > 0.0),
        SignCheck("nu2 > 0", coeffs.nu2, coeffs.nu2 > 0.0),
        SignCheck("nu1 + nu2 - mu^2 > 0", coeffs.stability_margin, coeffs.stability_margin > 0.0),
        SignCheck("<H^-2>^2 <= <H^-1><H^-3>", hm2**2 - hm1 * hm3, hm2**2 - hm1 * hm3 <= 0.0),
    )
    status = "ok" if all(check.passed for check in checks) else "violated"
    if status != "ok":
        logger.warning("Sign guarantees violated: %s", [c.name for c in checks if not c.passed])
    return SignReport(status, checks)
