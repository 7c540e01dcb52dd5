"""Two-variable geometry linking PCA-line slopes to the regression slope.

For a bivariate normal with SDs ``sx, sy`` and correlation ``rho`` let
``A = (sx/sy - sy/sx) / (2 rho)`` and ``A+/- = A +/- sqrt(1 + A^2)``. The
covariance eigenvectors are ``(A+, 1)`` and ``(A-, 1)``, so ``A+/-`` are
run-over-rise (dx/dy) slopes; the PCA lines drawn as ``y = a + s x`` have
``s = 1/A+`` and ``s = 1/A-``. Writing ``B = b - 1/b`` for either ``b = A+/-``
gives ``B = 2A``, and the regression slope ``beta = rho sy / sx`` solves
``beta^2 + B rho^2 beta - rho^2 = 0``, so
``beta = (-B rho^2 + sign(rho) sqrt(B^2 rho^4 + 4 rho^2)) / 2``.
Slopes and beta share units: feed data-unit slopes to get a data-unit beta,
standardized slopes to get a standardized one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InputError


@dataclass(frozen=True)
class BivariateMoments:
    sigma_x: float
    sigma_y: float
    rho: float
    mu_x: float = 0.0
    mu_y: float = 0.0

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise InputError("sigma_x and sigma_y must be positive")
        if not abs(self.rho) < 1:
            raise InputError(f"|rho| must be < 1, got {self.rho}")

    @classmethod
    def from_data(cls, xs, ys) -> BivariateMoments:
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        sx, sy = x.std(ddof=1), y.std(ddof=1)
        rho = float(np.sum((x - x.mean()) * (y - y.mean())) / ((len(x) - 1) * sx * sy))
        return cls(float(sx), float(sy), rho, float(x.mean()), float(y.mean()))


@dataclass(frozen=True)
class PcaLineSlopes:
    a_plus: float
    a_minus: float
    A: float


def pca_slopes(m: BivariateMoments) -> PcaLineSlopes:
    """``A`` and ``A+/-``, the dx/dy slopes of the eigenvectors ``(A+/-, 1)``."""
    if m.rho == 0:
        raise DegenerateError(
            "rho == 0: PCA axes align with the coordinate axes (slopes 0 and inf)")
    A = (m.sigma_x / m.sigma_y - m.sigma_y / m.sigma_x) / (2.0 * m.rho)
    root = math.hypot(1.0, A)
    # A - root cancels badly for large A; use the product identity a+ a- = -1
    if A >= 0:
        a_plus = A + root
        a_minus = -1.0 / a_plus
    else:
        a_minus = A - root
        a_plus = -1.0 / a_minus
    return PcaLineSlopes(a_plus, a_minus, A)


def pca_slope_to_beta(b: float, rho: float, rho4_radicand: bool = False) -> float:
    """Regression slope from a PCA-line slope ``b`` (same units as ``b``).

    ``b`` is a dx/dy slope such as ``A+`` or ``A-``; for a line drawn as
    ``y = a + s x`` pass ``1/s``. Either PCA-line slope of the same moments
    gives the same ``B = b - 1/b`` and therefore the same result. The root is chosen with the sign of
    ``rho``. ``rho4_radicand=True`` evaluates the radicand as
    ``B^2 rho^4 + 4 rho^4`` instead of ``B^2 rho^4 + 4 rho^2``; it is kept
    only for side-by-side comparison and does not invert the slope formula.
    """
    if b == 0:
        raise InputError("PCA slope b must be nonzero")
    if not abs(rho) <= 1:
        raise InputError(f"|rho| must be <= 1, got {rho}")
    if rho == 0:
        return 0.0
    B = b - 1.0 / b
    r2 = rho * rho
    tail = 4.0 * r2 * r2 if rho4_radicand else 4.0 * r2
    return 0.5 * (-B * r2 + math.copysign(math.sqrt(B * B * r2 * r2 + tail), rho))


def pca_slope_to_beta_array(b, rho):
    """Vectorized ``pca_slope_to_beta``; entries with b == 0 give NaN."""
    b = np.asarray(b, dtype=float)
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        B = b - 1.0 / b
        r2 = rho * rho
        out = 0.5 * (-B * r2 + np.sign(rho) * np.sqrt(B * B * r2 * r2 + 4.0 * r2))
    return np.where(b == 0, np.nan, out)


def regression_slope_direct(xs, ys) -> float:
    """Least-squares slope cov(x, y) / var(x)."""
    x = np.asarray(xs, dtype=float).reshape(-1)
    y = np.asarray(ys, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise InputError("xs and ys must have equal length")
    if x.size < 2:
        raise InputError("need at least 2 points")
    dx = x - x.mean()
    var = float(np.dot(dx, dx))
    if var == 0.0:
        raise DegenerateError("x has zero variance")
    return float(np.dot(dx, y - y.mean()) / var)


@dataclass(frozen=True)
class PcaLines:
    major: tuple[float, float]
    minor: tuple[float, float]
    regression: tuple[float, float]


def pca_lines_demo(m: BivariateMoments) -> PcaLines:
    """(slope, intercept) of both PCA lines and the regression line.

    Every line passes through (mu_x, mu_y). ``major`` is the line along the
    larger-eigenvalue eigenvector. Slopes are dy/dx, i.e. ``1/A+`` and ``1/A-``.
    """
    slopes = pca_slopes(m)
    # eigenvalue of (a, 1) is sy^2 + rho sx sy a, larger for a with sign(rho)
    if m.rho > 0:
        major, minor = 1.0 / slopes.a_plus, 1.0 / slopes.a_minus
    else:
        major, minor = 1.0 / slopes.a_minus, 1.0 / slopes.a_plus
    beta = m.rho * m.sigma_y / m.sigma_x

    def line(slope):
        return (slope, m.mu_y - slope * m.mu_x)

    return PcaLines(line(major), line(minor), line(beta))
