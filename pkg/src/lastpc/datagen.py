"""Bundled planetary data and seeded synthetic generators."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .gridded import FieldInfo, GriddedStack
from .numeric import sample_gaussian_pairs
from .table import DataTable

SOLAR_MASS_KG = 1.986616e30
GAS_CONSTANT_DRY = 287.0  # m^2 / (s^2 K)
GRAVITY = 9.8  # m / s^2
# (R/g) ln(850/500); the generator default below is this value rounded to 15.5397
HYPSOMETRIC_BETA = GAS_CONSTANT_DRY / GRAVITY * math.log(850.0 / 500.0)
DEFAULT_BETA = 15.5397

_SOLAR_ROWS = (
    # planet, a (1e10 m), b (1e10 m), m (1e24 kg), T (s)
    ("Mercury", 5.852857, 5.727818, 0.3244425, 7605382),
    ("Venus", 10.81012, 10.80988, 4.861260, 19407924),
    ("Earth", 14.95104, 14.94896, 5.975000, 31557600),
    ("Mars", 22.82995, 22.73016, 0.6387275, 59359846),
    ("Jupiter", 77.82562, 77.73441, 1902.141, 374336251),
    ("Saturn", 142.7208, 142.4993, 569.4175, 929623781),
    ("Uranus", 287.0700, 286.7501, 87.11550, 2651311764),
    ("Neptune", 449.5683, 449.5517, 103.1285, 5200313789),
)


def solar_dataset() -> DataTable:
    """Orbital data for the eight planets: a, b, m, M (solar mass), T.

    Values are stored in the table's display units with ``unit_scale``
    converting to SI.
    """
    values = [[a, b, m, SOLAR_MASS_KG, T] for _, a, b, m, T in _SOLAR_ROWS]
    return DataTable(("a", "b", "m", "M", "T"), np.array(values, dtype=float),
                     (1e10, 1e10, 1e24, 1.0, 1.0),
                     tuple(row[0] for row in _SOLAR_ROWS))


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic thickness / temperature / wind stack."""

    nlat: int = 8
    nlon: int = 24
    n_time: int = 120
    beta_true: float = DEFAULT_BETA
    noise_sd_fraction: float = 0.05
    smoothing_radius: int = 2
    seed: int = 0
    seasonal_amplitude: float = 0.0
    lat0: float = 77.5
    dlat: float = -2.5

    def __post_init__(self):
        if min(self.nlat, self.nlon, self.n_time) < 1:
            raise InputError("synthetic grid needs nlat, nlon, n_time >= 1")
        if not 0.0 <= self.noise_sd_fraction <= 1.0:
            raise InputError("noise_sd_fraction must be in [0, 1]")
        if self.smoothing_radius < 0:
            raise InputError("smoothing_radius must be >= 0")


def smoothed_noise(rng, n_time, nlat, nlon, radius):
    """Unit-variance Gaussian fields with a (2r+1)^2 moving-average correlation.

    Longitude wraps around; latitude is drawn on a grid padded by ``radius``
    rows so every cell averages the same number of independent draws.
    """
    z = rng.standard_normal((n_time, nlat + 2 * radius, nlon))
    out = np.zeros((n_time, nlat, nlon))
    for di in range(2 * radius + 1):
        rows = z[:, di:di + nlat, :]
        for dj in range(-radius, radius + 1):
            out += np.roll(rows, -dj, axis=2)
    return out / (2 * radius + 1)


def synth_hypsometric(spec: SynthSpec = SynthSpec()) -> GriddedStack:
    """Fields T_v (K), H (m), V (m/s) with H = beta_true * T_v + noise.

    T_v is 260 K plus spatially smoothed unit-SD anomalies, the noise on H is
    white with SD ``noise_sd_fraction * beta_true``, and V is an independent
    smoothed field. A nonzero ``seasonal_amplitude`` adds a 12-step cycle to
    T_v (and so to H) and to V.
    """
    rng = np.random.default_rng(spec.seed)
    shape = (spec.n_time, spec.nlat, spec.nlon)
    t_anom = smoothed_noise(rng, *shape, spec.smoothing_radius)
    eps = rng.standard_normal(shape) * (spec.noise_sd_fraction * spec.beta_true)
    v = smoothed_noise(rng, *shape, spec.smoothing_radius)
    if spec.seasonal_amplitude:
        cycle = spec.seasonal_amplitude * np.cos(2 * np.pi * np.arange(spec.n_time) / 12.0)
        t_anom = t_anom + cycle[:, None, None]
        v = v + cycle[:, None, None]
    t_v = 260.0 + t_anom
    h = spec.beta_true * t_v + eps
    fields = (FieldInfo("T_v", "K"), FieldInfo("H", "m"), FieldInfo("V", "m/s"))
    return GriddedStack(fields, np.stack([t_v, h, v], axis=1),
                        lat0=spec.lat0, dlat=spec.dlat, lon0=0.0, dlon=360.0 / spec.nlon)


def synth_bivariate_demo(seed: int = 0, n: int = 200) -> DataTable:
    """Bivariate normal sample with mu=(0, 10), var=(2, 3), rho=0.8."""
    return sample_gaussian_pairs(n, 0.0, 10.0, 2.0, 3.0, 0.8, seed)
