"""Finding laws among the smallest principal components.

Three steps: rank low-eigenvalue eigenvectors by how uniform their loadings
are within each field (a law must hold at every grid point), rescale
eigenvectors so their loadings sit near small integers (exponents of a
power law after a log transform), and turn loadings into constants or
per-grid-point regression slopes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bridge import pca_slope_to_beta_array
from .errors import DegenerateError, InputError
from .numeric import NONZERO_TOL, TTestResult, t_test_one_sample
from .pca import PcaModel, project_uncentered
from .table import DataTable

DEFAULT_POOL = 0.25
DEFAULT_SEARCH = range(1, 7)
NEGLIGIBLE_LOADING = 0.1
MIN_PAIR_LOADING = 1e-8


@dataclass(frozen=True)
class SegmentSpec:
    """Contiguous per-field blocks of a stacked loading vector.

    ``bounds`` are 0-based half-open ``(start, end)`` pairs; ``grid`` is the
    (nlat, nlon) shape of each block when the segments come from a stack.
    """

    field_names: tuple[str, ...]
    bounds: tuple[tuple[int, int], ...]
    grid: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "field_names", tuple(self.field_names))
        object.__setattr__(self, "bounds", tuple((int(a), int(b)) for a, b in self.bounds))
        if len(self.field_names) != len(self.bounds) or not self.bounds:
            raise InputError("need one (start, end) bound per field")
        pos = 0
        for name, (start, end) in zip(self.field_names, self.bounds):
            if start != pos or end <= start:
                raise InputError(f"segment {name!r} ({start}, {end}) is not contiguous from {pos}")
            pos = end
        if self.grid is not None:
            cells = self.grid[0] * self.grid[1]
            if any(end - start != cells for start, end in self.bounds):
                raise InputError("segment lengths do not match the grid")

    @property
    def length(self) -> int:
        return self.bounds[-1][1]

    @property
    def bounds_1based(self) -> tuple[tuple[int, int], ...]:
        """Inclusive 1-based ranges, e.g. ((1, 2448), (2449, 4896), ...)."""
        return tuple((start + 1, end) for start, end in self.bounds)

    def segment(self, name: str) -> slice:
        if name not in self.field_names:
            raise InputError(f"field {name!r} not among segments {list(self.field_names)}")
        start, end = self.bounds[self.field_names.index(name)]
        return slice(start, end)


class SegmentSD(NamedTuple):
    sds: np.ndarray
    reference: float


def segment_loading_sd(eigenvector, segments: SegmentSpec) -> SegmentSD:
    """Population SD of the loadings inside each segment, plus 1/sqrt(L)."""
    v = np.asarray(eigenvector, dtype=float).reshape(-1)
    if v.size != segments.length:
        raise InputError(f"loading vector has {v.size} entries, segments cover {segments.length}")
    sds = np.array([v[a:b].std() for a, b in segments.bounds])
    return SegmentSD(sds, 1.0 / math.sqrt(v.size))


@dataclass(frozen=True)
class Candidate:
    eigenvector_index: int
    eigenvalue: float
    per_segment_sd: tuple[float, ...]
    law_score: float


@dataclass(frozen=True)
class CandidateRanking:
    entries: tuple[Candidate, ...]
    field_names: tuple[str, ...]
    law_fields: tuple[str, ...]
    pool: float
    reference: float

    @property
    def best(self) -> Candidate:
        return self.entries[0]


def full_loadings(model: PcaModel, eigenvector_index: int, width: int) -> np.ndarray:
    """Eigenvector spread over the original table columns (0 for dropped ones)."""
    out = np.zeros(width)
    out[list(model.kept)] = model.decomposition.vector(eigenvector_index)
    return out


def rank_law_candidates(model: PcaModel, segments: SegmentSpec, pool: float = DEFAULT_POOL,
                        law_fields=None) -> CandidateRanking:
    """Rank the smallest-eigenvalue eigenvectors by within-field loading spread.

    The pool is the ``floor(pool * k)`` smallest of the ``k`` nonzero
    eigenvalues (those above 1e-12 of the largest). Each candidate's score
    is the largest per-segment loading SD over ``law_fields`` (default: all
    fields); lower is more law-like. Ties go to the lower index.
    """
    if not 0 < pool <= 1:
        raise InputError(f"pool quantile must be in (0, 1], got {pool}")
    law_fields = tuple(law_fields) if law_fields else segments.field_names
    missing = [f for f in law_fields if f not in segments.field_names]
    if missing:
        raise InputError(f"law fields {missing} not among segments {list(segments.field_names)}")
    cols = [segments.field_names.index(f) for f in law_fields]
    w = model.eigenvalues
    lam_max = float(w[0]) if len(w) else 0.0
    nonzero = np.flatnonzero(w > NONZERO_TOL * lam_max) if lam_max > 0 else np.array([], int)
    size = int(math.floor(pool * len(nonzero) + 1e-9))
    if size == 0:
        raise InputError(
            f"candidate pool is empty ({len(nonzero)} nonzero eigenvalues, "
            f"quantile {pool}); use a larger pool quantile")
    # nonzero is sorted by descending eigenvalue
    members = nonzero[len(nonzero) - size:]
    entries = []
    for idx in members:
        vec = full_loadings(model, int(idx), segments.length)
        sds = segment_loading_sd(vec, segments).sds
        entries.append(Candidate(int(idx), float(w[idx]), tuple(float(s) for s in sds),
                                 float(max(sds[c] for c in cols))))
    entries.sort(key=lambda c: (c.law_score, c.eigenvector_index))
    return CandidateRanking(tuple(entries), segments.field_names, law_fields, pool,
                            1.0 / math.sqrt(segments.length))


@dataclass(frozen=True, eq=False)
class IntegerizedLoadings:
    raw: np.ndarray
    scale: float
    scaled: np.ndarray
    rounded: np.ndarray
    max_residual: float
    pivot: int
    target: int


def _residual(scaled, negligible):
    mask = np.abs(scaled) > negligible
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(scaled[mask] - np.round(scaled[mask]))))


def integerize(eigenvector, pivot="auto", target=None, search_range=DEFAULT_SEARCH,
               negligible=NEGLIGIBLE_LOADING) -> IntegerizedLoadings:
    """Rescale loadings so they approach small integers.

    For each candidate target ``t`` (just ``target`` if given, else every
    value in ``search_range``) the vector is scaled so that the pivot
    loading becomes ``t``; the ``t`` whose non-negligible scaled loadings
    (``|x| > negligible``) lie closest to integers wins, smaller ``t`` on
    ties. The result is then sign-flipped if needed so the first
    non-negligible entry is positive. ``pivot="auto"`` is the
    largest-magnitude loading.
    """
    v = np.asarray(eigenvector, dtype=float).reshape(-1)
    if pivot == "auto":
        pivot = int(np.argmax(np.abs(v)))
    pivot = int(pivot)
    if not 0 <= pivot < v.size:
        raise InputError(f"pivot {pivot} outside 0..{v.size - 1}")
    if v[pivot] == 0.0:
        raise DegenerateError(f"pivot loading {pivot} is zero")
    targets = [int(target)] if target is not None else [int(t) for t in search_range]
    if not targets or any(t == 0 for t in targets):
        raise InputError("integer targets must be nonzero")
    best = None
    for t in targets:
        scaled = v * (t / v[pivot])
        res = _residual(scaled, negligible)
        if best is None or res < best[0]:
            best = (res, t)
    res, t = best
    scale = t / v[pivot]
    scaled = v * scale
    big = np.flatnonzero(np.abs(scaled) > negligible)
    if big.size and scaled[big[0]] < 0:
        scale = -scale
        scaled = v * scale
    rounded = np.round(scaled).astype(int)
    return IntegerizedLoadings(v.copy(), float(scale), scaled, rounded, res, pivot, t)


class ConstantEstimate(NamedTuple):
    constant: float
    per_case: np.ndarray


def estimate_constant(model: PcaModel, table: DataTable, eigenvector_index: int,
                      loadings: IntegerizedLoadings, use="scaled") -> ConstantEstimate:
    """Mean uncentered score of ``table`` on the rescaled eigenvector."""
    if use == "scaled":
        per_case = project_uncentered(model, table, eigenvector_index, loadings.scale)
    elif use == "rounded":
        per_case = project_uncentered(model, table, eigenvector_index,
                                      loadings=loadings.rounded)
    else:
        raise InputError(f"use must be 'scaled' or 'rounded', got {use!r}")
    return ConstantEstimate(float(per_case.mean()), per_case)


# reason codes for invalid grid points
VALID = ""
NEAR_ZERO_LOADING = "near-zero loading"
DEGENERATE_MOMENTS = "degenerate moments"
DROPPED_COLUMN = "constant column"


@dataclass(frozen=True, eq=False)
class BetaMap:
    """Per-grid-point regression slopes of ``field_y`` on ``field_x``."""

    grid: tuple[int, int]
    pair: tuple[str, str]
    eigenvector_index: int
    beta: np.ndarray
    valid_mask: np.ndarray
    reasons: tuple[str, ...]
    pca_slope: np.ndarray
    rho: np.ndarray
    summary: TTestResult | None
    theoretical_beta: float | None

    @property
    def valid_beta(self) -> np.ndarray:
        return self.beta[self.valid_mask]

    def as_grid(self) -> np.ndarray:
        return self.beta.reshape(self.grid)


def grid_beta_map(model: PcaModel, table: DataTable, segments: SegmentSpec,
                  eigenvector_index: int, pair=("T_v", "H"), theoretical_beta=None,
                  min_loading=MIN_PAIR_LOADING) -> BetaMap:
    """Turn one eigenvector's loadings into a regression slope at every grid point.

    At grid point g, with loadings ``lx, ly`` of the two fields, the
    constancy line ``lx x + ly y = const`` has dy/dx slope ``-lx / ly`` in the
    model's units (standardized for correlation kind). Its dx/dy slope
    ``b = -ly / lx`` and the sample correlation of the two series at g give
    the regression slope via ``pca_slope_to_beta``, rescaled by ``s_y / s_x``
    for correlation kind. ``pca_slope`` in the result holds ``b``.
    Points with ``|ly| < min_loading`` (or ``lx == 0``) or with a constant
    series are invalid and carry a reason code.
    """
    field_x, field_y = pair
    sx_slice, sy_slice = segments.segment(field_x), segments.segment(field_y)
    if table.n_vars != segments.length:
        raise InputError("table width does not match the segment layout")
    n_points = sx_slice.stop - sx_slice.start
    grid = segments.grid or (1, n_points)

    vec = full_loadings(model, eigenvector_index, segments.length)
    kept = np.zeros(segments.length, dtype=bool)
    kept[list(model.kept)] = True
    lx, ly = vec[sx_slice], vec[sy_slice]
    x = table.values[:, sx_slice]
    y = table.values[:, sy_slice]
    dx = x - x.mean(axis=0)
    dy = y - y.mean(axis=0)
    n = table.n_cases
    s_x = np.sqrt(np.sum(dx * dx, axis=0) / (n - 1))
    s_y = np.sqrt(np.sum(dy * dy, axis=0) / (n - 1))

    reasons = []
    for g in range(n_points):
        if not (kept[sx_slice][g] and kept[sy_slice][g]):
            reasons.append(DROPPED_COLUMN)
        elif not (s_x[g] > 0 and s_y[g] > 0):
            reasons.append(DEGENERATE_MOMENTS)
        elif abs(ly[g]) < min_loading or lx[g] == 0.0:
            reasons.append(NEAR_ZERO_LOADING)
        else:
            reasons.append(VALID)
    valid = np.array([r == VALID for r in reasons], dtype=bool)

    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.sum(dx * dy, axis=0) / ((n - 1) * s_x * s_y)
        rho = np.clip(rho, -1.0, 1.0)
        slope = np.where(valid, -ly / np.where(valid, lx, 1.0), np.nan)
        beta = pca_slope_to_beta_array(slope, rho)
        if model.kind == "correlation":
            beta = beta * s_y / s_x
    beta = np.where(valid, beta, np.nan)
    bad = valid & ~np.isfinite(beta)
    if np.any(bad):
        for g in np.flatnonzero(bad):
            reasons[g] = DEGENERATE_MOMENTS
        valid &= ~bad

    summary = None
    if theoretical_beta is not None and valid.sum() >= 2:
        try:
            summary = t_test_one_sample(beta[valid], float(theoretical_beta))
        except DegenerateError:
            summary = None
    return BetaMap(grid, (field_x, field_y), eigenvector_index, beta, valid,
                   tuple(reasons), slope, rho, summary,
                   None if theoretical_beta is None else float(theoretical_beta))
