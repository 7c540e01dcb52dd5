"""Symmetric eigensolvers, moment matrices, Student-t test and Gaussian sampling.

Everything here is deterministic: the Jacobi solver uses a fixed round-robin
rotation schedule, and sampling is driven by ``numpy.random.default_rng``
(PCG64) seeded with a 64-bit integer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DegenerateError, InputError
from .table import DataTable

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
# relative to the largest eigenvalue
TIE_TOL = 1e-12
NONZERO_TOL = 1e-12
CONSTANT_VARIANCE = 1e-24

KINDS = ("covariance", "correlation")


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenpairs sorted by descending eigenvalue; eigenvectors are columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    kind: str
    source_dim: int
    warnings: tuple[str, ...] = ()

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def vector(self, index: int) -> np.ndarray:
        """Eigenvector by 0-based index."""
        if not 0 <= index < self.k:
            raise InputError(f"eigenvector index {index} outside 0..{self.k - 1}")
        return self.eigenvectors[:, index]


class TTestResult(NamedTuple):
    t_statistic: float
    degrees_of_freedom: int
    p_value_two_sided: float
    ci95: tuple[float, float]
    sample_mean: float


class Moments(NamedTuple):
    matrix: np.ndarray
    means: np.ndarray
    sds: np.ndarray
    dropped: tuple[str, ...]
    kept: tuple[int, ...]
    # centered (covariance) or standardized (correlation) retained columns
    scaled_data: np.ndarray


def _check_kind(kind):
    if kind not in KINDS:
        raise InputError(f"kind must be one of {KINDS}, got {kind!r}")


def symmetric_from_upper(m) -> np.ndarray:
    """Square float copy of ``m`` whose lower triangle mirrors the upper one."""
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix contains NaN or Inf")
    return np.triu(a) + np.triu(a, 1).T


def _round_robin(m):
    """Round-robin schedule over an even number of slots.

    Returns m-1 permutations; in each, slots ``perm[2i]`` and ``perm[2i+1]``
    are paired, and across all rounds every pair meets exactly once.
    """
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        perm = []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            perm.extend((min(p, q), max(p, q)))
        rounds.append(np.array(perm, dtype=np.intp))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def canonical_order(eigenvalues, eigenvectors, tie_tol=TIE_TOL):
    """Apply the sign convention, sort descending, and order tied eigenvalues.

    Each column is flipped so that its largest-magnitude entry is positive
    (first such entry on exact ties). Columns whose eigenvalues differ by less
    than ``tie_tol * max|eigenvalue|`` form a tie group and are ordered by
    descending lexicographic order of their loadings; the eigenvalue array
    itself stays sorted.
    """
    w = np.asarray(eigenvalues, dtype=float).copy()
    v = np.asarray(eigenvectors, dtype=float).copy()
    if w.size == 0:
        return w, v
    pivots = np.argmax(np.abs(v), axis=0)
    flip = v[pivots, np.arange(v.shape[1])] < 0
    v[:, flip] *= -1.0

    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]

    thr = tie_tol * float(np.max(np.abs(w)))
    start = 0
    for i in range(1, len(w) + 1):
        if i < len(w) and (w[i - 1] - w[i] < thr or w[i - 1] == w[i]):
            continue
        if i - start > 1:
            group = list(range(start, i))
            group.sort(key=lambda j: tuple(v[:, j]), reverse=True)
            v[:, start:i] = v[:, group]
        start = i
    return w, v


def eigh_jacobi(m, kind="covariance", tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Full eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    The upper triangle of ``m`` is authoritative. Each sweep visits every
    off-diagonal pair once, in round-robin order so that the rotations of a
    round touch disjoint rows and are applied together as 2x2 blocks.
    Iteration stops when the off-diagonal Frobenius norm drops to
    ``tol * ||m||_F``.
    """
    _check_kind(kind)
    a = symmetric_from_upper(m)
    n = a.shape[0]
    if n % 2:
        # inert padding slot: zero row/column, never rotated
        a = np.pad(a, ((0, 1), (0, 1)))
    size = a.shape[0]
    half = size // 2
    v = np.eye(size)
    # order[k] = original index currently stored at position k
    order = np.arange(size)
    target = tol * float(np.linalg.norm(a))
    rounds = _round_robin(size) if size > 1 else []

    off = _off_norm(a)
    sweeps = 0
    while off > target:
        if sweeps == max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e}, target {target:.3e})", off)
        for pairing in rounds:
            where = np.empty(size, dtype=np.intp)
            where[order] = np.arange(size)
            perm = where[pairing]
            b = a[np.ix_(perm, perm)].reshape(half, 2, half, 2)
            v = v[:, perm]
            order = order[perm]

            diag = np.arange(half)
            app, aqq, apq = b[diag, 0, diag, 0], b[diag, 1, diag, 1], b[diag, 0, diag, 1]
            active = apq != 0.0
            safe = np.where(active, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            t = np.where(active, sign / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            rc, rs = c[:, None, None], s[:, None, None]
            b0, b1 = b[:, 0].copy(), b[:, 1].copy()
            b[:, 0] = rc * b0 - rs * b1
            b[:, 1] = rs * b0 + rc * b1
            b0, b1 = b[..., 0].copy(), b[..., 1].copy()
            b[..., 0] = c * b0 - s * b1
            b[..., 1] = s * b0 + c * b1
            b[diag, 0, diag, 1] = 0.0
            b[diag, 1, diag, 0] = 0.0
            a = b.reshape(size, size)

            v = v.reshape(size, half, 2)
            v0, v1 = v[..., 0].copy(), v[..., 1].copy()
            v[..., 0] = c * v0 - s * v1
            v[..., 1] = s * v0 + c * v1
            v = v.reshape(size, size)
        sweeps += 1
        off = _off_norm(a)

    keep = order < n
    w = np.diag(a)[keep]
    vecs = v[:n][:, keep]
    w, vecs = canonical_order(w, vecs)
    return EigenDecomposition(w, vecs, kind, n)


def eigh_snapshot(data_centered, kind="covariance"):
    """Nonzero eigenpairs of the p x p sample covariance via the n x n Gram matrix.

    ``data_centered`` is n x p with centered (and, for correlation kind,
    standardized) columns. Eigenvectors of ``X X^T / (n-1)`` are lifted to
    p-space as ``X^T u / ||X^T u||``. Only eigenvalues above
    ``1e-12 * lambda_max`` are kept, at most ``min(p, n-1)`` of them.
    """
    _check_kind(kind)
    x = np.asarray(data_centered, dtype=float)
    if x.ndim != 2:
        raise InputError("data must be a 2-D array")
    n, p = x.shape
    if n < 2:
        raise InputError(f"need at least 2 cases, got {n}")
    if not np.all(np.isfinite(x)):
        raise InputError("data contains NaN or Inf")
    gram = (x @ x.T) / (n - 1)
    inner = eigh_jacobi(gram, kind)
    lam_max = float(inner.eigenvalues[0]) if inner.k else 0.0
    if not lam_max > 0.0:
        return EigenDecomposition(np.zeros(0), np.zeros((p, 0)), kind, p,
                                  warnings=("zero data matrix: empty spectrum",))
    keep = inner.eigenvalues > NONZERO_TOL * lam_max
    keep[min(p, n - 1):] = False
    w = inner.eigenvalues[keep]
    lifted = x.T @ inner.eigenvectors[:, keep]
    lifted /= np.linalg.norm(lifted, axis=0)
    w, lifted = canonical_order(w, lifted)
    return EigenDecomposition(w, lifted, kind, p)


def moment_matrix(data: DataTable, kind="covariance", constant_column_policy="error"):
    """Unbiased covariance or correlation matrix of a table's columns.

    Columns with variance below 1e-24 are constant. With policy ``"drop"``
    they are removed (and listed in ``dropped``) under either kind. With
    policy ``"error"`` they are kept under covariance kind, where their
    row and column are exactly zero, and rejected under correlation kind.
    """
    _check_kind(kind)
    if constant_column_policy not in ("error", "drop"):
        raise InputError(f"unknown constant_column_policy {constant_column_policy!r}")
    x = data.values
    n = x.shape[0]
    if n < 2:
        raise InputError(f"need at least 2 cases, got {n}")
    means = x.mean(axis=0)
    centered = x - means
    constant = np.ptp(x, axis=0) == 0.0
    centered[:, constant] = 0.0
    var = np.sum(centered * centered, axis=0) / (n - 1)
    constant |= var < CONSTANT_VARIANCE
    centered[:, constant] = 0.0

    names = data.variable_names
    bad = [names[j] for j in np.flatnonzero(constant)]
    if bad and constant_column_policy == "error" and kind == "correlation":
        raise DegenerateError(
            "constant column(s) cannot be standardized: " + ", ".join(bad))
    if constant_column_policy == "drop":
        kept = tuple(int(j) for j in np.flatnonzero(~constant))
        dropped = tuple(bad)
    else:
        kept = tuple(range(x.shape[1]))
        dropped = ()
    centered = centered[:, kept]
    sds = np.sqrt(var[list(kept)])
    if kind == "correlation":
        scaled = centered / sds
    else:
        scaled = centered
    matrix = (scaled.T @ scaled) / (n - 1)
    matrix = np.triu(matrix) + np.triu(matrix, 1).T
    return Moments(matrix, means[list(kept)], sds, dropped, kept, scaled)


# --- Student t -----------------------------------------------------------

def _betacf(a, b, x, eps=1e-16, max_iter=1000):
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ConvergenceError("incomplete beta continued fraction did not converge",
                           abs(delta - 1.0))


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b) for a, b > 0."""
    if a <= 0 or b <= 0:
        raise InputError("betainc requires a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise InputError(f"betainc argument {x} outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _t_tail(t, df):
    """P(T > |t|) for Student t with ``df`` degrees of freedom."""
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return 0.5 * betainc_regularized(df / 2.0, 0.5, x)


def t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise InputError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    tail = _t_tail(t, df)
    return 1.0 - tail if t > 0 else tail


def t_quantile(prob: float, df: float, tol=1e-13) -> float:
    """Inverse t CDF by bisection."""
    if not 0.0 < prob < 1.0:
        raise InputError("probability must be in (0, 1)")
    if prob == 0.5:
        return 0.0
    if prob < 0.5:
        return -t_quantile(1.0 - prob, df, tol)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, df) < prob:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def t_test_one_sample(samples, mu0: float) -> TTestResult:
    """Two-sided one-sample t-test of ``mean == mu0`` with a 95% interval."""
    x = np.asarray(samples, dtype=float).reshape(-1)
    n = x.size
    if n < 2:
        raise InputError(f"t-test needs at least 2 samples, got {n}")
    if not np.all(np.isfinite(x)):
        raise InputError("samples contain NaN or Inf")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    if not sd > 0.0:
        raise DegenerateError("t-test sample has zero standard deviation")
    se = sd / math.sqrt(n)
    df = n - 1
    t = (mean - mu0) / se
    p = 1.0 if t == 0.0 else min(1.0, 2.0 * _t_tail(t, df))
    q = t_quantile(0.975, df)
    return TTestResult(float(t), df, p, (mean - q * se, mean + q * se), mean)


# --- sampling ------------------------------------------------------------

def sample_gaussian_pairs(n: int, mu_x: float, mu_y: float, var_x: float,
                          var_y: float, rho: float, seed: int) -> DataTable:
    """Draw n bivariate-normal (x, y) pairs via the 2x2 Cholesky factor."""
    if n < 1:
        raise InputError("n must be positive")
    if not (var_x > 0 and var_y > 0):
        raise InputError("variances must be positive")
    if not abs(rho) < 1:
        raise InputError(f"|rho| must be < 1, got {rho}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    sx, sy = math.sqrt(var_x), math.sqrt(var_y)
    x = mu_x + sx * z[:, 0]
    y = mu_y + sy * (rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1])
    return DataTable(("x", "y"), np.column_stack([x, y]))
