"""PCA fitting on a DataTable: log/SI transform, moments, eigenpairs, scores."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .numeric import EigenDecomposition, eigh_jacobi, eigh_snapshot, moment_matrix
from .table import DataTable


@dataclass(frozen=True, eq=False)
class PcaModel:
    """A fitted PCA.

    ``means`` and ``sds`` refer to the retained columns (``kept`` indexes the
    input table). ``scores`` are the centered (standardized for correlation
    kind) retained columns projected onto the eigenvectors.
    """

    variable_names: tuple[str, ...]
    means: np.ndarray
    sds: np.ndarray
    decomposition: EigenDecomposition
    scores: np.ndarray
    log_space: bool
    kept: tuple[int, ...]
    dropped: tuple[str, ...] = ()
    snapshot: bool = False

    @property
    def kind(self) -> str:
        return self.decomposition.kind

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.decomposition.eigenvalues

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.decomposition.eigenvectors


def log_transform_si(table: DataTable, constant_additions=None,
                     log_space_names=None) -> DataTable:
    """Natural log of every value after conversion to SI units.

    ``constant_additions`` (one per variable, in SI units) is added before
    the log. The returned table has unit scale 1.
    """
    si = table.values * table.unit_scale
    if constant_additions is not None:
        add = np.asarray(constant_additions, dtype=float).reshape(-1)
        if add.shape != (table.n_vars,):
            raise InputError("constant_additions needs one value per variable")
        si = si + add
    bad = np.argwhere(~(si > 0))
    if bad.size:
        i, j = bad[0]
        case = table.case_labels[i] if table.case_labels else f"#{i}"
        raise InputError(
            f"cannot take log of nonpositive value {si[i, j]!r} "
            f"(case {case}, variable {table.variable_names[j]!r})")
    return DataTable(table.variable_names, np.log(si), None, table.case_labels)


def fit_pca(table: DataTable, kind="covariance", constant_column_policy="error",
            log_space=False, method="auto") -> PcaModel:
    """Fit PCA to ``table``.

    ``method`` is ``"direct"`` (Jacobi on the p x p moment matrix),
    ``"snapshot"`` (n x n Gram matrix, nonzero eigenpairs only) or
    ``"auto"``, which picks snapshot when there are more variables than cases.
    """
    moments = moment_matrix(table, kind, constant_column_policy)
    z = moments.scaled_data
    n, p = z.shape
    if method == "auto":
        method = "snapshot" if p > n else "direct"
    if method == "direct":
        decomposition = eigh_jacobi(moments.matrix, kind)
    elif method == "snapshot":
        decomposition = eigh_snapshot(z, kind)
    else:
        raise InputError(f"unknown method {method!r}")
    scores = z @ decomposition.eigenvectors
    names = tuple(table.variable_names[j] for j in moments.kept)
    return PcaModel(names, moments.means, moments.sds, decomposition, scores,
                    log_space, moments.kept, moments.dropped, method == "snapshot")


def scree_data(model: PcaModel) -> list[tuple[int, float]]:
    """(1-based index, sqrt(eigenvalue)) pairs; negative round-off clips to 0."""
    w = model.eigenvalues
    return [(i + 1, float(np.sqrt(max(lam, 0.0)))) for i, lam in enumerate(w)]


def project_uncentered(model: PcaModel, table: DataTable, eigenvector_index: int,
                       loading_scale: float = 1.0, loadings=None) -> np.ndarray:
    """Raw (uncentered) rows of ``table`` dotted with a scaled eigenvector.

    ``table`` must already be in the model's space (e.g. log-SI) and have
    the columns the model was fitted on; dropped columns are ignored.
    ``loadings`` overrides the eigenvector with an explicit vector (e.g.
    integer-rounded loadings) in the model's column order.
    """
    vec = model.decomposition.vector(eigenvector_index)
    if loadings is not None:
        vec = np.asarray(loadings, dtype=float).reshape(-1)
        if vec.shape != (len(model.kept),):
            raise InputError("loadings length must match the model's variables")
    if table.n_vars < max(model.kept, default=-1) + 1:
        raise InputError("table has fewer columns than the fitted model")
    raw = table.values[:, list(model.kept)]
    return raw @ (loading_scale * vec)
