"""Discovery pipelines that produce JSON reports, and plot-data emission.

Reports are plain dicts serialized as JSON with a fixed key order and
``repr`` floats, so identical runs give byte-identical files and every
number survives a write/read round trip exactly. NaN is written as null.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from . import __version__
from .bridge import BivariateMoments, pca_lines_demo, pca_slope_to_beta, pca_slopes, \
    regression_slope_direct
from .discovery import (DEFAULT_POOL, DEFAULT_SEARCH, estimate_constant, full_loadings,
                        grid_beta_map, integerize, rank_law_candidates, segment_loading_sd)
from .errors import InputError
from .gridded import GriddedStack, crop_latitudes, difference_filter, flatten_stack
from .pca import fit_pca, log_transform_si, scree_data
from .table import DataTable

MAX_HIST_BINS = 500
PLOTS = ("scree", "loading-sd", "beta-hist", "pca-lines")
PIVOT_FALLBACK = 1e-8


def _num(x):
    x = float(x)
    return None if math.isnan(x) else x


def _nums(xs):
    return [_num(x) for x in xs]


def dumps(report: dict) -> str:
    return json.dumps(report, indent=1, allow_nan=False) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


def histogram(values, bins="fd"):
    """Histogram edges and counts; Freedman-Diaconis unless ``bins`` is given.

    The rule's bin count is capped at ``MAX_HIST_BINS`` equal-width bins.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return [], []
    if bins == "fd":
        edges = np.histogram_bin_edges(values, bins="fd")
        if len(edges) - 1 > MAX_HIST_BINS:
            edges = np.histogram_bin_edges(values, bins=MAX_HIST_BINS)
    else:
        edges = np.histogram_bin_edges(values, bins=bins)
    counts, edges = np.histogram(values, bins=edges)
    return [float(e) for e in edges], [int(c) for c in counts]


def _integerized_block(il):
    return {
        "pivot": il.pivot + 1,
        "target": il.target,
        "scale": il.scale,
        "scaled": _nums(il.scaled),
        "rounded": [int(r) for r in il.rounded],
        "max_residual": il.max_residual,
    }


def _spectrum_block(model):
    w = model.eigenvalues
    return {
        "kind": model.kind,
        "method": "snapshot" if model.snapshot else "direct",
        "n_eigenpairs": int(len(w)),
        "eigenvalues": _nums(w),
        "sum": float(np.sum(w)),
    }


def discover_tabular(table: DataTable, *, kind="covariance", log_si=False,
                     constant_column_policy="error", pool=1.0, pivot="auto",
                     target=None, search_max=DEFAULT_SEARCH.stop - 1, select=None,
                     source="") -> dict:
    """Full small-table workflow: PCA, integerized loadings, law constants.

    A fixed ``pivot`` whose loading is negligible in some eigenvector falls
    back to the automatic pivot for that eigenvector only; the pivot used
    is reported per eigenvector. The selected law is ``select`` (1-based) if given, otherwise the
    smallest-eigenvalue eigenvector among the lowest ``pool`` fraction that
    involves at least two variables (a single-variable eigenvector only
    says that one column is constant).
    """
    if not 0 < pool <= 1:
        raise InputError(f"pool quantile must be in (0, 1], got {pool}")
    work = log_transform_si(table) if log_si else table
    model = fit_pca(work, kind, constant_column_policy, log_space=log_si)
    k = model.decomposition.k
    if k == 0:
        raise InputError("no eigenpairs to report")
    if pivot != "auto" and not 0 <= int(pivot) < len(model.kept):
        raise InputError(f"pivot column {int(pivot) + 1} outside 1..{len(model.kept)}")
    search = range(1, int(search_max) + 1)
    blocks = []
    integerized = []
    for i in range(k):
        vec = model.eigenvectors[:, i]
        # a fixed pivot can miss an eigenvector entirely (e.g. a single-column axis)
        use_pivot = pivot
        if pivot != "auto" and abs(vec[int(pivot)]) <= PIVOT_FALLBACK * np.max(np.abs(vec)):
            use_pivot = "auto"
        il = integerize(vec, pivot=use_pivot, target=target, search_range=search)
        integerized.append(il)
        const = estimate_constant(model, work, i, il, "scaled")
        const_r = estimate_constant(model, work, i, il, "rounded")
        blocks.append({
            "index": i + 1,
            "eigenvalue": float(model.eigenvalues[i]),
            "loadings": _nums(model.eigenvectors[:, i]),
            "integerized": _integerized_block(il),
            "constant": {
                "scaled": const.constant,
                "scaled_sd": float(const.per_case.std(ddof=1)) if work.n_cases > 1 else 0.0,
                "rounded": const_r.constant,
                "rounded_sd": float(const_r.per_case.std(ddof=1)) if work.n_cases > 1 else 0.0,
            },
        })
    n_pool = max(1, math.ceil(pool * k - 1e-9))
    pool_idx = list(range(k - 1, k - 1 - n_pool, -1))
    if select is not None:
        if not 1 <= select <= k:
            raise InputError(f"--select {select} outside 1..{k}")
        chosen = select - 1
    else:
        nontrivial = [i for i in pool_idx
                      if np.count_nonzero(integerized[i].rounded) >= 2]
        chosen = nontrivial[0] if nontrivial else pool_idx[0]
    il = integerized[chosen]
    const = estimate_constant(model, work, chosen, il, "scaled")
    return {
        "report": "tabular",
        "version": __version__,
        "inputs": {
            "source": source,
            "log_si": bool(log_si),
            "kind": kind,
            "constant_column_policy": constant_column_policy,
            "pool": pool,
            "pivot": pivot if pivot == "auto" else int(pivot) + 1,
            "target": target,
            "search_max": int(search_max),
            "select": select,
        },
        "n_cases": work.n_cases,
        "variables": list(model.variable_names),
        "dropped": list(model.dropped),
        "spectrum": _spectrum_block(model),
        "scree": [[i, s] for i, s in scree_data(model)],
        "eigenvectors": blocks,
        "candidates": [i + 1 for i in pool_idx],
        "selected": {
            "index": chosen + 1,
            "eigenvalue": float(model.eigenvalues[chosen]),
            "loadings": _nums(model.eigenvectors[:, chosen]),
            "integerized": _integerized_block(il),
            "constant": const.constant,
            "per_case": _nums(const.per_case),
            "case_labels": list(work.case_labels) if work.case_labels else None,
        },
    }


def discover_gridded(stack: GriddedStack, *, law_fields=None, pool=DEFAULT_POOL,
                     pair=("T_v", "H"), beta0=None, lag=12, crop=None, select=None,
                     constant_column_policy="error", bins="fd", min_loading=1e-8,
                     source="") -> dict:
    """Filter, crop, flatten, correlation PCA, candidate ranking and beta map."""
    n_time_in = stack.n_time
    nlat_in = stack.nlat
    for name in pair:
        if name not in stack.field_names:
            raise InputError(f"pair field {name!r} not in stack fields {list(stack.field_names)}")
    if law_fields:
        missing = [f for f in law_fields if f not in stack.field_names]
        if missing:
            raise InputError(f"law fields {missing} not in stack fields {list(stack.field_names)}")
    if lag:
        stack = difference_filter(stack, lag)
    if crop is not None:
        stack = crop_latitudes(stack, *crop)
    table, segments = flatten_stack(stack)
    model = fit_pca(table, "correlation", constant_column_policy)
    ranking = rank_law_candidates(model, segments, pool, law_fields)
    if select is not None:
        if not 1 <= select <= model.decomposition.k:
            raise InputError(f"--select {select} outside 1..{model.decomposition.k}")
        chosen = select - 1
    else:
        chosen = ranking.best.eigenvector_index
    chosen_vec = full_loadings(model, chosen, segments.length)
    beta = grid_beta_map(model, table, segments, chosen, pair, beta0, min_loading)
    valid = beta.valid_beta
    edges, counts = histogram(valid, bins)
    reasons = {}
    for r in beta.reasons:
        if r:
            reasons[r] = reasons.get(r, 0) + 1

    loading_sd = []
    for i in range(model.decomposition.k):
        sds = segment_loading_sd(full_loadings(model, i, segments.length), segments).sds
        loading_sd.append({"index": i + 1, "sd": _nums(sds)})

    ttest = None
    if beta.summary is not None:
        s = beta.summary
        ttest = {
            "mu0": beta.theoretical_beta,
            "t_statistic": s.t_statistic,
            "degrees_of_freedom": s.degrees_of_freedom,
            "p_value_two_sided": s.p_value_two_sided,
            "ci95": [s.ci95[0], s.ci95[1]],
            "sample_mean": s.sample_mean,
        }
    lats = stack.latitudes
    return {
        "report": "gridded",
        "version": __version__,
        "inputs": {
            "source": source,
            "law_fields": list(ranking.law_fields),
            "pool": pool,
            "pair": list(pair),
            "beta0": beta0,
            "lag": lag,
            "crop": list(crop) if crop is not None else None,
            "select": select,
            "constant_column_policy": constant_column_policy,
            "bins": bins,
            "min_loading": min_loading,
        },
        "n_time_input": n_time_in,
        "nlat_input": nlat_in,
        "n_cases": table.n_cases,
        "grid": {
            "nlat": stack.nlat,
            "nlon": stack.nlon,
            "lat_first": float(lats[0]),
            "lat_last": float(lats[-1]),
            "lon0": stack.lon0,
            "dlon": stack.dlon,
        },
        "fields": list(stack.field_names),
        "segments": [{"field": f, "start": a, "end": b}
                     for f, (a, b) in zip(segments.field_names, segments.bounds_1based)],
        "n_loadings": segments.length,
        "reference_loading": 1.0 / math.sqrt(segments.length),
        "dropped": list(model.dropped),
        "spectrum": _spectrum_block(model),
        "scree": [[i, s] for i, s in scree_data(model)],
        "loading_sd": loading_sd,
        "ranking": [
            {"index": c.eigenvector_index + 1, "eigenvalue": c.eigenvalue,
             "sd": list(c.per_segment_sd), "law_score": c.law_score}
            for c in ranking.entries
        ],
        "selected": {
            "index": chosen + 1,
            "eigenvalue": float(model.eigenvalues[chosen]),
            "sd": _nums(segment_loading_sd(chosen_vec, segments).sds),
        },
        "beta": {
            "pair": list(pair),
            "n_points": int(beta.beta.size),
            "n_valid": int(beta.valid_mask.sum()),
            "invalid_reasons": reasons,
            "mean": float(valid.mean()) if valid.size else None,
            "median": float(np.median(valid)) if valid.size else None,
            "sd": float(valid.std(ddof=1)) if valid.size > 1 else None,
            "ttest": ttest,
            "histogram": {"rule": bins, "edges": edges, "counts": counts},
            "map": _nums(beta.beta),
        },
    }


def bivariate_demo(table: DataTable, source="") -> dict:
    """PCA lines and regression line for a two-column table, plus the slope-to-beta checks."""
    if table.n_vars != 2:
        raise InputError("the PCA-lines demo needs exactly two columns")
    xs, ys = table.values[:, 0], table.values[:, 1]
    moments = BivariateMoments.from_data(xs, ys)
    slopes = pca_slopes(moments)
    lines = pca_lines_demo(moments)
    beta_direct = regression_slope_direct(xs, ys)
    return {
        "report": "bivariate",
        "version": __version__,
        "inputs": {"source": source},
        "n_cases": table.n_cases,
        "variables": list(table.variable_names),
        "moments": {"mu_x": moments.mu_x, "mu_y": moments.mu_y,
                    "sigma_x": moments.sigma_x, "sigma_y": moments.sigma_y,
                    "rho": moments.rho},
        "A": slopes.A,
        "a_plus": slopes.a_plus,
        "a_minus": slopes.a_minus,
        "lines": {
            "pca_major": list(lines.major),
            "pca_minor": list(lines.minor),
            "regression": list(lines.regression),
        },
        "beta_from_pca_slope": pca_slope_to_beta(slopes.a_plus, moments.rho),
        "beta_from_pca_slope_rho4_radicand": pca_slope_to_beta(slopes.a_plus, moments.rho,
                                                               rho4_radicand=True),
        "beta_least_squares": beta_direct,
    }


# --- plot data -------------------------------------------------------------

def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def plot_data(report: dict, which: str) -> str:
    """CSV text behind one figure of a report."""
    if which not in PLOTS:
        raise InputError(f"unknown plot {which!r}; choose from {', '.join(PLOTS)}")
    kind = report.get("report")
    if which == "scree":
        if "scree" not in report:
            raise InputError(f"a {kind} report has no scree data")
        return _csv(["index", "sqrt_eigenvalue"], [(int(i), float(s)) for i, s in report["scree"]])
    if which == "loading-sd":
        if kind != "gridded":
            raise InputError("loading-sd needs a gridded report")
        fields = report["fields"]
        rows = [(e["index"], f, float(sd)) for e in report["loading_sd"]
                for f, sd in zip(fields, e["sd"])]
        rows.append(("reference", "equal_loading", float(report["reference_loading"])))
        return _csv(["eigenvector_index", "field_name", "loading_sd"], rows)
    if which == "beta-hist":
        if kind != "gridded":
            raise InputError("beta-hist needs a gridded report")
        hist = report["beta"]["histogram"]
        edges = hist["edges"]
        rows = [(float(edges[i]), float(edges[i + 1]), int(c))
                for i, c in enumerate(hist["counts"])]
        return _csv(["bin_left", "bin_right", "count"], rows)
    if kind != "bivariate":
        raise InputError("pca-lines needs a bivariate report")
    rows = [(name, float(s), float(c)) for name, (s, c) in report["lines"].items()]
    return _csv(["line", "slope", "intercept"], rows)
