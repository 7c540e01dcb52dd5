"""Discover constant combinations of variables from the last principal components."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DegenerateError, InputError, LastPCError  # noqa: E402
from .table import DataTable  # noqa: E402
from .numeric import (EigenDecomposition, TTestResult, eigh_jacobi, eigh_snapshot,  # noqa: E402
                      moment_matrix, sample_gaussian_pairs, t_test_one_sample)
from .pca import PcaModel, fit_pca, log_transform_si, project_uncentered, scree_data  # noqa: E402
from .bridge import (BivariateMoments, PcaLineSlopes, pca_lines_demo,  # noqa: E402
                     pca_slope_to_beta, pca_slopes, regression_slope_direct)
from .discovery import (BetaMap, CandidateRanking, IntegerizedLoadings,  # noqa: E402
                        SegmentSpec, estimate_constant, grid_beta_map, integerize,
                        rank_law_candidates, segment_loading_sd)
from .gridded import (GriddedStack, crop_latitudes, difference_filter,  # noqa: E402
                      flatten_stack, read_stack, unflatten, virtual_temperature,
                      write_stack)
from .datagen import SynthSpec, solar_dataset, synth_bivariate_demo, synth_hypsometric  # noqa: E402
