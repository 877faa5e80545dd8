"""Partition-of-unity RBF interpolation with Bayesian-optimized local parameters."""
from .blend import pum_evaluate, shepard_weights
from .bo import BoConfig, BoTrace, bo_search, expected_improvement, propose_next
from .errors import (ConfigError, DataError, IllConditioned, NumericalError, PumboError,
                     SubdomainSearchFailed)
from .gp import GpModel, gp_fit, gp_predict
from .kernels import Family, KernelSpec, eval_rbf, kernel_matrix
from .local import LocalModel, eval_local, fit_local
from .pipeline import FitResult, bo_pum, fit_raw, mae, rmae, rrmse
from .spatial import (AffineMap, PointSet, SpatialIndex, SubdomainLayout, build_index,
                      find_min_radius, make_pu_centers, normalize, query_radius)

__version__ = "0.1.0"
