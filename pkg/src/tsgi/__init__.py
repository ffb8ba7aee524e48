"""Time-series comparison, averaging and forecasting with global invariances.

Aligns multivariate time series by jointly optimizing a temporal
alignment (DTW or its smooth soft-min relaxation) and a global
feature-space transform (orthonormal linear, affine-orthonormal, or
circular feature transposition), so that series may differ by rigid
feature transformations and even by dimensionality.  Built on top of
that: Frechet-mean barycenters under the joint geometry, an
attention-kernel forecaster, and seeded experiment runners.
"""

from .align import cost_matrix, dtw, dtw_value, soft_dtw, soft_dtw_grad
from .barycenter import Barycenter, BarycenterProblem, dba_gi, soft_barycenter_gi
from .forecast import BACKENDS, ForecastCorpus, attention_weights, forecast, procrustes_distance
from .gi import GIResult, SolverConfig, dtw_gi_bcd, dtw_gi_distance_matrix, soft_dtw_gi_grad
from .retrieval import oti_index, run_retrieval
from .seriesio import read_series, write_series
from .synth import GeneratorSpec, generate, generate_pairs_for_rotation_study
from .transforms import (
    AffineStiefel,
    ChromaTransposition,
    StiefelLinear,
    affine_procrustes_solve,
    apply,
    procrustes_solve,
    riemannian_grad_step,
    transposition_solve,
)

__version__ = "0.1.0"

__all__ = [
    "AffineStiefel",
    "BACKENDS",
    "Barycenter",
    "BarycenterProblem",
    "ChromaTransposition",
    "ForecastCorpus",
    "GIResult",
    "GeneratorSpec",
    "SolverConfig",
    "StiefelLinear",
    "affine_procrustes_solve",
    "apply",
    "attention_weights",
    "cost_matrix",
    "dba_gi",
    "dtw",
    "dtw_gi_bcd",
    "dtw_gi_distance_matrix",
    "dtw_value",
    "forecast",
    "generate",
    "generate_pairs_for_rotation_study",
    "oti_index",
    "procrustes_distance",
    "procrustes_solve",
    "read_series",
    "riemannian_grad_step",
    "run_retrieval",
    "soft_barycenter_gi",
    "soft_dtw",
    "soft_dtw_gi_grad",
    "soft_dtw_grad",
    "transposition_solve",
    "write_series",
    "__version__",
]
