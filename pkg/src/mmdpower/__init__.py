"""Power-optimized kernel two-sample testing.

Core pipeline: build Gram matrices for an (ARD-)RBF kernel, estimate the
unbiased MMD^2 and its variance, select or train a kernel that maximizes
the resulting t-statistic, and calibrate the test threshold with a fast
permutation null sampler.
"""

from .criticism import WitnessReport, extremes, witness, witness_report
from .datasets import (
    BlobsParams,
    blobs_generate,
    gauss_vs_laplace,
    read_dataset,
    write_dataset,
)
from .errors import DataFormatError, DimensionError, MMDPowerError, NumericalError
from .estimators import (
    VARIANCE_FLOOR,
    EstimatorOutput,
    estimate,
    estimate_power,
    mmd2_u,
    t_statistic,
    variance_hat,
)
from .kernels import (
    GramBundle,
    GramGradients,
    JointGram,
    KernelSpec,
    bundle_from_joint,
    eval_kernel,
    gram_bundle,
    gram_gradients,
    joint_gram,
)
from .nulldist import (
    NullSamples,
    TestResult,
    p_value,
    sample_null_naive,
    sample_null_optimized,
    threshold,
    two_sample_test,
)
from .selection import (
    SelectionReport,
    TrainConfig,
    default_grid,
    grid_select,
    median_heuristic,
    split_train_test,
    t_stat_and_gradient,
    train_ard,
)

__all__ = [
    "BlobsParams",
    "DataFormatError",
    "DimensionError",
    "EstimatorOutput",
    "GramBundle",
    "GramGradients",
    "JointGram",
    "KernelSpec",
    "MMDPowerError",
    "NullSamples",
    "NumericalError",
    "SelectionReport",
    "TestResult",
    "TrainConfig",
    "VARIANCE_FLOOR",
    "WitnessReport",
    "blobs_generate",
    "bundle_from_joint",
    "default_grid",
    "estimate",
    "estimate_power",
    "eval_kernel",
    "extremes",
    "gauss_vs_laplace",
    "gram_bundle",
    "gram_gradients",
    "grid_select",
    "joint_gram",
    "median_heuristic",
    "mmd2_u",
    "p_value",
    "read_dataset",
    "sample_null_naive",
    "sample_null_optimized",
    "split_train_test",
    "t_stat_and_gradient",
    "t_statistic",
    "threshold",
    "train_ard",
    "two_sample_test",
    "variance_hat",
    "witness",
    "witness_report",
    "write_dataset",
]
