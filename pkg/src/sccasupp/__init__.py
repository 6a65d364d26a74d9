"""Support recovery for sparse canonical correlation analysis."""

from sccasupp.covariance import (
    DataHalf,
    PrecisionKind,
    PrecisionProvider,
    SplitSample,
    Target,
    XiType,
    empirical_cross_cov,
    halves,
    precision_of,
    row_sparsity,
)
from sccasupp.errors import SccaError
from sccasupp.metrics import RecoveryErrors, hamming_error, recovery_errors, type_one_error, type_two_error
from sccasupp.model import (
    CcaModel,
    CovCase,
    SupportTruth,
    build_model,
    joint_covariance,
    make_rank1_model,
    sample,
    sample_hidden_variable,
)
from sccasupp.recover import (
    CtCase,
    CtThreshold,
    CutPolicy,
    Side,
    SupportEstimate,
    condition1_error,
    ct_constants,
    ct_estimate_directions,
    ct_recover_support,
    ct_threshold,
    recover_supp,
    simulation_cut,
    soft_threshold,
    sparsity_aware_cut,
    theorem1_cut,
    whitened_svd_directions,
)

__version__ = "0.1.0"
