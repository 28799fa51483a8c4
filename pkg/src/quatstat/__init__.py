"""Quaternion widely-linear statistics.

Quaternion matrix algebra, adjoint-based factorisations, second-order
statistics (covariance, complementary covariances, pseudo-covariance) and
the QUT / QAUT uncorrelating transforms.
"""
__version__ = "0.1.0"

from .decomp import (
    alpha_hermitian_factor,
    commutation_check,
    eig_hermitian,
    svd,
    takagi_2x2_symmetric,
    unitary_joint_diag_obstruction,
)
from .errors import (
    DimensionError,
    DomainError,
    InvalidAxesError,
    NotAnAdjointError,
    NotFactorableError,
    NumericError,
    QuatStatError,
    RankDeficiencyError,
    StructureError,
    UndefinedError,
)
from .qmatrix import QuatMatrix, from_complex_adjoint, to_complex_adjoint
from .quaternion import (
    Axis,
    Quaternion,
    axis_conj,
    cayley_dickson_join,
    cayley_dickson_split,
    conj,
    involution,
    qmul,
)
from .stats import (
    CovarianceSet,
    SampleSet,
    complementary_covariance,
    covariance,
    covariance_set,
    properness_report,
    pseudo_covariance,
)
from .transforms import qaut, qut, rank_reduce, squared_diag_error, whitening
