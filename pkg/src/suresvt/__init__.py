"""Singular value thresholding and spectral estimators with closed-form SURE."""

from .blockwise import (
    BlockConfig,
    BlockSpectra,
    ImageSeries,
    bsvt,
    casorati,
    div_bsvt,
    inverse_casorati,
    sure_bsvt,
)
from .divergence import (
    SureReport,
    degrees_of_freedom,
    div_spectral_repeated,
    div_spectral_simple,
    div_svt_complex_simple,
    div_svt_real_simple,
    fd_divergence,
    fd_divergence_oracle,
    spectral_divergence,
    sure_spectral,
    sure_svt,
)
from .estimators import BlockSVTDenoiser, SpectralDenoiser, SVTDenoiser
from .exceptions import (
    AmbiguousSpectrumError,
    BadBracketError,
    BadKindError,
    BadShapeError,
    ConvergenceFailure,
    FZeroNotZeroError,
    NonDifferentiablePointError,
    NonFiniteError,
    NonUniformFunctionError,
    NotSimpleError,
    RankDeficientError,
    ShapeMismatchError,
    StepTooSmallError,
    SureSVTError,
    ThresholdTieError,
    UnsortedInputError,
)
from .linalg import (
    SpectrumProfile,
    SvdDifferential,
    SvdFactors,
    group_spectrum,
    is_simple_full_rank,
    svd,
    svd_differential,
)
from .risk import (
    NoiseModel,
    SweepResult,
    add_noise,
    gen_test_matrix,
    golden_section_min,
    mc_risk,
    select_lambda,
    sweep,
    tau_from_snr,
)
from .io import FormatError
from .spectral import SpectralFunction, apply_spectral, svht, svt

__version__ = "0.1.0"
