"""Abstract intersection theory on finite-dimensional model operators.

Builds the cut-off functional calculus phi_Y(A), the block-operator model V1
with its pairing and endomorphism, the bilinear form beta with its Hodge
vector, and a power-sum test that detects eigenvalues off Re s = 1/2.
"""
__version__ = "0.1.0"

from .spectral import (
    ContourError,
    DegenerateCutError,
    DegenerateInputError,
    EigenData,
    OperatorSpec,
    RankAmbiguityError,
    Rectangle,
    SpectralError,
    SpectrumPoint,
    ValidationReport,
    contour_integral,
    eigendata_of,
    riesz_index,
    riesz_projection_contour,
    sigma_Y,
    validate_op_axioms,
)
from .calculus import (
    CalculusResult,
    CutoffFunction,
    apply_cutoff_contour,
    apply_cutoff_spectral,
    build_cutoff,
    trace_power,
)
from .model import (
    ModelBasis,
    ModelVector,
    check_ip,
    lefschetz_check,
    make_basic_vectors,
    make_model_basis,
    make_v_delta,
    phi_endomorphism,
    v1_inner,
)
from .axioms import (
    BetaForm,
    OutsideSpanError,
    SpanBasis,
    beta,
    build_beta_form,
    build_span_basis,
    check_castelnuovo,
    check_int1,
    check_int2_hodge,
    check_pairing,
)
from .detector import (
    DetectionVerdict,
    PowerSumSeries,
    detect_rh_violation,
    direct_rh_check,
    growth_witness,
    power_sums,
)
from .loaders import InputError, bundled_zero_table, load_operator, load_zero_table
