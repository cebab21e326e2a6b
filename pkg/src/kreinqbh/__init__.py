"""Krein stability, quasiparticle-vacuum correlations and information geometry of quadratic bosonic chains."""

from .correlations import (
    CompositeResult,
    CorrelationFit,
    DynamicExponent,
    KreinProjector,
    MomentumCM,
    QuadratureSettings,
    RealSpaceCM,
    StencilTerm,
    composite_correlator,
    correlation_length,
    dynamic_exponent,
    fit_correlation_length,
    gamma_k,
    krein_projector,
    nambu_to_quadrature,
    parse_stencil,
    path_expression,
    qpv_cm_momentum,
    qpv_energy_density,
    real_space_cm,
    resolution_of_identity,
)
from .errors import (
    ConfigError,
    InstabilityError,
    KreinError,
    NumericalFailure,
    SingularPointError,
    UnsupportedOperation,
)
from .gaussian import (
    EntanglementResult,
    FiniteCM,
    bisection,
    entanglement,
    entanglement_entropy,
    entropy_from_symplectic,
    fidelity,
    finite_cm,
    log_negativity,
    purity_residual,
    symplectic_eigs,
    symplectic_form,
    uncertainty_min_eig,
)
from .geometry import (
    QMTResult,
    double_chain_family,
    harmonic_alpha_family,
    interpolation_alpha_family,
    qgt,
    qmt,
    qmt_divergence_scan,
)
from .model import (
    MODELS,
    DoubleChain,
    HarmonicChain,
    ImagHopChain,
    Interpolation,
    QBHSpec,
    QuadratureForm,
    build_model,
    from_quadrature,
    load_model_file,
    make_params,
    model_parameters,
    save_model_file,
    spec_from_dict,
    spec_to_dict,
    to_quadrature,
)
from .oracle import (
    RingDynamical,
    build_ring,
    dft_blocks,
    ring_modal_matrix,
    ring_qpv_cm,
    ring_spectrum,
    verification_suite,
)
from .spectral import (
    DEFAULT_TOL,
    BandData,
    BlochPoint,
    BZGrid,
    Classification,
    KreinGap,
    PauliDecomposition,
    SpectralPoint,
    StabilityReport,
    Tolerances,
    band_data,
    band_rows,
    classify_point,
    diagonalize,
    dynamical_matrices,
    eval_bloch,
    kpr,
    krein_gap,
    pauli_components,
    pauli_decompose,
    spec_classification,
    stability_report,
    thermodynamic_verdict,
)

__version__ = "0.1.0"
