"""Finite-SNR diversity-multiplexing analysis for MIMO fading channels."""

from .channels import (
    ChannelDims,
    ChannelModel,
    CorrelationMatrix,
    IidChannel,
    KeyholeMode,
    KroneckerChannel,
    MultiKeyholeChannel,
    correlation_measure,
    load_scenario,
    make_exponential_correlation,
    matrix_sqrt_psd,
    norms,
    scenario_from_dict,
    vector_norm_moments,
)
from .dmt import (
    DmtPoint,
    MuxGainDef,
    combined_dmt,
    convergence_threshold,
    d_gamma_from_outage,
    d_prime_numeric,
    keyhole_dmt_asymptotic,
    model_dmt_point,
    model_dprime,
    model_outage_ln,
    outage_from_dmt,
    prop2_dmt,
    prop3_dmt,
    prop4_dmt,
    rate_from_mux,
    snr_offset_c,
    th4_dmt,
    th5_dmt,
    th6_dmt,
    zheng_tse_dmt,
)
from .errors import (
    DataError,
    MimoDmtError,
    ParameterError,
    PrecisionError,
    RegimeError,
)
from .moments import (
    CapacityMoments,
    db_to_gamma,
    f_tulino,
    gamma_to_db,
    gaussian_outage,
    gaussian_outage_ln,
    iid_moments,
    iid_moments_highsnr,
    iid_power_offset,
    keyhole_moments,
    kronecker_moments,
    moments_for,
    q_function,
    q_tail_approx,
    q_upper_bound,
    square_expansion_moments,
)
from .montecarlo import (
    EmpiricalOutage,
    SimConfig,
    capacity,
    estimate_diversity,
    estimate_moments,
    estimate_outage,
    sample_channel,
)
from .oracle import (
    QuadratureSpec,
    single_keyhole_outage,
    siso_rayleigh_outage,
    vector_rayleigh_outage,
    wishart2x2_outage,
)

__version__ = "0.1.0"
