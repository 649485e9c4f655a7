"""sketchbound: sparse-recovery sketching bounds, constructions, and verification."""

from .bounds import DetBoundParams, collision_threshold, det_lower_bound, pigeonhole_forces_collision
from .codes import (
    EntropyClaimCheck,
    QaryCode,
    SparseCodebook,
    entropy_claim_check,
    expand_to_binary,
    gv_construct,
    gv_log2_size_bound,
    gv_size_floor,
    hamming_distance,
    load_codebook,
    min_pairwise_distance,
    q_ary_entropy,
    save_codebook,
)
from .geometry import (
    FrequencyCheck,
    L1Ball,
    Norms,
    TailCheck,
    coord_tail_check,
    coord_tail_probability,
    l2_tail_bound_check,
    l2_tail_threshold,
    norms,
    sample_l1_ball,
    sample_l1_ball_batch,
)
from .measurement import (
    ConcentrationCheck,
    DiscretizationResult,
    MeasurementMatrix,
    ShadowCheck,
    concentration_check,
    discretization_shadow_check,
    discretize,
    load_discretized,
    orthonormalize_rows,
    sample_gaussian_matrix,
    save_discretized,
    shadow_vector,
    sketch,
)
from .protocol import (
    AugmentedIndexingInstance,
    Message,
    ProtocolConfig,
    ProtocolResult,
    SmoothingCertificate,
    alice_encode,
    bob_decode,
    chunk_indices,
    make_standard_config,
    random_instance,
    run_protocol_trials,
    signal_vector,
    smoothing_overlap_exact_ok,
    smoothing_overlap_margin,
    statistical_distance_certificate,
)
from .recovery import (
    ExactTopKOracle,
    ExperimentResult,
    GuaranteeCheck,
    NearestCodewordOracle,
    RecoveryExperimentParams,
    RecoveryOracle,
    ZeroOracle,
    check_l1l1,
    corollary_noise_radius,
    nn_recover,
    top_k,
    uniform_noise_experiment,
)
from .seeds import derive_rng, ensure_rng, stream_key

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
