"""Collectibility entanglement witness for two-qubit states.

Analytic evaluation from density matrices, an independent negativity oracle,
and a Monte Carlo simulation of the four-photon coincidence measurement with
noise injection, calibration correction and Werner-state interpolation.
"""

__version__ = "0.1.0"

from .errors import (
    BranchDegenerateError,
    CountsSchemaError,
    DegenerateDenominatorError,
    MissingSettingError,
    QCollectError,
    RadicandNegativeError,
    StateValidationError,
)
from .simulate import (
    NOISE_PRESETS,
    CampaignResult,
    CoincidenceRecord,
    NoiseModel,
    WitnessEstimate,
    bootstrap_sigma,
    corrected_ratio,
    estimate_ccN,
    expected_records,
    read_counts,
    run_campaign,
    simulate_setting,
    werner_mix,
    witness_from_counts,
    write_counts,
)
from .states import (
    ProjectionSetting,
    bell_state,
    conditional_state,
    kron,
    load_density_matrix,
    maximally_mixed_state,
    purity,
    save_density_matrix,
    separable_state,
    singlet_overlap,
    validate_two_qubit_state,
)
from .witness import (
    Y_PURE_THRESHOLD,
    CollectibilityValue,
    GrammElements,
    WitnessValue,
    collectibility,
    collectibility_profile,
    gramm_elements,
    max_collectibility,
    negativity,
    werner_state,
    witness_W,
)
