"""Simulation and process-fidelity estimation toolkit for a linear-optical CZ gate."""

from .core import (
    PROBE_LABELS,
    apply_channel,
    cz_choi,
    cz_unitary,
    identity_choi,
    pair_index,
    pair_ket,
    pauli_coefficients,
    pauli_resum,
    probe_state,
    process_fidelity,
)
from .estimators import (
    EXPANSIONS,
    FidelityReport,
    HofmannResult,
    bound_gap_decomposition,
    hofmann_bounds,
    monte_carlo_fidelity,
    monte_carlo_fidelity_renormalized,
    q_operator,
    q_operator_min_eigenvalue,
    u_coefficients,
)
from .exceptions import DegenerateDataError
from .model import (
    HOFMANN_PROBES,
    hom_visibility,
    incoherent_choi,
    model_choi,
    model_fidelity,
    model_hofmann_curves,
    model_state_behavior,
    q_from_visibility,
)
from .simulate import (
    CoincidenceTable,
    DriftProfile,
    ExperimentConfig,
    ReferenceCounts,
    expected_counts,
    outcome_probabilities,
    renormalize_counts,
    simulate_counts,
)
from .tomography import (
    MaxLikSettings,
    ReconstructionResult,
    bootstrap_fidelity_uncertainty,
    maxlik_reconstruct,
    r_operator,
)

__version__ = "0.1.0"

__all__ = [
    "PROBE_LABELS",
    "EXPANSIONS",
    "HOFMANN_PROBES",
    "DegenerateDataError",
    "apply_channel",
    "bootstrap_fidelity_uncertainty",
    "bound_gap_decomposition",
    "CoincidenceTable",
    "cz_choi",
    "cz_unitary",
    "DriftProfile",
    "expected_counts",
    "ExperimentConfig",
    "FidelityReport",
    "hofmann_bounds",
    "HofmannResult",
    "hom_visibility",
    "identity_choi",
    "incoherent_choi",
    "maxlik_reconstruct",
    "MaxLikSettings",
    "model_choi",
    "model_fidelity",
    "model_hofmann_curves",
    "model_state_behavior",
    "monte_carlo_fidelity",
    "monte_carlo_fidelity_renormalized",
    "outcome_probabilities",
    "pair_index",
    "pair_ket",
    "pauli_coefficients",
    "pauli_resum",
    "probe_state",
    "process_fidelity",
    "q_from_visibility",
    "q_operator",
    "q_operator_min_eigenvalue",
    "r_operator",
    "ReconstructionResult",
    "ReferenceCounts",
    "renormalize_counts",
    "simulate_counts",
    "u_coefficients",
]
