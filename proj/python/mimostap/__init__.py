"""MIMO radar polyphase waveform design for space-time adaptive processing."""

from ._core import (
    CovarianceModel,
    Design,
    OptimizerConfig,
    Scenario,
    barker_waveform,
    default_rank,
    design,
    doppler_sweep,
    exhaustive_oracle,
    synthesize,
    to_db,
    true_sinr,
    validate,
)

__all__ = [
    "CovarianceModel",
    "Design",
    "OptimizerConfig",
    "Scenario",
    "barker_waveform",
    "default_rank",
    "design",
    "doppler_sweep",
    "exhaustive_oracle",
    "synthesize",
    "to_db",
    "true_sinr",
    "validate",
]
