"""Long-term fatigue damage of a floating offshore wind turbine.

Thin bindings over the C++ core: spectra, Dirlik fatigue, rainflow counting,
the GPR surrogate, the frequency-domain evaluator and the pipeline commands.
"""

from ._core import (
    Evaluator,
    GaussianProcess,
    NumericalError,
    SpectralMoments,
    ValidationError,
    canonical_config,
    config_hash,
    del_1hz,
    dirlik_damage,
    generate_site,
    jonswap,
    kaimal,
    moments,
    narrowband_damage,
    rainflow,
    run_command,
    set_log_level,
    synthesize_series,
)

__all__ = [
    "Evaluator",
    "GaussianProcess",
    "NumericalError",
    "SpectralMoments",
    "ValidationError",
    "canonical_config",
    "config_hash",
    "del_1hz",
    "dirlik_damage",
    "generate_site",
    "jonswap",
    "kaimal",
    "moments",
    "narrowband_damage",
    "rainflow",
    "run_command",
    "set_log_level",
    "synthesize_series",
]
