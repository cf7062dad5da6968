"""Frequency-domain stability certificates for square MIMO LTI feedback loops.

The package computes, per frequency, scaled relative graphs, numerical
ranges, sectorial phases, maximum gains and maximum input/output angles,
evaluates five stability conditions over a frequency grid, and reconciles
the outcome against a closed-loop eigenvalue oracle.
"""

from .errors import (
    BadRange,
    DimensionTooLarge,
    EigFailure,
    IllPosed,
    ImproperEntry,
    ModelFormatError,
    NotDefined,
    NotSectorial,
    NumericalBreakdown,
    PoleOnAxis,
    Singular,
    SrgStabError,
)
from .lti import (
    ClosedLoopModel,
    FrequencyGrid,
    RationalFunction,
    RhInfVerdict,
    StabilityVerdict,
    TransferMatrix,
    close_loop,
    eval_freq,
    eval_limit,
    is_rh_inf,
    load_model,
    make_grid,
    model_from_dict,
    model_to_dict,
    oracle_stable,
    poles,
    rational_to_statespace,
)
from .numrange import (
    NumericalRange,
    SectorialPhases,
    Sectoriality,
    classify,
    contains_zero_sampled,
    numrange_boundary,
    sectorial_phases,
    supporting_angles,
)
from .srg import (
    AlphaMaxConfig,
    AlphaMaxResult,
    ArcSet,
    SrgPoint,
    SrgSample,
    TauRayResult,
    alpha_max,
    alpha_max_oracle,
    right_arc_closure,
    sigma_max,
    srg_point,
    srg_sample,
    tau_ray_distance,
)
from .stability import (
    Certificate,
    FrequencyVerdict,
    OracleRecord,
    SoundnessRecord,
    SweepConfig,
    SweepReport,
    classic_small_phase,
    derived_seed,
    mixed_certificate,
    soundness_check,
    sweep,
    verdict_at,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaMaxConfig",
    "AlphaMaxResult",
    "ArcSet",
    "BadRange",
    "Certificate",
    "ClosedLoopModel",
    "DimensionTooLarge",
    "EigFailure",
    "FrequencyGrid",
    "FrequencyVerdict",
    "IllPosed",
    "ImproperEntry",
    "ModelFormatError",
    "NotDefined",
    "NotSectorial",
    "NumericalBreakdown",
    "NumericalRange",
    "OracleRecord",
    "PoleOnAxis",
    "RationalFunction",
    "RhInfVerdict",
    "SectorialPhases",
    "Sectoriality",
    "Singular",
    "SoundnessRecord",
    "SrgPoint",
    "SrgSample",
    "SrgStabError",
    "StabilityVerdict",
    "SweepConfig",
    "SweepReport",
    "TauRayResult",
    "TransferMatrix",
    "alpha_max",
    "alpha_max_oracle",
    "classic_small_phase",
    "classify",
    "close_loop",
    "contains_zero_sampled",
    "derived_seed",
    "eval_freq",
    "eval_limit",
    "is_rh_inf",
    "load_model",
    "make_grid",
    "mixed_certificate",
    "model_from_dict",
    "model_to_dict",
    "numrange_boundary",
    "oracle_stable",
    "poles",
    "rational_to_statespace",
    "right_arc_closure",
    "sectorial_phases",
    "sigma_max",
    "soundness_check",
    "srg_point",
    "srg_sample",
    "supporting_angles",
    "sweep",
    "tau_ray_distance",
    "verdict_at",
]
