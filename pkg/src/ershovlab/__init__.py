"""Exact-rational laboratory for limit-computable approximations:
mind-change classification, asymptotic-density functionals, and the
density-transfer constructions, all verified with zero-tolerance rational
identities wherever the underlying argument is exact.
"""

from .constructions import (
    Decomposition,
    DifferencePair,
    ModulusPrefix,
    TransferCertificate,
    TransferResult,
    build_ce_density,
    build_difference_pair,
    certify_fce,
    check_interval_property,
    decompose_nce,
    geometric_schedule,
    modulus,
    transfer,
    verify_decomposition,
    verify_modulus,
)
from .density import (
    DensitySeries,
    Embedding,
    EmbedResult,
    LimsupDifferenceReport,
    RationalSequence,
    WindowExtrema,
    beatty_set,
    check_limsup_difference,
    default_tail_window,
    density_series,
    embed,
    prefix_density,
    window_extrema,
)
from .errors import BoundTooWeakError, ErshovError, InputError, VerificationError
from .generate import GeneratorSpec, SplitMix64, generate, oscillating_blocks_set
from .reals import (
    DiffReal,
    DiffRepResult,
    LimsupReal,
    cut_evidence,
    diff_representation,
    limsup_estimate,
)
from .tables import (
    ApproxTable,
    BoundFunction,
    Classification,
    LimitSet,
    MindChangeProfile,
    SetPrefix,
    classify,
    limit_set,
    mind_change_profile,
)

__version__ = "0.1.0"
