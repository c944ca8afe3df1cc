"""
This package contains all the types used in the library.
"""

from .ifs import (
    AffineMap,
    ComposedMap,
    DiagonalAffineIFS,
    NumberMode,
    Scalar,
    TruncatedPoint,
    WeightedModel,
    Word,
)
from .dimension import (
    AffinityDimension,
    FJMaximum,
    FullDimensionVector,
    LyapunovProfile,
    PermutationWeight,
)
from .separation import (
    CanonicalAffine1D,
    KernelConsistency,
    SeparationLevel,
    SeparationReport,
)
from .measures import (
    AnisotropicKey,
    CubeKey,
    DiscreteMeasure,
    EntropyDimension,
    EntropyLevel,
    FinitePartitionView,
    LocalDimension,
)
from .disintegration import (
    ConvolutionCheck,
    GammaClass,
    GammaPartition,
    Granularity,
    KappaEstimate,
    NuMode,
    OmegaPrefix,
    OmegaScale,
)
from .reports import (
    ExperimentConfig,
    Report,
    Table,
    Verdict,
    VerdictStatus,
)
