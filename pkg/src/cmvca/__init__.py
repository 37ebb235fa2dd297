"""Kernel subspace learning by class mean vector component/discriminant analysis.

The eigen-pairs of an (uncentered) kernel matrix define an explicit embedding
of the training data. This package scores those eigen-pairs by how much they
contribute to the weighted pair-wise distances between class means in kernel
space (CMVCA), compares that ordering against kPCA, kECA and per-axis KDA
scores, and builds the discriminant variant (CMVDA) that operates on the
whitened kernel subspace. Nystrom and random Fourier feature approximations
plug into the same scoring code.
"""

from .dataio import Dataset, load_csv, write_csv, make_blobs, split
from .kernels import KernelSpec, sigma_heuristic, gram, kernel_vector, cross_gram
from .spectral import SpectralModel, decompose, embed_training, project
from .components import (
    ClassIndicators,
    ComponentScores,
    SubspaceMap,
    class_indicators,
    class_pair_distance,
    criterion_total,
    criterion_kernel_entries,
    criterion_total_mean,
    score_components,
    select,
    project_dataset,
    kda_baseline,
)
from .cmvda import (
    WhitenedModel,
    IndicatorBasis,
    whiten,
    indicator_basis,
    cmvda_embed_train,
    cmvda_embed_test,
    cmvda_r_basis,
    whitened_basis,
)
from .approx import ApproxFeatures, nystrom, rff, subspace_from_features
from .classify import CentroidModel, fit_centroids, predict, accuracy
from .errors import (
    ConfigError,
    DataError,
    ParseError,
    EmptyInputError,
    StratificationError,
    NumericError,
    DegenerateSigmaError,
    RankError,
)

__version__ = "0.1.0"
