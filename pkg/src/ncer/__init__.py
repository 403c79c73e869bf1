"""Spectral clustering by ellipsoidal rounding, with separable-NMF relatives."""

from ncer.config import Tolerances, DEFAULT_TOL
from ncer.errors import (
    NcerError,
    InputError,
    NumericalError,
    IsolatedVertexError,
    InvalidKernelError,
    RankDeficientError,
    RankDeficientEmbedding,
    IterationCapExceeded,
    HyperplaneDegenerate,
    ConvergenceError,
)
from ncer.linalg import sym_eigen, thin_svd, nnls, SymEigen, ThinSvd
from ncer.graph import (
    SimilarityConfig,
    SimilarityGraph,
    polynomial_similarity,
    build_graph,
    graph_laplacian,
    normalized_laplacian,
    normalized_cut_value,
)
from ncer.embedding import (
    SpectralEmbedding,
    spectral_embed,
    align_first_eigenvector,
    eigenspace_dimension,
)
from ncer.mvee import EllipsoidResult, mvee_origin, active_points
from ncer.separable import (
    SeparableSpec,
    ErConfig,
    spa,
    scale_to_hyperplane,
    er,
    run_er,
    ErResult,
    make_separable,
)
from ncer.pipelines import (
    ClusterResult,
    KmeansInit,
    ncer,
    nc,
    kmeans,
    assign_by_nls,
    nmf_baseline,
    er_cluster,
    degree_vector,
    verify_bridge,
    same_partition,
)
from ncer.metrics import accuracy, nmi, hungarian

__version__ = "0.1.0"
