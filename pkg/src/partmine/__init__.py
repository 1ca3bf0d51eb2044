"""Unsupervised part mining over CNN activation stacks.

Feature maps become transactions of highlighted positions, frequent
co-activation patterns become a support map, and its largest connected
region yields k square part regions per image.  Parts are aligned across
images by spectral clustering and fused into one descriptor per image for
a linear classifier.
"""
from .align import (
    AlignmentResult,
    PartDescriptorTable,
    downsample_mask,
    group_part_slots,
    image_representatives,
    part_descriptor,
    serialize_alignment,
    spectral_cluster,
    sym_eigen,
)
from .classify import (
    FusedFeature,
    LinearSvmModel,
    decision_scores,
    fuse_features,
    load_model,
    predict,
    serialize_model,
    train_linear_svm,
)
from .errors import (
    AllZeroStack,
    ConfigError,
    DegenerateAffinity,
    EmptyMap,
    EmptyMask,
    EmptyTraining,
    InvalidBeta,
    IoFailure,
    ItemOutOfRange,
    LengthMismatch,
    MalformedHeader,
    NoConvergence,
    NotSymmetric,
    PartMineError,
    ShapeMismatch,
    SingleClass,
    TooFewPoints,
    TooFewRows,
    TruncatedPayload,
    UniverseTooLarge,
    UnsupportedElementType,
    ZeroExtent,
    ZeroVector,
)
from .localize import (
    KMeansResult,
    PartLayout,
    SupportMap,
    build_support_map,
    crop_region,
    derive_part_layout,
    extract_largest_component,
    find_part_centers,
    kmeans_cluster,
    object_box,
    upsample_support_map,
)
from .mining import PatternSet, apriori, brute_force_mine, serialize_patterns, support
from .pipeline import PipelineConfig, PipelineReport, render_overlay, run_pipeline
from .synth import PlantedTruth, match_centers, planted_stack
from .tensor import (
    Tensor,
    bilinear_resize,
    global_average_pool,
    l2_normalize,
    masked_multiply,
    read_tensor,
    write_tensor,
)
from .transactions import (
    ThresholdReport,
    TransactionDB,
    build_transactions,
    compute_threshold,
    dump_transactions,
)

__version__ = "0.1.0"
