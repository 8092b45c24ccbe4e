"""No-reference video QoE class prediction from spatio-temporal luminance patches."""

from .aggregate import (
    extract_feature_vector,
    majority_vote,
    pool_feature_vector,
)
from .errors import (
    AggregationError,
    ConfigError,
    DimensionError,
    DivergenceError,
    DomainError,
    FormatError,
    LabelError,
    NumericError,
    SchemaError,
    VideoQoeError,
)
from .estimators import PatchCnnClassifier, SequenceFeatureClassifier
from .layers import (
    ConvLayer,
    DenseLayer,
    PoolSpec,
    conv1d_backward,
    conv1d_forward,
    conv1d_layer,
    conv3d_backward,
    conv3d_forward,
    cross_entropy,
    dense_backward,
    dense_forward,
    maxpool3d_backward,
    maxpool3d_forward,
    relu_backward,
    relu_forward,
    softmax,
)
from .manifest import DatasetItem, load_manifest, resolve_item_path, write_manifest
from .metrics import ClassificationReport, confusion_matrix, evaluate, report_from_confusion
from .mos import DiscretizationSpec, discretize_mos, occupied_bins
from .netmodel import (
    ClipTransmission,
    ConditionPreset,
    NetworkCondition,
    embed_delay,
    get_preset,
    load_presets,
    preset_rate_mismatch,
    stall_frame_count,
    throughput,
    transmission_delay,
)
from .network import ModelConfig, Network, build_aggregator, build_model
from .optim import Optimizer, OptimizerConfig, adagrad_step, sgd_step
from .runs import resolve_config, run_dir
from .serialize import load_weights, load_weights_into, save_arrays, save_weights
from .synthetic import SynthConfig, synthesize_dataset, synthesize_item
from .training import EpochCurves, train_network
from .video import (
    Patch,
    PatchSpec,
    VideoVolume,
    assemble_patches,
    extract_patches,
    read_yuv_luma,
    sort_patches,
    write_y_only,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
