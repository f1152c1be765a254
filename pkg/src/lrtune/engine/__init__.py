"""Deterministic mini training engine: datasets, models, optimizers, loop."""

from .data import (
    BadMagic,
    CountMismatch,
    Dataset,
    LabelOutOfRange,
    TruncatedFile,
    load_cifar_bin,
    load_idx,
    synth_blobs,
)
from .loop import (
    TRACE_HEADER,
    TracePoint,
    TrainConfig,
    TrainTrace,
    train,
    train_with_model,
)
from .models import (
    ModelSpec,
    ModelState,
    backward,
    data_loss,
    forward,
    forward_backward,
    init_model,
    predict_proba,
)
from .optim import Optimizer, OptimizerSpec, step

__all__ = [
    "BadMagic",
    "CountMismatch",
    "Dataset",
    "LabelOutOfRange",
    "ModelSpec",
    "ModelState",
    "Optimizer",
    "OptimizerSpec",
    "TRACE_HEADER",
    "TracePoint",
    "TrainConfig",
    "TrainTrace",
    "TruncatedFile",
    "backward",
    "data_loss",
    "forward",
    "forward_backward",
    "init_model",
    "load_cifar_bin",
    "load_idx",
    "predict_proba",
    "step",
    "synth_blobs",
    "train",
    "train_with_model",
]
