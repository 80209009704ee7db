"""Multiscale positive-unlabeled training for AI-generated-text detectors."""

__version__ = "0.1.0"

from .data import Record, SynthConfig, clean_spaces, load_jsonl, split, synth_generate
from .errors import BatchError, ConfigError, DataError, MpuError, UsageError
from .model import (
    EvalReport,
    FeatureConfig,
    Featurizer,
    LinearModel,
    TrainConfig,
    evaluate,
    tokenize,
    train,
)
from .multiscale import (
    MultiscaleConfig,
    multiscale_once,
    multiscale_text,
    sample_mask,
    split_sentences,
)
from .prior import (
    PriorConfig,
    PriorTable,
    build_prior_table,
    prior_bruteforce,
    prior_exact,
    top_state_mass,
    transition_matrix,
)
from .puloss import (
    LossConfig,
    RiskBatch,
    loss_gradient,
    mpu_risk,
    mpu_risk_and_grad,
    nnpu_risk,
    pn_risk,
    pn_risk_and_grad,
    total_loss,
    upu_risk,
)

__all__ = [
    "__version__",
    "BatchError",
    "ConfigError",
    "DataError",
    "EvalReport",
    "FeatureConfig",
    "Featurizer",
    "LinearModel",
    "LossConfig",
    "MpuError",
    "MultiscaleConfig",
    "PriorConfig",
    "PriorTable",
    "Record",
    "RiskBatch",
    "SynthConfig",
    "TrainConfig",
    "UsageError",
    "build_prior_table",
    "clean_spaces",
    "evaluate",
    "load_jsonl",
    "loss_gradient",
    "mpu_risk",
    "mpu_risk_and_grad",
    "multiscale_once",
    "multiscale_text",
    "nnpu_risk",
    "pn_risk",
    "pn_risk_and_grad",
    "prior_bruteforce",
    "prior_exact",
    "sample_mask",
    "split",
    "split_sentences",
    "synth_generate",
    "tokenize",
    "top_state_mass",
    "total_loss",
    "train",
    "transition_matrix",
    "upu_risk",
]
