from .backbone import (
    BackboneConfig,
    ForwardResult,
    IncrementalClassifier,
    build_model,
    expand_head,
    freeze_copy,
    input_normalize,
    load_checkpoint,
    restore_state,
    save_checkpoint,
    snapshot_state,
)
from .heads import ClassifierHead, HEAD_KINDS, head_loss, ncm_classify
from .vae import SeriesVAE, gaussian_kl, generate, vae_loss

__all__ = [
    "BackboneConfig",
    "ClassifierHead",
    "ForwardResult",
    "HEAD_KINDS",
    "IncrementalClassifier",
    "SeriesVAE",
    "build_model",
    "expand_head",
    "freeze_copy",
    "gaussian_kl",
    "generate",
    "head_loss",
    "input_normalize",
    "load_checkpoint",
    "ncm_classify",
    "restore_state",
    "save_checkpoint",
    "snapshot_state",
    "vae_loss",
]
