from .base import MethodPlugin, NaivePlugin, StepContext, batch_features
from .soft_dtw import soft_dtw
from .regularization import (
    DT2WPlugin,
    LwFPlugin,
    MASPlugin,
    PrototypeSet,
    dt2w_loss,
    lwf_loss,
    mas_accumulate,
    mas_penalty,
    prototype_augment,
)
from .replay import REPLAY_KINDS, ReplayPlugin, der_loss
from .generative import FrozenPair, GenerativeReplayPlugin, pseudo_label
from .assembly import METHODS, method_assembly, replay_policies

__all__ = [
    "DT2WPlugin",
    "FrozenPair",
    "GenerativeReplayPlugin",
    "LwFPlugin",
    "MASPlugin",
    "METHODS",
    "MethodPlugin",
    "NaivePlugin",
    "PrototypeSet",
    "REPLAY_KINDS",
    "ReplayPlugin",
    "StepContext",
    "batch_features",
    "der_loss",
    "dt2w_loss",
    "lwf_loss",
    "mas_accumulate",
    "mas_penalty",
    "method_assembly",
    "prototype_augment",
    "pseudo_label",
    "replay_policies",
    "soft_dtw",
]
