"""Classifier heads with a growable output dimension.

Four kinds are supported:

* ``softmax_ce``    linear logits trained with cross-entropy,
* ``sigmoid_bce``   linear logits trained with per-class binary cross-entropy,
* ``split_cosine``  scaled cosine similarity between the feature and
                    unit-normalized class weights, trained with cross-entropy,
* ``ncm``           nearest-class-mean inference over feature prototypes;
                    carries a linear layer so the backbone can still be
                    optimized with cross-entropy, but ``head_loss`` refuses it.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ContractError, InferenceError

HEAD_KINDS = ("softmax_ce", "sigmoid_bce", "split_cosine", "ncm")


def _init_rows(n_rows: int, fan_in: int, generator: torch.Generator) -> torch.Tensor:
    bound = 1.0 / np.sqrt(fan_in)
    return torch.empty(n_rows, fan_in).uniform_(-bound, bound, generator=generator)


def _init_bias(n_rows: int, fan_in: int, generator: torch.Generator) -> torch.Tensor:
    bound = 1.0 / np.sqrt(fan_in)
    return torch.empty(n_rows).uniform_(-bound, bound, generator=generator)


class ClassifierHead(nn.Module):
    """Linear (or cosine) map from features to per-class logits."""

    def __init__(self, kind: str, in_features: int, n_classes: int,
                 generator: torch.Generator, eta: float = 10.0):
        super().__init__()
        if kind not in HEAD_KINDS:
            raise ContractError(f"unknown head kind {kind!r}; expected one of {HEAD_KINDS}")
        self.kind = kind
        self.in_features = in_features
        self.weight = nn.Parameter(_init_rows(n_classes, in_features, generator))
        if kind == "split_cosine":
            self.bias = None
            # single learnable scale shared by all classes
            self.eta = nn.Parameter(torch.tensor(float(eta)))
        else:
            self.bias = nn.Parameter(_init_bias(n_classes, in_features, generator))
            self.eta = None
        # per-class feature means for NCM inference; None until computed
        self.prototypes: dict[int, np.ndarray | None] = {}

    @property
    def out_features(self) -> int:
        return self.weight.shape[0]

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        # per-(sample, class) dot products reduce independently of the row
        # count, so logits of existing classes are bit-identical across
        # head expansions (F.linear picks shape-dependent kernels)
        if self.kind == "split_cosine":
            w = F.normalize(self.weight, dim=1)
            f = F.normalize(features, dim=1)
            return self.eta * (f[:, None, :] * w[None, :, :]).sum(dim=-1)
        return (features[:, None, :] * self.weight[None, :, :]).sum(dim=-1) + self.bias

    @torch.no_grad()
    def expand(self, n_new: int, generator: torch.Generator) -> None:
        """Append freshly initialized rows; existing rows stay bit-identical."""
        if n_new <= 0:
            return
        new_w = _init_rows(n_new, self.in_features, generator)
        self.weight = nn.Parameter(torch.cat([self.weight.detach(), new_w]))
        if self.bias is not None:
            new_b = _init_bias(n_new, self.in_features, generator)
            self.bias = nn.Parameter(torch.cat([self.bias.detach(), new_b]))


def head_loss(head: ClassifierHead, logits: torch.Tensor, target_idx: torch.Tensor) -> torch.Tensor:
    """Training loss for a parametric head; target_idx are head-row indices.

    The NCM kind is inference-only and is rejected here.
    """
    if head.kind == "ncm":
        raise ContractError("NCM head has no training loss; it classifies by prototypes")
    if head.kind == "sigmoid_bce":
        one_hot = F.one_hot(target_idx, num_classes=logits.shape[1]).to(logits.dtype)
        per_sample = F.binary_cross_entropy_with_logits(logits, one_hot, reduction="none").sum(dim=1)
        return per_sample.mean()
    # softmax_ce and split_cosine are both cross-entropy over their logits
    return F.cross_entropy(logits, target_idx)


def ncm_classify(features: np.ndarray, prototypes: dict[int, np.ndarray]) -> np.ndarray:
    """Nearest-prototype labels; ties broken toward the lowest class id.

    features: (n, d); prototypes: class id -> (d,) mean feature.
    """
    ready = {c: p for c, p in prototypes.items() if p is not None}
    if not ready:
        raise InferenceError("NCM classification requires at least one computed prototype")
    class_ids = np.array(sorted(ready), dtype=np.int64)
    proto = np.stack([ready[c] for c in class_ids]).astype(np.float64)
    feats = np.asarray(features, dtype=np.float64)
    d2 = ((feats[:, None, :] - proto[None, :, :]) ** 2).sum(axis=2)
    # argmin returns the first minimum; class_ids is ascending, so ties
    # resolve to the lowest class id
    return class_ids[np.argmin(d2, axis=1)]
