"""1D-CNN learner: input normalization, conv blocks, growable classifier."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ConfigError, ContractError
from ..seeding import seed_torch_global, torch_generator
from .heads import ClassifierHead, head_loss, ncm_classify

NORM_EPS = 1e-5


def _norm_key(name: str) -> str:
    key = str(name).lower().replace("norm", "").replace("_", "").strip()
    return {"": "none", "no": "none", "none": "none", "layer": "layer",
            "ln": "layer", "instance": "instance", "in": "instance",
            "batch": "batch", "bn": "batch"}.get(key, key)


def input_normalize(x: torch.Tensor, mode: str) -> torch.Tensor:
    """Instance-wise input normalization without learnable affine.

    ``layer`` standardizes over all C*L entries of each sample, ``instance``
    over each channel separately, ``none`` is the identity. Works on (C, L)
    or (N, C, L) tensors; constant inputs map to zeros (eps-stabilized).
    """
    mode = _norm_key(mode)
    if mode == "none":
        return x
    if mode not in ("layer", "instance"):
        raise ConfigError(f"unknown input normalization {mode!r}")
    dims = tuple(range(x.dim() - 2, x.dim())) if mode == "layer" else (x.dim() - 1,)
    mean = x.mean(dim=dims, keepdim=True)
    var = x.var(dim=dims, unbiased=False, keepdim=True)
    return (x - mean) / torch.sqrt(var + NORM_EPS)


class InputNorm(nn.Module):
    def __init__(self, mode: str):
        super().__init__()
        self.mode = _norm_key(mode)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return input_normalize(x, self.mode)


@dataclass
class BackboneConfig:
    """Architecture of the convolutional feature extractor."""

    filters: tuple = (32, 64, 128, 256)
    kernel_size: int = 5
    pool_size: int = 2
    dropout: float = 0.0
    internal_norm: str = "batch"   # batch | layer
    input_norm: str = "none"       # none | layer | instance

    def __post_init__(self):
        self.filters = tuple(int(f) for f in self.filters)
        if not 0.0 <= self.dropout <= 1.0:
            raise ConfigError(f"dropout must lie in [0, 1], got {self.dropout}")
        self.internal_norm = _norm_key(self.internal_norm)
        self.input_norm = _norm_key(self.input_norm)
        if self.internal_norm not in ("batch", "layer"):
            raise ConfigError(f"internal_norm must be batch or layer, got {self.internal_norm!r}")
        if self.input_norm not in ("none", "layer", "instance"):
            raise ConfigError(f"input_norm must be none/layer/instance, got {self.input_norm!r}")

    @property
    def n_blocks(self) -> int:
        return len(self.filters)

    def to_dict(self) -> dict:
        return {
            "filters": list(self.filters),
            "kernel_size": self.kernel_size,
            "pool_size": self.pool_size,
            "dropout": self.dropout,
            "internal_norm": self.internal_norm,
            "input_norm": self.input_norm,
        }


def _make_norm(kind: str, channels: int) -> nn.Module:
    if kind == "batch":
        return nn.BatchNorm1d(channels, eps=NORM_EPS)
    # per-sample normalization over (C, L); the affine mirrors BatchNorm's
    return nn.GroupNorm(1, channels, eps=NORM_EPS)


class ConvBlock(nn.Module):
    def __init__(self, c_in: int, c_out: int, cfg: BackboneConfig):
        super().__init__()
        self.conv = nn.Conv1d(c_in, c_out, cfg.kernel_size, padding=cfg.kernel_size // 2)
        self.norm = _make_norm(cfg.internal_norm, c_out)
        self.pool = nn.MaxPool1d(cfg.pool_size)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (block output, pre-dropout feature map)."""
        fmap = self.pool(F.relu(self.norm(self.conv(x))))
        return self.dropout(fmap), fmap


@dataclass
class ForwardResult:
    features: torch.Tensor            # (n, d) pre-head embedding
    feature_maps: list                # per-block (n, C_b, L_b), pre-dropout
    logits: torch.Tensor              # (n, |known_classes|)


class IncrementalClassifier(nn.Module):
    """Feature extractor plus a single head over all classes seen so far."""

    def __init__(self, channels: int, length: int, config: BackboneConfig,
                 initial_classes: Sequence[int], seed: int = 0,
                 head_kind: str = "softmax_ce"):
        super().__init__()
        out_len = length
        for _ in config.filters:
            out_len //= config.pool_size
            if out_len < 1:
                raise ConfigError(
                    f"input length {length} collapses to zero after "
                    f"{config.n_blocks} pooling blocks of size {config.pool_size}"
                )
        self.config = config
        self.channels = channels
        self.length = length
        self.seed = seed
        self.head_kind = head_kind
        self.known_classes: list[int] = []
        self._expansions = 0

        seed_torch_global(seed, "model_init")
        self.input_norm = InputNorm(config.input_norm)
        blocks = []
        c_in = channels
        for f in config.filters:
            blocks.append(ConvBlock(c_in, f, config))
            c_in = f
        self.blocks = nn.ModuleList(blocks)
        self.feature_dim = config.filters[-1]
        self.head = ClassifierHead(
            head_kind, self.feature_dim, 0, torch_generator(seed, "head_init")
        )
        self.expand_head(initial_classes)

    def map_labels(self, labels) -> torch.Tensor:
        """Original class ids -> head row indices."""
        lut = {c: i for i, c in enumerate(self.known_classes)}
        return torch.as_tensor([lut[int(l)] for l in np.asarray(labels)], dtype=torch.long)

    def expand_head(self, new_classes: Sequence[int]):
        """Grow the head by |new_classes| rows; old rows stay bit-identical."""
        new_classes = [int(c) for c in new_classes]
        if not new_classes:
            return self
        overlap = set(new_classes) & set(self.known_classes)
        if overlap:
            raise ContractError(f"classes {sorted(overlap)} already known to the head")
        gen = torch_generator(self.seed, "head_expand", self._expansions)
        self.head.expand(len(new_classes), gen)
        self.known_classes.extend(new_classes)
        for c in new_classes:
            self.head.prototypes[c] = None  # placeholder until computed from memory
        self._expansions += 1
        return self

    def forward(self, x: torch.Tensor) -> ForwardResult:
        x = self.input_norm(x)
        maps = []
        for block in self.blocks:
            x, fmap = block(x)
            maps.append(fmap)
        features = x.mean(dim=-1)  # global average pool over time
        return ForwardResult(features=features, feature_maps=maps, logits=self.head(features))

    def classification_loss(self, logits: torch.Tensor, labels) -> torch.Tensor:
        """Mean training loss on original class labels.

        For the NCM head the backbone is optimized with plain cross-entropy
        on its auxiliary linear layer; prototypes only drive inference.
        """
        target = self.map_labels(labels)
        if self.head.kind == "ncm":
            return F.cross_entropy(logits, target)
        return head_loss(self.head, logits, target)

    @torch.no_grad()
    def predict(self, x: torch.Tensor) -> np.ndarray:
        """Top-1 class ids over all known classes (prototype-based for NCM)."""
        was_training = self.training
        self.eval()
        result = self.forward(x)
        if self.head.kind == "ncm" and any(p is not None for p in self.head.prototypes.values()):
            out = ncm_classify(result.features.cpu().numpy(), self.head.prototypes)
        else:
            idx = result.logits.argmax(dim=1).cpu().numpy()
            out = np.asarray(self.known_classes, dtype=np.int64)[idx]
        if was_training:
            self.train()
        return out


def build_model(channels: int, length: int, config: BackboneConfig,
                initial_classes: Sequence[int], seed: int = 0,
                head_kind: str = "softmax_ce") -> IncrementalClassifier:
    return IncrementalClassifier(channels, length, config, initial_classes, seed, head_kind)


def expand_head(model: IncrementalClassifier, new_classes) -> IncrementalClassifier:
    return model.expand_head(new_classes)


def snapshot_state(model: nn.Module) -> dict:
    return {k: v.detach().clone() for k, v in model.state_dict().items()}


def restore_state(model: nn.Module, state: dict) -> None:
    model.load_state_dict(state)


def freeze_copy(model: IncrementalClassifier) -> IncrementalClassifier:
    """Immutable evaluation-mode copy for distillation/replay teachers."""
    frozen = copy.deepcopy(model)
    frozen.eval()
    for p in frozen.parameters():
        p.requires_grad_(False)
    return frozen


def save_checkpoint(model: IncrementalClassifier, path) -> None:
    """Named-array archive with a JSON manifest {config, known_classes, seed}."""
    manifest = {
        "config": model.config.to_dict(),
        "known_classes": model.known_classes,
        "seed": model.seed,
        "head_kind": model.head_kind,
        "channels": model.channels,
        "length": model.length,
    }
    arrays = {k: v.cpu().numpy() for k, v in model.state_dict().items()}
    arrays["manifest"] = np.frombuffer(json.dumps(manifest).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def load_checkpoint(path) -> IncrementalClassifier:
    with np.load(path) as z:
        manifest = json.loads(bytes(z["manifest"]).decode())
        model = build_model(
            manifest["channels"], manifest["length"],
            BackboneConfig(**manifest["config"]),
            manifest["known_classes"], manifest["seed"], manifest["head_kind"],
        )
        state = {k: torch.from_numpy(z[k]) for k in z.files if k != "manifest"}
        model.load_state_dict(state)
    return model
