"""Exemplar-free methods: logit distillation, parameter-importance
penalties, and warped feature-map distillation with prototype replay."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F

from ..data.types import SampleSet, Task
from ..errors import ContractError
from ..models.backbone import IncrementalClassifier, freeze_copy
from ..seeding import torch_generator
from .base import MethodPlugin, StepContext, batch_features
from .soft_dtw import soft_dtw

FMAP_EPS = 1e-5


def lwf_loss(student_logits: torch.Tensor, teacher_logits: torch.Tensor,
             temperature: float = 2.0) -> torch.Tensor:
    """Cross-entropy between temperature-softened teacher and student
    distributions over the old classes, scaled by T^2."""
    if student_logits.shape != teacher_logits.shape:
        raise ContractError(
            f"student slice {tuple(student_logits.shape)} does not match "
            f"teacher logits {tuple(teacher_logits.shape)}"
        )
    t = temperature
    soft_teacher = F.softmax(teacher_logits / t, dim=1)
    log_student = F.log_softmax(student_logits / t, dim=1)
    return -(soft_teacher * log_student).sum(dim=1).mean() * (t * t)


def mas_accumulate(model: torch.nn.Module, samples) -> dict:
    """Per-parameter importance: mean over samples of the absolute gradient
    of the squared L2 norm of the model outputs."""
    values = samples.values if isinstance(samples, SampleSet) else np.asarray(samples, dtype=np.float32)
    was_training = model.training
    model.eval()  # importance should not depend on dropout draws
    named = [(n, p) for n, p in model.named_parameters() if p.requires_grad]
    omega = {n: torch.zeros_like(p) for n, p in named}
    n_samples = len(values)
    for i in range(n_samples):
        x = torch.from_numpy(values[i : i + 1])
        out = model(x)
        logits = out.logits if hasattr(out, "logits") else out
        loss = logits.pow(2).sum()
        grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)
        for (name, _), g in zip(named, grads):
            if g is not None:
                omega[name] += g.abs()
    for name in omega:
        omega[name] /= max(1, n_samples)
    if was_training:
        model.train()
    return {n: g.detach() for n, g in omega.items()}


def mas_penalty(named_params: dict, importance: dict, anchor: dict, lam: float) -> torch.Tensor:
    """lam * sum_p Omega_p (theta_p - theta*_p)^2 over the anchored support."""
    total = None
    for name, omega in importance.items():
        theta = named_params[name]
        theta_star = anchor[name]
        if theta.shape != omega.shape or theta.shape != theta_star.shape:
            raise ContractError(
                f"parameter {name}: shape {tuple(theta.shape)} does not match "
                f"importance/anchor {tuple(omega.shape)}/{tuple(theta_star.shape)}"
            )
        term = (omega * (theta - theta_star).pow(2)).sum()
        total = term if total is None else total + term
    if total is None:
        return torch.zeros(())
    return lam * total


@dataclass
class PrototypeSet:
    """Per-class feature mean and scalar radius (feature standard deviation)."""

    means: dict        # class id -> (d,) float32
    radii: dict        # class id -> float >= 0

    @staticmethod
    def from_features(features: np.ndarray, labels: np.ndarray) -> "PrototypeSet":
        means, radii = {}, {}
        for cls in np.unique(labels):
            feats = features[labels == cls]
            means[int(cls)] = feats.mean(axis=0)
            radii[int(cls)] = float(np.sqrt(feats.var(axis=0).mean()))
        return PrototypeSet(means, radii)

    def merged_with(self, other: "PrototypeSet") -> "PrototypeSet":
        return PrototypeSet({**self.means, **other.means}, {**self.radii, **other.radii})


def prototype_augment(prototypes: PrototypeSet, model: IncrementalClassifier,
                      batch_size: int, generator: torch.Generator) -> torch.Tensor:
    """Classifier-head loss on Gaussian-jittered class-mean features.

    Pseudo-features mu_c + r_c * eps are balanced across the old classes and
    flow through the head only, so the feature extractor gets no gradient
    from this term.
    """
    classes = sorted(prototypes.means)
    if not classes or batch_size <= 0:
        return torch.zeros(())
    base, rem = divmod(batch_size, len(classes))
    feats, targets = [], []
    for rank, cls in enumerate(classes):
        count = base + (1 if rank < rem else 0)
        if count == 0:
            continue
        mu = torch.from_numpy(np.asarray(prototypes.means[cls], dtype=np.float32))
        eps = torch.randn((count, mu.shape[0]), generator=generator)
        feats.append(mu[None, :] + prototypes.radii[cls] * eps)
        targets.extend([cls] * count)
    pseudo = torch.cat(feats)
    logits = model.head(pseudo)
    return F.cross_entropy(logits, model.map_labels(targets))


def normalize_feature_map(fmap: torch.Tensor) -> torch.Tensor:
    """(batch, C, L) -> (batch, L, C), z-normalized per channel over time."""
    mean = fmap.mean(dim=-1, keepdim=True)
    std = fmap.std(dim=-1, unbiased=False, keepdim=True)
    return ((fmap - mean) / (std + FMAP_EPS)).transpose(1, 2)


def dt2w_loss(student_result, teacher_result, lambda_kd: float, lambda_lwf: float,
              gamma: float, temperature: float = 2.0, blocks=(-1,)) -> torch.Tensor:
    """Warped feature-map distillation plus logit distillation.

    lambda_kd * sum over selected blocks of soft_dtw(student map, teacher
    map) on channel-normalized time-major maps, plus lambda_lwf times the
    softened-logit term over the teacher's classes.
    """
    total = torch.zeros((), dtype=torch.float64)
    if lambda_kd:
        for b in blocks:
            s_map = normalize_feature_map(student_result.feature_maps[b])
            t_map = normalize_feature_map(teacher_result.feature_maps[b])
            total = total + lambda_kd * soft_dtw(s_map, t_map, gamma).mean()
    if lambda_lwf:
        n_old = teacher_result.logits.shape[1]
        student_slice = student_result.logits[:, :n_old]
        total = total + lambda_lwf * lwf_loss(student_slice, teacher_result.logits, temperature)
    return total


class LwFPlugin(MethodPlugin):
    kind = "lwf"

    def __init__(self, lambda_lwf: float = 1.0, temperature: float = 2.0):
        self.lambda_lwf = lambda_lwf
        self.temperature = temperature
        self.teacher: Optional[IncrementalClassifier] = None

    def extra_loss(self, ctx: StepContext):
        if self.teacher is None:
            return 0.0
        with torch.no_grad():
            teacher_logits = self.teacher(ctx.x_new[: ctx.n_new]).logits
        n_old = teacher_logits.shape[1]
        student_slice = ctx.result.logits[: ctx.n_new, :n_old]
        return self.lambda_lwf * lwf_loss(student_slice, teacher_logits, self.temperature)

    def end_of_task(self, model, task):
        self.teacher = freeze_copy(model)


class MASPlugin(MethodPlugin):
    kind = "mas"

    def __init__(self, lambda_mas: float = 1.0):
        self.lambda_mas = lambda_mas
        self.importance: Optional[dict] = None
        self.anchor: Optional[dict] = None
        self._tasks_accumulated = 0

    def _aligned(self, model) -> tuple[dict, dict, dict]:
        """Slice grown head parameters down to the anchored shapes."""
        params = dict(model.named_parameters())
        sliced = {}
        for name in self.importance:
            p = params[name]
            target = self.importance[name].shape
            if p.shape != target:
                slices = tuple(slice(0, s) for s in target)
                p = p[slices]
            sliced[name] = p
        return sliced, self.importance, self.anchor

    def extra_loss(self, ctx: StepContext):
        if self.importance is None:
            return 0.0
        params, omega, anchor = self._aligned(ctx.model)
        return mas_penalty(params, omega, anchor, self.lambda_mas)

    def end_of_task(self, model, task):
        omega_task = mas_accumulate(model, task.train)
        if self.importance is None:
            self.importance = omega_task
        else:
            # running mean over tasks keeps the penalty scale stable
            k = self._tasks_accumulated
            merged = {}
            for name, new in omega_task.items():
                if name in self.importance:
                    old = self.importance[name]
                    grown = torch.zeros_like(new)
                    slices = tuple(slice(0, s) for s in old.shape)
                    grown[slices] = old
                    merged[name] = (grown * k + new) / (k + 1)
                else:
                    merged[name] = new
            self.importance = merged
        self._tasks_accumulated += 1
        self.anchor = {n: p.detach().clone() for n, p in model.named_parameters()}


class DT2WPlugin(MethodPlugin):
    kind = "dt2w"

    def __init__(self, lambda_kd: float = 10.0, lambda_lwf: float = 1.0,
                 gamma: float = 0.1, lambda_proto: float = 1.0,
                 temperature: float = 2.0, blocks=(-1,), seed: int = 0):
        self.lambda_kd = lambda_kd
        self.lambda_lwf = lambda_lwf
        self.gamma = gamma
        self.lambda_proto = lambda_proto
        self.temperature = temperature
        self.blocks = tuple(blocks)
        self.seed = seed
        self.teacher: Optional[IncrementalClassifier] = None
        self.prototypes: Optional[PrototypeSet] = None
        self._proto_gen: Optional[torch.Generator] = None

    def extra_loss(self, ctx: StepContext):
        if self.teacher is None:
            return 0.0
        x_new = ctx.x_new[: ctx.n_new]
        with torch.no_grad():
            teacher_result = self.teacher(x_new)
        student_result = type(ctx.result)(
            features=ctx.result.features[: ctx.n_new],
            feature_maps=[m[: ctx.n_new] for m in ctx.result.feature_maps],
            logits=ctx.result.logits[: ctx.n_new],
        )
        loss = dt2w_loss(student_result, teacher_result, self.lambda_kd,
                         self.lambda_lwf, self.gamma, self.temperature, self.blocks)
        if self.prototypes is not None and self.lambda_proto:
            loss = loss + self.lambda_proto * prototype_augment(
                self.prototypes, ctx.model, ctx.n_new, self._proto_gen
            )
        return loss

    def end_of_task(self, model, task):
        feats = batch_features(model, task.train)
        new_protos = PrototypeSet.from_features(feats, task.train.labels)
        self.prototypes = new_protos if self.prototypes is None else self.prototypes.merged_with(new_protos)
        self.teacher = freeze_copy(model)
        self._proto_gen = torch_generator(self.seed, "prototype_augment", task.index)
