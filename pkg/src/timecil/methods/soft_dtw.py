"""Differentiable dynamic time warping with a soft minimum.

The alignment cost between two sequences is the soft-min dynamic program

    r(i, j) = cost(i, j) + softmin_g(r(i-1, j), r(i, j-1), r(i-1, j-1))
    softmin_g(x...) = -g * log(sum(exp(-x / g)))

with squared Euclidean step costs. The recursion is evaluated in float64
through log-sum-exp so small temperatures stay stable, and gradients flow
to both inputs via autograd.
"""

from __future__ import annotations

import torch

from ..errors import ContractError


def soft_dtw(a: torch.Tensor, b: torch.Tensor, gamma: float) -> torch.Tensor:
    """Soft-DTW value for (time, dim) inputs, or per-item for batched
    (batch, time, dim) inputs."""
    if gamma <= 0:
        raise ContractError(f"gamma must be positive, got {gamma}")
    squeeze = a.dim() == 2
    if squeeze:
        a, b = a[None], b[None]
    if a.dim() != 3 or b.dim() != 3 or a.shape[0] != b.shape[0]:
        raise ContractError("inputs must be (time, dim) or (batch, time, dim) with equal batch")
    n, m = a.shape[1], b.shape[1]
    if n == 0 or m == 0:
        raise ContractError("soft_dtw is undefined for empty sequences")

    a64, b64 = a.double(), b.double()
    cost = ((a64[:, :, None, :] - b64[:, None, :, :]) ** 2).sum(dim=-1)  # (batch, n, m)

    batch = a.shape[0]
    inf = torch.full((batch,), torch.inf, dtype=torch.float64)
    prev = [torch.zeros(batch, dtype=torch.float64)] + [inf] * m
    for i in range(1, n + 1):
        row = [inf]
        for j in range(1, m + 1):
            three = torch.stack([prev[j], row[j - 1], prev[j - 1]])
            smin = -gamma * torch.logsumexp(-three / gamma, dim=0)
            row.append(cost[:, i - 1, j - 1] + smin)
        prev = row
    out = prev[m]
    return out[0] if squeeze else out
