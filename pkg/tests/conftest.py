import numpy as np
import pytest
import torch

from timecil.data import SyntheticConfig, make_synthetic_dataset, make_task_stream

torch.set_num_threads(2)


TINY = SyntheticConfig(
    n_classes=4, n_subjects=2, channels=2, length=32,
    train_per_class=30, test_per_class=10, noise_std=0.3, seed=7,
)


@pytest.fixture(scope="session")
def tiny_dataset():
    return make_synthetic_dataset(TINY)


@pytest.fixture(scope="session")
def tiny_stream(tiny_dataset):
    return make_task_stream(tiny_dataset, classes_per_task=2, seed=3)


def finite_diff_grad(fn, tensor: torch.Tensor, eps: float = 1e-4) -> torch.Tensor:
    """Central finite differences of a scalar function wrt one tensor."""
    grad = torch.zeros_like(tensor, dtype=torch.float64)
    flat = tensor.detach().reshape(-1)
    for i in range(flat.numel()):
        orig = flat[i].item()
        flat[i] = orig + eps
        hi = float(fn())
        flat[i] = orig - eps
        lo = float(fn())
        flat[i] = orig
        grad.reshape(-1)[i] = (hi - lo) / (2 * eps)
    return grad


def relative_error(a: torch.Tensor, b: torch.Tensor) -> float:
    a = a.detach().double().reshape(-1)
    b = b.detach().double().reshape(-1)
    denom = max(1e-8, float(a.norm()), float(b.norm()))
    return float((a - b).norm()) / denom
