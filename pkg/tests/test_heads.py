"""Classifier-head losses, NCM inference, and gradient correctness."""

import math

import numpy as np
import pytest
import torch

from conftest import finite_diff_grad, relative_error
from timecil.errors import ContractError, InferenceError
from timecil.models import BackboneConfig, build_model, head_loss, ncm_classify
from timecil.models.heads import ClassifierHead
from timecil.seeding import torch_generator


def make_head(kind, in_features=4, n_classes=2, seed=0):
    return ClassifierHead(kind, in_features, n_classes, torch_generator(seed, "test_head"))


class TestHeadLoss:
    def test_softmax_uniform_logits(self):
        head = make_head("softmax_ce")
        logits = torch.zeros(1, 2)
        loss = head_loss(head, logits, torch.tensor([0]))
        assert float(loss) == pytest.approx(math.log(2), abs=1e-6)

    def test_bce_uniform_logits_sums_over_classes(self):
        head = make_head("sigmoid_bce")
        logits = torch.zeros(1, 2)
        loss = head_loss(head, logits, torch.tensor([0]))
        assert float(loss) == pytest.approx(2 * math.log(2), abs=1e-6)

    def test_cosine_logit_scale(self):
        head = make_head("split_cosine", in_features=3, n_classes=2)
        with torch.no_grad():
            head.weight[0] = torch.tensor([1.0, 0.0, 0.0])
            head.eta.fill_(10.0)
        feature = torch.tensor([[2.0, 0.0, 0.0]])  # parallel to class-0 weight
        logits = head(feature).detach()
        assert float(logits[0, 0]) == pytest.approx(10.0, abs=1e-5)

    def test_cosine_rows_unit_norm_in_forward(self):
        head = make_head("split_cosine", in_features=5, n_classes=3)
        f = torch.nn.functional.normalize(torch.randn(1, 5), dim=1)
        logits = head(f)
        assert float(logits.abs().max()) <= float(head.eta) + 1e-5

    def test_ncm_head_rejected_by_training_loss(self):
        head = make_head("ncm")
        with pytest.raises(ContractError):
            head_loss(head, torch.zeros(1, 2), torch.tensor([0]))


class TestNCMClassify:
    def test_exact_prototype_match(self):
        protos = {3: np.array([0.0, 0.0]), 7: np.array([5.0, 5.0])}
        pred = ncm_classify(np.array([[5.0, 5.0]]), protos)
        assert pred.tolist() == [7]

    def test_tie_breaks_to_lower_class_id(self):
        protos = {2: np.array([1.0, 0.0]), 5: np.array([-1.0, 0.0])}
        pred = ncm_classify(np.array([[0.0, 0.0]]), protos)
        assert pred.tolist() == [2]

    def test_matches_bruteforce_scan(self):
        rng = np.random.default_rng(0)
        protos = {c: rng.standard_normal(6) for c in range(3)}
        feats = rng.standard_normal((40, 6))
        pred = ncm_classify(feats, protos)
        for i in range(len(feats)):
            dists = {c: float(((feats[i] - p) ** 2).sum()) for c, p in protos.items()}
            best = min(sorted(dists), key=lambda c: dists[c])
            assert pred[i] == best

    def test_empty_prototypes_error(self):
        with pytest.raises(InferenceError):
            ncm_classify(np.zeros((1, 2)), {0: None})


class TestGradientCorrectness:
    """Analytic gradients vs central differences in float64."""

    @pytest.mark.parametrize("kind", ["softmax_ce", "sigmoid_bce", "split_cosine"])
    def test_head_loss_gradients(self, kind):
        torch.manual_seed(0)
        model = build_model(2, 16, BackboneConfig(filters=(4, 8), dropout=0.0,
                                                  internal_norm="layer"),
                            [0, 1, 2], seed=0, head_kind=kind).double()
        model.eval()
        x = torch.randn(6, 2, 16, dtype=torch.float64)
        labels = np.array([0, 1, 2, 0, 1, 2])

        def loss_fn():
            return model.classification_loss(model(x).logits, labels)

        loss = loss_fn()
        params = [p for p in model.parameters() if p.requires_grad]
        grads = torch.autograd.grad(loss, params)
        for p, g in zip(params, grads):
            fd = finite_diff_grad(loss_fn, p, eps=1e-4)
            assert relative_error(g, fd) <= 1e-3

    def test_ncm_surrogate_gradients(self):
        torch.manual_seed(0)
        model = build_model(2, 16, BackboneConfig(filters=(4, 8), dropout=0.0,
                                                  internal_norm="layer"),
                            [0, 1], seed=0, head_kind="ncm").double()
        model.eval()
        x = torch.randn(4, 2, 16, dtype=torch.float64)
        labels = np.array([0, 1, 0, 1])

        def loss_fn():
            return model.classification_loss(model(x).logits, labels)

        grads = torch.autograd.grad(loss_fn(), [model.head.weight])
        fd = finite_diff_grad(loss_fn, model.head.weight, eps=1e-4)
        assert relative_error(grads[0], fd) <= 1e-3
