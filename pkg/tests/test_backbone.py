"""Backbone construction, input normalization, and head expansion."""

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from timecil.errors import ConfigError, ContractError
from timecil.models import (
    BackboneConfig,
    build_model,
    expand_head,
    input_normalize,
    load_checkpoint,
    save_checkpoint,
)

CFG = BackboneConfig(filters=(8, 16), dropout=0.0)


class TestInputNormalize:
    def test_instance_norm_single_channel(self):
        x = torch.tensor([[1.0, 2.0, 3.0]])
        out = input_normalize(x, "instance")
        np.testing.assert_allclose(out.numpy()[0], [-1.2247, 0.0, 1.2247], atol=1e-3)

    def test_layer_norm_constant_input_is_zero(self):
        x = torch.full((4, 16), 2.5)
        out = input_normalize(x, "layer")
        assert torch.allclose(out, torch.zeros_like(out))

    def test_none_is_identity(self):
        x = torch.randn(3, 10)
        assert input_normalize(x, "none") is x

    def test_layer_norm_moments(self):
        x = torch.randn(5, 4, 32)
        out = input_normalize(x, "layer")
        flat = out.reshape(5, -1)
        np.testing.assert_allclose(flat.mean(dim=1).numpy(), 0.0, atol=1e-6)
        np.testing.assert_allclose(flat.std(dim=1, unbiased=False).numpy(), 1.0, atol=1e-3)

    def test_instance_norm_per_channel_moments(self):
        x = torch.randn(5, 4, 64) * 3.0 + 1.0
        out = input_normalize(x, "instance")
        np.testing.assert_allclose(out.mean(dim=-1).numpy(), 0.0, atol=1e-6)

    @given(st.floats(min_value=0.5, max_value=5.0), st.floats(min_value=-20, max_value=20),
           st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=30, deadline=None)
    def test_affine_invariance(self, alpha, beta, seed):
        # data spread well above the eps stabilizer so the ideal property
        # alpha*x + beta ~ x holds to the stated elementwise tolerance
        rng = np.random.default_rng(seed)
        x = torch.from_numpy(10.0 * rng.standard_normal((3, 24)).astype(np.float64))
        for mode in ("layer", "instance"):
            base = input_normalize(x, mode)
            shifted = input_normalize(alpha * x + beta, mode)
            np.testing.assert_allclose(shifted.numpy(), base.numpy(), atol=1e-6)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            input_normalize(torch.randn(2, 4), "spectral")


class TestBuildModel:
    def test_feature_map_lengths_halve(self):
        model = build_model(9, 128, BackboneConfig(), [0, 1], seed=0)
        result = model(torch.randn(2, 9, 128))
        lengths = [m.shape[-1] for m in result.feature_maps]
        assert lengths == [64, 32, 16, 8]

    def test_logits_width_matches_initial_classes(self):
        model = build_model(2, 32, CFG, [4, 7], seed=0)
        out = model(torch.randn(3, 2, 32))
        assert out.logits.shape == (3, 2)
        assert model.known_classes == [4, 7]

    def test_same_seed_same_parameters(self):
        a = build_model(2, 32, CFG, [0, 1], seed=5)
        b = build_model(2, 32, CFG, [0, 1], seed=5)
        for (na, pa), (nb, pb) in zip(a.named_parameters(), b.named_parameters()):
            assert na == nb
            assert torch.equal(pa, pb)

    def test_different_seed_differs(self):
        a = build_model(2, 32, CFG, [0, 1], seed=5)
        b = build_model(2, 32, CFG, [0, 1], seed=6)
        assert any(not torch.equal(pa, pb) for pa, pb in zip(a.parameters(), b.parameters()))

    def test_pooled_length_zero_is_config_error(self):
        with pytest.raises(ConfigError):
            build_model(2, 8, BackboneConfig(filters=(4, 4, 4, 4)), [0], seed=0)

    def test_batchnorm_eval_is_batch_independent(self):
        model = build_model(2, 32, CFG, [0, 1], seed=0)
        model.train()
        for _ in range(3):
            model(torch.randn(8, 2, 32))
        model.eval()
        x = torch.randn(4, 2, 32)
        solo = torch.cat([model(x[i : i + 1]).logits for i in range(4)])
        batched = model(x).logits
        assert torch.allclose(solo, batched, atol=1e-5)

    def test_layernorm_internal_variant_runs(self):
        model = build_model(2, 32, BackboneConfig(filters=(8, 16), internal_norm="layer"), [0, 1], seed=0)
        out = model(torch.randn(3, 2, 32))
        assert torch.isfinite(out.logits).all()


class TestExpandHead:
    def test_old_rows_bit_identical(self):
        model = build_model(2, 32, CFG, [0, 1], seed=0)
        w_before = model.head.weight.detach().clone()
        b_before = model.head.bias.detach().clone()
        expand_head(model, [2, 3])
        assert model.head.out_features == 4
        assert torch.equal(model.head.weight[:2], w_before)
        assert torch.equal(model.head.bias[:2], b_before)

    def test_old_logits_preserved_for_any_input(self):
        model = build_model(2, 32, CFG, [0, 1], seed=0)
        model.eval()
        x = torch.randn(5, 2, 32)
        before = model(x).logits.detach().clone()
        expand_head(model, [2, 3])
        after = model(x).logits
        assert torch.equal(after[:, :2], before)

    def test_expand_empty_is_noop(self):
        model = build_model(2, 32, CFG, [0, 1], seed=0)
        w = model.head.weight.detach().clone()
        expand_head(model, [])
        assert torch.equal(model.head.weight, w)

    def test_overlap_rejected(self):
        model = build_model(2, 32, CFG, [0, 1], seed=0)
        with pytest.raises(ContractError):
            expand_head(model, [1, 2])

    def test_ncm_expansion_adds_placeholder_prototypes(self):
        model = build_model(2, 32, CFG, [0, 1], seed=0, head_kind="ncm")
        expand_head(model, [2, 3])
        assert set(model.head.prototypes) == {0, 1, 2, 3}
        assert all(p is None for p in model.head.prototypes.values())

    def test_expansion_deterministic(self):
        a = build_model(2, 32, CFG, [0, 1], seed=3)
        b = build_model(2, 32, CFG, [0, 1], seed=3)
        expand_head(a, [2, 3])
        expand_head(b, [2, 3])
        assert torch.equal(a.head.weight, b.head.weight)


class TestCheckpoint:
    def test_roundtrip(self, tmp_path):
        model = build_model(2, 32, CFG, [0, 1], seed=1)
        expand_head(model, [5])
        path = tmp_path / "ckpt.npz"
        save_checkpoint(model, path)
        back = load_checkpoint(path)
        assert back.known_classes == [0, 1, 5]
        x = torch.randn(3, 2, 32)
        model.eval(); back.eval()
        assert torch.allclose(model(x).logits, back(x).logits, atol=0)
