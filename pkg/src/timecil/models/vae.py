"""Convolutional variational autoencoder for series synthesis.

Four strided Conv1d layers encode to a Gaussian latent, four
ConvTranspose1d layers decode back. Inputs are zero-padded to a multiple
of 16 so the stride-2 stack inverts exactly, and outputs are cropped back
to the original length.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import TrainingAborted
from ..seeding import seed_torch_global, torch_generator


def gaussian_kl(mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    """Per-sample KL(N(mu, diag(exp(logvar))) || N(0, I)), summed over dims."""
    return 0.5 * (mu.pow(2) + logvar.exp() - 1.0 - logvar).sum(dim=-1)


class SeriesVAE(nn.Module):
    def __init__(self, channels: int, length: int, latent_dim: int = 16,
                 widths: tuple = (32, 64, 128, 256), seed: int = 0, beta: float = 1.0):
        super().__init__()
        seed_torch_global(seed, "vae_init")
        self.channels = channels
        self.length = length
        self.latent_dim = latent_dim
        self.beta = beta
        self.padded = -(-length // 16) * 16  # next multiple of 2^4

        enc = []
        c_in = channels
        for w in widths:
            enc += [nn.Conv1d(c_in, w, 5, stride=2, padding=2), nn.ReLU()]
            c_in = w
        self.encoder = nn.Sequential(*enc)
        self.enc_len = self.padded // 16
        flat = widths[-1] * self.enc_len
        self.fc_mu = nn.Linear(flat, latent_dim)
        self.fc_logvar = nn.Linear(flat, latent_dim)

        self.fc_dec = nn.Linear(latent_dim, flat)
        dec = []
        rev = list(widths[::-1])
        for c_in, c_out in zip(rev, rev[1:]):
            dec += [nn.ConvTranspose1d(c_in, c_out, 5, stride=2, padding=2, output_padding=1), nn.ReLU()]
        dec += [nn.ConvTranspose1d(rev[-1], channels, 5, stride=2, padding=2, output_padding=1)]
        self.decoder = nn.Sequential(*dec)
        self._dec_channels = widths[-1]

    def encode(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        pad = self.padded - self.length
        if pad:
            x = F.pad(x, (0, pad))
        h = self.encoder(x).flatten(1)
        return self.fc_mu(h), self.fc_logvar(h)

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        h = self.fc_dec(z).view(-1, self._dec_channels, self.enc_len)
        out = self.decoder(h)
        return out[..., : self.length]

    def forward(self, x: torch.Tensor, generator: torch.Generator | None = None):
        mu, logvar = self.encode(x)
        eps = torch.randn(mu.shape, generator=generator, dtype=mu.dtype)
        z = mu + torch.exp(0.5 * logvar) * eps
        return self.decode(z), mu, logvar


def vae_loss(model: SeriesVAE, batch: torch.Tensor,
             generator: torch.Generator | None = None) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """(total, reconstruction, kl): per-sample sums, averaged over the batch."""
    recon, mu, logvar = model(batch, generator)
    rec = (recon - batch).pow(2).flatten(1).sum(dim=1).mean()
    kl = gaussian_kl(mu, logvar).mean()
    total = rec + model.beta * kl
    if not torch.isfinite(total):
        raise TrainingAborted(f"non-finite VAE loss (recon={rec.item()}, kl={kl.item()})")
    return total, rec, kl


@torch.no_grad()
def generate(model: SeriesVAE, n: int, seed: int, *names) -> torch.Tensor:
    """Decode n latent draws; deterministic under the named seed substream."""
    if n <= 0:
        return torch.zeros(0, model.channels, model.length)
    g = torch_generator(seed, "vae_sample", *names)
    z = torch.randn(n, model.latent_dim, generator=g)
    model.eval()
    return model.decode(z)
