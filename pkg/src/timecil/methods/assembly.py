"""Method registry: build the plugin for a named CIL method."""

from __future__ import annotations

from typing import Optional

from ..data.types import TaskStream
from ..errors import ConfigError
from ..memory.buffer import budget_from_fraction
from ..seeding import substream
from .base import NaivePlugin
from .generative import GenerativeReplayPlugin
from .regularization import DT2WPlugin, LwFPlugin, MASPlugin
from .replay import REPLAY_KINDS, ReplayPlugin

METHODS = ("naive", "offline", "lwf", "mas", "dt2w", "gr") + REPLAY_KINDS


def replay_policies(kind: str) -> tuple[str, str, str]:
    """(memory update, memory retrieval, extra loss) wired for a replay method."""
    table = {
        "er": ("reservoir", "random", "none"),
        "der": ("reservoir+logit_capture", "random", "der_loss"),
        "herding": ("herding", "random", "none"),
        "aser": ("reservoir", "aser", "none"),
        "clops": ("clops", "random", "none"),
        "fasticarl": ("fasticarl", "random", "none"),
        "er_subject_balanced": ("reservoir", "subject_balanced", "none"),
        "er_subject_restricted": ("subject_restricted_reservoir", "random", "none"),
    }
    if kind not in table:
        raise ConfigError(f"{kind!r} is not a replay method; expected one of {sorted(table)}")
    return table[kind]


def method_assembly(kind: str, stream: TaskStream, seed: int,
                    memory_pct: float = 0.05,
                    hyperparams: Optional[dict] = None,
                    batch_size: int = 64, replay_batch_size: int = 32):
    """Build the plugin driving one run of the named method on a stream."""
    kind = kind.lower()
    hp = dict(hyperparams or {})
    if kind not in METHODS:
        raise ConfigError(f"unknown method {kind!r}; expected one of {sorted(METHODS)}")

    if kind in ("naive", "offline"):
        return NaivePlugin()
    if kind == "lwf":
        return LwFPlugin(
            lambda_lwf=hp.get("lambda_lwf", 1.0),
            temperature=hp.get("temperature", 2.0),
        )
    if kind == "mas":
        return MASPlugin(lambda_mas=hp.get("lambda_mas", 1.0))
    if kind == "dt2w":
        return DT2WPlugin(
            lambda_kd=hp.get("lambda_kd", 10.0),
            lambda_lwf=hp.get("lambda_lwf", 1.0),
            gamma=hp.get("gamma", 0.1),
            lambda_proto=hp.get("lambda_proto", 1.0),
            temperature=hp.get("temperature", 2.0),
            seed=seed,
        )
    if kind == "gr":
        channels, length = stream.sample_shape
        return GenerativeReplayPlugin(
            channels, length, seed,
            latent_dim=hp.get("latent_dim", 16),
            beta=hp.get("beta", 1.0),
            generator_epochs=hp.get("generator_epochs", 200),
            generator_lr=hp.get("generator_lr", 1e-3),
            batch_size=batch_size,
            replay_batch_size=replay_batch_size,
        )

    capacity = budget_from_fraction(stream, memory_pct)
    allowed = None
    if kind == "er_subject_restricted":
        subjects = stream.subjects
        if not subjects:
            raise ConfigError("er_subject_restricted needs subject ids on the dataset")
        n_allowed = int(hp.get("n_subjects", 2))
        rng = substream(seed, "restricted_subjects")
        allowed = sorted(rng.choice(subjects, size=min(n_allowed, len(subjects)), replace=False).tolist())
    return ReplayPlugin(
        kind, capacity, seed,
        der_alpha=hp.get("der_alpha", 0.5),
        allowed_subjects=allowed,
        aser_k_neighbors=hp.get("aser_k_neighbors", 5),
        aser_eval_points=hp.get("aser_eval_points", 64),
        update_batch=batch_size,
    )
