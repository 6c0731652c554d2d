"""Named experiment bundles.

The desk-* presets are sized to run on a laptop; paper-scale encodes the
published full-scale hyperparameters and refuses to run without an explicit
cluster acknowledgment, since it is far outside desk hardware.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .experiments import ExperimentConfig, FixedDataConfig, StreamDataConfig
from .keystream import SeedSpec, SplitSpec
from .nn import ModelConfig, TrainConfig


def _seed(tag: str) -> bytes:
    return hashlib.sha256(b"ecclab/" + tag.encode()).digest()


@dataclass(frozen=True)
class Preset:
    name: str
    kind: str  # "memorize" | "stream" | "ablation"
    config: ExperimentConfig
    requires_cluster: bool = False


def _desk_memorize() -> Preset:
    return Preset(
        name="desk-memorize",
        kind="memorize",
        config=ExperimentConfig(
            model=ModelConfig(hidden_size=128, num_layers=4, num_heads=4, seed=1),
            train=TrainConfig(
                learning_rate=2e-3,
                beta1=0.0,
                beta2=0.99,
                epsilon=1e-8,
                weight_decay=0.0,
                batch_size=64,
                epochs=300,
                scheduler="cosine",
                seed=2,
            ),
            data=FixedDataConfig(
                seed=SeedSpec(_seed("desk-memorize/data"), "random_stream"),
                split=SplitSpec(train_count=512, eval_count=128),
            ),
            stop_train_accuracy=0.99,
            max_epochs=300,
        ),
    )


def _desk_stream() -> Preset:
    return Preset(
        name="desk-stream",
        kind="stream",
        config=ExperimentConfig(
            model=ModelConfig(hidden_size=32, num_layers=2, num_heads=2, seed=3),
            train=TrainConfig(
                learning_rate=3e-4,
                beta1=0.0,
                beta2=0.99,
                epsilon=1e-8,
                weight_decay=0.0,
                batch_size=64,
                epochs=50,
                scheduler="none",
                seed=4,
            ),
            data=StreamDataConfig(
                seed=SeedSpec(_seed("desk-stream/data"), "random_stream"),
                batches_per_epoch=100,
                eval_batches=2,
            ),
            stop_train_accuracy=0.999,
            max_epochs=50,
        ),
    )


def _desk_ablation() -> Preset:
    return Preset(
        name="desk-ablation",
        kind="ablation",
        config=ExperimentConfig(
            model=ModelConfig(hidden_size=64, num_layers=2, num_heads=2, seed=5),
            train=TrainConfig(
                learning_rate=2e-3,
                beta1=0.0,  # overridden per ablation arm
                beta2=0.99,
                epsilon=1e-8,
                weight_decay=0.0,
                batch_size=64,
                epochs=200,
                scheduler="none",
                seed=6,
            ),
            data=FixedDataConfig(
                seed=SeedSpec(_seed("desk-ablation/data"), "random_stream"),
                split=SplitSpec(train_count=256, eval_count=64),
            ),
            stop_train_accuracy=0.99,
            max_epochs=200,
        ),
    )


def _paper_scale() -> Preset:
    return Preset(
        name="paper-scale",
        kind="memorize",
        requires_cluster=True,
        config=ExperimentConfig(
            model=ModelConfig(hidden_size=2048, num_layers=16, num_heads=16, seed=7),
            train=TrainConfig(
                learning_rate=1e-3,
                beta1=0.0,
                beta2=0.99,
                epsilon=1e-8,
                weight_decay=0.0,
                batch_size=256,
                epochs=20,
                scheduler="cosine",
                seed=8,
            ),
            data=FixedDataConfig(
                seed=SeedSpec(_seed("paper-scale/data"), "random_stream"),
                split=SplitSpec(train_count=100_000, eval_count=38_200),
            ),
            stop_train_accuracy=0.99,
            max_epochs=20,
        ),
    )


def build_presets() -> dict[str, Preset]:
    return {
        p.name: p
        for p in (_desk_memorize(), _desk_stream(), _desk_ablation(), _paper_scale())
    }


PRESETS = build_presets()
