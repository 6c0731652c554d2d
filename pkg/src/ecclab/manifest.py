"""Flat key=value config files and run manifests.

Config format: one `key = value` per line, `#` starts a comment, blank lines
ignored. Keys are dotted paths (e.g. train.learning_rate). A manifest is the
same format plus reserved `run_*` metadata keys (subcommand, tool version,
start/end timestamps, artifact list), which config loaders skip — so any
manifest can be fed straight back through --config to reproduce its run.

Unknown non-reserved keys are an error, reported by name.
"""

from __future__ import annotations

import dataclasses
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .experiments import (
    ExperimentConfig,
    FixedDataConfig,
    StreamDataConfig,
)
from .keystream import SeedSpec, SplitSpec
from .nn import ModelConfig, TrainConfig


class UnknownKeyError(ValueError):
    def __init__(self, key: str):
        super().__init__(f"unknown config key: {key}")
        self.key = key


def parse_kv_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_kv_file(path: str | Path) -> dict[str, str]:
    return parse_kv_text(Path(path).read_text())


def split_meta(flat: dict[str, str]) -> tuple[dict[str, str], dict[str, str]]:
    """Separate reserved run_* metadata from config keys."""
    meta = {k: v for k, v in flat.items() if k.startswith("run_")}
    cfg = {k: v for k, v in flat.items() if not k.startswith("run_")}
    return cfg, meta


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(
    path: str | Path,
    subcommand: str,
    config: dict[str, str],
    artifacts: list[str],
    started_at: str,
) -> Path:
    path = Path(path)
    lines = [
        "# ecclab run manifest (feed back through --config to reproduce)",
        f"run_subcommand = {subcommand}",
        f"run_version = {__version__}",
        f"run_started_at = {started_at}",
        f"run_ended_at = {_now()}",
        f"run_artifacts = {','.join(artifacts)}",
    ]
    lines += [f"{k} = {v}" for k, v in config.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def timestamp() -> str:
    return _now()


# ---------------------------------------------------------------------------
# Experiment config <-> flat keys

_MODEL_FIELDS = ("hidden_size", "num_layers", "num_heads", "ffn_mult", "seed", "dtype")
_TRAIN_FIELDS = (
    "learning_rate", "beta1", "beta2", "epsilon", "weight_decay",
    "batch_size", "epochs", "scheduler", "seed", "bias_correction",
)


def _to_str(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def experiment_to_flat(kind: str, cfg: ExperimentConfig) -> dict[str, str]:
    flat: dict[str, str] = {"kind": kind}
    flat["stop_train_accuracy"] = _to_str(cfg.stop_train_accuracy)
    flat["max_epochs"] = _to_str(cfg.max_epochs)
    for f in _MODEL_FIELDS:
        flat[f"model.{f}"] = _to_str(getattr(cfg.model, f))
    for f in _TRAIN_FIELDS:
        flat[f"train.{f}"] = _to_str(getattr(cfg.train, f))
    flat["data.seed_hex"] = cfg.data.seed.seed.hex()
    flat["data.mode"] = cfg.data.seed.mode
    if isinstance(cfg.data, FixedDataConfig):
        flat["data.train_count"] = _to_str(cfg.data.split.train_count)
        flat["data.eval_count"] = _to_str(cfg.data.split.eval_count)
    else:
        flat["data.batches_per_epoch"] = _to_str(cfg.data.batches_per_epoch)
        flat["data.eval_batches"] = _to_str(cfg.data.eval_batches)
    return flat


def _parse_bool(s: str) -> bool:
    if s.lower() in ("true", "1", "yes"):
        return True
    if s.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"expected boolean, got {s!r}")


_FIELD_PARSERS = {
    int: int,
    float: float,
    str: str,
    bool: _parse_bool,
}


def _dataclass_kwargs(cls, flat: dict[str, str], prefix: str, fields: tuple[str, ...]):
    kwargs = {}
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    for name in fields:
        key = f"{prefix}.{name}"
        if key in flat:
            typ = types[name]
            if isinstance(typ, str):
                typ = {"int": int, "float": float, "str": str, "bool": bool}[typ]
            kwargs[name] = _FIELD_PARSERS[typ](flat[key])
    return kwargs


def experiment_from_flat(flat: dict[str, str]) -> tuple[str, ExperimentConfig]:
    flat = dict(flat)
    kind = flat.pop("kind", None)
    if kind not in ("memorize", "stream", "ablation"):
        raise ValueError(f"kind must be memorize|stream|ablation, got {kind!r}")
    known = {"stop_train_accuracy", "max_epochs", "data.seed_hex", "data.mode",
             "data.train_count", "data.eval_count",
             "data.batches_per_epoch", "data.eval_batches"}
    known |= {f"model.{f}" for f in _MODEL_FIELDS}
    known |= {f"train.{f}" for f in _TRAIN_FIELDS}
    for key in flat:
        if key not in known:
            raise UnknownKeyError(key)
    required = {"model.hidden_size", "model.num_layers", "model.num_heads",
                "max_epochs", "data.seed_hex"}
    required |= (
        {"data.batches_per_epoch"} if kind == "stream"
        else {"data.train_count", "data.eval_count"}
    )
    missing = sorted(required - flat.keys())
    if missing:
        raise ValueError(f"missing config keys: {', '.join(missing)}")

    model = ModelConfig(**_dataclass_kwargs(ModelConfig, flat, "model", _MODEL_FIELDS))
    train = TrainConfig(**_dataclass_kwargs(TrainConfig, flat, "train", _TRAIN_FIELDS))
    seed = SeedSpec(bytes.fromhex(flat["data.seed_hex"]), flat.get("data.mode", "random_stream"))
    if kind == "stream":
        data = StreamDataConfig(
            seed=seed,
            batches_per_epoch=int(flat["data.batches_per_epoch"]),
            eval_batches=int(flat.get("data.eval_batches", "2")),
        )
    else:
        data = FixedDataConfig(
            seed=seed,
            split=SplitSpec(int(flat["data.train_count"]), int(flat["data.eval_count"])),
        )
    cfg = ExperimentConfig(
        model=model,
        train=train,
        data=data,
        stop_train_accuracy=float(flat.get("stop_train_accuracy", "0.99")),
        max_epochs=int(flat["max_epochs"]),
    )
    return kind, cfg
