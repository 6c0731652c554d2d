"""Experiment runners: fixed-set memorization, unbounded-stream training,
and the first-moment ablation, each emitting per-epoch CSV metrics.

Metrics CSV columns, in order: epoch, train_loss, train_accuracy, eval_loss,
eval_accuracy, learning_rate, wall_seconds. Header row mandatory, floats at
six significant digits. Row `epoch=0` is an update-free snapshot of the
freshly initialized model (which is why two runs differing only in optimizer
settings share it); rows 1..N are training epochs, written and flushed one
at a time so an aborted run keeps its partial CSV. Every run is a pure
function of its config; only wall_seconds varies between repeats.

Eval metrics never see optimizer updates, the stream runner never reads a
dataset file, and the memorization runner never draws from the stream.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TextIO

import numpy as np

from . import keystream
from .curve import P256
from .keystream import SeedSpec, SplitSpec
from .nn import (
    ModelConfig,
    ModelState,
    NumericError,
    OptimizerState,
    TrainConfig,
    adamw_step,
    forward,
    loss_grads_logits,
    lr_schedule,
    model_init,
    per_byte_accuracy,
    save_checkpoint,
)

CSV_COLUMNS = ("epoch", "train_loss", "train_accuracy", "eval_loss",
               "eval_accuracy", "learning_rate", "wall_seconds")

GUESS_RATE = 1.0 / 256.0


@dataclass(frozen=True)
class FixedDataConfig:
    seed: SeedSpec
    split: SplitSpec


@dataclass(frozen=True)
class StreamDataConfig:
    seed: SeedSpec
    batches_per_epoch: int
    eval_batches: int = 2


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig
    train: TrainConfig
    data: FixedDataConfig | StreamDataConfig
    stop_train_accuracy: float = 0.99
    max_epochs: int = 300

    def __post_init__(self):
        if not (GUESS_RATE < self.stop_train_accuracy <= 1.0):
            raise ValueError("stop_train_accuracy must lie in (1/256, 1]")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    train_accuracy: float
    eval_loss: float
    eval_accuracy: float
    learning_rate: float
    wall_seconds: float


@dataclass(frozen=True)
class RunArtifacts:
    metrics_csv: Path
    rows: tuple[EpochMetrics, ...]
    checkpoint: Path | None = None


def guessing_band(n_positions: int, confidence_sigmas: float) -> tuple[float, float]:
    """Binomial band around the 1/256 guessing rate, clamped to [0, 1].

    An accuracy inside the band is statistically indistinguishable from
    blind per-byte guessing at the given sigma level.
    """
    if n_positions < 1:
        raise ValueError("n_positions must be >= 1")
    q = GUESS_RATE
    se = math.sqrt(q * (1.0 - q) / n_positions)
    return (max(0.0, q - confidence_sigmas * se), min(1.0, q + confidence_sigmas * se))


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _write_header(fh: TextIO) -> None:
    fh.write(",".join(CSV_COLUMNS) + "\n")
    fh.flush()


def _write_row(fh: TextIO, row: EpochMetrics) -> None:
    fh.write(
        f"{row.epoch},{_fmt(row.train_loss)},{_fmt(row.train_accuracy)},"
        f"{_fmt(row.eval_loss)},{_fmt(row.eval_accuracy)},"
        f"{_fmt(row.learning_rate)},{_fmt(row.wall_seconds)}\n"
    )
    fh.flush()


def read_metrics_csv(path: str | Path) -> list[EpochMetrics]:
    lines = Path(path).read_text().splitlines()
    if lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"unexpected metrics header in {path}")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(EpochMetrics(int(parts[0]), *(float(v) for v in parts[1:])))
    return rows


def records_to_arrays(records) -> tuple[np.ndarray, np.ndarray]:
    """Public keys as [N, 33] uint8 inputs, private keys as [N, 32] labels."""
    X = np.frombuffer(b"".join(r.public_key for r in records), dtype=np.uint8)
    Y = np.frombuffer(b"".join(r.private_key for r in records), dtype=np.uint8)
    n = len(records)
    return X.reshape(n, keystream.PUBLIC_LEN).copy(), Y.reshape(
        n, keystream.PRIVATE_LEN
    ).astype(np.int64)


def _log_softmax_ce(logits: np.ndarray, labels: np.ndarray) -> float:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    b, t = np.indices(labels.shape)
    return float(-(shifted[b, t, labels] - logz[b, t, 0]).mean())


def evaluate(state: ModelState, X: np.ndarray, Y: np.ndarray, batch_size: int):
    """Forward-only loss and accuracy; never touches optimizer state."""
    total = len(X)
    loss_sum = 0.0
    hit_sum = 0.0
    for lo in range(0, total, batch_size):
        xb, yb = X[lo : lo + batch_size], Y[lo : lo + batch_size]
        logits = forward(state, xb)
        loss_sum += _log_softmax_ce(logits, yb) * len(xb)
        hit_sum += per_byte_accuracy(logits, yb) * len(xb)
    return loss_sum / total, hit_sum / total


def _train_one_batch(state, opt, cfg: TrainConfig, lr, xb, yb):
    loss, grads, logits = loss_grads_logits(state, xb, yb)
    acc = per_byte_accuracy(logits, yb)
    adamw_step(state.params, grads, opt, cfg, lr=lr)
    return loss, acc


def run_memorization(cfg: ExperimentConfig, out_dir: str | Path) -> RunArtifacts:
    """Train on a fixed keypair set until the stop accuracy or max_epochs."""
    if not isinstance(cfg.data, FixedDataConfig):
        raise ValueError("run_memorization requires a fixed-dataset data config")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    split = cfg.data.split
    train_recs = keystream.generate_records(cfg.data.seed, split.train_count, P256, 0)
    eval_recs = keystream.generate_records(
        cfg.data.seed, split.eval_count, P256, split.train_count
    )
    X_tr, Y_tr = records_to_arrays(train_recs)
    X_ev, Y_ev = records_to_arrays(eval_recs)

    state = model_init(cfg.model)
    opt = OptimizerState.init_like(state.params)
    order_rng = np.random.default_rng(cfg.train.seed)
    csv_path = out_dir / "metrics.csv"
    rows: list[EpochMetrics] = []
    with open(csv_path, "w", newline="") as fh:
        _write_header(fh)
        t0 = time.perf_counter()
        tl, ta = evaluate(state, X_tr, Y_tr, cfg.train.batch_size)
        el, ea = evaluate(state, X_ev, Y_ev, cfg.train.batch_size)
        row = EpochMetrics(0, tl, ta, el, ea, lr_schedule(cfg.train, 0),
                           time.perf_counter() - t0)
        rows.append(row)
        _write_row(fh, row)
        for epoch in range(1, cfg.max_epochs + 1):
            t0 = time.perf_counter()
            lr = lr_schedule(cfg.train, epoch - 1)
            perm = order_rng.permutation(len(X_tr))
            losses, accs, counts = [], [], []
            for lo in range(0, len(perm), cfg.train.batch_size):
                idx = perm[lo : lo + cfg.train.batch_size]
                loss, acc = _train_one_batch(state, opt, cfg.train, lr, X_tr[idx], Y_tr[idx])
                losses.append(loss * len(idx))
                accs.append(acc * len(idx))
                counts.append(len(idx))
            train_loss = sum(losses) / sum(counts)
            train_acc = sum(accs) / sum(counts)
            el, ea = evaluate(state, X_ev, Y_ev, cfg.train.batch_size)
            row = EpochMetrics(epoch, train_loss, train_acc, el, ea, lr,
                               time.perf_counter() - t0)
            rows.append(row)
            _write_row(fh, row)
            if train_acc >= cfg.stop_train_accuracy:
                break
    ckpt = save_checkpoint(out_dir / "checkpoint.bin", state, opt)
    return RunArtifacts(csv_path, tuple(rows), ckpt)


def stream_eval_seed(seed: SeedSpec) -> SeedSpec:
    """Held-out stream for eval batches, keyed apart from the training stream."""
    return SeedSpec(hashlib.sha256(seed.seed + b"/eval").digest(), "random_stream")


def run_stream(cfg: ExperimentConfig, out_dir: str | Path) -> RunArtifacts:
    """Train on never-repeating generated batches; the scheduler is forced off
    (decaying the rate makes no sense without repeat data)."""
    if not isinstance(cfg.data, StreamDataConfig):
        raise ValueError("run_stream requires a stream data config")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_cfg = replace(cfg.train, scheduler="none")
    eval_recs = keystream.generate_records(
        stream_eval_seed(cfg.data.seed),
        cfg.data.eval_batches * train_cfg.batch_size,
        P256,
    )
    X_ev, Y_ev = records_to_arrays(eval_recs)
    batches = keystream.stream_batches(cfg.data.seed, train_cfg.batch_size, P256)

    state = model_init(cfg.model)
    opt = OptimizerState.init_like(state.params)
    csv_path = out_dir / "metrics.csv"
    rows: list[EpochMetrics] = []
    with open(csv_path, "w", newline="") as fh:
        _write_header(fh)
        t0 = time.perf_counter()
        el, ea = evaluate(state, X_ev, Y_ev, train_cfg.batch_size)
        # Before any update, train and eval draws are exchangeable, so the
        # eval snapshot stands in for both column groups.
        row = EpochMetrics(0, el, ea, el, ea, train_cfg.learning_rate,
                           time.perf_counter() - t0)
        rows.append(row)
        _write_row(fh, row)
        for epoch in range(1, cfg.max_epochs + 1):
            t0 = time.perf_counter()
            lr = lr_schedule(train_cfg, epoch - 1)
            losses, accs = [], []
            for _ in range(cfg.data.batches_per_epoch):
                xb, yb = records_to_arrays(next(batches))
                loss, acc = _train_one_batch(state, opt, train_cfg, lr, xb, yb)
                losses.append(loss)
                accs.append(acc)
            el, ea = evaluate(state, X_ev, Y_ev, train_cfg.batch_size)
            row = EpochMetrics(epoch, float(np.mean(losses)), float(np.mean(accs)),
                               el, ea, lr, time.perf_counter() - t0)
            rows.append(row)
            _write_row(fh, row)
    return RunArtifacts(csv_path, tuple(rows))


ABLATION_BETA1 = (0.9, 0.0)


def _beta_tag(beta1: float) -> str:
    return f"{beta1:.1f}".replace(".", "")


def epochs_to_accuracy(rows, threshold: float) -> int | None:
    for row in rows:
        if row.epoch >= 1 and row.train_accuracy >= threshold:
            return row.epoch
    return None


def run_momentum_ablation(cfg: ExperimentConfig, out_dir: str | Path):
    """The same fixed-dataset run twice, differing only in the first-moment
    coefficient, plus a two-row comparison summary."""
    if not isinstance(cfg.data, FixedDataConfig):
        raise ValueError("run_momentum_ablation requires a fixed-dataset config")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: dict[float, RunArtifacts] = {}
    for beta1 in ABLATION_BETA1:
        sub = out_dir / f"beta1_{_beta_tag(beta1)}"
        run_cfg = replace(cfg, train=cfg.train.with_beta1(beta1))
        art = run_memorization(run_cfg, sub)
        renamed = out_dir / f"metrics_beta1_{_beta_tag(beta1)}.csv"
        Path(art.metrics_csv).replace(renamed)
        results[beta1] = RunArtifacts(renamed, art.rows, art.checkpoint)
    summary = out_dir / "ablation_summary.csv"
    with open(summary, "w", newline="") as fh:
        fh.write("beta1,final_train_accuracy,epochs_to_half_accuracy,epochs_run\n")
        for beta1 in ABLATION_BETA1:
            rows = results[beta1].rows
            half = epochs_to_accuracy(rows, 0.5)
            fh.write(
                f"{_fmt(beta1)},{_fmt(rows[-1].train_accuracy)},"
                f"{'' if half is None else half},{rows[-1].epoch}\n"
            )
    return results, summary
