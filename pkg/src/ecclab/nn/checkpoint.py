"""Binary checkpoint format for model parameters and optimizer moments.

Layout (all integers little-endian):

    8  bytes  magic "ECLABCKP"
    4  bytes  uint32 format version (currently 1)
    4  bytes  uint32 dtype code: 4 = float32, 8 = float64
    8  bytes  uint64 optimizer step count t
    8 * int64 model config: hidden_size, num_layers, num_heads, vocab,
              input_len, output_len, ffn_mult, seed
    payload   raw little-endian tensor bytes: every parameter in canonical
              order (see model.param_names), then the first moments in the
              same order, then the second moments.

Tensor shapes are a pure function of the config, so the payload carries no
per-tensor framing. Writing the same trained state twice produces identical
bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .model import ModelConfig, ModelState, param_names, _param_shape
from .optim import OptimizerState

MAGIC = b"ECLABCKP"
VERSION = 1


def save_checkpoint(path: str | Path, state: ModelState, opt: OptimizerState) -> Path:
    cfg = state.config
    path = Path(path)
    dtype_code = 4 if cfg.dtype == "float32" else 8
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, dtype_code))
        fh.write(struct.pack("<Q", opt.t))
        fh.write(
            struct.pack(
                "<8q",
                cfg.hidden_size,
                cfg.num_layers,
                cfg.num_heads,
                cfg.vocab,
                cfg.input_len,
                cfg.output_len,
                cfg.ffn_mult,
                cfg.seed,
            )
        )
        code = "<f4" if dtype_code == 4 else "<f8"
        for group in (state.params, opt.m, opt.v):
            for name in param_names(cfg):
                fh.write(np.ascontiguousarray(group[name], dtype=code).tobytes())
    return path


def load_checkpoint(path: str | Path) -> tuple[ModelState, OptimizerState]:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValueError(f"bad checkpoint magic in {path}")
    version, dtype_code = struct.unpack_from("<II", data, 8)
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    (t,) = struct.unpack_from("<Q", data, 16)
    fields = struct.unpack_from("<8q", data, 24)
    cfg = ModelConfig(
        hidden_size=fields[0],
        num_layers=fields[1],
        num_heads=fields[2],
        vocab=fields[3],
        input_len=fields[4],
        output_len=fields[5],
        ffn_mult=fields[6],
        seed=fields[7],
        dtype="float32" if dtype_code == 4 else "float64",
    )
    code = "<f4" if dtype_code == 4 else "<f8"
    itemsize = 4 if dtype_code == 4 else 8
    off = 24 + 8 * 8
    groups = []
    for _ in range(3):
        group = {}
        for name in param_names(cfg):
            shape = _param_shape(name, cfg)
            n = int(np.prod(shape))
            raw = data[off : off + n * itemsize]
            if len(raw) != n * itemsize:
                raise ValueError(f"checkpoint truncated at {name}")
            group[name] = np.frombuffer(raw, dtype=code).reshape(shape).astype(
                cfg.np_dtype, copy=True
            )
            off += n * itemsize
        groups.append(group)
    if off != len(data):
        raise ValueError(f"{len(data) - off} trailing bytes in checkpoint")
    params, m, v = groups
    return ModelState(cfg, params), OptimizerState(m=m, v=v, t=t)
