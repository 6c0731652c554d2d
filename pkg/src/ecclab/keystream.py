"""Deterministic, seeded keypair dataset production and persistence.

Every record is a genuinely related pair: 33-byte SEC1-compressed public key
followed by the 32-byte big-endian private scalar, 65 bytes per record.

Scalar derivation is a pure function of (seed, record index): candidate j for
record i is SHA-256(seed || index_be64 || attempt_be64) truncated to the
order's byte width with excess top bits masked, rejection-sampled until it
lands in [1, order-1]. That keys the stream on the 32-byte seed, makes the
byte output identical on every platform, keeps sampling free of modular
bias, and lets any parallel schedule produce the same bytes because record i
never depends on record i-1. Sequential mode simply emits scalars 1, 2, 3...

Binary file layout (little-endian):

    8 bytes   magic "ECKEYSET"
    4 bytes   format version (currently 1), uint32
    8 bytes   record count, uint64
    n * 65    packed records (33-byte public || 32-byte private)

CSV export carries two hex columns, pub_hex and priv_hex, with a header row.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .curve import CurveParams, P256, derive_public, encode_compressed, fast_public_point

MAGIC = b"ECKEYSET"
VERSION = 1
PUBLIC_LEN = 33
PRIVATE_LEN = 32
RECORD_LEN = PUBLIC_LEN + PRIVATE_LEN

MODES = ("random_stream", "sequential")


class DatasetFormatError(ValueError):
    """Malformed dataset file or CSV; carries the offending record index."""

    def __init__(self, message: str, record_index: int | None = None):
        super().__init__(message)
        self.record_index = record_index


@dataclass(frozen=True)
class SeedSpec:
    seed: bytes
    mode: str = "random_stream"

    def __post_init__(self):
        if len(self.seed) != 32:
            raise ValueError(f"seed must be 32 bytes, got {len(self.seed)}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class SplitSpec:
    train_count: int
    eval_count: int

    def __post_init__(self):
        if self.train_count < 0 or self.eval_count < 0:
            raise ValueError("split counts must be non-negative")


@dataclass(frozen=True)
class DatasetRecord:
    public_key: bytes
    private_key: bytes


def scalar_for_index(seed: SeedSpec, index: int, order: int) -> int:
    """Private scalar for record `index`, a pure function of (seed, index)."""
    if seed.mode == "sequential":
        d = index + 1
        if d > order - 1:
            raise ValueError(f"sequential scalar {d} exceeds order-1")
        return d
    nbytes = (order.bit_length() + 7) // 8
    excess = nbytes * 8 - order.bit_length()
    attempt = 0
    while True:
        digest = hashlib.sha256(
            seed.seed + struct.pack(">QQ", index, attempt)
        ).digest()
        chunk = bytearray(digest[:nbytes])
        if excess:
            chunk[0] &= 0xFF >> excess
        d = int.from_bytes(chunk, "big")
        if 1 <= d <= order - 1:
            return d
        attempt += 1


def record_for_index(seed: SeedSpec, index: int, params: CurveParams = P256) -> DatasetRecord:
    # Bulk generation goes through the uncounted fast derivation; the counted
    # path (derive_public) gives identical points and prices the cost model.
    d = scalar_for_index(seed, index, params.order)
    return DatasetRecord(
        public_key=encode_compressed(fast_public_point(d, params)),
        private_key=d.to_bytes(PRIVATE_LEN, "big"),
    )


def generate_records(
    seed: SeedSpec, count: int, params: CurveParams = P256, start_index: int = 0
) -> list[DatasetRecord]:
    return [record_for_index(seed, start_index + i, params) for i in range(count)]


def stream_batches(
    seed: SeedSpec,
    batch_size: int,
    params: CurveParams = P256,
    start_index: int = 0,
) -> Iterator[list[DatasetRecord]]:
    """Unbounded, lazily produced batches; indices advance monotonically."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    index = start_index
    while True:
        yield generate_records(seed, batch_size, params, start_index=index)
        index += batch_size


def write_dataset(path: str | Path, records: list[DatasetRecord]) -> Path:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(records)))
        for i, rec in enumerate(records):
            if len(rec.public_key) != PUBLIC_LEN or len(rec.private_key) != PRIVATE_LEN:
                raise DatasetFormatError(
                    f"record {i} has lengths ({len(rec.public_key)}, "
                    f"{len(rec.private_key)}), want ({PUBLIC_LEN}, {PRIVATE_LEN})",
                    record_index=i,
                )
            fh.write(rec.public_key)
            fh.write(rec.private_key)
    return path


def read_dataset(path: str | Path) -> list[DatasetRecord]:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise DatasetFormatError(f"bad magic in {path}")
    (version,) = struct.unpack_from("<I", data, 8)
    if version != VERSION:
        raise DatasetFormatError(f"unsupported version {version}")
    (count,) = struct.unpack_from("<Q", data, 12)
    records = []
    off = 20
    for i in range(count):
        chunk = data[off : off + RECORD_LEN]
        if len(chunk) != RECORD_LEN:
            raise DatasetFormatError(f"record {i} truncated", record_index=i)
        records.append(DatasetRecord(chunk[:PUBLIC_LEN], chunk[PUBLIC_LEN:]))
        off += RECORD_LEN
    if off != len(data):
        raise DatasetFormatError(f"{len(data) - off} trailing bytes after record {count - 1}")
    return records


def generate_fixed_dataset(
    seed: SeedSpec,
    split: SplitSpec,
    params: CurveParams = P256,
    out_dir: str | Path = ".",
) -> tuple[Path, Path]:
    """Write train.bin / eval.bin over disjoint index ranges; byte-identical
    files for identical seeds and splits."""
    if params.p.byte_width != PUBLIC_LEN - 1:
        raise ValueError("the 65-byte record layout requires a 256-bit curve")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train = generate_records(seed, split.train_count, params, start_index=0)
    evl = generate_records(seed, split.eval_count, params, start_index=split.train_count)
    return (
        write_dataset(out_dir / "train.bin", train),
        write_dataset(out_dir / "eval.bin", evl),
    )


def export_csv(dataset_path: str | Path, csv_path: str | Path) -> Path:
    records = read_dataset(dataset_path)
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pub_hex", "priv_hex"])
        for rec in records:
            writer.writerow([rec.public_key.hex(), rec.private_key.hex()])
    return csv_path


def import_csv(csv_path: str | Path) -> list[DatasetRecord]:
    records = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["pub_hex", "priv_hex"]:
            raise DatasetFormatError(f"bad CSV header {header}")
        for i, row in enumerate(reader):
            if len(row) != 2:
                raise DatasetFormatError(f"row {i} has {len(row)} columns", record_index=i)
            try:
                pub, priv = bytes.fromhex(row[0]), bytes.fromhex(row[1])
            except ValueError:
                raise DatasetFormatError(f"row {i} is not hex", record_index=i) from None
            if len(pub) != PUBLIC_LEN or len(priv) != PRIVATE_LEN:
                raise DatasetFormatError(f"row {i} has wrong field widths", record_index=i)
            records.append(DatasetRecord(pub, priv))
    return records


def verify_records(records: list[DatasetRecord], params: CurveParams = P256) -> None:
    """Check the pair invariant: stored public key equals derive(private)."""
    for i, rec in enumerate(records):
        d = int.from_bytes(rec.private_key, "big")
        expected = encode_compressed(derive_public(d, params).Q)
        if expected != rec.public_key:
            raise DatasetFormatError(f"record {i} public key does not match its scalar", i)
