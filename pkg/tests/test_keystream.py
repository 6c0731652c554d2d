"""Dataset generation: determinism, pair consistency, file and CSV formats."""

import random
import struct

import pytest

import oracles

from ecclab import keystream
from ecclab.curve import P256, TOY, decode_compressed
from ecclab.keystream import (
    MAGIC,
    DatasetFormatError,
    DatasetRecord,
    SeedSpec,
    SplitSpec,
    export_csv,
    generate_fixed_dataset,
    generate_records,
    import_csv,
    read_dataset,
    scalar_for_index,
    stream_batches,
    verify_records,
    write_dataset,
)

SEED_A = SeedSpec(bytes(range(32)), "random_stream")
SEED_B = SeedSpec(bytes(range(1, 33)), "random_stream")
SEED_SEQ = SeedSpec(bytes(32), "sequential")


def test_seedspec_validation():
    with pytest.raises(ValueError):
        SeedSpec(b"short", "random_stream")
    with pytest.raises(ValueError):
        SeedSpec(bytes(32), "surprise_me")


def test_sequential_scalars_are_one_based_and_gapless():
    assert [scalar_for_index(SEED_SEQ, i, P256.order) for i in range(5)] == [1, 2, 3, 4, 5]
    with pytest.raises(ValueError):
        scalar_for_index(SEED_SEQ, TOY.order - 1, TOY.order)


def test_random_scalars_in_range_and_keyed():
    for i in range(200):
        d = scalar_for_index(SEED_A, i, P256.order)
        assert 1 <= d <= P256.order - 1
        d_toy = scalar_for_index(SEED_A, i, TOY.order)
        assert 1 <= d_toy <= TOY.order - 1
    assert scalar_for_index(SEED_A, 0, P256.order) != scalar_for_index(SEED_B, 0, P256.order)
    # pure function of (seed, index)
    assert scalar_for_index(SEED_A, 7, P256.order) == scalar_for_index(SEED_A, 7, P256.order)


def test_scalar_stream_has_no_duplicates_at_1e5():
    seen = set()
    for i in range(100_000):
        seen.add(scalar_for_index(SEED_A, i, P256.order))
    assert len(seen) == 100_000


def test_record_pair_invariant_and_decode():
    recs = generate_records(SEED_A, 8)
    verify_records(recs)
    for rec in recs:
        Q = decode_compressed(rec.public_key, P256)
        assert not Q.at_infinity


def test_sequential_records_match_oracle_multiples():
    recs = generate_records(SEED_SEQ, 3)
    g = (oracles.P256_GX, oracles.P256_GY)
    for i, rec in enumerate(recs):
        assert int.from_bytes(rec.private_key, "big") == i + 1
        expected = oracles.affine_mul(i + 1, g)
        got = decode_compressed(rec.public_key, P256)
        assert (got.x.value, got.y.value) == expected


def test_fixed_dataset_deterministic_bytes(tmp_path):
    a1, e1 = generate_fixed_dataset(SEED_A, SplitSpec(5, 2), P256, tmp_path / "one")
    a2, e2 = generate_fixed_dataset(SEED_A, SplitSpec(5, 2), P256, tmp_path / "two")
    assert a1.read_bytes() == a2.read_bytes()
    assert e1.read_bytes() == e2.read_bytes()


def test_fixed_dataset_split_disjoint(tmp_path):
    tr, ev = generate_fixed_dataset(SEED_A, SplitSpec(6, 3), P256, tmp_path)
    train, evl = read_dataset(tr), read_dataset(ev)
    assert len(train) == 6 and len(evl) == 3
    train_priv = {r.private_key for r in train}
    assert train_priv.isdisjoint({r.private_key for r in evl})


def test_dataset_requires_256_bit_curve(tmp_path):
    with pytest.raises(ValueError):
        generate_fixed_dataset(SEED_A, SplitSpec(2, 1), TOY, tmp_path)


def test_5000_records_unique(tmp_path):
    tr, _ = generate_fixed_dataset(SEED_A, SplitSpec(5000, 0), P256, tmp_path)
    records = read_dataset(tr)
    assert len(records) == 5000
    assert len({r.private_key for r in records}) == 5000
    verify_records(random.Random(0).sample(records, 25))


def test_stream_batches_deterministic_and_fresh():
    it1 = stream_batches(SEED_A, 4)
    it2 = stream_batches(SEED_A, 4)
    first1, first2 = next(it1), next(it2)
    assert first1 == first2
    batches = [first1] + [next(it1) for _ in range(3)]
    privs = [r.private_key for b in batches for r in b]
    assert len(set(privs)) == len(privs)  # nothing revisited
    other = next(stream_batches(SEED_B, 4))
    assert other != first1


def test_stream_is_lazy():
    it = stream_batches(SEED_A, 1_000_000_000)  # absurd batch; must not generate yet
    assert it is not None


def test_file_header_layout(tmp_path):
    recs = generate_records(SEED_A, 2)
    path = write_dataset(tmp_path / "d.bin", recs)
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    assert struct.unpack_from("<I", raw, 8)[0] == 1
    assert struct.unpack_from("<Q", raw, 12)[0] == 2
    assert len(raw) == 20 + 2 * 65
    assert read_dataset(path) == recs


def test_read_rejects_bad_magic(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"NOTMAGIC" + bytes(20))
    with pytest.raises(DatasetFormatError):
        read_dataset(p)


def test_read_reports_truncated_record_index(tmp_path):
    recs = generate_records(SEED_A, 3)
    path = write_dataset(tmp_path / "d.bin", recs)
    clipped = path.read_bytes()[:-10]
    path.write_bytes(clipped)
    with pytest.raises(DatasetFormatError) as err:
        read_dataset(path)
    assert err.value.record_index == 2


def test_write_rejects_malformed_record(tmp_path):
    with pytest.raises(DatasetFormatError) as err:
        write_dataset(tmp_path / "d.bin", [DatasetRecord(b"\x02" * 10, bytes(32))])
    assert err.value.record_index == 0


def test_csv_export_empty_and_single(tmp_path):
    empty = write_dataset(tmp_path / "empty.bin", [])
    csv_path = export_csv(empty, tmp_path / "empty.csv")
    assert csv_path.read_text() == "pub_hex,priv_hex\n"
    one = write_dataset(tmp_path / "one.bin", generate_records(SEED_A, 1))
    lines = export_csv(one, tmp_path / "one.csv").read_text().splitlines()
    assert len(lines) == 2


def test_csv_round_trip(tmp_path):
    recs = generate_records(SEED_A, 7)
    path = write_dataset(tmp_path / "d.bin", recs)
    csv_path = export_csv(path, tmp_path / "d.csv")
    assert import_csv(csv_path) == recs


def test_csv_import_rejects_bad_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n00,11\n")
    with pytest.raises(DatasetFormatError):
        import_csv(p)
