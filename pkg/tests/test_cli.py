"""CLI contract: exit codes, flag/config precedence, manifests, reruns."""

from oracles import P256_G_COMPRESSED

from ecclab.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from ecclab.experiments import read_metrics_csv
from ecclab.manifest import load_kv_file, split_meta

SEED_HEX = "11" * 32

TINY_TRAIN = """
kind = memorize
stop_train_accuracy = 0.999
max_epochs = 2
model.hidden_size = 16
model.num_layers = 1
model.num_heads = 2
model.ffn_mult = 2
model.seed = 4
model.dtype = float32
train.learning_rate = 0.001
train.beta1 = 0.0
train.beta2 = 0.99
train.epsilon = 1e-08
train.weight_decay = 0.0
train.batch_size = 16
train.epochs = 2
train.scheduler = none
train.seed = 5
train.bias_correction = false
data.seed_hex = {seed}
data.mode = random_stream
data.train_count = 32
data.eval_count = 16
""".format(seed=SEED_HEX)


def _strip_wall(path):
    return [",".join(l.split(",")[:-1]) for l in path.read_text().splitlines()]


def test_keygen_base_point(capsys):
    assert main(["keygen", "--scalar", "1", "--curve", "p256"]) == EXIT_OK
    out = capsys.readouterr().out
    assert P256_G_COMPRESSED.hex() in out
    assert "mults=" in out and "inversions=1" in out


def test_keygen_rejects_out_of_range(capsys):
    assert main(["keygen", "--scalar", "0"]) == EXIT_USAGE
    assert main(["keygen", "--scalar", "-5"]) == EXIT_USAGE


def test_keygen_seed_deterministic(capsys):
    assert main(["keygen", "--seed", SEED_HEX]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["keygen", "--seed", SEED_HEX]) == EXIT_OK
    assert capsys.readouterr().out == first


def test_keygen_toy_curve(capsys):
    assert main(["keygen", "--scalar", "5", "--curve", "toy"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "curve: toy347" in out


def test_keygen_bad_seed(capsys):
    assert main(["keygen", "--seed", "zz"]) == EXIT_USAGE
    assert main(["keygen", "--seed", "11" * 16]) == EXIT_USAGE


def test_usage_errors_exit_3(capsys):
    assert main(["keygen"]) == EXIT_USAGE          # missing required group
    assert main(["keygen", "--scalar", "1", "--bogus"]) == EXIT_USAGE
    assert main(["dataset", "--out", "/tmp/x", "--mode", "nonsense"]) == EXIT_USAGE


def test_dataset_generation_and_manifest(tmp_path, capsys):
    out = tmp_path / "ds"
    rc = main(["dataset", "--seed", SEED_HEX, "--train-count", "5",
               "--eval-count", "2", "--out", str(out)])
    assert rc == EXIT_OK
    assert (out / "train.bin").exists() and (out / "eval.bin").exists()
    flat = load_kv_file(out / "manifest.txt")
    cfg, meta = split_meta(flat)
    assert meta["run_subcommand"] == "dataset"
    assert meta["run_version"]
    assert cfg["train_count"] == "5"
    # rerun reproduces bytes
    out2 = tmp_path / "ds2"
    assert main(["dataset", "--config", str(out / "manifest.txt"), "--out", str(out2)]) == EXIT_OK
    assert (out / "train.bin").read_bytes() == (out2 / "train.bin").read_bytes()
    assert (out / "eval.bin").read_bytes() == (out2 / "eval.bin").read_bytes()


def test_dataset_csv_flag(tmp_path):
    out = tmp_path / "ds"
    rc = main(["dataset", "--seed", SEED_HEX, "--train-count", "2",
               "--eval-count", "1", "--csv", "--out", str(out)])
    assert rc == EXIT_OK
    assert (out / "train.csv").exists() and (out / "eval.csv").exists()


def test_dataset_flag_overrides_config(tmp_path):
    cfg_file = tmp_path / "cfg.txt"
    cfg_file.write_text(f"seed_hex = {SEED_HEX}\ntrain_count = 3\neval_count = 1\n")
    out = tmp_path / "ds"
    rc = main(["dataset", "--config", str(cfg_file), "--train-count", "5",
               "--out", str(out)])
    assert rc == EXIT_OK
    cfg, _ = split_meta(load_kv_file(out / "manifest.txt"))
    assert cfg["train_count"] == "5"  # the flag won and the manifest records it


def test_dataset_unknown_key_named(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.txt"
    cfg_file.write_text(f"seed_hex = {SEED_HEX}\nrecord_count = 5\n")
    rc = main(["dataset", "--config", str(cfg_file), "--out", str(tmp_path / "o")])
    assert rc == EXIT_USAGE
    assert "record_count" in capsys.readouterr().err


def test_dataset_requires_seed(tmp_path, capsys):
    assert main(["dataset", "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_train_from_config_and_manifest_rerun(tmp_path, capsys):
    cfg_file = tmp_path / "train.cfg"
    cfg_file.write_text(TINY_TRAIN)
    out1 = tmp_path / "run1"
    assert main(["train", "--config", str(cfg_file), "--out", str(out1)]) == EXIT_OK
    rows = read_metrics_csv(out1 / "metrics.csv")
    assert rows[0].epoch == 0 and rows[-1].epoch == 2
    assert (out1 / "checkpoint.bin").exists()
    # rerun from the emitted manifest reproduces everything but wall seconds
    out2 = tmp_path / "run2"
    assert main(["train", "--config", str(out1 / "manifest.txt"), "--out", str(out2)]) == EXIT_OK
    assert _strip_wall(out1 / "metrics.csv") == _strip_wall(out2 / "metrics.csv")
    assert (out1 / "checkpoint.bin").read_bytes() == (out2 / "checkpoint.bin").read_bytes()


def test_train_set_overrides(tmp_path):
    cfg_file = tmp_path / "train.cfg"
    cfg_file.write_text(TINY_TRAIN)
    out = tmp_path / "run"
    rc = main(["train", "--config", str(cfg_file), "--set", "max_epochs=1",
               "--out", str(out)])
    assert rc == EXIT_OK
    rows = read_metrics_csv(out / "metrics.csv")
    assert rows[-1].epoch == 1
    cfg, _ = split_meta(load_kv_file(out / "manifest.txt"))
    assert cfg["max_epochs"] == "1"


def test_train_unknown_set_key(tmp_path, capsys):
    cfg_file = tmp_path / "train.cfg"
    cfg_file.write_text(TINY_TRAIN)
    rc = main(["train", "--config", str(cfg_file), "--set", "model.width=9",
               "--out", str(tmp_path / "o")])
    assert rc == EXIT_USAGE
    assert "model.width" in capsys.readouterr().err


def test_train_requires_preset_or_config(tmp_path, capsys):
    assert main(["train", "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_paper_scale_refuses_without_acknowledgment(tmp_path, capsys):
    rc = main(["train", "--preset", "paper-scale", "--out", str(tmp_path / "o")])
    assert rc == EXIT_USAGE
    assert "cluster" in capsys.readouterr().err


def test_costmodel_tables_stdout(capsys):
    assert main(["costmodel", "tables", "--mode", "paper"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "table2_keypair_cost" in out and "table7_breakpoints" in out
    assert "DIFFERS" not in out
    assert main(["cost-model", "tables", "--mode", "exact"]) == EXIT_OK
    assert "DIFFERS" in capsys.readouterr().out


def test_costmodel_tables_csv(tmp_path, capsys):
    out = tmp_path / "tables"
    assert main(["costmodel", "tables", "--mode", "paper", "--csv", str(out)]) == EXIT_OK
    files = sorted(p.name for p in out.iterdir())
    assert "manifest.txt" in files
    assert sum(n.endswith(".csv") for n in files) == 7


def test_costmodel_attack(capsys):
    rc = main(["costmodel", "attack", "--memorized", "1e18",
               "--population", "7.3e7"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "victim probability" in out
    rc = main(["costmodel", "attack", "--memorized", "1e18",
               "--population", "7.3e7", "--keyspace", "paper"])
    assert rc == EXIT_OK


def test_costmodel_attack_invalid_scenario(capsys):
    rc = main(["costmodel", "attack", "--memorized", "1e90",
               "--population", "10"])  # exceeds the keyspace
    assert rc == EXIT_USAGE


def test_numeric_abort_exits_2(tmp_path, capsys, monkeypatch):
    from ecclab import experiments
    from ecclab.nn import NumericError

    def blow_up(cfg, out_dir):
        raise NumericError("synthetic blowup")

    monkeypatch.setattr(experiments, "run_memorization", blow_up)
    cfg_file = tmp_path / "train.cfg"
    cfg_file.write_text(TINY_TRAIN)
    out = tmp_path / "run"
    rc = main(["train", "--config", str(cfg_file), "--out", str(out)])
    assert rc == EXIT_NUMERIC
    assert "numeric abort" in capsys.readouterr().err
    assert (out / "manifest.txt").exists()  # manifest still written
