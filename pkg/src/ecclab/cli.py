"""Command-line entry point: keygen, dataset, train, costmodel.

Exit codes are a stable contract: 0 success, 2 numeric abort during
training, 3 usage/config error. Subcommands that write files also write a
`manifest.txt` next to them recording the fully resolved configuration;
feeding a manifest back through --config reproduces the run byte-for-byte
(timestamps and wall-clock columns aside). All state is explicit — no
environment variables are consulted.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, costmodel, experiments, keystream, manifest
from .curve import CURVES, ScalarRangeError, derive_public, encode_compressed
from .keystream import SeedSpec, SplitSpec
from .nn import NumericError
from .presets import PRESETS

EXIT_OK = 0
EXIT_NUMERIC = 2
EXIT_USAGE = 3


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are exit code 3, not argparse's 2
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ecclab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ecclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    kg = sub.add_parser("keygen", help="derive one keypair and print its op tallies")
    kg.add_argument("--curve", choices=sorted(CURVES), default="p256")
    group = kg.add_mutually_exclusive_group(required=True)
    group.add_argument("--scalar", help="private scalar (decimal or 0x hex)")
    group.add_argument("--seed", help="32-byte hex seed for deterministic sampling")

    ds = sub.add_parser("dataset", help="generate a fixed train/eval keypair dataset")
    ds.add_argument("--config", help="flat key=value config file (flags override)")
    ds.add_argument("--seed", help="32-byte hex seed")
    ds.add_argument("--mode", choices=keystream.MODES)
    ds.add_argument("--train-count", type=int)
    ds.add_argument("--eval-count", type=int)
    ds.add_argument("--curve", choices=sorted(CURVES))
    ds.add_argument("--csv", action="store_true", help="also export CSVs")
    ds.add_argument("--out", required=True, help="output directory")

    tr = sub.add_parser("train", help="run an experiment preset")
    tr.add_argument("--preset", choices=sorted(PRESETS))
    tr.add_argument("--config", help="flat key=value config file or prior manifest")
    tr.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override one config key (repeatable; beats --config)")
    tr.add_argument("--out", required=True, help="output directory")
    tr.add_argument("--i-have-a-cluster", action="store_true",
                    help="acknowledge that a paper-scale run needs cluster hardware")

    cm = sub.add_parser("costmodel", aliases=["cost-model"],
                        help="summary tables and attack odds")
    cm_sub = cm.add_subparsers(dest="cm_command", required=True)
    tb = cm_sub.add_parser("tables", help="print the six summary tables")
    tb.add_argument("--mode", choices=("paper", "exact"), default="paper")
    tb.add_argument("--csv", metavar="DIR", help="also write one CSV per table")
    at = cm_sub.add_parser("attack", help="victim odds for a memorization scenario")
    at.add_argument("--memorized", type=float, required=True)
    at.add_argument("--population", type=float, required=True)
    at.add_argument("--keyspace", choices=("exact", "paper"), default="exact")
    at.add_argument("--probability", type=float, default=0.5)
    return parser


def _parse_scalar(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise CliError(f"invalid scalar {text!r}") from None


def _parse_seed_hex(text: str) -> bytes:
    try:
        seed = bytes.fromhex(text)
    except ValueError:
        raise CliError(f"seed is not hex: {text!r}") from None
    if len(seed) != 32:
        raise CliError(f"seed must be 32 bytes (64 hex chars), got {len(seed)}")
    return seed


def _cmd_keygen(args) -> int:
    params = CURVES[args.curve]
    if args.scalar is not None:
        d = _parse_scalar(args.scalar)
    else:
        seed = SeedSpec(_parse_seed_hex(args.seed), "random_stream")
        d = keystream.scalar_for_index(seed, 0, params.order)
    pair = derive_public(d, params)
    counts = pair.counts
    print(f"curve: {params.name}")
    print(f"private: {d.to_bytes(32, 'big').hex()}")
    print(f"public: {encode_compressed(pair.Q).hex()}")
    print(
        f"field ops: mults={counts.mults} squarings={counts.squarings} "
        f"additions={counts.additions} inversions={counts.inversions}"
    )
    return EXIT_OK


def _merge_config(file_cfg: dict[str, str], overrides: dict[str, str]) -> dict[str, str]:
    merged = dict(file_cfg)
    merged.update(overrides)
    return merged


_DATASET_KEYS = ("curve", "seed_hex", "mode", "train_count", "eval_count", "csv")


def _cmd_dataset(args) -> int:
    started = manifest.timestamp()
    cfg: dict[str, str] = {
        "curve": "p256", "mode": "random_stream",
        "train_count": "512", "eval_count": "128", "csv": "false",
    }
    if args.config:
        file_cfg, _meta = manifest.split_meta(manifest.load_kv_file(args.config))
        for key in file_cfg:
            if key not in _DATASET_KEYS:
                raise manifest.UnknownKeyError(key)
        cfg.update(file_cfg)
    for flag, key in (
        (args.curve, "curve"), (args.mode, "mode"),
        (args.train_count, "train_count"), (args.eval_count, "eval_count"),
    ):
        if flag is not None:
            cfg[key] = str(flag)
    if args.seed is not None:
        cfg["seed_hex"] = args.seed
    if args.csv:
        cfg["csv"] = "true"
    if "seed_hex" not in cfg:
        raise CliError("a 32-byte hex --seed (or seed_hex config key) is required")

    seed = SeedSpec(_parse_seed_hex(cfg["seed_hex"]), cfg["mode"])
    split = SplitSpec(int(cfg["train_count"]), int(cfg["eval_count"]))
    out_dir = Path(args.out)
    train_path, eval_path = keystream.generate_fixed_dataset(
        seed, split, CURVES[cfg["curve"]], out_dir
    )
    artifacts = [train_path.name, eval_path.name]
    if cfg["csv"] == "true":
        for p in (train_path, eval_path):
            artifacts.append(keystream.export_csv(p, p.with_suffix(".csv")).name)
    manifest.write_manifest(out_dir / "manifest.txt", "dataset", cfg, artifacts, started)
    print(f"wrote {split.train_count} train / {split.eval_count} eval records to {out_dir}")
    return EXIT_OK


def _cmd_train(args) -> int:
    started = manifest.timestamp()
    flat: dict[str, str] = {}
    preset_name = args.preset
    if args.config:
        file_cfg, _meta = manifest.split_meta(manifest.load_kv_file(args.config))
        preset_name = preset_name or file_cfg.pop("preset", None)
        file_cfg.pop("preset", None)
        flat.update(file_cfg)
    base: dict[str, str] = {}
    requires_cluster = False
    if preset_name:
        if preset_name not in PRESETS:
            raise CliError(f"unknown preset {preset_name!r}")
        preset = PRESETS[preset_name]
        base = manifest.experiment_to_flat(preset.kind, preset.config)
        requires_cluster = preset.requires_cluster
    flat = _merge_config(base, flat)
    for item in args.set:
        if "=" not in item:
            raise CliError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        flat[key.strip()] = value.strip()
    if not flat:
        raise CliError("provide --preset or --config")
    if requires_cluster and not args.i_have_a_cluster:
        raise CliError(
            f"preset {preset_name!r} is not desk-runnable; "
            "pass --i-have-a-cluster to proceed anyway"
        )

    kind, cfg = manifest.experiment_from_flat(flat)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = manifest.experiment_to_flat(kind, cfg)
    if preset_name:
        resolved = {"preset": preset_name, **resolved}
    artifacts: list[str] = []
    try:
        if kind == "memorize":
            art = experiments.run_memorization(cfg, out_dir)
            artifacts = [art.metrics_csv.name, art.checkpoint.name]
        elif kind == "stream":
            art = experiments.run_stream(cfg, out_dir)
            artifacts = [art.metrics_csv.name]
        else:
            results, summary = experiments.run_momentum_ablation(cfg, out_dir)
            artifacts = [a.metrics_csv.name for a in results.values()] + [summary.name]
    except NumericError as exc:
        manifest.write_manifest(out_dir / "manifest.txt", "train", resolved,
                                artifacts, started)
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest.write_manifest(out_dir / "manifest.txt", "train", resolved, artifacts, started)
    print(f"run complete; artifacts in {out_dir}: {', '.join(artifacts)}")
    return EXIT_OK


def _cmd_costmodel(args) -> int:
    if args.cm_command == "tables":
        print(costmodel.render_tables(args.mode))
        if args.csv:
            started = manifest.timestamp()
            paths = costmodel.write_tables_csv(args.csv, args.mode)
            manifest.write_manifest(
                Path(args.csv) / "manifest.txt", "costmodel",
                {"mode": args.mode}, [p.name for p in paths], started,
            )
        return EXIT_OK
    keyspace = (
        costmodel.KEYSPACE_PAPER if args.keyspace == "paper" else costmodel.KEYSPACE_FLOAT
    )
    try:
        scenario = costmodel.AttackScenario(
            memorized_keys=args.memorized,
            population=args.population,
            keyspace=keyspace,
            target_probability=args.probability,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    hit = costmodel.victim_probability(scenario)
    pop = costmodel.victim_population(scenario)
    pop_corrected = costmodel.victim_population(scenario, corrected=True)
    print(f"memorized keys: {args.memorized:g}")
    print(f"keyspace: {keyspace:g} ({args.keyspace})")
    print(f"population: {args.population:g}")
    print(f"victim probability: {hit:.6g}")
    print(f"population for p={args.probability:g} (published formula): {pop:.6g}")
    print(f"population for p={args.probability:g} (corrected formula): {pop_corrected:.6g}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "keygen":
            return _cmd_keygen(args)
        if args.command == "dataset":
            return _cmd_dataset(args)
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_costmodel(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (manifest.UnknownKeyError, ScalarRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
