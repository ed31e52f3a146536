"""Command-line driver: dataset creation, training, generation, evaluation,
and multi-arm experiments.

Exit codes: 0 success, 2 validation error, 3 numerical failure. Every
subcommand is deterministic given its flags; there are no environment
variable overrides.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .datasets import load_jsonl, make_corpus, save_jsonl, split
from .errors import NumericalError, ValidationError
from .experiment import run_experiment
from .metrics import (clustering_distribution, degree_distribution, evaluate)
from .model import ModelConfig
from .training import TrainConfig, generate, train


def _cmd_dataset_make(args) -> int:
    corpus = make_corpus(args.kind, args.count, preset=args.preset, seed=args.seed)
    save_jsonl(args.out, corpus)
    sizes = [g.n for g in corpus]
    avg_edges = float(np.mean([g.num_edges() for g in corpus]))
    print(f"wrote {len(corpus)} {args.kind} graphs to {args.out} "
          f"(|V| in [{min(sizes)}, {max(sizes)}], avg edges {avg_edges:.2f})")
    return 0


def _cmd_dataset_split(args) -> int:
    graphs = load_jsonl(args.data)
    train_set, test_set = split(graphs, args.train_frac, args.seed)
    save_jsonl(args.out_train, train_set)
    save_jsonl(args.out_test, test_set)
    print(f"split {len(graphs)} graphs into {len(train_set)} train / {len(test_set)} test")
    return 0


def _parse_kernels(spec: str) -> tuple:
    if spec == "none":
        return ()
    if spec.lstrip().startswith("["):
        entries = json.loads(spec)
    else:
        if not os.path.exists(spec):
            raise ValidationError(f"kernel config file not found: {spec}")
        with open(spec) as fh:
            entries = json.load(fh)
    if not isinstance(entries, list):
        raise ValidationError("kernel config must be a JSON list of entries")
    return tuple(entries)


def _cmd_train(args) -> int:
    if not os.path.exists(args.data):
        raise ValidationError(f"data file not found: {args.data}")
    graphs = load_jsonl(args.data)
    train_set, test_set = split(graphs, args.train_frac, args.split_seed)
    entries = _parse_kernels(args.kernels)
    if args.kernel_rescale != 1.0:
        entries = tuple({**e, "lambda": float(e["lambda"]) * args.kernel_rescale}
                        for e in entries)
    cfg = TrainConfig(
        epochs=args.epochs,
        lr=args.lr,
        beta=args.beta,
        batch_size=args.batch_size,
        seed=args.seed,
        model=ModelConfig(decoder=args.decoder, preset=args.preset,
                          latent_dim=args.latent_dim),
        kernels=entries,
        checkpoint_interval=args.checkpoint_interval,
    )
    log_path = args.log or (args.out + ".loss.csv")
    result = train(cfg, train_set, log_path=log_path, ckpt_path=args.out)
    final = result.log_rows[-1]
    print(f"trained {args.epochs} epochs on {len(train_set)} graphs "
          f"({len(test_set)} held out); final total loss {final['total']:.6f}")
    print(f"checkpoint: {args.out}  log: {log_path}")
    return 0


def _cmd_generate(args) -> int:
    samples = generate(args.ckpt, args.count, args.seed)
    save_jsonl(args.out, samples)
    print(f"wrote {len(samples)} sampled graphs to {args.out}")
    return 0


def _plot_histograms(generated, test, plot_dir) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(plot_dir, exist_ok=True)
    specs = [
        ("degree", degree_distribution, "degree"),
        ("clustering", clustering_distribution, "clustering coefficient bin"),
    ]
    for name, descriptor, xlabel in specs:
        hists_g = [descriptor(g) for g in generated]
        hists_t = [descriptor(g) for g in test]
        size = max(max(len(h) for h in hists_g), max(len(h) for h in hists_t))
        mean_g = np.mean([np.pad(h, (0, size - len(h))) for h in hists_g], axis=0)
        mean_t = np.mean([np.pad(h, (0, size - len(h))) for h in hists_t], axis=0)
        fig, ax = plt.subplots(figsize=(6, 4))
        xs = np.arange(size)
        ax.bar(xs - 0.2, mean_t, width=0.4, label="test")
        ax.bar(xs + 0.2, mean_g, width=0.4, label="generated")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("mean probability mass")
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(plot_dir, f"{name}_hist.svg"))
        plt.close(fig)


def _cmd_evaluate(args) -> int:
    for path in (args.generated, args.test):
        if not os.path.exists(path):
            raise ValidationError(f"file not found: {path}")
    generated = load_jsonl(args.generated)
    test = load_jsonl(args.test)
    report = evaluate(generated, test, sigma=args.sigma)
    out_json = args.out if args.out.endswith(".json") else args.out + ".json"
    out_csv = out_json[: -len(".json")] + ".csv"
    with open(out_json, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    with open(out_csv, "w") as fh:
        fh.write(report.CSV_HEADER + "\n" + report.csv_row() + "\n")
    if args.plot:
        _plot_histograms(generated, test, args.plot)
    print(report.CSV_HEADER)
    print(report.csv_row())
    print(f"report: {out_json}")
    return 0


def _cmd_experiment_run(args) -> int:
    if not os.path.exists(args.config):
        raise ValidationError(f"config file not found: {args.config}")
    with open(args.config) as fh:
        config = json.load(fh)
    out_dir = config.get("out_dir")
    if not out_dir:
        raise ValidationError("experiment config missing 'out_dir'")
    results = run_experiment(config, out_dir)
    print(f"{'arm':<14}{'seed':<6}{'deg':>10}{'clus':>10}{'orbit':>10}"
          f"{'sparsity':>12}{'gen edges':>11}{'test edges':>11}")
    for r in results:
        rep = r.report
        print(f"{r.arm:<14}{r.seed:<6}{rep.degree_mmd:>10.4f}{rep.clustering_mmd:>10.4f}"
              f"{rep.orbit_mmd:>10.4f}{rep.sparsity_mmd:>12.3e}"
              f"{rep.avg_edges_generated:>11.2f}{rep.avg_edges_test:>11.2f}")
    print(f"results under {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgvae",
                                     description="Kernel-regularized graph VAE toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    dataset = sub.add_parser("dataset", help="create or split graph corpora")
    dsub = dataset.add_subparsers(dest="dataset_command", required=True)
    make = dsub.add_parser("make", help="generate a synthetic corpus")
    make.add_argument("--kind", required=True, choices=("grid", "lobster"))
    make.add_argument("--count", type=int, required=True)
    make.add_argument("--preset", default="desk", choices=("paper", "desk"))
    make.add_argument("--seed", type=int, default=0)
    make.add_argument("--out", required=True)
    make.set_defaults(func=_cmd_dataset_make)
    dsplit = dsub.add_parser("split", help="split a JSONL corpus into train/test")
    dsplit.add_argument("--data", required=True)
    dsplit.add_argument("--train-frac", type=float, default=0.8)
    dsplit.add_argument("--seed", type=int, default=0)
    dsplit.add_argument("--out-train", required=True)
    dsplit.add_argument("--out-test", required=True)
    dsplit.set_defaults(func=_cmd_dataset_split)

    tr = sub.add_parser("train", help="train on the train split of a corpus")
    tr.add_argument("--data", required=True)
    tr.add_argument("--decoder", default="fc", choices=("fc", "dot", "sbm"))
    tr.add_argument("--kernels", default="none",
                    help="'none', a JSON file of kernel entries, or inline JSON")
    tr.add_argument("--kernel-rescale", type=float, default=1.0)
    tr.add_argument("--epochs", type=int, default=500)
    tr.add_argument("--lr", type=float, default=1e-4)
    tr.add_argument("--beta", type=float, default=20.0)
    tr.add_argument("--batch-size", type=int, default=8)
    tr.add_argument("--latent-dim", type=int, default=None)
    tr.add_argument("--preset", default="desk", choices=("paper", "desk"))
    tr.add_argument("--train-frac", type=float, default=0.8)
    tr.add_argument("--split-seed", type=int, default=0)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--checkpoint-interval", type=int, default=0)
    tr.add_argument("--log", default=None)
    tr.add_argument("--out", required=True)
    tr.set_defaults(func=_cmd_train)

    gen = sub.add_parser("generate", help="sample graphs from a checkpoint")
    gen.add_argument("--ckpt", required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    ev = sub.add_parser("evaluate", help="score generated graphs against a test set")
    ev.add_argument("--generated", required=True)
    ev.add_argument("--test", required=True)
    ev.add_argument("--out", required=True)
    ev.add_argument("--sigma", type=float, default=1.0)
    ev.add_argument("--plot", default=None, help="directory for SVG histogram plots")
    ev.set_defaults(func=_cmd_evaluate)

    exp = sub.add_parser("experiment", help="multi-arm comparison experiments")
    esub = exp.add_subparsers(dest="experiment_command", required=True)
    run = esub.add_parser("run", help="run every (seed, arm) combination of a config")
    run.add_argument("--config", required=True)
    run.set_defaults(func=_cmd_experiment_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
