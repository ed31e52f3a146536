"""Train two small graph VAEs on lobster trees: one with the plain
reconstruction-plus-KL objective, one with the kernel-regularized objective.

Takes a few minutes on one core. The kernel arm's prior samples end up closer
to the test graphs in density and degree structure (see demo 05 for the full
metric suite).
"""
import numpy as np

from kgvae import (ModelConfig, TrainConfig, evaluate, generate, make_corpus,
                   split, train)
from kgvae.experiment import default_kernel_entries

corpus = make_corpus("lobster", 50, preset="desk", seed=7)
train_set, test_set = split(corpus, train_frac=0.8, seed=11)
print(f"{len(train_set)} training graphs, {len(test_set)} held out; "
      f"sizes {min(g.n for g in corpus)}..{max(g.n for g in corpus)}")

# Published weights are tuned for an unnormalized likelihood; with the
# per-pair normalization used here they are rescaled by one shared factor.
rescale = 1.0 / 190.0
entries = tuple({**e, "lambda": e["lambda"] * rescale}
                for e in default_kernel_entries("lobster"))
model_cfg = ModelConfig(decoder="fc", preset="desk")

for name, kernels in (("plain", ()), ("kernel", entries)):
    cfg = TrainConfig(epochs=500, lr=1e-4, beta=20.0, batch_size=8, seed=1,
                      model=model_cfg, kernels=kernels)
    result = train(cfg, train_set)
    rows = result.log_rows
    print(f"\n{name} objective:")
    for row in rows[:: len(rows) // 4]:
        print(f"  epoch {row['epoch']:4d}  recon {row['recon_nll']:.4f}  "
              f"kl {row['kl']:.2e}  kernel {row['kernel_penalty']:.4f}")
    samples = generate((result.model, result.node_counts), len(test_set), seed=5)
    rep = evaluate(samples, test_set)
    print(f"  prior samples: avg edges {rep.avg_edges_generated:.1f} "
          f"(test {rep.avg_edges_test:.1f}), degree MMD {rep.degree_mmd:.3f}, "
          f"sparsity MMD {rep.sparsity_mmd:.2e}")
