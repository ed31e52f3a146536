"""Encoder-decoder graph VAE: GCN posterior, reparameterized latents, and
three decoder variants mapping latents to a probabilistic adjacency.

Every decoder output passes through the same post-processing: symmetrize the
raw score matrix by averaging with its transpose, squash with a sigmoid, zero
the diagonal, and crop to the active node block.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ValidationError
from .graphs import Graph, PaddedBatch, ProbAdjacency, sample_adjacency

LOG_VAR_CLAMP = 10.0

# Layer widths per preset: paper-scale sizes and a small desk-scale default.
PRESETS = {
    "desk": {"encoder": (32, 32, 16), "latent": 8, "fc_hidden": (64, 64), "sbm_rank": 16},
    "paper": {"encoder": (128, 128, 256), "latent": 256, "fc_hidden": (512, 512, 512), "sbm_rank": 256},
}


@dataclass(frozen=True)
class ModelConfig:
    decoder: str = "fc"  # fc | dot | sbm
    preset: str = "desk"
    latent_dim: int | None = None  # defaults to the preset latent width
    encoder_widths: tuple | None = None
    fc_hidden: tuple | None = None
    sbm_rank: int | None = None

    def __post_init__(self):
        if self.decoder not in ("fc", "dot", "sbm"):
            raise ValidationError(f"unknown decoder {self.decoder!r}")
        if self.preset not in PRESETS:
            raise ValidationError(f"unknown preset {self.preset!r}")

    def resolved(self) -> dict:
        base = PRESETS[self.preset]
        return {
            "encoder": tuple(self.encoder_widths or base["encoder"]),
            "latent": int(self.latent_dim or base["latent"]),
            "fc_hidden": tuple(self.fc_hidden or base["fc_hidden"]),
            "sbm_rank": int(self.sbm_rank or base["sbm_rank"]),
        }


@dataclass
class Posterior:
    """Per-node diagonal Gaussian: mu and log-variance, plus the node mask."""

    mu: Tensor
    log_var: Tensor
    mask: np.ndarray


def glorot(rng, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def propagation_operator(adjacency) -> np.ndarray:
    """Symmetric-normalized operator D^-1/2 (A+I) D^-1/2 of a padded adjacency."""
    a_hat = np.asarray(adjacency, dtype=np.float64) + np.eye(len(adjacency))
    d_inv_sqrt = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return a_hat * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]


def gcn_layer(a, h: Tensor, w: Tensor, activation: str = "relu") -> Tensor:
    """One graph-convolution round: act(D^-1/2 (A+I) D^-1/2 . H . W).

    `a` may be a Graph, a padded adjacency array, or a precomputed operator
    tensor (constant); H and W are taped tensors.
    """
    if isinstance(a, Tensor):
        op = a
    elif isinstance(a, Graph):
        op = Tensor(propagation_operator(a.adjacency))
    else:
        op = Tensor(propagation_operator(a))
    out = ad.matmul(ad.matmul(op, h), w)
    if activation == "relu":
        return ad.relu(out)
    if activation == "identity":
        return out
    raise ValidationError(f"unknown activation {activation!r}")


class GcnEncoder:
    """Multi-layer GCN with two linear heads producing mu and log sigma^2."""

    def __init__(self, feature_dim: int, hidden, latent_dim: int, rng):
        self.feature_dim = feature_dim
        self.latent_dim = latent_dim
        widths = [feature_dim, *hidden]
        self.weights = [ad.parameter(glorot(rng, widths[i], widths[i + 1]))
                        for i in range(len(widths) - 1)]
        self.w_mu = ad.parameter(glorot(rng, widths[-1], latent_dim))
        self.w_log_var = ad.parameter(glorot(rng, widths[-1], latent_dim))

    def named_parameters(self) -> dict:
        params = {f"encoder.w{i}": w for i, w in enumerate(self.weights)}
        params["encoder.w_mu"] = self.w_mu
        params["encoder.w_log_var"] = self.w_log_var
        return params

    def forward(self, op: Tensor, features: Tensor) -> Posterior:
        h = features
        for w in self.weights:
            h = gcn_layer(op, h, w, activation="relu")
        mu = gcn_layer(op, h, self.w_mu, activation="identity")
        log_var = ad.clamp(gcn_layer(op, h, self.w_log_var, activation="identity"),
                           -LOG_VAR_CLAMP, LOG_VAR_CLAMP)
        return mu, log_var


class FcDecoder:
    """Fully-connected stack mapping the flattened latents to n_max^2 scores."""

    kind = "fc"

    def __init__(self, n_max: int, latent_dim: int, hidden, rng):
        self.n_max = n_max
        self.latent_dim = latent_dim
        widths = [n_max * latent_dim, *hidden, n_max * n_max]
        self.weights = []
        self.biases = []
        for i in range(len(widths) - 1):
            self.weights.append(ad.parameter(glorot(rng, widths[i], widths[i + 1])))
            self.biases.append(ad.parameter(np.zeros(widths[i + 1])))

    def named_parameters(self) -> dict:
        params = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            params[f"decoder.w{i}"] = w
            params[f"decoder.b{i}"] = b
        return params

    def scores(self, z: Tensor) -> Tensor:
        h = ad.reshape(z, (1, self.n_max * self.latent_dim))
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = ad.add_bias(ad.matmul(h, w), b)
            if i < last:
                h = ad.relu(h)
        return ad.reshape(h, (self.n_max, self.n_max))


class DotProductDecoder:
    """One GCN-style message-passing round on the latent similarity structure,
    then pairwise dot products of the transformed representations."""

    kind = "dot"

    def __init__(self, n_max: int, latent_dim: int, rng):
        self.n_max = n_max
        self.latent_dim = latent_dim
        self.w = ad.parameter(glorot(rng, latent_dim, latent_dim))

    def named_parameters(self) -> dict:
        return {"decoder.w": self.w}

    def scores(self, z: Tensor) -> Tensor:
        n = self.n_max
        sim = ad.add(ad.sigmoid(ad.matmul(z, ad.transpose(z))), Tensor(np.eye(n)))
        d_inv_sqrt = ad.exp(ad.scalar_mul(ad.log(ad.row_sum(sim)), -0.5))
        left = ad.matmul(ad.reshape(d_inv_sqrt, (n, 1)), Tensor(np.ones((1, n))))
        right = ad.transpose(left)
        op = ad.mul(ad.mul(sim, left), right)
        z_star = ad.relu(ad.matmul(ad.matmul(op, z), self.w))
        return ad.matmul(z_star, ad.transpose(z_star))


class SbmDecoder:
    """Block-model decoder: transform latents with one dense ReLU layer, then
    score node pairs with a learnable bilinear form."""

    kind = "sbm"

    def __init__(self, n_max: int, latent_dim: int, rank: int, rng):
        self.n_max = n_max
        self.latent_dim = latent_dim
        self.rank = rank
        self.w = ad.parameter(glorot(rng, latent_dim, rank))
        self.b = ad.parameter(np.zeros(rank))
        self.bilinear = ad.parameter(0.01 * rng.standard_normal((rank, rank)))

    def named_parameters(self) -> dict:
        return {"decoder.w": self.w, "decoder.b": self.b, "decoder.bilinear": self.bilinear}

    def scores(self, z: Tensor) -> Tensor:
        z_star = ad.relu(ad.add_bias(ad.matmul(z, self.w), self.b))
        return ad.matmul(ad.matmul(z_star, self.bilinear), ad.transpose(z_star))


def decode(decoder, z: Tensor, n: int) -> Tensor:
    """Map latents to the active n x n block of edge probabilities."""
    n_max = decoder.n_max
    if z.shape != (n_max, decoder.latent_dim):
        raise ValidationError(f"latents must have shape {(n_max, decoder.latent_dim)}, got {z.shape}")
    if not (1 <= n <= n_max):
        raise ValidationError(f"active node count {n} outside 1..{n_max}")
    raw = decoder.scores(z)
    sym = ad.scalar_mul(ad.add(raw, ad.transpose(raw)), 0.5)
    probs = ad.mul(ad.sigmoid(sym), Tensor(1.0 - np.eye(n_max)))
    if n == n_max:
        return probs
    block = np.zeros((n_max, n_max), dtype=bool)
    block[:n, :n] = True
    return ad.reshape(ad.masked_select(probs, block), (n, n))


def reparameterize(post: Posterior, seed) -> Tensor:
    """z = mu + exp(log_var / 2) * eps with eps ~ N(0, I); deterministic given seed."""
    rng = np.random.default_rng(seed)
    eps = Tensor(rng.standard_normal(post.mu.shape))
    return ad.add(post.mu, ad.mul(ad.exp(ad.scalar_mul(post.log_var, 0.5)), eps))


class GraphVae:
    """Encoder plus one decoder, sized for graphs of up to n_max nodes."""

    def __init__(self, config: ModelConfig, n_max: int, feature_dim: int | None, rng):
        dims = config.resolved()
        self.config = config
        self.n_max = n_max
        self.latent_dim = dims["latent"]
        self.feature_dim = feature_dim if feature_dim is not None else n_max
        self.encoder = GcnEncoder(self.feature_dim, dims["encoder"], self.latent_dim, rng)
        if config.decoder == "fc":
            self.decoder = FcDecoder(n_max, self.latent_dim, dims["fc_hidden"], rng)
        elif config.decoder == "dot":
            self.decoder = DotProductDecoder(n_max, self.latent_dim, rng)
        else:
            self.decoder = SbmDecoder(n_max, self.latent_dim, dims["sbm_rank"], rng)

    def named_parameters(self) -> dict:
        params = dict(self.encoder.named_parameters())
        params.update(self.decoder.named_parameters())
        return params

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    def padded_inputs(self, g: Graph) -> tuple[Tensor, Tensor, np.ndarray]:
        """Constant propagation operator, feature matrix, and mask for one graph."""
        if g.n > self.n_max:
            raise ValidationError(f"graph with {g.n} nodes exceeds n_max={self.n_max}")
        padded = np.zeros((self.n_max, self.n_max))
        padded[: g.n, : g.n] = g.adjacency
        op = Tensor(propagation_operator(padded))
        if g.features is None:
            features = np.eye(self.n_max, self.feature_dim)
        else:
            features = np.zeros((self.n_max, self.feature_dim))
            features[: g.n] = g.features
        mask = np.zeros(self.n_max, dtype=bool)
        mask[: g.n] = True
        return op, Tensor(features), mask


def encode(model: GraphVae, g):
    """Posterior for a single Graph, or a list of posteriors for a PaddedBatch."""
    if isinstance(g, PaddedBatch):
        return [encode(model, graph) for graph in g.graphs]
    op, features, mask = model.padded_inputs(g)
    mu, log_var = model.encoder.forward(op, features)
    return Posterior(mu=mu, log_var=log_var, mask=mask)


def sample_from_prior(model: GraphVae, n: int, seed) -> Graph:
    """Decode a standard-normal latent draw and sample a binary graph from it."""
    rng = np.random.default_rng(seed)
    z = Tensor(rng.standard_normal((model.n_max, model.latent_dim)))
    pa = ProbAdjacency(decode(model.decoder, z, n).values)
    return sample_adjacency(pa, rng)


def save_checkpoint(model: GraphVae, path, extra: dict | None = None) -> None:
    """Write parameters as an .npz map plus a JSON sidecar at path + '.json'.

    The npz round-trips float64 arrays bit-exactly; the sidecar records the
    architecture (decoder kind, preset, widths, latent dim, n_max, feature
    dim) and any extra metadata such as the kernel-set config.
    """
    path = str(path)
    arrays = {name: t.values for name, t in model.named_parameters().items()}
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    sidecar = {
        "decoder": model.config.decoder,
        "preset": model.config.preset,
        "latent_dim": model.latent_dim,
        "encoder_widths": list(model.config.resolved()["encoder"]),
        "fc_hidden": list(model.config.resolved()["fc_hidden"]),
        "sbm_rank": model.config.resolved()["sbm_rank"],
        "n_max": model.n_max,
        "feature_dim": model.feature_dim,
    }
    sidecar.update(extra or {})
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def load_checkpoint(path) -> tuple[GraphVae, dict]:
    path = str(path)
    try:
        with open(path + ".json") as fh:
            sidecar = json.load(fh)
        data = np.load(path)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise ValidationError(f"cannot load checkpoint {path}: {exc}") from exc
    config = ModelConfig(
        decoder=sidecar["decoder"],
        preset=sidecar["preset"],
        latent_dim=sidecar["latent_dim"],
        encoder_widths=tuple(sidecar["encoder_widths"]),
        fc_hidden=tuple(sidecar["fc_hidden"]),
        sbm_rank=sidecar["sbm_rank"],
    )
    model = GraphVae(config, sidecar["n_max"], sidecar["feature_dim"],
                     np.random.default_rng(0))
    params = model.named_parameters()
    if set(params) != set(data.files):
        raise ValidationError(
            f"checkpoint {path} does not match the architecture in its sidecar"
        )
    for name, tensor in params.items():
        stored = data[name]
        if stored.shape != tensor.values.shape:
            raise ValidationError(f"parameter {name} has shape {stored.shape}, "
                                  f"expected {tensor.values.shape}")
        tensor.values = stored.astype(np.float64)
    return model, sidecar
