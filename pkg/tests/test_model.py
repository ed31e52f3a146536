import numpy as np
import pytest

from kgvae import (Graph, KernelSet, ModelConfig, GraphVae, Tensor,
                   ValidationError, backward, decode, encode, gcn_layer,
                   kernel_elbo_loss, load_checkpoint, permute, reparameterize,
                   sample_from_prior, save_checkpoint)
from kgvae import autodiff as ad
from kgvae.kernels import DegreeHistogramKernel, TransitionKernel
from kgvae.model import propagation_operator

TINY = ModelConfig(decoder="fc", preset="desk", latent_dim=3,
                   encoder_widths=(4,), fc_hidden=(8,))


def tiny_model(decoder="fc", n_max=6, seed=0):
    cfg = ModelConfig(decoder=decoder, preset="desk", latent_dim=3,
                      encoder_widths=(4,), fc_hidden=(8,), sbm_rank=4)
    return GraphVae(cfg, n_max=n_max, feature_dim=None, rng=np.random.default_rng(seed))


def test_gcn_layer_single_node():
    g = Graph.empty(1)
    h = Tensor([[2.0, -1.0]])
    w = Tensor([[1.0], [1.0]], requires_grad=True)
    out = gcn_layer(g, h, w, activation="relu")
    # normalization of A+I on one node is 1, so out = relu(H W) = relu(1)
    assert np.allclose(out.values, [[1.0]])


def test_propagation_operator_symmetric():
    rng = np.random.default_rng(0)
    adj = (rng.random((7, 7)) < 0.4).astype(int)
    g = Graph(adj)
    op = propagation_operator(g.adjacency)
    assert np.allclose(op, op.T, atol=1e-12)


def test_gcn_layer_gradient_matches_fd():
    rng = np.random.default_rng(1)
    g = Graph((rng.random((4, 4)) < 0.5).astype(int) * (1 - np.eye(4, dtype=int)))
    h = rng.uniform(-1, 1, (4, 3))
    w = rng.uniform(-1, 1, (3, 2))

    wt = Tensor(w, requires_grad=True)
    backward(ad.full_sum(ad.square(gcn_layer(g, Tensor(h), wt))))
    analytic = wt.grad
    step = 1e-5
    fd = np.zeros_like(w)
    for i in range(w.shape[0]):
        for j in range(w.shape[1]):
            up, dn = w.copy(), w.copy()
            up[i, j] += step
            dn[i, j] -= step
            f_up = ad.full_sum(ad.square(gcn_layer(g, Tensor(h), Tensor(up)))).item()
            f_dn = ad.full_sum(ad.square(gcn_layer(g, Tensor(h), Tensor(dn)))).item()
            fd[i, j] = (f_up - f_dn) / (2 * step)
    err = np.abs(analytic - fd) / np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), 1e-2)
    assert err.max() < 1e-4


def test_encode_zero_weights_gives_prior():
    model = tiny_model()
    for t in model.encoder.named_parameters().values():
        t.values = np.zeros_like(t.values)
    post = encode(model, Graph.complete(4))
    assert np.allclose(post.mu.values, 0.0)
    assert np.allclose(post.log_var.values, 0.0)


def test_encode_shapes_and_mask():
    model = tiny_model(n_max=6)
    post = encode(model, Graph.complete(4))
    assert post.mu.shape == (6, 3)
    assert post.log_var.shape == (6, 3)
    assert post.mask.tolist() == [True] * 4 + [False] * 2


def test_encode_padded_batch_returns_per_graph_posteriors():
    from kgvae import pad_batch
    model = tiny_model(n_max=6)
    batch = pad_batch([Graph.complete(3), Graph.empty(5)], n_max=6)
    posts = encode(model, batch)
    assert len(posts) == 2
    assert posts[0].mask.sum() == 3 and posts[1].mask.sum() == 5
    single = encode(model, Graph.complete(3))
    assert np.array_equal(posts[0].mu.values, single.mu.values)


def test_encode_equivariant_under_permutation():
    # same weights, permuted graph with consistently permuted identity features
    model = tiny_model(n_max=5)
    rng = np.random.default_rng(2)
    g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)], features=np.eye(5))
    perm = rng.permutation(5)
    g2 = permute(g, perm)
    post1 = encode(model, g)
    post2 = encode(model, g2)
    assert np.allclose(post2.mu.values, post1.mu.values[perm], atol=1e-10)
    assert np.allclose(post2.log_var.values, post1.log_var.values[perm], atol=1e-10)


def test_reparameterize_sigma_zero_limit():
    # log_var pinned at the clamp floor -10: sigma = e^-5, so z is nearly mu
    from kgvae.model import Posterior
    mu = np.random.default_rng(3).uniform(-1, 1, (4, 3))
    post = Posterior(mu=Tensor(mu), log_var=Tensor(np.full((4, 3), -10.0)),
                     mask=np.ones(4, bool))
    z = reparameterize(post, 3)
    assert np.abs(z.values - mu).max() < 0.05


def test_reparameterize_monte_carlo_mean():
    mu = np.array([[0.3, -0.7]])
    post_mu = Tensor(mu)
    from kgvae.model import Posterior
    post = Posterior(mu=post_mu, log_var=Tensor(np.zeros((1, 2))),
                     mask=np.array([True]))
    draws = np.stack([reparameterize(post, seed).values for seed in range(10_000)])
    assert np.abs(draws.mean(axis=0) - mu).max() < 3.0 / np.sqrt(10_000)


def test_reparameterize_gradient_to_mu():
    from kgvae.model import Posterior
    mu = Tensor(np.zeros((2, 3)), requires_grad=True)
    post = Posterior(mu=mu, log_var=Tensor(np.zeros((2, 3))), mask=np.ones(2, bool))
    backward(ad.full_sum(reparameterize(post, 0)))
    assert np.allclose(mu.grad, np.ones((2, 3)))


@pytest.mark.parametrize("decoder", ["fc", "dot", "sbm"])
def test_decode_probabilities_valid(decoder):
    model = tiny_model(decoder)
    rng = np.random.default_rng(4)
    z = Tensor(rng.standard_normal((6, 3)))
    pa = decode(model.decoder, z, 5).values
    assert pa.shape == (5, 5)
    assert np.allclose(pa, pa.T, atol=1e-12)
    assert np.all(np.diag(pa) == 0)
    off = pa[~np.eye(5, dtype=bool)]
    assert np.all((off > 0) & (off < 1))


@pytest.mark.parametrize("decoder", ["fc", "dot", "sbm"])
def test_decode_zero_parameters_give_half(decoder):
    model = tiny_model(decoder)
    for t in model.decoder.named_parameters().values():
        t.values = np.zeros_like(t.values)
    z = Tensor(np.random.default_rng(5).standard_normal((6, 3)))
    pa = decode(model.decoder, z, 6).values
    off = pa[~np.eye(6, dtype=bool)]
    assert np.allclose(off, 0.5)


def test_sbm_zero_bilinear_gives_half_even_with_transform():
    model = tiny_model("sbm")
    model.decoder.bilinear.values = np.zeros_like(model.decoder.bilinear.values)
    z = Tensor(np.random.default_rng(6).standard_normal((6, 3)))
    pa = decode(model.decoder, z, 6).values
    assert np.allclose(pa[~np.eye(6, dtype=bool)], 0.5)


def test_sample_from_prior_erdos_renyi_half():
    model = tiny_model("sbm", n_max=8)
    model.decoder.bilinear.values = np.zeros_like(model.decoder.bilinear.values)
    counts = [sample_from_prior(model, 8, seed).num_edges() for seed in range(600)]
    expected = 8 * 7 / 4  # n(n-1)/4 when every edge prob is one half
    assert abs(np.mean(counts) - expected) < 1.0


def test_sample_from_prior_deterministic():
    model = tiny_model("fc")
    assert sample_from_prior(model, 5, 42) == sample_from_prior(model, 5, 42)


def test_end_to_end_gradient_matches_fd():
    """d(kernel ELBO)/d(theta) vs central differences for every parameter."""
    rng = np.random.default_rng(7)
    g = Graph((rng.random((6, 6)) < 0.4).astype(int) * (1 - np.eye(6, dtype=int)))
    model = tiny_model("fc", n_max=6, seed=8)
    ks = KernelSet(((DegreeHistogramKernel(max_degree_bin=5), 0.01),
                    (TransitionKernel(steps=2), 0.05)))

    def loss_value():
        post = encode(model, g)
        z = reparameterize(post, 11)
        pa = decode(model.decoder, z, g.n)
        return kernel_elbo_loss(g, post, pa, ks, beta=2.0).total

    backward(loss_value())
    params = model.named_parameters()
    grads = {name: t.grad.copy() for name, t in params.items()}
    step = 1e-5
    worst = 0.0
    for name, t in params.items():
        base = t.values.copy()
        fd = np.zeros_like(base)
        it = np.nditer(base, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            t.values = base.copy()
            t.values[idx] += step
            up = loss_value().item()
            t.values = base.copy()
            t.values[idx] -= step
            dn = loss_value().item()
            fd[idx] = (up - dn) / (2 * step)
        t.values = base
        err = np.abs(grads[name] - fd) / np.maximum(
            np.maximum(np.abs(grads[name]), np.abs(fd)), 1e-2)
        worst = max(worst, float(err.max()))
    assert worst < 1e-3


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    model = tiny_model("sbm")
    path = str(tmp_path / "model.npz")
    save_checkpoint(model, path, extra={"train_node_counts": [4, 5, 6]})
    loaded, sidecar = load_checkpoint(path)
    for name, t in model.named_parameters().items():
        assert np.array_equal(t.values, loaded.named_parameters()[name].values)
    assert sidecar["decoder"] == "sbm"
    assert sidecar["n_max"] == 6
    assert sidecar["train_node_counts"] == [4, 5, 6]


def test_checkpoint_corrupt_raises(tmp_path):
    path = tmp_path / "broken.npz"
    path.write_bytes(b"not a checkpoint")
    (tmp_path / "broken.npz.json").write_text("{}")
    with pytest.raises((ValidationError, KeyError)):
        load_checkpoint(str(path))


def test_decode_rejects_bad_shapes():
    model = tiny_model("fc")
    with pytest.raises(ValidationError):
        decode(model.decoder, Tensor(np.zeros((3, 3))), 3)
    with pytest.raises(ValidationError):
        decode(model.decoder, Tensor(np.zeros((6, 3))), 7)
