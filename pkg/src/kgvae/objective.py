"""Loss functions: Bernoulli link reconstruction, Gaussian KL, the kernel
regularizer hookup, and an exact-enumeration verifier for the joint
adjacency-plus-feature reconstruction bound.

Conventions: the link likelihood runs over unordered node pairs i < j, the
reconstruction term is normalized by the number of pairs, and the KL term by
the number of active nodes, so that beta and the kernel weights transfer
across graph sizes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ContractError, ShapeError
from .graphs import Graph
from .kernels import (DegreeHistogramKernel, KernelSet, PreparedRegularizer,
                      d_squared, soft_histogram)
from .model import Posterior, SbmDecoder, decode

LIKELIHOOD_EPS = 1e-7


@dataclass
class LossBreakdown:
    """Scalar loss tensors; total = recon_nll + beta * kl + kernel_penalty."""

    recon_nll: Tensor
    kl: Tensor
    kernel_penalty: Tensor
    total: Tensor
    beta: float

    def floats(self) -> dict:
        return {
            "recon_nll": self.recon_nll.item(),
            "kl": self.kl.item(),
            "kernel_penalty": self.kernel_penalty.item(),
            "total": self.total.item(),
        }


def bernoulli_nll(a: Graph, pa: Tensor) -> Tensor:
    """Mean negative log-likelihood of the observed edges over pairs i < j.

    Probabilities are clamped into [1e-7, 1 - 1e-7] before the logs.
    """
    n = a.n
    if pa.shape != (n, n):
        raise ShapeError(f"reconstruction shape {pa.shape} does not match graph n={n}")
    p = ad.clamp(pa, LIKELIHOOD_EPS, 1.0 - LIKELIHOOD_EPS)
    adj = a.adjacency.astype(np.float64)
    pos = Tensor(adj)
    neg = Tensor(1.0 - adj)
    ones = Tensor(np.ones((n, n)))
    log_lik = ad.add(ad.mul(pos, ad.log(p)), ad.mul(neg, ad.log(ad.sub(ones, p))))
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    total = ad.full_sum(ad.masked_select(log_lik, upper))
    pairs = max(n * (n - 1) // 2, 1)
    return ad.scalar_mul(total, -1.0 / pairs)


def gaussian_kl(post: Posterior) -> Tensor:
    """KL(q || N(0, I)) summed over latent dims, averaged over active nodes."""
    mask2d = np.broadcast_to(post.mask[:, None], post.mu.shape)
    mu = ad.masked_select(post.mu, mask2d)
    log_var = ad.masked_select(post.log_var, mask2d)
    ones = Tensor(np.ones(mu.shape))
    term = ad.sub(ad.add(ad.square(mu), ad.exp(log_var)), ad.add(ones, log_var))
    n_active = max(int(post.mask.sum()), 1)
    return ad.scalar_mul(ad.full_sum(term), 0.5 / n_active)


def kernel_elbo_loss(a: Graph, post: Posterior, pa: Tensor, ks: KernelSet,
                     beta: float, prepared: PreparedRegularizer | None = None) -> LossBreakdown:
    """Single-sample estimate of the kernel-regularized ELBO, as a minimized loss.

    With an empty kernel set the penalty is the constant zero and the total is
    bit-identical to the plain reconstruction-plus-KL objective.
    """
    recon = bernoulli_nll(a, pa)
    kl = gaussian_kl(post)
    if prepared is None:
        prepared = ks.prepare(a)
    penalty = prepared(pa)
    total = ad.add(ad.add(recon, ad.scalar_mul(kl, float(beta))), penalty)
    return LossBreakdown(recon_nll=recon, kl=kl, kernel_penalty=penalty,
                         total=total, beta=float(beta))


def standard_elbo_loss(a: Graph, post: Posterior, pa: Tensor, beta: float) -> LossBreakdown:
    """The objective with no kernel term at all."""
    return kernel_elbo_loss(a, post, pa, KernelSet(()), beta)


@dataclass
class BoundCheck:
    """One enumeration: normalizer value and worst slack of the bound chain."""

    lam: float
    normalizer: float
    min_slack: float
    passed: bool


@dataclass
class BoundReport:
    checks: list
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_normalizer(self) -> float:
        return max(c.normalizer for c in self.checks)


def _enumerate_graphs(n: int):
    pairs = list(itertools.combinations(range(n), 2))
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        adj = np.zeros((n, n), dtype=np.int64)
        for (i, j), b in zip(pairs, bits):
            adj[i, j] = adj[j, i] = b
        yield Graph(adj)


def verify_feature_bound(n: int, num_samples: int, lam_values=(0.5, 1.0, 2.0),
                         seed: int = 0, tolerance: float = 1e-9) -> BoundReport:
    """Check the joint reconstruction model's bound by exact enumeration.

    Treat the soft degree histogram as the finite feature map phi (dimension
    l = n) and model feature reconstruction as an isotropic Gaussian centered
    on phi of the reconstruction, with variance 1/(2*lambda). For random
    reconstructions the verifier checks, over all 2^(n(n-1)/2) graphs:

    (a) the product-likelihood normalizer
        C = sum_A P(A | recon) * N(phi(A) | phi(recon), I/(2 lambda))
        is at most 1, and
    (b) ln N(phi(A) | phi(recon)) - ln C
        >= -lambda * D^2(A, recon) + (l/2) ln(2 lambda) - (l/2) ln(2 pi)
        for every enumerated graph A.

    Only feasible for n <= 4; larger n is refused.
    """
    if n > 4:
        raise ContractError(f"exact enumeration over all graphs is infeasible for n={n}")
    if n < 2:
        raise ContractError("need at least 2 nodes for a non-trivial edge set")
    rng = np.random.default_rng(seed)
    kernel = DegreeHistogramKernel(max_degree_bin=n - 1)
    l_dim = n
    upper = np.triu_indices(n, k=1)
    graphs = [(a, soft_histogram(kernel, a).values, a.adjacency[upper])
              for a in _enumerate_graphs(n)]
    checks = []
    for _ in range(num_samples):
        decoder = SbmDecoder(n_max=n, latent_dim=3, rank=3, rng=rng)
        decoder.bilinear.values = rng.standard_normal((3, 3))
        z = Tensor(rng.standard_normal((n, 3)))
        recon = decode(decoder, z, n)
        probs = recon.values
        p_edge = probs[upper]
        phi_recon = soft_histogram(kernel, recon).values
        for lam in lam_values:
            log_norm_const = 0.5 * l_dim * (np.log(2.0 * lam) - np.log(2.0 * np.pi))
            per_graph = []
            normalizer = 0.0
            for a, phi_a, a_edge in graphs:
                p_a = float(np.prod(np.where(a_edge == 1, p_edge, 1.0 - p_edge)))
                sq_dist = float(((phi_a - phi_recon) ** 2).sum())
                log_density = -lam * sq_dist + log_norm_const
                normalizer += p_a * np.exp(log_density)
                per_graph.append((a, log_density))
            min_slack = np.inf
            for a, log_density in per_graph:
                dist = d_squared(kernel, a, recon).item()
                lhs = log_density - np.log(normalizer)
                rhs = -lam * dist + log_norm_const
                min_slack = min(min_slack, lhs - rhs)
            passed = normalizer <= 1.0 + tolerance and min_slack >= -tolerance
            checks.append(BoundCheck(lam=float(lam), normalizer=float(normalizer),
                                     min_slack=float(min_slack), passed=passed))
    return BoundReport(checks=checks, tolerance=tolerance)
