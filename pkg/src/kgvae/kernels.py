"""Differentiable graph kernels over (probabilistic) adjacency matrices.

Two kernels are provided: a soft degree-histogram kernel with triangular bin
membership, and an expected-likelihood kernel on s-step random-walk transition
matrices. Both accept binary adjacencies, probabilistic adjacencies, raw
arrays, or tensors, and are differentiable with respect to tensor inputs.

`d_squared` is the squared kernel distance between two single graphs,
k(x,x) + k(y,y) - 2 k(x,y); `regularizer` is the lambda-weighted sum of those
distances between an observed graph and its reconstruction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigurationError, ValidationError
from .graphs import Graph, ProbAdjacency


@dataclass(frozen=True)
class DegreeHistogramKernel:
    """Soft degree histogram: bin b collects sum_i max(0, 1 - slope*|d_i - b|).

    Bin centers are the possible hard degrees 0..max_degree_bin; for graphs of
    up to n_max nodes that means max_degree_bin = n_max - 1.
    """

    max_degree_bin: int
    slope: float = 0.1

    def __post_init__(self):
        if self.max_degree_bin < 0:
            raise ValidationError("max_degree_bin must be non-negative")
        if self.slope <= 0:
            raise ValidationError("slope must be positive")


@dataclass(frozen=True)
class TransitionKernel:
    """Expected-likelihood kernel on s-step transition matrices (D^-1 A)^s.

    Rows whose soft degree falls below degree_floor become identity rows
    (a self-loop), which keeps every row stochastic. The comparison of two
    transition matrices is index-aligned, so unlike the degree kernel this
    kernel is not invariant to relabeling one argument's nodes.
    """

    steps: int
    degree_floor: float = 1e-8

    def __post_init__(self):
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if self.degree_floor <= 0:
            raise ValidationError("degree_floor must be positive")


@dataclass(frozen=True)
class KernelSet:
    """Ordered list of (kernel, weight) pairs defining the regularizer."""

    kernels: tuple = ()

    def __post_init__(self):
        for kernel, weight in self.kernels:
            if weight < 0:
                raise ValidationError(f"kernel weight must be non-negative, got {weight}")
            if not isinstance(kernel, (DegreeHistogramKernel, TransitionKernel)):
                raise ValidationError(f"unknown kernel type {type(kernel).__name__}")

    def __len__(self):
        return len(self.kernels)

    @classmethod
    def from_config(cls, entries, n_max: int) -> "KernelSet":
        """Build from config entries {type: degree|transition, steps?, lambda}."""
        kernels = []
        for entry in entries:
            kind = entry.get("type")
            weight = float(entry["lambda"])
            if kind == "degree":
                kernels.append((DegreeHistogramKernel(max_degree_bin=n_max - 1), weight))
            elif kind == "transition":
                kernels.append((TransitionKernel(steps=int(entry["steps"])), weight))
            else:
                raise ValidationError(f"unknown kernel type {kind!r} in config")
        return cls(tuple(kernels))

    def prepare(self, a) -> "PreparedRegularizer":
        """Precompute the constant (observed-graph) side of every kernel."""
        refs = [(k, w, _reference(k, a)) for k, w in self.kernels]
        return PreparedRegularizer(refs)


def as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    if isinstance(x, Graph):
        return Tensor(x.adjacency.astype(np.float64))
    if isinstance(x, ProbAdjacency):
        return Tensor(x.probs)
    return Tensor(np.asarray(x, dtype=np.float64))


def _check_bins(kernel: DegreeHistogramKernel, n: int) -> None:
    if n - 1 > kernel.max_degree_bin:
        raise ConfigurationError(
            f"graph with {n} nodes can reach degree {n - 1}, beyond the "
            f"histogram's last bin {kernel.max_degree_bin}"
        )


def soft_histogram(kernel: DegreeHistogramKernel, pa) -> Tensor:
    """Length-(B+1) soft degree histogram of a (probabilistic) adjacency."""
    t = as_tensor(pa)
    n = t.shape[0]
    _check_bins(kernel, n)
    bins = kernel.max_degree_bin + 1
    d = ad.row_sum(t)
    # broadcast degrees across columns via an outer product with ones
    deg_mat = ad.matmul(ad.reshape(d, (n, 1)), Tensor(np.ones((1, bins))))
    centers = Tensor(np.broadcast_to(np.arange(bins, dtype=np.float64), (n, bins)).copy())
    dist = ad.absolute(ad.sub(deg_mat, centers))
    membership = ad.relu(ad.add(Tensor(np.ones((n, bins))), ad.scalar_mul(dist, -kernel.slope)))
    return ad.row_sum(ad.transpose(membership))


def degree_kernel(kernel: DegreeHistogramKernel, pa1, pa2) -> Tensor:
    """Dot product of the two soft degree histograms."""
    return ad.dot(soft_histogram(kernel, pa1), soft_histogram(kernel, pa2))


def transition_matrix(kernel: TransitionKernel, pa) -> Tensor:
    """s-step transition matrix of a row-normalized (probabilistic) adjacency."""
    t = as_tensor(pa)
    n = t.shape[0]
    d = ad.row_sum(t)
    floored = d.values < kernel.degree_floor
    d_safe = ad.clamp(d, kernel.degree_floor, np.inf)
    inv = ad.reciprocal(d_safe)
    inv_mat = ad.matmul(ad.reshape(inv, (n, 1)), Tensor(np.ones((1, n))))
    p = ad.mul(t, inv_mat)
    if floored.any():
        keep = Tensor(np.broadcast_to((~floored)[:, None], (n, n)).astype(np.float64))
        p = ad.add(ad.mul(p, keep), Tensor(np.diag(floored.astype(np.float64))))
    out = p
    for _ in range(kernel.steps - 1):
        out = ad.matmul(out, p)
    return out


def _pad_tensor(t: Tensor, n: int) -> Tensor:
    """Embed an m x m tensor into the top-left block of an n x n zero matrix."""
    m = t.shape[0]
    if m == n:
        return t
    embed = Tensor(np.eye(n, m))
    return ad.matmul(ad.matmul(embed, t), ad.transpose(embed))


def transition_kernel(kernel: TransitionKernel, pa1, pa2) -> Tensor:
    """Elementwise product sum of the two s-step transition matrices.

    Graphs of unequal size are first padded with isolated nodes, which the
    degree floor turns into self-loop rows.
    """
    t1, t2 = as_tensor(pa1), as_tensor(pa2)
    n = max(t1.shape[0], t2.shape[0])
    p1 = transition_matrix(kernel, _pad_tensor(t1, n))
    p2 = transition_matrix(kernel, _pad_tensor(t2, n))
    return ad.dot(p1, p2)


def _kernel_value(kernel, pa1, pa2) -> Tensor:
    if isinstance(kernel, DegreeHistogramKernel):
        return degree_kernel(kernel, pa1, pa2)
    if isinstance(kernel, TransitionKernel):
        return transition_kernel(kernel, pa1, pa2)
    raise ValidationError(f"unknown kernel type {type(kernel).__name__}")


def d_squared(kernel, pa1, pa2) -> Tensor:
    """Squared kernel distance k(x,x) + k(y,y) - 2 k(x,y) between two graphs."""
    k11 = _kernel_value(kernel, pa1, pa1)
    k22 = _kernel_value(kernel, pa2, pa2)
    k12 = _kernel_value(kernel, pa1, pa2)
    return ad.sub(ad.add(k11, k22), ad.scalar_mul(k12, 2.0))


class _DegreeReference:
    def __init__(self, kernel, a):
        hist = soft_histogram(kernel, as_tensor(a))
        self.hist = Tensor(hist.values)
        self.self_value = float((hist.values * hist.values).sum())

    def d_squared(self, kernel, pa) -> Tensor:
        hist = soft_histogram(kernel, pa)
        k22 = ad.dot(hist, hist)
        k12 = ad.dot(self.hist, hist)
        return ad.sub(ad.add(Tensor(self.self_value), k22), ad.scalar_mul(k12, 2.0))


class _TransitionReference:
    def __init__(self, kernel, a):
        p = transition_matrix(kernel, as_tensor(a))
        self.p = Tensor(p.values)
        self.self_value = float((p.values * p.values).sum())

    def d_squared(self, kernel, pa) -> Tensor:
        p2 = transition_matrix(kernel, pa)
        k22 = ad.dot(p2, p2)
        k12 = ad.dot(self.p, p2)
        return ad.sub(ad.add(Tensor(self.self_value), k22), ad.scalar_mul(k12, 2.0))


def _reference(kernel, a):
    if isinstance(kernel, DegreeHistogramKernel):
        return _DegreeReference(kernel, a)
    return _TransitionReference(kernel, a)


class PreparedRegularizer:
    """Kernel regularizer with the observed-graph side precomputed.

    Reusable across training steps: only the reconstruction side is taped.
    """

    def __init__(self, refs):
        self._refs = refs

    def __call__(self, pa) -> Tensor:
        if not self._refs:
            return Tensor(0.0)
        pa = as_tensor(pa)
        terms = [ad.scalar_mul(ref.d_squared(kernel, pa), weight)
                 for kernel, weight, ref in self._refs]
        return ad.add_n(terms)


def regularizer(ks: KernelSet, a, pa) -> Tensor:
    """Weighted sum of squared kernel distances between a graph and its reconstruction."""
    return ks.prepare(a)(pa)
