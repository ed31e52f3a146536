"""Kernel-regularized graph variational autoencoders.

Trains graph VAEs whose objective augments the per-edge reconstruction
likelihood with squared kernel distances between global features (degree
histograms, random-walk transition matrices) of the input graph and its
reconstruction, and evaluates generated graphs against held-out graphs with
the standard degree/clustering/orbit/sparsity MMD suite.
"""

from .autodiff import Tensor, backward
from .datasets import make_corpus, make_grid, make_lobster, split
from .errors import (ConfigurationError, ContractError, NumericalError,
                     ParseError, ShapeError, ValidationError)
from .graphs import (Graph, PaddedBatch, ProbAdjacency, load_jsonl, pad_batch,
                     permute, sample_adjacency, save_jsonl, soft_degrees)
from .kernels import (DegreeHistogramKernel, KernelSet, TransitionKernel,
                      d_squared, degree_kernel, regularizer, soft_histogram,
                      transition_kernel, transition_matrix)
from .metrics import (StructureReport, clustering_distribution,
                      degree_distribution, evaluate, gaussian_mmd,
                      orbit_counts, sparsity)
from .model import (DotProductDecoder, FcDecoder, GcnEncoder, GraphVae,
                    ModelConfig, Posterior, SbmDecoder, decode, encode,
                    gcn_layer, load_checkpoint, reparameterize,
                    sample_from_prior, save_checkpoint)
from .objective import (LossBreakdown, bernoulli_nll, gaussian_kl,
                        kernel_elbo_loss, standard_elbo_loss,
                        verify_feature_bound)
from .optim import Adam
from .training import TrainConfig, TrainResult, generate, train

__version__ = "0.1.0"

__all__ = [
    "Adam", "ConfigurationError", "ContractError", "DegreeHistogramKernel",
    "DotProductDecoder", "FcDecoder", "GcnEncoder", "Graph", "GraphVae",
    "KernelSet", "LossBreakdown", "ModelConfig", "NumericalError",
    "PaddedBatch", "ParseError", "Posterior", "ProbAdjacency", "SbmDecoder",
    "ShapeError", "StructureReport", "Tensor", "TrainConfig", "TrainResult",
    "TransitionKernel", "ValidationError", "backward", "bernoulli_nll",
    "clustering_distribution", "d_squared", "decode", "degree_distribution",
    "degree_kernel", "encode", "evaluate", "gaussian_kl", "gaussian_mmd",
    "gcn_layer", "generate", "kernel_elbo_loss", "load_checkpoint",
    "load_jsonl", "make_corpus", "make_grid", "make_lobster", "orbit_counts",
    "pad_batch", "permute", "regularizer", "reparameterize",
    "sample_adjacency", "sample_from_prior", "save_checkpoint", "save_jsonl",
    "soft_degrees", "soft_histogram", "sparsity", "split",
    "standard_elbo_loss", "train", "transition_kernel", "transition_matrix",
    "verify_feature_bound",
]
