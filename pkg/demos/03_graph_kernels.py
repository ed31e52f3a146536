"""Differentiable graph kernels and the squared kernel distance.

The degree kernel compares soft degree histograms; the transition kernel
compares s-step random-walk matrices. Both accept probabilistic adjacencies,
so their distance to an observed graph can be driven to zero by gradient
descent on the edge probabilities.
"""
import numpy as np

from kgvae import (DegreeHistogramKernel, Graph, KernelSet, Tensor,
                   TransitionKernel, backward, d_squared, regularizer,
                   soft_histogram, transition_matrix)

triangle = Graph.complete(3)
empty = Graph.empty(3)
kernel = DegreeHistogramKernel(max_degree_bin=2)

print("triangle soft histogram:", soft_histogram(kernel, triangle).values)
print("empty soft histogram:  ", soft_histogram(kernel, empty).values)
print("D^2(triangle, empty) =", d_squared(kernel, triangle, empty).item())
print("D^2(triangle, triangle) =", d_squared(kernel, triangle, triangle).item())

path = Graph.from_edges(3, [(0, 1), (1, 2)])
print("\n1-step transition matrix of a path:")
print(transition_matrix(TransitionKernel(steps=1), path).values)
print("2-step:")
print(transition_matrix(TransitionKernel(steps=2), path).values)

# The regularizer is a weighted sum of squared distances, and it is
# differentiable in the reconstruction: descend it from a uniform start.
target = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
ks = KernelSet(((DegreeHistogramKernel(max_degree_bin=4), 1.0),
                (TransitionKernel(steps=1), 1.0)))
recon = np.full((5, 5), 0.5) * (1 - np.eye(5))
print("\ndescending the kernel distance from a uniform reconstruction:")
for it in range(400):
    t = Tensor(recon, requires_grad=True)
    penalty = regularizer(ks, target, t)
    backward(penalty)
    recon = np.clip(recon - 0.05 * t.grad, 0.0, 1.0)
    recon = (recon + recon.T) / 2 * (1 - np.eye(5))
    if it % 100 == 0 or it == 399:
        print(f"  step {it:3d}: penalty {penalty.item():.5f}")
print("reconstruction rounded:\n", recon.round(2))
print("target:\n", target.adjacency)
