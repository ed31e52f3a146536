"""The reverse-mode tensor engine and the Adam optimizer.

Everything downstream (encoder, decoders, kernels, losses) is built from the
same small set of primitives shown here.
"""
import numpy as np

from kgvae import Adam, Tensor, backward
from kgvae import autodiff as ad

# Forward values are plain float64 numpy arrays; backward fills .grad.
x = Tensor(np.array([1.0, 2.0, 3.0]), requires_grad=True)
loss = ad.full_sum(ad.square(x))
backward(loss)
print("d/dx sum(x^2) at (1,2,3):", x.grad)  # (2, 4, 6)

# Gradients flow through chains of primitives.
w = Tensor(np.random.default_rng(0).uniform(-1, 1, (3, 2)), requires_grad=True)
h = Tensor(np.array([[0.5, -1.0, 2.0]]))
out = ad.full_sum(ad.sigmoid(ad.matmul(h, w)))
backward(out)
print("dout/dw:\n", w.grad)

# Check one entry against central finite differences.
i, j = 1, 0
step = 1e-5
base = w.values.copy()
up, dn = base.copy(), base.copy()
up[i, j] += step
dn[i, j] -= step
fd = (ad.full_sum(ad.sigmoid(ad.matmul(h, Tensor(up)))).item()
      - ad.full_sum(ad.sigmoid(ad.matmul(h, Tensor(dn)))).item()) / (2 * step)
print(f"analytic {w.grad[i, j]:.10f} vs finite difference {fd:.10f}")

# Adam walks a quadratic bowl to its minimum.
theta = Tensor(np.array([4.0, -3.0]), requires_grad=True)
opt = Adam([theta], lr=0.1)
for step_idx in range(200):
    opt.zero_grad()
    backward(ad.full_sum(ad.square(theta)))
    opt.step()
print("after 200 Adam steps on f(x)=|x|^2:", theta.values)
