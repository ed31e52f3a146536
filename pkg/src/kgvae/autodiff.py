"""Minimal dense-tensor reverse-mode autodiff on float64 numpy arrays.

The computation graph is a dynamic tape: every operation links its output to
its parents together with a closure that routes the output gradient back.
Only bias addition broadcasts; every other shape mismatch is an error, which
keeps the backward rules easy to audit.
"""
from __future__ import annotations

import numpy as np

from .errors import ContractError, ShapeError


class Tensor:
    """Dense n-dimensional value, optionally participating in differentiation."""

    __slots__ = ("values", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, values, requires_grad: bool = False):
        self.values = np.asarray(values, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.values.shape

    def item(self) -> float:
        if self.values.size != 1:
            raise ContractError(f"item() on non-scalar tensor of shape {self.shape}")
        return float(self.values.reshape(()))

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    # operator sugar; all strict-shape except scalar multiplication
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scalar_mul(self, other)
        return mul(self, other)

    def __rmul__(self, other):
        return scalar_mul(self, other)

    def __neg__(self):
        return scalar_mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def parameter(values) -> Tensor:
    return Tensor(values, requires_grad=True)


def _make(values, parents, backward_fn) -> Tensor:
    out = Tensor(values)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    t.grad = g if t.grad is None else t.grad + g


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: mismatched shapes {a.shape} and {b.shape}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.values.ndim != 2 or b.values.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    values = a.values @ b.values

    def backward(g):
        _accumulate(a, g @ b.values.T)
        _accumulate(b, a.values.T @ g)

    return _make(values, (a, b), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)

    def backward(g):
        _accumulate(a, g)
        _accumulate(b, g)

    return _make(a.values + b.values, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)

    def backward(g):
        _accumulate(a, g)
        _accumulate(b, -g)

    return _make(a.values - b.values, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)

    def backward(g):
        _accumulate(a, g * b.values)
        _accumulate(b, g * a.values)

    return _make(a.values * b.values, (a, b), backward)


def scalar_mul(a: Tensor, c: float) -> Tensor:
    c = float(c)

    def backward(g):
        _accumulate(a, g * c)

    return _make(a.values * c, (a,), backward)


def transpose(a: Tensor) -> Tensor:
    if a.values.ndim != 2:
        raise ShapeError(f"transpose: expected a matrix, got shape {a.shape}")

    def backward(g):
        _accumulate(a, g.T)

    return _make(a.values.T.copy(), (a,), backward)


def row_sum(a: Tensor) -> Tensor:
    if a.values.ndim != 2:
        raise ShapeError(f"row_sum: expected a matrix, got shape {a.shape}")

    def backward(g):
        _accumulate(a, np.broadcast_to(g[:, None], a.shape).copy())

    return _make(a.values.sum(axis=1), (a,), backward)


def full_sum(a: Tensor) -> Tensor:
    def backward(g):
        _accumulate(a, np.full(a.shape, float(g)))

    return _make(a.values.sum(), (a,), backward)


def sigmoid(a: Tensor) -> Tensor:
    v = a.values
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)

    def backward(g):
        _accumulate(a, g * out * (1.0 - out))

    return _make(out, (a,), backward)


def relu(a: Tensor) -> Tensor:
    def backward(g):
        _accumulate(a, g * (a.values > 0))

    return _make(np.maximum(a.values, 0.0), (a,), backward)


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.values)

    def backward(g):
        _accumulate(a, g * out)

    return _make(out, (a,), backward)


def log(a: Tensor) -> Tensor:
    """Natural log; the caller is responsible for keeping inputs positive."""

    def backward(g):
        _accumulate(a, g / a.values)

    return _make(np.log(a.values), (a,), backward)


def square(a: Tensor) -> Tensor:
    def backward(g):
        _accumulate(a, g * 2.0 * a.values)

    return _make(a.values * a.values, (a,), backward)


def clamp(a: Tensor, lo: float, hi: float) -> Tensor:
    """Clip into [lo, hi]; gradient passes only strictly inside the interval."""
    inside = (a.values > lo) & (a.values < hi)

    def backward(g):
        _accumulate(a, g * inside)

    return _make(np.clip(a.values, lo, hi), (a,), backward)


def add_bias(a: Tensor, bias: Tensor) -> Tensor:
    """Add a length-m bias vector to every row of an (n, m) matrix."""
    if a.values.ndim != 2 or bias.values.ndim != 1 or a.shape[1] != bias.shape[0]:
        raise ShapeError(f"add_bias: incompatible shapes {a.shape} and {bias.shape}")

    def backward(g):
        _accumulate(a, g)
        _accumulate(bias, g.sum(axis=0))

    return _make(a.values + bias.values, (a, bias), backward)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    if int(np.prod(shape)) != a.values.size:
        raise ShapeError(f"reshape: cannot view shape {a.shape} as {shape}")

    def backward(g):
        _accumulate(a, g.reshape(a.shape))

    return _make(a.values.reshape(shape), (a,), backward)


def masked_select(a: Tensor, mask) -> Tensor:
    """Select entries where a boolean mask is true, flattened in row-major order."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.shape:
        raise ShapeError(f"masked_select: mask shape {mask.shape} != tensor shape {a.shape}")

    def backward(g):
        scatter = np.zeros(a.shape)
        scatter[mask] = g
        _accumulate(a, scatter)

    return _make(a.values[mask], (a,), backward)


# Compositions of the primitives above. Their gradients follow from the
# primitive rules, so they need no backward code of their own.

def absolute(a: Tensor) -> Tensor:
    """|x| as relu(x) + relu(-x); subgradient 0 at x = 0."""
    return add(relu(a), relu(scalar_mul(a, -1.0)))


def reciprocal(a: Tensor) -> Tensor:
    """1/x for strictly positive x, via exp(-log x)."""
    return exp(scalar_mul(log(a), -1.0))


def dot(a: Tensor, b: Tensor) -> Tensor:
    return full_sum(mul(a, b))


def add_n(tensors) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ContractError("add_n of an empty list")
    total = tensors[0]
    for t in tensors[1:]:
        total = add(total, t)
    return total


def backward(loss: Tensor) -> None:
    """Populate .grad on every requires_grad tensor reachable from a scalar loss."""
    if loss.values.size != 1:
        raise ContractError(f"backward expects a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    order = _toposort(loss)
    loss.grad = np.ones_like(loss.values) if loss.grad is None else loss.grad + np.ones_like(loss.values)
    for node in reversed(order):
        if node._backward is not None:
            node._backward(node.grad)


def _toposort(root: Tensor) -> list[Tensor]:
    """Parents-before-children ordering of the requires_grad subgraph."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def zero_grads(tensors) -> None:
    for t in tensors:
        t.grad = None
