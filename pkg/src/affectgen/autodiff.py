"""Reverse-mode automatic differentiation over dense float64 numpy arrays.

A small tape: each op returns a Tensor that remembers its parents and a
closure accumulating gradients into them.  `backward()` walks the tape in
reverse topological order.  Everything is double precision so finite
difference checks against the analytic gradients are meaningful.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

_GRAD_ENABLED = True


class no_grad:
    """Context manager disabling tape construction (inference, FD probes)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """Dense float64 array plus optional gradient bookkeeping."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # Operators delegate to the module-level ops.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def backward(self) -> None:
        """Accumulate gradients of self (a scalar) into every parameter."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum gradient over axes that were broadcast in the forward op."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _make(data: np.ndarray, parents: Sequence[Tensor],
          backward: Callable[[np.ndarray], None]) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data + b.data

    def bw(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(g, b.data.shape))

    return _make(data, (a, b), bw)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data - b.data

    def bw(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(-g, b.data.shape))

    return _make(data, (a, b), bw)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data * b.data

    def bw(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(data, (a, b), bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data @ b.data

    def bw(g):
        if a.requires_grad:
            _accumulate(a, g @ b.data.T)
        if b.requires_grad:
            _accumulate(b, a.data.T @ g)

    return _make(data, (a, b), bw)


def sigmoid(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    data = 1.0 / (1.0 + np.exp(-x.data))

    def bw(g):
        if x.requires_grad:
            _accumulate(x, g * data * (1.0 - data))

    return _make(data, (x,), bw)


def tanh(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    data = np.tanh(x.data)

    def bw(g):
        if x.requires_grad:
            _accumulate(x, g * (1.0 - data * data))

    return _make(data, (x,), bw)


def log(x: Tensor, floor: float = 0.0) -> Tensor:
    """Natural log; values are clamped at `floor` before the log when given."""
    x = _as_tensor(x)
    clamped = np.maximum(x.data, floor) if floor > 0.0 else x.data
    data = np.log(clamped)

    def bw(g):
        if x.requires_grad:
            gx = g / clamped
            if floor > 0.0:
                gx = np.where(x.data >= floor, gx, 0.0)
            _accumulate(x, gx)

    return _make(data, (x,), bw)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = _as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        if x.requires_grad:
            dot = (g * data).sum(axis=axis, keepdims=True)
            _accumulate(x, data * (g - dot))

    return _make(data, (x,), bw)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def bw(g):
        offset = 0
        for t, size in zip(tensors, sizes):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(offset, offset + size)
                _accumulate(t, g[tuple(idx)])
            offset += size

    return _make(data, tensors, bw)


def gather_rows(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup (embedding): table (N,D), ids (B,) -> (B,D)."""
    table = _as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    data = table.data[ids]

    def bw(g):
        if table.requires_grad:
            gt = np.zeros_like(table.data)
            np.add.at(gt, ids, g)
            _accumulate(table, gt)

    return _make(data, (table,), bw)


def pick(probs: Tensor, ids: np.ndarray) -> Tensor:
    """Per-row element pick: probs (B,V), ids (B,) -> (B,)."""
    probs = _as_tensor(probs)
    ids = np.asarray(ids, dtype=np.int64)
    rows = np.arange(probs.data.shape[0])
    data = probs.data[rows, ids]

    def bw(g):
        if probs.requires_grad:
            gp = np.zeros_like(probs.data)
            gp[rows, ids] = g
            _accumulate(probs, gp)

    return _make(data, (probs,), bw)


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    x = _as_tensor(x)
    data = x.data.sum(axis=axis, keepdims=keepdims)

    def bw(g):
        if x.requires_grad:
            if axis is None:
                _accumulate(x, np.broadcast_to(g, x.data.shape).copy())
            else:
                ge = g if keepdims else np.expand_dims(g, axis)
                _accumulate(x, np.broadcast_to(ge, x.data.shape).copy())

    return _make(data, (x,), bw)


def mean(x: Tensor) -> Tensor:
    n = float(np.asarray(x.data).size)
    return mul(tsum(x), 1.0 / n)


def l2norm_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    """Euclidean norm of each row: (B,D) -> (B,).

    Backward uses x / max(norm, eps), i.e. a zero subgradient at the origin,
    so training does not blow up when the regularizer reaches zero.
    """
    x = _as_tensor(x)
    data = np.sqrt((x.data * x.data).sum(axis=-1))

    def bw(g):
        if x.requires_grad:
            denom = np.maximum(data, eps)[:, None]
            _accumulate(x, g[:, None] * x.data / denom)

    return _make(data, (x,), bw)


def dropout(x: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; call only in training mode with rate > 0."""
    keep = (rng.random(x.data.shape) >= rate).astype(np.float64) / (1.0 - rate)
    return mul(x, keep)


def add_many(tensors: Iterable[Tensor]) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ValueError("add_many of no tensors")
    acc = tensors[0]
    for t in tensors[1:]:
        acc = add(acc, t)
    return acc


def parameter(data, requires_grad: bool = True) -> Tensor:
    return Tensor(np.asarray(data, dtype=np.float64), requires_grad=requires_grad)
