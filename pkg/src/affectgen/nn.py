"""GRU cells, linear maps and parameter initialization on the autodiff tape."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, add, concat, matmul, mul, parameter, sigmoid, sub, tanh


def uniform_init(rng: np.random.Generator, shape: tuple[int, ...], k: float) -> Tensor:
    return parameter(rng.uniform(-k, k, size=shape))


@dataclass
class GruParams:
    """Gate parameters; weights are stored (input_dim, hidden) so batched
    row-vector inputs multiply without transposes."""

    input_dim: int
    hidden_dim: int
    w_z: Tensor
    u_z: Tensor
    b_z: Tensor
    w_r: Tensor
    u_r: Tensor
    b_r: Tensor
    w_n: Tensor
    u_n: Tensor
    b_n: Tensor

    @classmethod
    def init(cls, rng: np.random.Generator, input_dim: int, hidden_dim: int) -> "GruParams":
        k = 1.0 / np.sqrt(hidden_dim)
        return cls(
            input_dim=input_dim,
            hidden_dim=hidden_dim,
            w_z=uniform_init(rng, (input_dim, hidden_dim), k),
            u_z=uniform_init(rng, (hidden_dim, hidden_dim), k),
            b_z=uniform_init(rng, (hidden_dim,), k),
            w_r=uniform_init(rng, (input_dim, hidden_dim), k),
            u_r=uniform_init(rng, (hidden_dim, hidden_dim), k),
            b_r=uniform_init(rng, (hidden_dim,), k),
            w_n=uniform_init(rng, (input_dim, hidden_dim), k),
            u_n=uniform_init(rng, (hidden_dim, hidden_dim), k),
            b_n=uniform_init(rng, (hidden_dim,), k),
        )

    def named(self, prefix: str) -> dict[str, Tensor]:
        return {
            f"{prefix}.{name}": getattr(self, name)
            for name in ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_n", "u_n", "b_n")
        }


def gru_cell_forward(p: GruParams, x: Tensor, h_prev: Tensor) -> Tensor:
    """One GRU step: h' = (1-z) * n + z * h_prev.

    z = sigmoid(x Wz + h Uz + bz), r likewise, n = tanh(x Wn + (r*h) Un + bn).
    Inputs are (B, input_dim) and (B, hidden_dim).
    """
    if x.data.shape[-1] != p.input_dim:
        raise ValueError(f"input dim {x.data.shape[-1]} != expected {p.input_dim}")
    if h_prev.data.shape[-1] != p.hidden_dim:
        raise ValueError(f"hidden dim {h_prev.data.shape[-1]} != expected {p.hidden_dim}")
    z = sigmoid(add(add(matmul(x, p.w_z), matmul(h_prev, p.u_z)), p.b_z))
    r = sigmoid(add(add(matmul(x, p.w_r), matmul(h_prev, p.u_r)), p.b_r))
    n = tanh(add(add(matmul(x, p.w_n), matmul(mul(r, h_prev), p.u_n)), p.b_n))
    return add(mul(sub(1.0, z), n), mul(z, h_prev))


def gru_unroll(p: GruParams, inputs: list[Tensor], h0: Tensor,
               mask: np.ndarray | None = None) -> tuple[list[Tensor], Tensor]:
    """Run a GRU over a step-major input list; returns per-step states and the
    final state.  mask (B,T) freezes finished sequences so the final state is
    each sequence's state at its own last valid step."""
    h = h0
    outputs: list[Tensor] = []
    for t, x in enumerate(inputs):
        h_new = gru_cell_forward(p, x, h)
        if mask is not None:
            m = mask[:, t:t + 1]
            h = add(mul(h_new, Tensor(m)), mul(h, Tensor(1.0 - m)))
        else:
            h = h_new
        outputs.append(h)
    return outputs, h


@dataclass
class LinearParams:
    w: Tensor  # (in, out)
    b: Tensor  # (out,)

    @classmethod
    def init(cls, rng: np.random.Generator, in_dim: int, out_dim: int) -> "LinearParams":
        k = 1.0 / np.sqrt(in_dim)
        return cls(w=uniform_init(rng, (in_dim, out_dim), k),
                   b=uniform_init(rng, (out_dim,), k))

    def __call__(self, x: Tensor) -> Tensor:
        return add(matmul(x, self.w), self.b)

    def named(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.w": self.w, f"{prefix}.b": self.b}


def concat_pair(a: Tensor, b: Tensor) -> Tensor:
    return concat([a, b], axis=-1)
