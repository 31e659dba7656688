"""Gumbel-softmax relaxation with an optional straight-through hard sample."""

from __future__ import annotations

import torch
import torch.nn.functional as F


def sample_gumbel(shape, generator: torch.Generator | None = None, dtype=torch.float32, eps: float = 1e-20):
    u = torch.rand(shape, generator=generator, dtype=dtype)
    return -torch.log(-torch.log(u + eps) + eps)


def gumbel_softmax(
    logits: torch.Tensor,
    tau: float = 1.0,
    hard: bool = False,
    generator: torch.Generator | None = None,
    noise: torch.Tensor | None = None,
) -> torch.Tensor:
    """Sample from softmax((logits + g) / tau).

    With ``hard=True`` the forward value is the one-hot argmax while the
    gradient is that of the soft sample.
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    if noise is None:
        noise = sample_gumbel(logits.shape, generator, logits.dtype)
    y = F.softmax((logits + noise) / tau, dim=-1)
    if not hard:
        return y
    index = y.argmax(dim=-1, keepdim=True)
    y_hard = torch.zeros_like(y).scatter_(-1, index, 1.0)
    return (y_hard - y).detach() + y
