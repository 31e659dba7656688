from __future__ import annotations

import torch
from torch import nn

from varmark.errors import DimensionMismatch


class WatermarkClassifier(nn.Module):
    """Two-layer perceptron from a target representation to 2**L chunk classes."""

    def __init__(self, in_dim: int, hidden: int, num_classes: int):
        super().__init__()
        self.in_dim = in_dim
        self.fc1 = nn.Linear(in_dim, hidden)
        self.fc2 = nn.Linear(hidden, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_dim:
            raise DimensionMismatch(f"classifier expects {self.in_dim} features, got {x.shape[-1]}")
        return self.fc2(torch.relu(self.fc1(x)))


def classify_watermark(target_repr: torch.Tensor, classifier: WatermarkClassifier) -> torch.Tensor:
    """Probability vector over chunk classes; the predicted chunk is its argmax."""
    return torch.softmax(classifier(target_repr), dim=-1)
