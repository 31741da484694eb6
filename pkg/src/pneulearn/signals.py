"""Uniformly sampled scalar time series, the common currency between modules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Signal:
    """A scalar signal sampled every T_s seconds."""

    samples: np.ndarray
    T_s: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", arr)
        if self.T_s <= 0:
            raise ValueError(f"T_s must be positive, got {self.T_s}")
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("samples must be a non-empty 1-D array")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.T_s

    def with_samples(self, samples: np.ndarray) -> "Signal":
        return Signal(samples, self.T_s)


def one_norm(x) -> float:
    """Sum of absolute sample values."""
    arr = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=float)
    return float(np.sum(np.abs(arr)))


def two_norm(x) -> float:
    arr = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=float)
    return float(math.sqrt(np.sum(arr * arr)))


def rms(x) -> float:
    """Root mean square over all N samples, divisor N."""
    arr = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=float)
    return float(math.sqrt(np.mean(arr * arr)))
