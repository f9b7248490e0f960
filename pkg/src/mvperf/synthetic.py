"""Seeded multi-view Gaussian-blob datasets.

Randomness comes from SplitMix64 so that a seed pins down the output exactly,
independent of numpy's generator versions:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)                      (all mod 2^64)

Uniforms are ``(z >> 11) * 2^-53``; normals use Box-Muller with both outputs
consumed in order.

Generation order, for reproducibility across implementations:

1. labels: ``round(balance * n)`` positives (at least one of each class when
   ``n >= 2``), placed by a Fisher-Yates shuffle;
2. for each view, a unit discriminating direction ``u_j`` (normalized
   standard normal vector);
3. a shared latent matrix ``g`` of shape (n, max d_j);
4. per view: ``x_i = y_i * (margin / 2) * u_j + P_j (rho * g_i[:d_j]
   + sqrt(1 - rho^2) * h_i) + noise * e_i`` where ``P_j`` projects out
   ``u_j`` and ``h``, ``e`` are fresh standard normals.

With ``noise = 0`` every view is separable through the origin with margin
``margin / 2`` along ``u_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import MultiViewDataset, validate

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK
        self._spare = None

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        return int(self.uniform() * bound)

    def normal(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(1.0 - u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def normals(self, *shape) -> np.ndarray:
        size = int(np.prod(shape)) if shape else 1
        return np.array([self.normal() for _ in range(size)]).reshape(shape)


@dataclass
class GenSpec:
    n: int = 60
    m: int = 2
    dims: list = field(default_factory=lambda: [5, 4])
    balance: float = 0.5
    margin: float = 2.0
    noise: float | list = 0.0
    correlation: float = 0.5
    seed: int = 0

    def validate(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.m < 1 or len(self.dims) != self.m:
            raise ValueError("dims must list one dimension per view")
        if any(int(d) != d or d < 1 for d in self.dims):
            raise ValueError("view dimensions must be positive integers")
        if not 0.0 < self.balance < 1.0:
            raise ValueError("balance must lie in (0, 1)")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        if any(s < 0 for s in self.noise_per_view()):
            raise ValueError("noise must be non-negative")
        if not -1.0 <= self.correlation <= 1.0:
            raise ValueError("correlation must lie in [-1, 1]")

    def noise_per_view(self) -> list[float]:
        if isinstance(self.noise, (list, tuple)):
            if len(self.noise) != self.m:
                raise ValueError("per-view noise needs one entry per view")
            return [float(s) for s in self.noise]
        return [float(self.noise)] * self.m


def _labels(rng: SplitMix64, n: int, balance: float) -> np.ndarray:
    n_pos = min(max(int(round(balance * n)), 1), n - 1)
    y = np.array([1] * n_pos + [-1] * (n - n_pos), dtype=np.int8)
    for i in range(n - 1, 0, -1):
        k = rng.below(i + 1)
        y[i], y[k] = y[k], y[i]
    return y


def generate(spec: GenSpec) -> MultiViewDataset:
    spec.validate()
    rng = SplitMix64(spec.seed)
    y = _labels(rng, spec.n, spec.balance)

    directions = []
    for d in spec.dims:
        u = rng.normals(d)
        norm = np.linalg.norm(u)
        u = u / norm if norm > 0 else np.eye(d)[0]
        directions.append(u)

    shared = rng.normals(spec.n, max(spec.dims))
    rho = spec.correlation
    views = []
    for d, u, noise in zip(spec.dims, directions, spec.noise_per_view()):
        own = rng.normals(spec.n, d)
        spread = rho * shared[:, :d] + math.sqrt(1.0 - rho * rho) * own
        spread -= np.outer(spread @ u, u)
        X = y[:, None] * (0.5 * spec.margin) * u[None, :] + spread
        if noise > 0:
            X = X + noise * rng.normals(spec.n, d)
        views.append(X)

    ds = MultiViewDataset(tuple(views), y)
    validate(ds)
    return ds


def random_instance(rng: np.random.Generator, n: int, m: int, max_dim: int = 4, weight_scale: float = 1.0):
    """Small random dataset plus random weights, for oracle checks.

    Both classes are present when ``n >= 2``.
    """
    dims = [int(rng.integers(1, max_dim + 1)) for _ in range(m)]
    views = [rng.normal(size=(n, d)) for d in dims]
    y = rng.choice(np.array([1, -1], dtype=np.int8), size=n)
    if n >= 2 and abs(int(y.sum())) == n:
        y[int(rng.integers(n))] *= -1
    ds = MultiViewDataset(tuple(views), y)
    weights = [weight_scale * rng.normal(size=d) for d in dims]
    return ds, weights
