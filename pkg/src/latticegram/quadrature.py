"""One-dimensional rules on [-pi, pi] (or [0, pi]) and their high-precision variants."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

SCHEMES = ("gauss-legendre", "tensor-trapezoid")


@dataclass(frozen=True)
class QuadratureConfig:
    points_per_dim: int = 64
    scheme: str = "gauss-legendre"

    def __post_init__(self):
        if self.points_per_dim < 4:
            raise ValueError("points_per_dim must be at least 4")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")


def default_config(d: int) -> QuadratureConfig:
    return QuadratureConfig({1: 64, 2: 24}.get(d, 12))


@lru_cache(maxsize=64)
def rule(n: int, scheme: str = "gauss-legendre", a: float = -np.pi, b: float = np.pi):
    """Nodes and weights of an ``n``-point rule on ``[a, b]`` (read-only arrays)."""
    if scheme == "gauss-legendre":
        x, w = np.polynomial.legendre.leggauss(n)
        x = a + (x + 1.0) * (b - a) / 2.0
        w = w * (b - a) / 2.0
    elif scheme == "tensor-trapezoid":
        # periodic rule; exact for trigonometric polynomials of degree < n
        x = a + (b - a) * np.arange(n) / n
        w = np.full(n, (b - a) / n)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=32)
def gauss_legendre_mp(n: int, dps: int):
    """Gauss-Legendre nodes/weights on [-1, 1] as mpf lists at ``dps`` digits.

    Double-precision nodes are polished by Newton steps on P_n.
    """
    x0, _ = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    with mpmath.workdps(dps + 10):
        tol = mpmath.mpf(10) ** (-(dps + 5))
        for xf in x0:
            x = mpmath.mpf(float(xf))
            for _ in range(100):
                p0, p1 = mpmath.mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                step = p1 / dp
                x -= step
                if abs(step) < tol:
                    break
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    with mpmath.workdps(dps):
        return [+x for x in nodes], [+w for w in weights]
