"""The one-dimensional nearest-neighbor lattice.

Self-loop weight ``p < -2s`` and coupling ``s > 0``.  Entries are indexed
relative to the single driver (``G[i', j'] = W[a + i', a + j']``).

Entries decay like ``z**index`` with ``z < 1``, so beyond a handful of
sites both the folded quadrature and the forward diagonal recursion lose
every significant digit in double precision.  Both therefore switch to
mpmath arithmetic with a working precision sized from the expected decay;
results are returned as Python floats.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .lattice import LatticeError, LatticeSpec, nearest_neighbor_1d
from .quadrature import QuadratureConfig, gauss_legendre_mp, rule
from .special import elliptic_E, elliptic_K

# double-precision quadrature is trusted while z**index stays above this
FLOAT_QUADRATURE_FLOOR = 1e-6
GUARD_DIGITS = 20


@dataclass(frozen=True)
class NN1DParams:
    p: float
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise LatticeError(f"coupling s must be positive, got {self.s}")
        if not self.p + 2 * self.s < 0:
            raise LatticeError(
                f"unstable nearest-neighbor lattice: p + 2s = {self.p + 2 * self.s:.6g} >= 0"
            )

    @classmethod
    def from_magnitude(cls, p_abs: float, s: float) -> "NN1DParams":
        """Build from the self-loop magnitude, e.g. ``from_magnitude(3, 1)`` is p=-3."""
        return cls(-abs(p_abs), s)

    @classmethod
    def from_alpha(cls, alpha_value: float, s: float = 1.0) -> "NN1DParams":
        if not alpha_value > 1:
            raise LatticeError(f"alpha must exceed 1, got {alpha_value}")
        return cls(-s * math.sqrt(2.0 * (alpha_value + 1.0)), s)

    @property
    def alpha(self) -> float:
        return alpha(self)

    @property
    def z_tilde(self) -> float:
        return decay_rate(self.alpha)

    def to_spec(self) -> LatticeSpec:
        return nearest_neighbor_1d(self.p, self.s)


@dataclass(frozen=True)
class ShiftedEntry:
    i_shift: int
    j_shift: int
    value: float


def alpha(params: NN1DParams) -> float:
    return params.p**2 / (2.0 * params.s**2) - 1.0


def decay_rate(alpha_value: float) -> float:
    """Asymptotic per-site ratio z = alpha - sqrt(alpha^2 - 1) of the diagonal."""
    if not alpha_value > 1:
        raise ValueError(f"decay rate needs alpha > 1, got {alpha_value}")
    # 1 / (alpha + sqrt(alpha^2 - 1)) is the same root without cancellation
    return 1.0 / (alpha_value + math.sqrt(alpha_value * alpha_value - 1.0))


def _digits_lost(params: NN1DParams, index: int) -> int:
    return max(0, math.ceil(-index * math.log10(params.z_tilde)))


# -- quadrature of the folded double integral -------------------------------------------


def _float_quadrature(params: NN1DParams, i: int, j: int, q: QuadratureConfig) -> float:
    x, w = rule(q.points_per_dim, q.scheme, 0.0, np.pi)
    if q.scheme == "tensor-trapezoid":
        # even periodic integrand: the [0, pi] midpoint rule is the folded trapezoid rule
        x = x + np.pi / (2 * q.points_per_dim)
    cx = np.cos(x)
    denom = 2 * params.p + 2 * params.s * (cx[:, None] + cx[None, :])
    u = w * np.cos(i * x)
    v = w * np.cos(j * x)
    return float(-(u @ (1.0 / denom) @ v) / np.pi**2)


@lru_cache(maxsize=16)
def _mp_kernel(p: float, s: float, n: int, dps: int):
    nodes, weights = gauss_legendre_mp(n, dps)
    with mpmath.workdps(dps):
        half = mpmath.pi / 2
        x = [half * (u + 1) for u in nodes]
        w = [half * c for c in weights]
        cx = [mpmath.cos(v) for v in x]
        P, S = mpmath.mpf(p), mpmath.mpf(s)
        inv = [[1 / (2 * P + 2 * S * (ca + cb)) for cb in cx] for ca in cx]
    return x, w, inv


def _mp_quadrature(params: NN1DParams, i: int, j: int, n: int, dps: int) -> float:
    x, w, inv = _mp_kernel(params.p, params.s, n, dps)
    with mpmath.workdps(dps):
        u = [wk * mpmath.cos(i * xk) for wk, xk in zip(w, x)]
        v = [wk * mpmath.cos(j * xk) for wk, xk in zip(w, x)]
        total = mpmath.fsum(ua * mpmath.fdot(row, v) for ua, row in zip(u, inv))
        return float(-total / mpmath.pi**2)


def mp_points(params: NN1DParams, index: int, base: int = 64) -> int:
    """Node count for the high-precision rule.

    The integrand is analytic within |Im x| < d, d = arccosh(|p|/s - 1), so
    the [0, pi] Gauss rule converges like rho**(-2N) with
    log(rho) = asinh(2d/pi); the cos(index x) factor costs exp(index d).
    """
    d = math.acosh(abs(params.p) / params.s - 1.0)
    log_rho = math.asinh(2.0 * d / math.pi)
    digits = _digits_lost(params, index) + 12
    need = (index * d + digits * math.log(10)) / (2.0 * log_rho)
    return max(base, int(math.ceil(need)) + 16)


def entry_quadrature(
    params: NN1DParams,
    i_shift: int,
    j_shift: int,
    q: QuadratureConfig | None = None,
    dps: int | None = None,
) -> float:
    """G[i', j'] from the folded double integral over [0, pi]^2.

    ``dps=None`` chooses double precision for entries that stay above
    :data:`FLOAT_QUADRATURE_FLOOR` relative to the decay and mpmath otherwise.
    ``dps=0`` forces double precision.
    """
    # canonical order makes the sign-flip and swap symmetries exact
    i, j = sorted((abs(int(i_shift)), abs(int(j_shift))), reverse=True)
    q = q or QuadratureConfig(64)
    reach = max(i, j)
    if dps is None:
        if params.z_tilde**reach >= FLOAT_QUADRATURE_FLOOR:
            return _float_quadrature(params, i, j, q)
        # reach rounded up so nearby entries share one cached kernel
        bucket = -(-reach // 8) * 8
        dps = _digits_lost(params, bucket) + GUARD_DIGITS
        return _mp_quadrature(params, i, j, mp_points(params, bucket, q.points_per_dim), dps)
    if dps == 0:
        return _float_quadrature(params, i, j, q)
    return _mp_quadrature(params, i, j, mp_points(params, reach, q.points_per_dim), dps)


def shifted_entries(params: NN1DParams, pairs, q: QuadratureConfig | None = None) -> list[ShiftedEntry]:
    return [ShiftedEntry(i, j, entry_quadrature(params, i, j, q)) for i, j in pairs]


# -- closed forms ---------------------------------------------------------------------


def _mp_seeds(params: NN1DParams):
    p_abs = abs(mpmath.mpf(params.p))
    s = mpmath.mpf(params.s)
    m = 4 * s * s / (p_abs * p_abs)
    K, E = elliptic_K(m), elliptic_E(m)
    pi = mpmath.pi
    g00 = K / (pi * p_abs)
    g11 = (p_abs / (2 * pi * s * s) - 1 / (pi * p_abs)) * K - p_abs / (2 * pi * s * s) * E
    return g00, g11


def diagonal_seeds(params: NN1DParams) -> tuple[float, float]:
    """(G00, G11) from the complete elliptic integrals at parameter m = 4 s^2 / p^2."""
    m = 4.0 * params.s**2 / params.p**2
    p_abs = abs(params.p)
    K, E = elliptic_K(m), elliptic_E(m)
    g00 = K / (math.pi * p_abs)
    coef = p_abs / (2 * math.pi * params.s**2)
    g11 = coef * (K - E) - K / (math.pi * p_abs)
    return g00, g11


def recursion_dps(params: NN1DParams, max_index: int) -> int:
    """Working digits for the forward recursion up to ``max_index``.

    The wanted solution decays like z**i while the parasitic one grows like
    z**-i, so rounding is amplified by about z**(-2 i).
    """
    return 2 * _digits_lost(params, max_index) + GUARD_DIGITS


def diagonal_recursion(params: NN1DParams, max_index: int, dps: int | None = None) -> list[float]:
    """Diagonal entries G[0,0] .. G[max_index, max_index] by the three-term recursion.

    If the sequence stops being positive and decreasing (not enough digits
    for the requested reach) it is truncated at the last trusted index and
    a :class:`RuntimeWarning` names that index.
    """
    if max_index < 1:
        raise ValueError("max_index must be at least 1")
    dps = recursion_dps(params, max_index) if dps is None else int(dps)
    with mpmath.workdps(dps):
        a = mpmath.mpf(params.p) ** 2 / (2 * mpmath.mpf(params.s) ** 2) - 1
        g = list(_mp_seeds(params))
        for i in range(1, max_index):
            g.append(mpmath.mpf(4 * i) / (2 * i + 1) * a * g[i] - mpmath.mpf(2 * i - 1) / (2 * i + 1) * g[i - 1])
        values = [float(v) for v in g]
    for k in range(1, len(values)):
        if not (0.0 < values[k] < values[k - 1]):
            warnings.warn(
                f"diagonal recursion lost positivity/monotonicity at index {k} "
                f"with {dps} digits; last trusted index is {k - 1}",
                RuntimeWarning,
                stacklevel=2,
            )
            return values[:k]
    return values


def asymptotic_diagonal(params: NN1DParams, indices, calibrate_at: int = 10) -> np.ndarray:
    """z**m scaling through the recursion value at ``calibrate_at``.

    An estimate, exact only at the calibration index.
    """
    g_cal = diagonal_recursion(params, max(calibrate_at, 1))[calibrate_at]
    m = np.asarray(indices, dtype=float)
    return g_cal * params.z_tilde ** (m - calibrate_at)


def output_gramian(params: NN1DParams, targets, driver: int = 0, q: QuadratureConfig | None = None):
    """Output Gramian of a single driver at ``driver`` over integer ``targets``."""
    from .metrics import OutputGramian

    targets = [int(v) for v in targets]
    if len(set(targets)) != len(targets):
        raise LatticeError("target set has duplicate nodes")
    n = len(targets)
    mat = np.zeros((n, n))
    for r in range(n):
        for c in range(r, n):
            mat[r, c] = mat[c, r] = entry_quadrature(params, targets[r] - driver, targets[c] - driver, q)
    return OutputGramian(mat, tuple((t,) for t in targets))
