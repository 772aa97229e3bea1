"""Controllability Gramian entries of infinite lattices by 2d-dimensional quadrature.

Each single-driver entry is the real-form integral

    W_ij(t) = (2 pi)^(-2d) int int [ (alpha sigma + beta omega)(r(t) - 1)
                                     - (beta sigma - alpha omega) s(t) ] / (sigma^2 + omega^2)

over (ihat, jhat) in [-pi, pi]^(2d), with the steady state dropping r and s.
The phases alpha = cos(g_i + g_j), beta = sin(g_i + g_j) (g_i = (i - a).ihat)
are split by the angle-addition formulas, so a whole block of entries
reduces to a few matrix products against two kernel matrices on the
quadrature grid.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import LatticeError, LatticeSpec, UnstableLatticeError, is_stable, node_index, symbol_parts
from .quadrature import QuadratureConfig, default_config, rule

SINGULARITY_GUARD = 1e-13


class QuadratureSingularityError(ArithmeticError):
    """The integrand denominator vanished (or overflowed) at a quadrature node."""


@dataclass(frozen=True)
class IntegrandParts:
    sigma: float
    omega: float
    alpha_a: float
    beta_a: float


@dataclass(frozen=True)
class TimeKernel:
    r: float
    s: float
    t: float


def time_kernel(sigma: float, omega: float, t: float) -> TimeKernel:
    growth = np.exp(sigma * t)
    return TimeKernel(growth * np.cos(omega * t), growth * np.sin(omega * t), t)


def kernel_parts(spec: LatticeSpec, i, j, a, ihat, jhat) -> IntegrandParts:
    """sigma, omega, alpha_a, beta_a at one quadrature point (ihat, jhat)."""
    i, j, a = (np.array(node_index(v, spec.d), dtype=float) for v in (i, j, a))
    ihat = np.atleast_1d(np.asarray(ihat, dtype=float))
    jhat = np.atleast_1d(np.asarray(jhat, dtype=float))
    ci, si = symbol_parts(spec, ihat)
    cj, sj = symbol_parts(spec, jhat)
    phase = (i - a) @ ihat + (j - a) @ jhat
    return IntegrandParts(
        float(ci[0] + cj[0]), float(si[0] + sj[0]), float(np.cos(phase)), float(np.sin(phase))
    )


def _as_nodes(nodes, d: int) -> np.ndarray:
    return np.array([node_index(v, d) for v in nodes], dtype=float).reshape(-1, d)


def _check_dimension(spec: LatticeSpec) -> None:
    if spec.d >= 3:
        warnings.warn(
            f"d={spec.d}: the Gramian integral is {2 * spec.d}-dimensional; "
            "cost grows as points_per_dim^(2d)",
            RuntimeWarning,
            stacklevel=3,
        )


@lru_cache(maxsize=16)
def _grid(spec: LatticeSpec, q: QuadratureConfig):
    """Tensor grid on [-pi, pi]^d with weights, plus the symbol parts on it."""
    x, w = rule(q.points_per_dim, q.scheme)
    pts = np.array(list(itertools.product(x, repeat=spec.d)))
    wts = np.prod(np.array(list(itertools.product(w, repeat=spec.d))), axis=1)
    c, s = symbol_parts(spec, pts)
    for arr in (pts, wts, c, s):
        arr.setflags(write=False)
    return pts, wts, c, s


@lru_cache(maxsize=16)
def _kernels(spec: LatticeSpec, q: QuadratureConfig, t: float | None):
    """Matrices F, H with integrand = alpha F + beta H over the (ihat, jhat) grid."""
    pts, _, c, s = _grid(spec, q)
    sigma = c[:, None] + c[None, :]
    omega = s[:, None] + s[None, :]
    small = np.abs(sigma) + np.abs(omega) < SINGULARITY_GUARD
    if small.any():
        a, b = np.argwhere(small)[0]
        raise QuadratureSingularityError(
            f"sigma^2 + omega^2 vanishes at ihat={pts[a].tolist()}, jhat={pts[b].tolist()}"
        )
    denom = sigma**2 + omega**2
    if t is None:
        F = -sigma / denom
        H = -omega / denom
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            growth = np.exp(sigma * t)
            r1 = growth * np.cos(omega * t) - 1.0
            st = growth * np.sin(omega * t)
            # (r - 1)/sigma is evaluated through expm1 where omega = 0 to avoid cancellation
            r1 = np.where(omega == 0.0, np.expm1(sigma * t), r1)
            F = (sigma * r1 + omega * st) / denom
            H = (omega * r1 - sigma * st) / denom
    bad = ~(np.isfinite(F) & np.isfinite(H))
    if bad.any():
        a, b = np.argwhere(bad)[0]
        raise QuadratureSingularityError(
            f"non-finite integrand at ihat={pts[a].tolist()}, jhat={pts[b].tolist()}"
        )
    F.setflags(write=False)
    H.setflags(write=False)
    return F, H


def _block(spec: LatticeSpec, rel_rows: np.ndarray, rel_cols: np.ndarray, t, q) -> np.ndarray:
    """Single driver at the origin: entries for row nodes x column nodes."""
    pts, wts, _, _ = _grid(spec, q)
    F, H = _kernels(spec, q, t)
    gr = pts @ rel_rows.T
    gc = pts @ rel_cols.T
    Cr, Sr = wts[:, None] * np.cos(gr), wts[:, None] * np.sin(gr)
    Cc, Sc = wts[:, None] * np.cos(gc), wts[:, None] * np.sin(gc)
    FC, FS = F @ Cc, F @ Sc
    HC, HS = H @ Cc, H @ Sc
    total = Cr.T @ FC - Sr.T @ FS + Sr.T @ HC + Cr.T @ HS
    return total / (2.0 * np.pi) ** (2 * spec.d)


def _prepare(spec, drivers, q, t):
    if q is None:
        q = default_config(spec.d)
    _check_dimension(spec)
    drivers = _as_nodes(drivers, spec.d)
    if len(drivers) == 0:
        raise LatticeError("driver set is empty")
    if len({tuple(a) for a in drivers}) != len(drivers):
        raise LatticeError("driver set has duplicate nodes")
    if t is None:
        stable, worst = is_stable(spec)
        if not stable:
            raise UnstableLatticeError(
                f"no steady-state Gramian: max Re phi = {worst:.6g} is not negative"
            )
    else:
        t = float(t)
        if t < 0:
            raise ValueError("time must be non-negative")
    return drivers, q, t


def _gramian_block(spec, drivers, rows, cols, t, q) -> np.ndarray:
    drivers, q, t = _prepare(spec, drivers, q, t)
    rows = _as_nodes(rows, spec.d)
    cols = _as_nodes(cols, spec.d)
    if t == 0.0:
        return np.zeros((len(rows), len(cols)))
    out = np.zeros((len(rows), len(cols)))
    for a in drivers:
        out += _block(spec, rows - a, cols - a, t, q)
    return out


def gramian_entry_t(spec: LatticeSpec, drivers, i, j, t: float, q: QuadratureConfig | None = None) -> float:
    """W_ij(t) for the infinite lattice driven at ``drivers``."""
    return float(_gramian_block(spec, drivers, [i], [j], t, q)[0, 0])


def gramian_entry_ss(spec: LatticeSpec, drivers, i, j, q: QuadratureConfig | None = None) -> float:
    """Steady-state W_ij; the lattice must be stable."""
    return float(_gramian_block(spec, drivers, [i], [j], None, q)[0, 0])


def gramian_block(spec: LatticeSpec, drivers, rows, cols, t: float | None = None, q=None) -> np.ndarray:
    """Rectangular block of W (steady state when ``t`` is None)."""
    return _gramian_block(spec, drivers, rows, cols, t, q)


def output_gramian(spec: LatticeSpec, drivers, targets, t: float | None = None, q=None):
    """Principal submatrix of W on ``targets`` as an :class:`OutputGramian`.

    ``t=None`` selects the steady state.
    """
    from .metrics import OutputGramian

    targets = [node_index(v, spec.d) for v in targets]
    if len(set(targets)) != len(targets):
        raise LatticeError("target set has duplicate nodes")
    full = _gramian_block(spec, drivers, targets, targets, t, q)
    upper = np.triu(full)
    sym = upper + np.triu(full, 1).T
    return OutputGramian(sym, tuple(targets))
