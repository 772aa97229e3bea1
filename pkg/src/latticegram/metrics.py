"""Control-energy metrics over output Gramians and their eigenvalue bounds."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import nn1d

CONDITION_WARNING = 1e14


class OutputUncontrollableError(np.linalg.LinAlgError):
    """The output Gramian is singular or indefinite."""

    def __init__(self, smallest_eigenvalue: float):
        self.smallest_eigenvalue = smallest_eigenvalue
        super().__init__(
            f"output Gramian is not positive definite (smallest eigenvalue {smallest_eigenvalue:.6g})"
        )


@dataclass(frozen=True)
class OutputGramian:
    matrix: np.ndarray
    targets: tuple = ()

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"output Gramian must be square, got shape {mat.shape}")
        scale = max(np.abs(mat).max(initial=0.0), np.finfo(float).tiny)
        if np.abs(mat - mat.T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("output Gramian is not symmetric")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if not self.targets:
            object.__setattr__(self, "targets", tuple(range(mat.shape[0])))
        elif len(self.targets) != mat.shape[0]:
            raise ValueError("one target label per row is required")

    @property
    def n_t(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return eigen_symmetric(self.matrix)


def _matrix(gram) -> np.ndarray:
    return gram.matrix if isinstance(gram, OutputGramian) else np.asarray(gram, dtype=float)


# -- eigenvalues ---------------------------------------------------------------------


def eigen_symmetric(matrix, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Accepts a stack of matrices with shape ``(..., n, n)`` and rotates all of
    them together.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    scale = np.abs(a).max(initial=0.0)
    if np.abs(a - np.swapaxes(a, -1, -2)).max(initial=0.0) > 1e-12 * max(scale, 1e-300):
        raise ValueError("eigen_symmetric requires a symmetric matrix")
    n = a.shape[-1]
    a = a.reshape(-1, n, n).copy()
    a = (a + np.swapaxes(a, 1, 2)) / 2
    fro = np.sqrt((a * a).sum(axis=(1, 2)))
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt((a[:, off_mask] ** 2).sum(axis=1))
        if np.all(off <= tol * fro):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = apq != 0.0
                if not active.any():
                    continue
                app, aqq = a[:, p, p], a[:, q, q]
                # a vanishing apq sends tau to inf, which correctly yields t = 0
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    tau = np.where(active, (aqq - app) / (2.0 * apq), 0.0)
                sign = np.where(tau >= 0.0, 1.0, -1.0)
                with np.errstate(over="ignore"):
                    t = np.where(active, sign / (np.abs(tau) + np.hypot(1.0, tau)), 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                c_, s_ = c[:, None], s[:, None]
                colp, colq = a[:, :, p].copy(), a[:, :, q].copy()
                a[:, :, p] = c_ * colp - s_ * colq
                a[:, :, q] = s_ * colp + c_ * colq
                rowp, rowq = a[:, p, :].copy(), a[:, q, :].copy()
                a[:, p, :] = c_ * rowp - s_ * rowq
                a[:, q, :] = s_ * rowp + c_ * rowq
                a[:, p, q] = a[:, q, p] = 0.0
    eig = np.sort(np.diagonal(a, axis1=1, axis2=2), axis=1)
    return eig.reshape(np.shape(matrix)[:-1])


def interlacing_check(full, sub_indices, slack: float = 1e-10) -> bool:
    """Cauchy interlacing for the principal submatrix on ``sub_indices``.

    With X of order n and its principal submatrix Y of order m (ascending
    eigenvalues), checks lambda_k(X) <= lambda_k(Y) <= lambda_{k+n-m}(X).
    """
    x = _matrix(full)
    n = x.shape[0]
    idx = list(sub_indices)
    if not idx or len(set(idx)) != len(idx) or any(not 0 <= k < n for k in idx):
        raise ValueError(f"invalid principal index set {sub_indices!r} for order {n}")
    m = len(idx)
    lx = eigen_symmetric(x)
    ly = eigen_symmetric(x[np.ix_(idx, idx)])
    tol = slack * max(1.0, np.abs(lx).max())
    return bool(np.all(lx[:m] <= ly + tol) and np.all(ly <= lx[n - m:] + tol))


def interlacing_check_all(full, size: int, slack: float = 1e-10) -> bool:
    """Interlacing for every principal submatrix of the given order, batched."""
    import itertools

    x = _matrix(full)
    n = x.shape[0]
    subsets = list(itertools.combinations(range(n), size))
    lx = eigen_symmetric(x)
    stack = np.stack([x[np.ix_(s, s)] for s in subsets])
    ly = eigen_symmetric(stack).reshape(len(subsets), size)
    tol = slack * max(1.0, np.abs(lx).max())
    return bool(np.all(lx[:size] <= ly + tol) and np.all(ly <= lx[n - size:] + tol))


# -- factorization-based metrics -------------------------------------------------------


def _cholesky(gram) -> np.ndarray:
    w = _matrix(gram)
    try:
        lower = np.linalg.cholesky(w)
    except np.linalg.LinAlgError:
        raise OutputUncontrollableError(float(eigen_symmetric(w)[0])) from None
    d = np.diag(lower)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise OutputUncontrollableError(float(eigen_symmetric(w)[0]))
    cond = float(np.linalg.cond(w))
    if cond > CONDITION_WARNING:
        warnings.warn(
            f"output Gramian condition number {cond:.3g}; inverse-based metrics may be unreliable",
            RuntimeWarning,
            stacklevel=3,
        )
    return lower


def min_energy(gram, b) -> float:
    """Optimal cost 1/2 b^T W^-1 b of steering the targets by ``b``."""
    lower = _cholesky(gram)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != lower.shape[0]:
        raise ValueError(f"b has length {b.shape[0]}, expected {lower.shape[0]}")
    y = scipy.linalg.solve_triangular(lower, b, lower=True)
    return 0.5 * float(y @ y)


def trace_inverse(gram) -> float:
    lower = _cholesky(gram)
    inv_lower = scipy.linalg.solve_triangular(lower, np.eye(lower.shape[0]), lower=True)
    return float((inv_lower * inv_lower).sum())


def neg_log_det_scaled(gram, g00: float) -> float:
    """-log det(c W) with c = 1 / (n_t g00)."""
    if not g00 > 0:
        raise ValueError("g00 must be positive")
    lower = _cholesky(gram)
    n = lower.shape[0]
    return float(n * math.log(n * g00) - 2.0 * np.log(np.diag(lower)).sum())


def ellipsoid_volume(gram, conventional: bool = False) -> float:
    """Volume measure pi^(n/2) / Gamma(n/2 + 1) * det(W)^(1/n).

    ``conventional=True`` uses det(W)^(1/2), the Lebesgue volume of
    {y : y^T W^-1 y <= 1}.
    """
    w = _matrix(gram)
    n = w.shape[0]
    sign, logdet = np.linalg.slogdet(w)
    ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    if sign <= 0:
        return 0.0
    return ball * math.exp(logdet * (0.5 if conventional else 1.0 / n))


def gerschgorin_upper(gram) -> float:
    """max_i sum_j |A_ij|, an upper bound on the largest eigenvalue."""
    return float(np.abs(_matrix(gram)).sum(axis=1).max())


def row_sum_upper(gram) -> float:
    """max_i sum_j A_ij; bounds lambda_max when the entries are non-negative."""
    return float(_matrix(gram).sum(axis=1).max())


# -- lattice bounds -------------------------------------------------------------------


class Bound(NamedTuple):
    value: float
    asymptotic: float


def bound_trace_inverse(ell: int, params: "nn1d.NN1DParams") -> Bound:
    """1 / G[ell, ell] and its z**-ell scaling (calibrated at ell = 0)."""
    diag = _diagonal(params, ell)
    return Bound(1.0 / diag[ell], params.z_tilde ** (-ell) / diag[0])


def bound_neg_log_det(ell: int, params: "nn1d.NN1DParams", n_t: int) -> Bound:
    """-log(c G[ell, ell]) with c = 1 / (n_t G00), and -ell log z + log n_t."""
    if n_t < 1:
        raise ValueError("n_t must be at least 1")
    diag = _diagonal(params, ell)
    return Bound(
        -math.log(diag[ell] / (n_t * diag[0])),
        -ell * math.log(params.z_tilde) + math.log(n_t),
    )


def _diagonal(params, ell: int) -> list[float]:
    if ell < 0:
        raise ValueError("ell must be non-negative")
    return nn1d.diagonal_recursion(params, max(ell, 1))


@dataclass
class EnergyReport:
    j_star: float | None
    trace_inverse: float
    neg_log_det_scaled: float
    ellipsoid_volume: float
    gerschgorin_upper: float
    lambda_max: float
    interlacing_lower_bounds: list[float] = field(default_factory=list)
    condition: float = float("nan")


def energy_report(gram, g00: float, b=None) -> EnergyReport:
    """All metrics for one output Gramian.

    ``interlacing_lower_bounds`` lists 1 / W_ii, each a lower bound on
    Tr(W^-1) through lambda_min <= W_ii.
    """
    w = _matrix(gram)
    eig = eigen_symmetric(w)
    return EnergyReport(
        j_star=None if b is None else min_energy(gram, b),
        trace_inverse=trace_inverse(gram),
        neg_log_det_scaled=neg_log_det_scaled(gram, g00),
        ellipsoid_volume=ellipsoid_volume(gram),
        gerschgorin_upper=gerschgorin_upper(gram),
        lambda_max=float(eig[-1]),
        interlacing_lower_bounds=[1.0 / v for v in np.diag(w)],
        condition=float(eig[-1] / eig[0]) if eig[0] > 0 else float("inf"),
    )
