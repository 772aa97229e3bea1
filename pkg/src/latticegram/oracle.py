"""Brute-force reference: truncated lattices as dense finite systems.

A window of the lattice with open boundaries becomes ``x' = A x + B u``;
Gramians come from the Lyapunov equation or from integrating its ODE, and
minimum-energy transfers are simulated directly.  Everything here is dense
and meant for desk-scale windows (a few hundred nodes).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .lattice import LatticeError, LatticeSpec, node_index


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class FiniteSystem:
    n: int
    node_coords: tuple[tuple[int, ...], ...]
    A: np.ndarray
    B: np.ndarray

    def row(self, node) -> int:
        d = len(self.node_coords[0])
        try:
            return self._rows[node_index(node, d)]
        except KeyError:
            raise OracleError(f"node {node!r} is outside the window") from None

    @property
    def _rows(self) -> dict:
        return {c: r for r, c in enumerate(self.node_coords)}

    def rows(self, nodes) -> list[int]:
        lookup = self._rows
        d = len(self.node_coords[0])
        out = []
        for v in nodes:
            key = node_index(v, d)
            if key not in lookup:
                raise OracleError(f"node {v!r} is outside the window")
            out.append(lookup[key])
        return out


@dataclass
class ControlRun:
    t_f: float
    x0: np.ndarray
    targets: list
    x_f: np.ndarray
    energy: float
    final_error: float
    j_star: float
    times: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)


def truncate(spec: LatticeSpec, radius: int, drivers) -> FiniteSystem:
    """The window {-radius..radius}^d with edges leaving it dropped."""
    if radius < 1:
        raise LatticeError("radius must be positive")
    coords = list(itertools.product(range(-radius, radius + 1), repeat=spec.d))
    rows = {c: r for r, c in enumerate(coords)}
    n = len(coords)
    A = np.zeros((n, n))
    for r, c in enumerate(coords):
        for off, w in zip(spec.offsets, spec.weights):
            nb = tuple(ci + oi for ci, oi in zip(c, off))
            col = rows.get(nb)
            if col is not None:
                A[r, col] += w
    drivers = [node_index(a, spec.d) for a in drivers]
    B = np.zeros((n, len(drivers)))
    for k, a in enumerate(drivers):
        if a not in rows:
            raise LatticeError(f"driver {a} lies outside the radius-{radius} window")
        B[rows[a], k] = 1.0
    A.setflags(write=False)
    B.setflags(write=False)
    return FiniteSystem(n, tuple(coords), A, B)


def _require_hurwitz(A: np.ndarray) -> None:
    worst = np.linalg.eigvals(A).real.max()
    if worst >= 0:
        raise OracleError(f"drift matrix is not Hurwitz (max Re eig = {worst:.6g})")


def lyapunov_steady(sys: FiniteSystem) -> np.ndarray:
    """W with A W + W A^T + B B^T = 0 (Bartels-Stewart)."""
    _require_hurwitz(sys.A)
    Q = sys.B @ sys.B.T
    W = scipy.linalg.solve_continuous_lyapunov(sys.A, -Q)
    W = (W + W.T) / 2
    resid = np.linalg.norm(sys.A @ W + W @ sys.A.T + Q)
    if resid > 1e-10 * np.linalg.norm(Q):
        raise OracleError(f"Lyapunov residual {resid:.3g} exceeds tolerance")
    return W


def lyapunov_kronecker(A, Q) -> np.ndarray:
    """Solve A W + W A^T + Q = 0 through the vectorized (Kronecker) system.

    Dense in n^2 unknowns; only for small n (cross-checking).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    eye = np.eye(n)
    M = np.kron(eye, A) + np.kron(A, eye)
    w = np.linalg.solve(M, -np.asarray(Q, dtype=float).reshape(-1, order="F"))
    return w.reshape(n, n, order="F")


def _rk4_gramian(A, Q, t, steps):
    h = t / steps
    W = np.zeros_like(Q)

    def f(X):
        return A @ X + X @ A.T + Q

    for _ in range(steps):
        k1 = f(W)
        k2 = f(W + 0.5 * h * k1)
        k3 = f(W + 0.5 * h * k2)
        k4 = f(W + h * k3)
        W = W + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return W


def gramian_ode(sys: FiniteSystem, t: float, steps: int | None = None, tol: float = 1e-8) -> np.ndarray:
    """W(t) from W' = A W + W A^T + B B^T, W(0) = 0, by fixed-step RK4.

    With ``steps=None`` the step count starts from a stability-safe value
    and doubles until two successive results differ by less than ``tol``
    (max-norm); the finer one is returned.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    Q = sys.B @ sys.B.T
    if t == 0:
        return np.zeros_like(Q)
    if steps is not None:
        return _rk4_gramian(sys.A, Q, t, int(steps))
    rho = 2.0 * np.abs(np.linalg.eigvals(sys.A)).max()
    steps = max(8, int(np.ceil(t * rho / 1.0)))
    prev = _rk4_gramian(sys.A, Q, t, steps)
    for _ in range(20):
        steps *= 2
        cur = _rk4_gramian(sys.A, Q, t, steps)
        if np.abs(cur - prev).max() < tol:
            return cur
        prev = cur
    raise OracleError("RK4 step halving did not converge")


def simulate(sys: FiniteSystem, x0, u, t_f: float) -> np.ndarray:
    """RK4 trajectory under inputs sampled on the half-step grid.

    ``u`` has shape ``(2 N + 1, n_d)`` with samples at t = k t_f / (2 N);
    returns the states at the N + 1 full steps.
    """
    u = np.asarray(u, dtype=float)
    steps = (u.shape[0] - 1) // 2
    if 2 * steps + 1 != u.shape[0]:
        raise ValueError("input samples must cover an odd number of half-step nodes")
    h = t_f / steps
    x = np.array(x0, dtype=float)
    A, B = sys.A, sys.B
    traj = [x]
    for k in range(steps):
        u0, um, u1 = B @ u[2 * k], B @ u[2 * k + 1], B @ u[2 * k + 2]
        k1 = A @ x + u0
        k2 = A @ (x + 0.5 * h * k1) + um
        k3 = A @ (x + 0.5 * h * k2) + um
        k4 = A @ (x + h * k3) + u1
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        traj.append(x)
    return np.array(traj)


def input_energy(u, t_f: float) -> float:
    """1/2 int |u|^2 dt by composite Simpson on the half-step grid."""
    u = np.asarray(u, dtype=float)
    sq = (u * u).sum(axis=1)
    h = t_f / (len(sq) - 1)
    return 0.5 * h / 3.0 * (sq[0] + sq[-1] + 4 * sq[1:-1:2].sum() + 2 * sq[2:-1:2].sum())


def min_energy_control(sys: FiniteSystem, x0, targets, x_f, t_f: float, steps: int = 2000) -> ControlRun:
    """Simulate the minimum-energy transfer of the target states to ``x_f``.

    The input is u(t) = B^T exp(A^T (t_f - t)) C^T Wbar^-1 b, with C the
    target selector, Wbar = C W(t_f) C^T and b = x_f - C exp(A t_f) x0.
    """
    from .metrics import OutputUncontrollableError, min_energy

    x0 = np.zeros(sys.n) if x0 is None else np.asarray(x0, dtype=float)
    rows = sys.rows(targets)
    x_f = np.asarray(x_f, dtype=float).reshape(-1)
    if len(rows) != len(x_f):
        raise ValueError("one final value per target is required")
    W = gramian_ode(sys, t_f)
    Wbar = W[np.ix_(rows, rows)]
    b = x_f - (scipy.linalg.expm(sys.A * t_f) @ x0)[rows]
    try:
        nu = np.linalg.solve(np.linalg.cholesky(Wbar).T, np.linalg.solve(np.linalg.cholesky(Wbar), b))
    except np.linalg.LinAlgError:
        raise OutputUncontrollableError(float(np.linalg.eigvalsh(Wbar)[0])) from None
    j_star = min_energy(Wbar, b)
    half = t_f / (2 * steps)
    back = scipy.linalg.expm(sys.A.T * half)
    lam = np.zeros(sys.n)
    lam[rows] = nu
    costate = np.empty((2 * steps + 1, sys.n))
    for k in range(2 * steps, -1, -1):
        costate[k] = lam
        lam = back @ lam
    u = costate @ sys.B
    traj = simulate(sys, x0, u, t_f)
    error = float(np.linalg.norm(traj[-1][rows] - x_f))
    times = np.linspace(0.0, t_f, 2 * steps + 1)
    return ControlRun(t_f, x0, list(targets), x_f, input_energy(u, t_f), error, j_star, times, u)
