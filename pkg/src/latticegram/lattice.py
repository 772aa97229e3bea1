"""Lattice graph descriptions and the lattice function."""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class LatticeError(ValueError):
    pass


class UnstableLatticeError(LatticeError):
    """Raised when a steady-state quantity is requested for an unstable lattice."""


@dataclass(frozen=True)
class LatticeSpec:
    """An infinite lattice: dimension, neighbor offsets and edge weights.

    ``weights[k]`` is the weight of the edge from node ``i + offsets[k]``
    into node ``i``.
    """

    d: int
    offsets: tuple[tuple[int, ...], ...]
    weights: tuple[float, ...]

    @property
    def offset_array(self) -> np.ndarray:
        return np.array(self.offsets, dtype=float).reshape(len(self.offsets), self.d)

    @property
    def weight_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)

    def weight(self, offset) -> float:
        """Edge weight for ``offset``; zero when the offset is not a neighbor."""
        key = _as_index(offset, self.d)
        try:
            return self.weights[self.offsets.index(key)]
        except ValueError:
            return 0.0

    def is_symmetric(self) -> bool:
        return all(
            self.weight(tuple(-c for c in n)) == w for n, w in zip(self.offsets, self.weights)
        )


def _as_index(value, d: int) -> tuple[int, ...]:
    if isinstance(value, (int, np.integer)):
        value = (value,)
    idx = tuple(int(v) for v in value)
    if len(idx) != d:
        raise LatticeError(f"index {value!r} has {len(idx)} components, expected {d}")
    return idx


def node_index(value, d: int) -> tuple[int, ...]:
    """Normalize an integer or integer sequence into a ``d``-tuple."""
    return _as_index(value, d)


def build_lattice_spec(d: int, offsets, weights) -> LatticeSpec:
    """Validated constructor.

    ``weights`` is either a sequence parallel to ``offsets`` or a mapping
    from offset to weight.
    """
    if int(d) != d or d < 1:
        raise LatticeError(f"dimension must be a positive integer, got {d!r}")
    d = int(d)
    offs = [_as_index(n, d) for n in offsets]
    if not offs:
        raise LatticeError("neighbor set is empty")
    if len(set(offs)) != len(offs):
        raise LatticeError("duplicate offset in neighbor set")
    if isinstance(weights, Mapping):
        wmap = {_as_index(k, d): float(v) for k, v in weights.items()}
        if set(wmap) != set(offs):
            raise LatticeError("weight map keys do not match the offsets")
        ws = [wmap[n] for n in offs]
    else:
        ws = [float(w) for w in weights]
        if len(ws) != len(offs):
            raise LatticeError(f"{len(offs)} offsets but {len(ws)} weights")
    if not all(math.isfinite(w) for w in ws):
        raise LatticeError("weights must be finite")
    return LatticeSpec(d, tuple(offs), tuple(ws))


def nearest_neighbor_1d(p: float, s: float) -> LatticeSpec:
    """The 1-D nearest-neighbor lattice with self-loop ``p`` and coupling ``s``."""
    return build_lattice_spec(1, [0, -1, 1], [p, s, s])


def nearest_neighbor_2d(p: float, s: float) -> LatticeSpec:
    return build_lattice_spec(
        2, [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)], [p, s, s, s, s]
    )


def load_lattice_spec(path) -> LatticeSpec:
    """Read a JSON lattice file with fields ``d``, ``offsets`` and ``weights``."""
    data = json.loads(Path(path).read_text())
    missing = {"d", "offsets", "weights"} - set(data)
    if missing:
        raise LatticeError(f"lattice file lacks fields: {sorted(missing)}")
    return build_lattice_spec(data["d"], data["offsets"], data["weights"])


def dump_lattice_spec(spec: LatticeSpec, path) -> None:
    doc = {"d": spec.d, "offsets": [list(n) for n in spec.offsets], "weights": list(spec.weights)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def lattice_function(spec: LatticeSpec, k) -> complex | np.ndarray:
    """Fourier symbol sum_n psi(n) exp(-1j n.k).

    ``k`` may be a single wavenumber of length ``d`` or an array of shape
    ``(..., d)``; the return matches (scalar or array of shape ``...``).
    """
    k = np.asarray(k, dtype=float)
    if spec.d == 1 and (k.ndim == 0 or k.shape[-1] != 1):
        k = k[..., None]
    if k.shape[-1] != spec.d:
        raise LatticeError(f"wavenumber has {k.shape[-1]} components, expected {spec.d}")
    if np.any(np.abs(k) > np.pi + 1e-12):
        raise LatticeError("wavenumber components must lie in [-pi, pi]")
    phase = k @ spec.offset_array.T
    val = np.exp(-1j * phase) @ spec.weight_array
    return complex(val) if val.ndim == 0 else val


def symbol_parts(spec: LatticeSpec, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(sum psi cos(n.k), sum psi sin(n.k))`` for points ``k`` of shape ``(m, d)``.

    The lattice function is the first minus 1j times the second.
    """
    phase = np.asarray(k, dtype=float).reshape(-1, spec.d) @ spec.offset_array.T
    w = spec.weight_array
    return np.cos(phase) @ w, np.sin(phase) @ w


def _grid(d: int, n: int) -> np.ndarray:
    axis = -np.pi + 2.0 * np.pi * np.arange(n) / n
    return np.array(list(itertools.product(axis, repeat=d)))


def is_stable(spec: LatticeSpec, grid_per_dim: int = 256) -> tuple[bool, float]:
    """Grid test of max Re phi(k) < 0 over [-pi, pi)^d.

    The grid always contains k = 0 and, for even sizes, k = pi.
    """
    if grid_per_dim < 8:
        raise LatticeError("grid_per_dim must be at least 8")
    re, _ = symbol_parts(spec, _grid(spec.d, grid_per_dim))
    worst = float(re.max())
    return worst < 0.0, worst


def lipschitz_bound(spec: LatticeSpec) -> float:
    """Lipschitz constant of Re phi in the max-norm: sum |n|_1 |psi(n)|."""
    return float(sum(sum(abs(c) for c in n) * abs(w) for n, w in zip(spec.offsets, spec.weights)))


def stability_certificate(spec: LatticeSpec, grid_per_dim: int = 256) -> tuple[bool, float]:
    """Certified version of :func:`is_stable`.

    Every point of the torus lies within half a grid spacing (per component)
    of a grid node, so ``max Re phi <= worst + L * pi / grid_per_dim``.
    Returns ``(certified_stable, upper_bound_on_max_re_phi)``.
    """
    _, worst = is_stable(spec, grid_per_dim)
    upper = worst + lipschitz_bound(spec) * np.pi / grid_per_dim
    return upper < 0.0, float(upper)
