"""Complete elliptic integrals by the arithmetic-geometric mean.

Both functions take the *parameter* ``m`` (so ``K(m) = int_0^{pi/2}
(1 - m sin^2 t)^{-1/2} dt``), not the modulus ``k = sqrt(m)``.  Passing an
``mpmath.mpf`` runs the iteration at the current mpmath working precision.
"""

from __future__ import annotations

import math

import mpmath

K_SINGULAR_MARGIN = 1e-12


def _backend(m):
    if isinstance(m, mpmath.mpf):
        return mpmath.sqrt, +mpmath.pi, mpmath.mpf(2) ** (-mpmath.mp.prec + 4)
    return math.sqrt, math.pi, 4 * 2.0**-53


def _check(m, kind: str) -> None:
    if not (0 <= m <= 1):
        raise ValueError(f"elliptic_{kind}: parameter m={m!r} outside [0, 1)")
    if kind == "K" and m > 1 - K_SINGULAR_MARGIN:
        raise ValueError(f"elliptic_K diverges as m -> 1; got m={m!r}")


def _agm(m):
    """Run the AGM on (1, sqrt(1 - m)); return (agm, sum_n 2^(n-1) c_n^2)."""
    sqrt, _, tol = _backend(m)
    a, b = 1 + 0 * m, sqrt(1 - m)
    weighted = m / 2  # n = 0 term with c_0^2 = m
    scale = 1
    for _ in range(64):
        if abs(a - b) <= tol * a:
            break
        c = (a - b) / 2
        a, b = (a + b) / 2, sqrt(a * b)
        weighted += scale * c * c
        scale *= 2
    return a, weighted


def elliptic_K(m):
    """Complete elliptic integral of the first kind, ``0 <= m < 1``."""
    _check(m, "K")
    _, pi, _ = _backend(m)
    a, _ = _agm(m)
    return pi / (2 * a)


def elliptic_E(m):
    """Complete elliptic integral of the second kind, ``0 <= m <= 1``."""
    _check(m, "E")
    if m == 1:
        return 1 + 0 * m
    _, pi, _ = _backend(m)
    a, weighted = _agm(m)
    return pi / (2 * a) * (1 - weighted)
