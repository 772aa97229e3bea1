"""Single-driver placement: exact metric ranking against the minimax-distance choice."""

from __future__ import annotations

import functools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from . import metrics, nn1d, spectral
from .lattice import LatticeSpec, node_index

METRICS = ("trace_inverse", "neg_log_det_scaled")
# metric values closer than this are ties (mirror-image candidates agree only to rounding)
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class PlacementProblem:
    lattice: nn1d.NN1DParams | LatticeSpec
    targets: tuple
    candidates: tuple
    metric: str = "trace_inverse"

    def __post_init__(self):
        if not self.targets:
            raise ValueError("target set is empty")
        if not self.candidates:
            raise ValueError("candidate set is empty")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; choose from {METRICS}")


@dataclass
class CandidateResult:
    candidate: object
    value: float
    ell: int
    bound: float
    controllable: bool = True


@dataclass
class PlacementReport:
    rows: list[CandidateResult]
    exact_winner: object
    heuristic_winner: object
    spearman: float
    ranking: list = field(default_factory=list)


def max_distance(a, targets) -> int:
    """Largest hop distance |i - a| from the driver to a target on the 1-D lattice."""
    a = node_index(a, 1)[0]
    return max(abs(node_index(t, 1)[0] - a) for t in targets)


def hop_distance(spec: LatticeSpec, source, target, radius: int = 32) -> int | None:
    """Shortest directed path length from ``source`` to ``target``.

    An edge carries node i + n into node i, so from ``v`` one step reaches
    ``v - n``.  The search stays inside the box of half-width ``radius``
    around the source; ``None`` means no path within it.
    """
    src = node_index(source, spec.d)
    dst = node_index(target, spec.d)
    steps = [tuple(-c for c in n) for n in spec.offsets if any(n)]
    seen = {src: 0}
    todo = deque([src])
    while todo:
        v = todo.popleft()
        if v == dst:
            return seen[v]
        for st in steps:
            w = tuple(a + b for a, b in zip(v, st))
            if w not in seen and max(abs(a - b) for a, b in zip(w, src)) <= radius:
                seen[w] = seen[v] + 1
                todo.append(w)
    return None


def distance_heuristic(targets, candidates):
    """Candidate minimizing the largest distance to a target (ties to the smaller index)."""
    return min(candidates, key=lambda c: (max_distance(c, targets), node_index(c, 1)))


def _lattice_gramian(problem: PlacementProblem, a, q):
    if isinstance(problem.lattice, nn1d.NN1DParams):
        gram = nn1d.output_gramian(problem.lattice, [node_index(t, 1)[0] for t in problem.targets], node_index(a, 1)[0], q)
        g00 = nn1d.diagonal_seeds(problem.lattice)[0]
    else:
        spec = problem.lattice
        gram = spectral.output_gramian(spec, [a], problem.targets, None, q)
        g00 = spectral.gramian_entry_ss(spec, [a], a, a, q)
    return gram, g00


def _bound(problem: PlacementProblem, gram, ell: int, g00: float) -> float:
    n_t = gram.n_t
    if isinstance(problem.lattice, nn1d.NN1DParams):
        if problem.metric == "trace_inverse":
            return metrics.bound_trace_inverse(ell, problem.lattice).value
        return metrics.bound_neg_log_det(ell, problem.lattice, n_t).value
    # general lattice: lambda_min <= min_i W_ii
    smallest = float(np.diag(gram.matrix).min())
    if problem.metric == "trace_inverse":
        return 1.0 / smallest
    return -math.log(smallest / (n_t * g00))


def rank_candidates(problem: PlacementProblem, q=None) -> PlacementReport:
    rows = []
    for a in problem.candidates:
        gram, g00 = _lattice_gramian(problem, a, q)
        if isinstance(problem.lattice, nn1d.NN1DParams):
            ell = max_distance(a, problem.targets)
        else:
            dists = [hop_distance(problem.lattice, a, t) for t in problem.targets]
            ell = -1 if None in dists else max(dists)
        bound = _bound(problem, gram, max(ell, 0), g00)
        try:
            if problem.metric == "trace_inverse":
                value = metrics.trace_inverse(gram)
            else:
                value = metrics.neg_log_det_scaled(gram, g00)
            rows.append(CandidateResult(a, value, ell, bound))
        except metrics.OutputUncontrollableError:
            rows.append(CandidateResult(a, math.inf, ell, bound, controllable=False))

    def compare(x: CandidateResult, y: CandidateResult) -> int:
        if x.controllable != y.controllable:
            return -1 if x.controllable else 1
        if not math.isclose(x.value, y.value, rel_tol=TIE_RTOL):
            return -1 if x.value < y.value else 1
        kx = (x.ell, node_index(x.candidate, _dim(problem)))
        ky = (y.ell, node_index(y.candidate, _dim(problem)))
        return (kx > ky) - (kx < ky)

    ranking = sorted(rows, key=functools.cmp_to_key(compare))
    finite = [r for r in rows if r.controllable]
    if len(finite) >= 2 and len({r.ell for r in finite}) > 1:
        rho = float(scipy.stats.spearmanr([r.ell for r in finite], [r.value for r in finite])[0])
    else:
        rho = float("nan")
    if isinstance(problem.lattice, nn1d.NN1DParams):
        heuristic = distance_heuristic(problem.targets, problem.candidates)
    else:
        heuristic = min(
            (r for r in rows if r.ell >= 0),
            key=lambda r: (r.ell, node_index(r.candidate, _dim(problem))),
            default=rows[0],
        ).candidate
    return PlacementReport(rows, ranking[0].candidate, heuristic, rho, [r.candidate for r in ranking])


def _dim(problem: PlacementProblem) -> int:
    return 1 if isinstance(problem.lattice, nn1d.NN1DParams) else problem.lattice.d
