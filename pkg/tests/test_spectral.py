import math

import numpy as np
import pytest

from latticegram import oracle, spectral
from latticegram.lattice import UnstableLatticeError, build_lattice_spec, nearest_neighbor_1d
from latticegram.quadrature import QuadratureConfig

G00_CHAIN = 0.192011684839613834170839527689  # K(4/9) / (3 pi), mpmath at 30 digits


def test_kernel_parts_origin():
    parts = spectral.kernel_parts(nearest_neighbor_1d(-3, 1), 4, 4, 4, 0.0, 0.0)
    assert parts.sigma == pytest.approx(2 * (-3 + 2))
    assert parts.omega == 0.0
    assert (parts.alpha_a, parts.beta_a) == (1.0, 0.0)


def test_kernel_parts_sigma_at_pi():
    parts = spectral.kernel_parts(nearest_neighbor_1d(-3, 1), 0, 0, 0, np.pi, 0.0)
    assert parts.sigma == pytest.approx(-6.0)


def test_kernel_parts_beta_odd(fig1b):
    k1, k2 = np.array([0.3, -1.1]), np.array([2.0, 0.4])
    plus = spectral.kernel_parts(fig1b, (2, 1), (-1, 3), (0, 1), k1, k2)
    minus = spectral.kernel_parts(fig1b, (2, 1), (-1, 3), (0, 1), -k1, -k2)
    assert minus.beta_a == pytest.approx(-plus.beta_a)
    assert minus.alpha_a == pytest.approx(plus.alpha_a)
    assert plus.alpha_a**2 + plus.beta_a**2 == pytest.approx(1.0)
    assert abs(plus.sigma) <= 2 * sum(abs(w) for w in fig1b.weights)


def test_time_kernel_at_zero():
    tk = spectral.time_kernel(-2.0, 0.7, 0.0)
    assert (tk.r, tk.s) == (1.0, 0.0)


def test_zero_time(fig1b):
    assert spectral.gramian_entry_t(fig1b, [(0, 0)], (0, 0), (1, 0), 0.0) == 0.0


@pytest.mark.parametrize("t", [0.3, 1.0, 4.0])
def test_isolated_node_time(isolated, t):
    p = isolated.weights[0]
    assert spectral.gramian_entry_t(isolated, [2], 2, 2, t) == pytest.approx(math.expm1(2 * p * t) / (2 * p), rel=1e-12)
    assert spectral.gramian_entry_t(isolated, [2], 2, 3, t) == pytest.approx(0.0, abs=1e-15)


def test_isolated_node_steady(isolated):
    p = isolated.weights[0]
    assert spectral.gramian_entry_ss(isolated, [0], 0, 0) == pytest.approx(-1 / (2 * p), rel=1e-13)
    assert spectral.gramian_entry_ss(isolated, [0], 1, 0) == pytest.approx(0.0, abs=1e-15)
    gram = spectral.output_gramian(isolated, [0], [0])
    assert gram.matrix[0, 0] == pytest.approx(-1 / (2 * p))


def test_chain_g00(chain_spec):
    assert spectral.gramian_entry_ss(chain_spec, [0], 0, 0) == pytest.approx(G00_CHAIN, rel=1e-13)


def test_driver_additivity(fig1b):
    a, b = (0, 0), (1, -1)
    for i, j in [((0, 0), (0, 0)), ((1, 0), (0, 1)), ((2, -1), (0, 0))]:
        both = spectral.gramian_entry_ss(fig1b, [a, b], i, j)
        assert both == pytest.approx(
            spectral.gramian_entry_ss(fig1b, [a], i, j) + spectral.gramian_entry_ss(fig1b, [b], i, j), rel=1e-12
        )


def test_duplicate_drivers_rejected(fig1b):
    with pytest.raises(ValueError):
        spectral.gramian_entry_ss(fig1b, [(0, 0), (0, 0)], (0, 0), (0, 0))


def test_unstable_rejected():
    with pytest.raises(UnstableLatticeError):
        spectral.gramian_entry_ss(nearest_neighbor_1d(-1.0, 1.0), [0], 0, 0)


def test_singularity_guard():
    marginal = nearest_neighbor_1d(-2.0, 1.0)
    with pytest.raises(spectral.QuadratureSingularityError, match="ihat"):
        spectral.gramian_entry_t(marginal, [0], 0, 0, 1.0, QuadratureConfig(16, "tensor-trapezoid"))


def test_symmetry_directed(fig1b):
    nodes = [(0, 0), (1, 0), (0, 1), (-1, 2), (2, 2)]
    for t in (None, 0.7):
        block = spectral.gramian_block(fig1b, [(0, 0)], nodes, nodes, t)
        np.testing.assert_allclose(block, block.T, atol=1e-14)


def test_output_gramian_exactly_symmetric(fig1b):
    gram = spectral.output_gramian(fig1b, [(0, 0), (1, 1)], [(0, 0), (1, 0), (0, 1), (1, 1)])
    assert np.array_equal(gram.matrix, gram.matrix.T)
    assert gram.eigenvalues()[0] >= -1e-10 * np.trace(gram.matrix)


def test_translation_invariance(fig1b):
    a = (3, -2)
    for i, j in [((0, 0), (0, 0)), ((1, 0), (0, 1)), ((-1, 1), (2, 0))]:
        shifted_i = tuple(x + y for x, y in zip(i, a))
        shifted_j = tuple(x + y for x, y in zip(j, a))
        assert spectral.gramian_entry_ss(fig1b, [a], shifted_i, shifted_j) == pytest.approx(
            spectral.gramian_entry_ss(fig1b, [(0, 0)], i, j), abs=1e-15
        )


def test_monotone_diagonal_in_time(fig1b):
    times = [0.1, 0.5, 1.0, 2.0, 5.0]
    for node in [(0, 0), (1, 0), (-1, -1)]:
        vals = [spectral.gramian_entry_t(fig1b, [(0, 0)], node, node, t) for t in times]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_converges_to_steady_state(chain_spec):
    ss = spectral.gramian_entry_ss(chain_spec, [0], 1, 2)
    gaps = [abs(spectral.gramian_entry_t(chain_spec, [0], 1, 2, t) - ss) for t in (1.0, 3.0, 6.0, 12.0)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    # decay governed by exp(2 max Re phi t) with max Re phi = -1
    assert gaps[-1] < 10 * math.exp(-2 * 12.0)


def test_lyapunov_ode_residual(fig1b):
    """Central difference in t against the right-hand side of the Gramian ODE."""
    t, h = 1.0, 1e-3
    a = (0, 0)
    i, j = (0, 0), (1, 0)

    def W(node_i, node_j, time):
        return spectral.gramian_entry_t(fig1b, [a], node_i, node_j, time)

    deriv = (W(i, j, t + h) - W(i, j, t - h)) / (2 * h)
    rhs = 0.0
    for n, w in zip(fig1b.offsets, fig1b.weights):
        rhs += w * W(tuple(x + y for x, y in zip(i, n)), j, t)
        rhs += w * W(i, tuple(x + y for x, y in zip(j, n)), t)
    rhs += float(i == a and j == a)
    assert deriv == pytest.approx(rhs, abs=1e-6)


def test_chain_vs_oracle_time(chain_spec):
    sysm = oracle.truncate(chain_spec, 100, [0])
    W5 = oracle.gramian_ode(sysm, 5.0)
    r = sysm.row(0)
    assert spectral.gramian_entry_t(chain_spec, [0], 0, 0, 5.0) == pytest.approx(W5[r, r], abs=1e-6)


def test_output_gramian_vs_oracle(chain_spec):
    gram = spectral.output_gramian(chain_spec, [0], [0, 1, 2])
    sysm = oracle.truncate(chain_spec, 100, [0])
    rows = sysm.rows([0, 1, 2])
    W = oracle.lyapunov_steady(sysm)[np.ix_(rows, rows)]
    np.testing.assert_allclose(gram.matrix, W, atol=1e-6)


def test_directed_vs_oracle(fig1b):
    nodes = [(0, 0), (1, 0), (0, 1), (-1, -1)]
    gram = spectral.output_gramian(fig1b, [(0, 0)], nodes)
    sysm = oracle.truncate(fig1b, 8, [(0, 0)])
    rows = sysm.rows(nodes)
    W = oracle.lyapunov_steady(sysm)[np.ix_(rows, rows)]
    np.testing.assert_allclose(gram.matrix, W, atol=1e-6)


def test_trapezoid_scheme_agrees(chain_spec):
    gl = spectral.gramian_entry_ss(chain_spec, [0], 0, 3)
    tr = spectral.gramian_entry_ss(chain_spec, [0], 0, 3, QuadratureConfig(48, "tensor-trapezoid"))
    assert tr == pytest.approx(gl, abs=1e-14)


def test_three_dimensional_warns():
    spec = build_lattice_spec(3, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], [-6, 1, 1, 1])
    with pytest.warns(RuntimeWarning, match="d=3"):
        val = spectral.gramian_entry_ss(spec, [(0, 0, 0)], (0, 0, 0), (0, 0, 0), QuadratureConfig(6))
    assert val > 0
