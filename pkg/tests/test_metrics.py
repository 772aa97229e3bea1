import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from latticegram import metrics, nn1d
from latticegram.metrics import OutputGramian, OutputUncontrollableError


def random_spd(rng, n):
    m = rng.normal(size=(n, n))
    return m @ m.T + 0.1 * np.eye(n)


def test_output_gramian_validation():
    with pytest.raises(ValueError):
        OutputGramian(np.array([[1.0, 0.5], [0.4, 1.0]]))
    with pytest.raises(ValueError):
        OutputGramian(np.ones((2, 3)))
    g = OutputGramian(np.eye(2))
    assert g.targets == (0, 1)
    assert not g.matrix.flags.writeable


def test_min_energy_scalar():
    assert metrics.min_energy(OutputGramian([[2.0]]), [4.0]) == pytest.approx(4.0)
    assert metrics.min_energy(OutputGramian(np.eye(3)), np.zeros(3)) == 0.0


def test_min_energy_chain(chain):
    g22 = nn1d.diagonal_recursion(chain, 2)[2]
    gram = nn1d.output_gramian(chain, [2])
    assert metrics.min_energy(gram, [1.0]) == pytest.approx(1 / (2 * g22), rel=1e-12)


def test_min_energy_matches_eigen_expansion():
    rng = np.random.default_rng(3)
    for n in range(1, 7):
        w = random_spd(rng, n)
        b = rng.normal(size=n)
        lam, vec = np.linalg.eigh(w)
        expected = 0.5 * sum((vec[:, k] @ b) ** 2 / lam[k] for k in range(n))
        assert metrics.min_energy(w, b) == pytest.approx(expected, rel=1e-10)


def test_uncontrollable():
    singular = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(OutputUncontrollableError) as info:
        metrics.min_energy(singular, [1.0, 0.0])
    assert info.value.smallest_eigenvalue == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(OutputUncontrollableError):
        metrics.trace_inverse(np.diag([1.0, -1.0]))


def test_ill_conditioned_warns():
    with pytest.warns(RuntimeWarning, match="condition number"):
        metrics.trace_inverse(np.diag([1.0, 1e-15]))


def test_trace_inverse_values():
    assert metrics.trace_inverse(np.eye(3)) == pytest.approx(3.0)
    assert metrics.trace_inverse(np.diag([2.0, 4.0])) == pytest.approx(0.75)
    w = random_spd(np.random.default_rng(5), 5)
    assert metrics.trace_inverse(w) == pytest.approx((1 / np.linalg.eigvalsh(w)).sum(), rel=1e-10)


def test_neg_log_det_values(chain):
    g00 = nn1d.diagonal_seeds(chain)[0]
    assert metrics.neg_log_det_scaled([[g00]], g00) == pytest.approx(0.0, abs=1e-15)
    assert metrics.neg_log_det_scaled(np.diag([0.3, 0.3]), 0.3) == pytest.approx(2 * math.log(2))
    gram = nn1d.output_gramian(chain, [0, 1])
    value = metrics.neg_log_det_scaled(gram, g00)
    assert value > 0
    assert value >= metrics.bound_neg_log_det(1, chain, 2).value
    assert value >= -math.log(chain.z_tilde)


def test_ellipsoid_volume():
    assert metrics.ellipsoid_volume([[9.0]]) == pytest.approx(18.0)
    assert metrics.ellipsoid_volume(np.eye(2)) == pytest.approx(math.pi)
    w = random_spd(np.random.default_rng(8), 2)
    assert metrics.ellipsoid_volume(2.5 * w) == pytest.approx(2.5 * metrics.ellipsoid_volume(w))
    assert metrics.ellipsoid_volume(np.diag([4.0, 9.0]), conventional=True) == pytest.approx(6 * math.pi)
    assert metrics.ellipsoid_volume(np.zeros((2, 2))) == 0.0


def test_gerschgorin():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert metrics.gerschgorin_upper(a) == 3.0
    assert metrics.eigen_symmetric(a)[-1] == pytest.approx(3.0)
    assert metrics.gerschgorin_upper(np.diag([5.0, 1.0])) == 5.0
    assert metrics.gerschgorin_upper(np.array([[1.0, -2.0], [-2.0, 1.0]])) == 3.0


def test_gerschgorin_chain(chain):
    gram = nn1d.output_gramian(chain, [0, 1, 2, 3])
    g00 = nn1d.diagonal_seeds(chain)[0]
    assert gram.eigenvalues()[-1] <= metrics.gerschgorin_upper(gram) <= 4 * g00
    assert metrics.row_sum_upper(gram) == pytest.approx(metrics.gerschgorin_upper(gram))


def test_eigen_small_cases():
    np.testing.assert_allclose(metrics.eigen_symmetric(np.eye(4)), np.ones(4))
    np.testing.assert_allclose(metrics.eigen_symmetric([[0.0, 1.0], [1.0, 0.0]]), [-1.0, 1.0], atol=1e-15)
    with pytest.raises(ValueError):
        metrics.eigen_symmetric([[1.0, 2.0], [0.0, 1.0]])


@pytest.mark.parametrize("seed", range(5))
def test_eigen_identities(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(6, 6))
    a = m + m.T
    lam = metrics.eigen_symmetric(a)
    assert lam.sum() == pytest.approx(np.trace(a), abs=1e-12 * np.abs(a).sum())
    assert (lam**2).sum() == pytest.approx((a * a).sum(), rel=1e-12)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(a), atol=1e-12 * np.abs(lam).max())


def test_eigen_batched():
    rng = np.random.default_rng(11)
    stack = np.array([random_spd(rng, 4) for _ in range(10)])
    np.testing.assert_allclose(metrics.eigen_symmetric(stack), np.linalg.eigvalsh(stack), rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(-3, 3)))
def test_eigen_property(m):
    a = m + m.T
    np.testing.assert_allclose(metrics.eigen_symmetric(a), np.linalg.eigvalsh(a), atol=1e-11 * max(1, np.abs(a).max()))


def test_interlacing_cases():
    rng = np.random.default_rng(2)
    a = random_spd(rng, 6)
    lam = metrics.eigen_symmetric(a)
    for k in range(6):
        assert lam[0] <= a[k, k] <= lam[-1]
        assert metrics.interlacing_check(a, [k])
    assert metrics.interlacing_check(a, range(6))
    assert all(metrics.interlacing_check(a, s) for s in itertools.combinations(range(6), 3))
    assert metrics.interlacing_check_all(a, 3)
    with pytest.raises(ValueError):
        metrics.interlacing_check(a, [0, 0])
    with pytest.raises(ValueError):
        metrics.interlacing_check(a, [7])


def test_bound_trace_inverse(chain):
    g = nn1d.diagonal_recursion(chain, 30)
    assert metrics.bound_trace_inverse(0, chain).value == pytest.approx(1 / g[0])
    assert metrics.bound_trace_inverse(4, chain).value == pytest.approx(1 / g[4])
    growth = metrics.bound_trace_inverse(30, chain).value / metrics.bound_trace_inverse(29, chain).value
    assert growth == pytest.approx(1 / chain.z_tilde, rel=0.02)


def test_bound_neg_log_det(chain):
    assert metrics.bound_neg_log_det(0, chain, 1).value == pytest.approx(0.0, abs=1e-15)
    slope = metrics.bound_neg_log_det(40, chain, 1).value - metrics.bound_neg_log_det(39, chain, 1).value
    assert slope == pytest.approx(-math.log(chain.z_tilde), rel=0.01)
    b = metrics.bound_neg_log_det(5, chain, 3)
    assert b.asymptotic == pytest.approx(-5 * math.log(chain.z_tilde) + math.log(3))


def test_fig3_family_bounds(chain):
    nodes = list(range(8))
    full = nn1d.output_gramian(chain, nodes).matrix
    g00 = nn1d.diagonal_seeds(chain)[0]
    for n_t in (1, 2, 3):
        for subset in itertools.combinations(nodes, n_t):
            w = full[np.ix_(subset, subset)]
            ell = max(subset)
            tr = metrics.trace_inverse(w)
            nld = metrics.neg_log_det_scaled(w, g00)
            assert tr >= n_t**2 / np.trace(w) * (1 - 1e-12)
            assert tr >= metrics.bound_trace_inverse(ell, chain).value * (1 - 1e-12)
            assert nld >= metrics.bound_neg_log_det(ell, chain, n_t).value - 1e-12
            assert metrics.gerschgorin_upper(w) >= metrics.eigen_symmetric(w)[-1] - 1e-12
            if n_t == 1:
                assert tr == pytest.approx(metrics.bound_trace_inverse(ell, chain).value, rel=1e-10)
                assert nld == pytest.approx(metrics.bound_neg_log_det(ell, chain, 1).value, abs=1e-10)


def test_energy_report(chain):
    gram = nn1d.output_gramian(chain, [0, 2])
    g00 = nn1d.diagonal_seeds(chain)[0]
    rep = metrics.energy_report(gram, g00, [1.0, 0.5])
    assert rep.j_star > 0
    assert rep.gerschgorin_upper >= rep.lambda_max
    assert min(rep.interlacing_lower_bounds) <= rep.trace_inverse
    assert metrics.energy_report(gram, g00).j_star is None
