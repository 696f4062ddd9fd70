'''
End-to-end checks of the published counts, transition points and
measure identities at k = 2.
'''
import numpy as np
import numpy.testing as npt
import pytest

from sosggm.branches import (asymmetric_discriminant, find_branch, p2_tau_roots, p3_find_theta_c1, phase_count,
                             solve_period)
from sosggm.measure import FiniteSubtree, check_consistency, mixed_marginal
from sosggm.model import ModelParams, PeriodicLaw, critical_constants
from sosggm.sweep import Sweep, refine_transitions, sweep_row
from sosggm.verify import run_verify


def _nu(q, theta, k=2):
    return phase_count(ModelParams(k, theta), periods=(q,)).nu[q]


def test_period_2_staircase():
    assert [_nu(2, theta) for theta in (1.0, 2.0, 4.0, 6.0, 7.0, 10.0)] == [2, 1, 2, 2, 6, 6]


def test_period_4_staircase_and_second_pair():
    assert [_nu(4, theta) for theta in (1.0, 3.0, 6.0, 6.5, 7.0)] == [1, 2, 3, 4, 5]
    rows = [sweep_row(4, ModelParams(2, theta)) for theta in (6.5, 7.0)]
    (certificate,) = refine_transitions(4, 2, rows, tol=1e-4)
    assert certificate.hi - certificate.lo <= 1e-3
    assert abs(certificate.theta - 6.766) < 1e-3
    assert (certificate.count_lo, certificate.count_hi) == (4, 5)


def test_period_3_pattern():
    assert _nu(3, 3.0) == 1
    assert _nu(3, critical_constants(2).theta_cr) == 3
    assert _nu(3, 10.0) == 5
    certificate = p3_find_theta_c1(2)
    assert certificate.count_lo == 1 and certificate.count_hi > 1
    assert certificate.lo < certificate.hi


def test_tau_roots_are_reciprocal():
    for theta in np.linspace(6.0, 20.0, 51)[1:]:
        roots = p2_tau_roots(ModelParams(2, float(theta))).roots
        assert len(roots) == 2
        assert abs(roots[0]*roots[1] - 1) < 1e-10


@pytest.mark.slow
def test_residual_gate():
    for k in (2, 3):
        report = run_verify(k, level='full', names=['residual'])
        assert report.passed, report.summary()
        assert report.suites[0].checks >= 100


@pytest.mark.slow
def test_oracle_equivalence():
    report = run_verify(2, level='full', names=['oracle'])
    assert report.passed, report.summary()
    assert report.suites[0].checks == 20


@pytest.mark.parametrize('q, theta', [(2, 7.0), (3, 10.0), (4, 8.0)])
def test_measure_consistency_per_regime(q, theta):
    params = ModelParams(2, theta)
    law = solve_period(q, params)[-1].law
    small, large = FiniteSubtree(2, 1), FiniteSubtree(2, 2)
    assert check_consistency(law, small, large, params) < 1e-12
    for i in range(1, q):
        values = list(law.values)
        values[i] += 0.1
        assert check_consistency(PeriodicLaw(tuple(values)), small, large, params) > 1e-6


def test_shift_partners_give_the_same_measure():
    params = ModelParams(2, 7.0)
    branches = solve_period(2, params)
    tree = FiniteSubtree(2, 2)
    low, high = find_branch(branches, 'X_EQ_1.0'), find_branch(branches, 'X_EQ_1.1')
    npt.assert_allclose(low.values[1]*high.values[1], 1.0, rtol=1e-12)
    npt.assert_allclose(mixed_marginal(low.law, tree, params).probabilities,
                        mixed_marginal(high.law, tree, params).probabilities, atol=1e-12)


@pytest.mark.slow
def test_period_2_sweep_features():
    sweep = Sweep(2, 2, 0.5, 10.0, 400)
    rows = sweep.run()
    thetas = np.array([row.theta for row in rows])

    diagonal = [(row.theta, row.columns.get('DIAGONAL')) for row in rows]
    crossing = next(theta for theta, x in diagonal if x is not None and x > 1)
    assert abs(crossing - 2.0) < 0.05

    born = next(row.theta for row in rows if row.columns.get('X_EQ_1.0') is not None)
    assert abs(born - 6.0) < 0.05

    late = [row for row in rows if row.theta > 8.0]
    names = ['X_EQ_1.0', 'X_EQ_1.1', 'DIAGONAL', 'OFFDIAG_TAU1', 'OFFDIAG_TAU2']
    curves = np.array([[row.columns[name] for name in names] for row in late])
    assert np.all(thetas[-len(late):] > 8.0)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            signs = np.sign(curves[:, i] - curves[:, j])
            assert np.all(signs == signs[0]), (names[i], names[j])


@pytest.mark.slow
def test_period_4_sweep_locates_second_pair():
    sweep = Sweep(4, 2, 0.5, 10.0, 400, workers=4)
    sweep.run()
    transitions = sweep.refine()
    assert any(abs(t.theta - 6.766) < 0.01 and (t.count_lo, t.count_hi) == (4, 5) for t in transitions)


def test_discriminant_facts():
    def h(theta):
        return theta**3 - 4*theta**2 + 16

    assert abs(h(8/3) - 176/27) < 1e-10
    grid = np.linspace(1e-3, 20.0, 10**4)
    assert h(grid).min() >= 176/27 - 1e-10
    assert all(asymmetric_discriminant(float(theta)) > 0 for theta in grid)
