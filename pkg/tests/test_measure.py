import numpy as np
import numpy.testing as npt
import pytest

from sosggm import measure
from sosggm.branches import find_branch, solve_period
from sosggm.errors import EnumerationSizeError, ModelDomainError
from sosggm.measure import (FiniteSubtree, check_consistency, edge_gradient_distribution, gradient_configs,
                            marginalize, mixed_marginal, pinned_marginal)
from sosggm.model import ModelParams, PeriodicLaw


def _branch(q, theta, label, k=2):
    return find_branch(solve_period(q, ModelParams(k, theta)), label)


def test_subtree_shape():
    tree = FiniteSubtree(2, 1)
    assert (tree.n_edges, tree.n_vertices, tree.boundary) == (3, 4, (1, 2, 3))
    tree = FiniteSubtree(2, 2)
    assert tree.n_edges == 9 and len(tree.boundary) == 6
    assert tree.n_configs == 3**9
    half = FiniteSubtree(2, 2, half_tree=True)
    assert half.n_edges == 6
    assert FiniteSubtree(3, 2).n_edges == 16


def test_subtree_paths():
    tree = FiniteSubtree(2, 2)
    # edge e leads to vertex e + 1; vertex 4 is the first child of vertex 1
    assert tree.edges[3] == (1, 4)
    npt.assert_array_equal(tree.path[0], [1, 0, 0, 1, 0, 0, 0, 0, 0])
    assert np.all(tree.path.sum(axis=1) == 2)


def test_subtree_validation():
    with pytest.raises(ModelDomainError):
        FiniteSubtree(2, 0)
    with pytest.raises(TypeError):
        FiniteSubtree(2, 1.5)
    assert FiniteSubtree(2, 1).is_nested_in(FiniteSubtree(2, 2))
    assert not FiniteSubtree(2, 1).is_nested_in(FiniteSubtree(2, 2, half_tree=True))


def test_gradient_configs_order():
    configs = gradient_configs(2, 0, 9)
    npt.assert_array_equal(configs[0], [-1, -1])
    npt.assert_array_equal(configs[1], [-1, 0])
    npt.assert_array_equal(configs[-1], [1, 1])


def test_trivial_branch_edges_are_independent():
    params = ModelParams(2, 2.0)
    tree = FiniteSubtree(2, 1)
    marginal = mixed_marginal(PeriodicLaw.ones(2), tree, params)
    npt.assert_allclose(edge_gradient_distribution(marginal), np.tile([0.25, 0.5, 0.25], (3, 1)), rtol=1e-14)
    npt.assert_allclose(marginal.probabilities.sum(), 1.0, rtol=1e-14)
    npt.assert_allclose(marginal.probability([0, 0, 0]), 0.5**3, rtol=1e-14)


def test_pinned_edge_distribution_period_4():
    # pinned at class 0, a single edge sees l(1) = x, l(0) theta, l(-1) = y
    branch = _branch(4, 7.0, 'ASYM_PHI1.1')
    x, y = branch.values
    theta = 7.0
    marginal = pinned_marginal(branch.law, FiniteSubtree(2, 1), 0, ModelParams(2, theta))
    expected = np.array([y, theta, x])/(x + y + theta)
    npt.assert_allclose(edge_gradient_distribution(marginal)[0], expected, rtol=1e-12)
    assert marginal.pin == 0


def test_mixed_period_4_is_reflection_symmetric():
    branch = _branch(4, 7.0, 'ASYM_PHI1.1')
    marginal = mixed_marginal(branch.law, FiniteSubtree(2, 2), ModelParams(2, 7.0))
    configs = marginal.configs()
    reflected = np.ravel_multi_index(tuple((-configs + 1).T), (3,)*9)
    npt.assert_allclose(marginal.probabilities[reflected], marginal.probabilities, rtol=1e-12)


@pytest.mark.parametrize('q, theta, label', [(2, 7.0, 'X_EQ_1.1'), (3, 10.0, 'DIAGONAL.1'),
                                             (4, 8.0, 'ASYM_PHI1.1')])
def test_consistency_of_solutions(q, theta, label):
    params = ModelParams(2, theta)
    law = _branch(q, theta, label).law
    small, large = FiniteSubtree(2, 1), FiniteSubtree(2, 2)
    assert check_consistency(law, small, large, params) < 1e-12
    assert check_consistency(law, small, large, params, pin=0) < 1e-12
    perturbed = list(law.values)
    perturbed[1] += 0.1
    assert check_consistency(PeriodicLaw(tuple(perturbed)), small, large, params) > 1e-6


def test_shift_orbit_gives_the_same_measure():
    branch = _branch(3, 10.0, 'X_EQ_1.1')
    params = ModelParams(2, 10.0)
    tree = FiniteSubtree(2, 2)
    for d in range(1, 3):
        shifted = branch.law.shifted(d)
        npt.assert_allclose(mixed_marginal(shifted, tree, params).probabilities,
                            mixed_marginal(branch.law, tree, params).probabilities, atol=1e-12)
        # pinning class s of the shifted law is pinning s + d of the original
        npt.assert_allclose(pinned_marginal(shifted, tree, 0, params).probabilities,
                            pinned_marginal(branch.law, tree, d, params).probabilities, atol=1e-12)


def test_marginalize():
    branch = _branch(2, 7.0, 'OFFDIAG_TAU2')
    params = ModelParams(2, 7.0)
    large = mixed_marginal(branch.law, FiniteSubtree(2, 2), params)
    small = marginalize(large, FiniteSubtree(2, 1))
    assert len(small) == 27
    npt.assert_allclose(small.probabilities.sum(), 1.0)
    with pytest.raises(ModelDomainError):
        marginalize(small, FiniteSubtree(2, 2))


def test_log_space_matches_direct(monkeypatch):
    branch = _branch(2, 7.0, 'X_EQ_1.1')
    params = ModelParams(2, 7.0)
    tree = FiniteSubtree(2, 2)
    # depth 2 is past LOG_SPACE_DEPTH, so this is the logsumexp path
    assert tree.depth > measure.LOG_SPACE_DEPTH
    in_log_space = mixed_marginal(branch.law, tree, params).probabilities
    monkeypatch.setattr(measure, 'LOG_SPACE_DEPTH', 10)
    monkeypatch.setattr(measure, 'CHUNK_SIZE', 100)
    npt.assert_allclose(mixed_marginal(branch.law, tree, params).probabilities, in_log_space, rtol=1e-12)


def test_enumeration_cap():
    with pytest.raises(EnumerationSizeError) as info:
        mixed_marginal(PeriodicLaw.ones(2), FiniteSubtree(3, 3), ModelParams(3, 2.0))
    assert info.value.cap == measure.ENUMERATION_CAP


def test_law_must_solve_the_equation():
    with pytest.raises(ModelDomainError):
        mixed_marginal(PeriodicLaw((1.0, 3.0)), FiniteSubtree(2, 1), ModelParams(2, 7.0))
    with pytest.raises(ModelDomainError):
        pinned_marginal(PeriodicLaw.ones(2), FiniteSubtree(2, 1), 2, ModelParams(2, 7.0))
    with pytest.raises(ModelDomainError):
        mixed_marginal(PeriodicLaw.ones(2), FiniteSubtree(3, 1), ModelParams(2, 7.0))


def test_probability_rejects_bad_configuration():
    marginal = mixed_marginal(PeriodicLaw.ones(2), FiniteSubtree(2, 1), ModelParams(2, 1.0))
    with pytest.raises(ModelDomainError):
        marginal.probability([0, 2, 0])
