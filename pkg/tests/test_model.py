import numpy as np
import numpy.testing as npt
import pytest

from sosggm.errors import ModelDomainError
from sosggm.model import (ModelParams, PeriodicLaw, boundary_law_residual, critical_constants, cyclic_shift_orbit,
                          pattern_residual, polish_law, recursion_rhs, residual_tolerance, shift_vectors,
                          transfer_weight, vectors_close)


def test_critical_constants_k2():
    c = critical_constants(2)
    assert (c.theta_0, c.theta_c, c.theta_cr) == (2.0, 6.0, 4.0)
    npt.assert_allclose(c.theta_c3, 6.765952, atol=1e-6)
    npt.assert_allclose(c.theta_star2, 2.9311, atol=1e-4)
    # theta_star2 is the real root of theta**3 - 2 theta**2 - 8
    npt.assert_allclose(c.theta_star2**3 - 2*c.theta_star2**2 - 8, 0.0, atol=1e-12)


def test_critical_constants_k3():
    c = critical_constants(3)
    assert (c.theta_0, c.theta_c, c.theta_cr) == (1.0, 4.0, 2.5)
    assert c.theta_c3 is None and c.theta_star2 is None
    assert set(c.as_dict()) == {'k', 'theta_0', 'theta_c', 'theta_cr', 'theta_c3', 'theta_star2'}


@pytest.mark.parametrize('k', range(2, 51))
def test_critical_constants_ordering(k):
    c = critical_constants(k)
    assert c.theta_0 < c.theta_cr < c.theta_c


def test_invalid_k():
    with pytest.raises(ModelDomainError):
        critical_constants(1)
    with pytest.raises(TypeError):
        ModelParams(2.0, 1.0)
    with pytest.raises(TypeError):
        ModelParams(True, 1.0)


@pytest.mark.parametrize('theta', [0.0, -1.0, np.inf, np.nan])
def test_invalid_theta(theta):
    with pytest.raises(ModelDomainError):
        ModelParams(2, theta)


def test_model_params_coerces():
    params = ModelParams(np.int64(3), 2)
    assert params.k == 3 and isinstance(params.theta, float)
    assert params.with_theta(5.0) == ModelParams(3, 5.0)


def test_transfer_weight():
    params = ModelParams(2, 7.0)
    npt.assert_array_equal(transfer_weight([0, 1, -1, 2, -3], params), [7.0, 1.0, 1.0, 0.0, 0.0])
    assert transfer_weight(0, params) == 7.0


def test_periodic_law_normalisation():
    law = PeriodicLaw.from_vector([2.0, 8.0])
    assert law.values == (1.0, 4.0)
    assert law.q == 2
    with pytest.raises(ModelDomainError):
        PeriodicLaw((2.0, 1.0))
    with pytest.raises(ModelDomainError):
        PeriodicLaw((1.0, -1.0))
    with pytest.raises(ModelDomainError):
        PeriodicLaw((1.0,))


def test_periodic_law_evaluation():
    law = PeriodicLaw((1.0, 2.0, 3.0))
    assert law(4) == 2.0
    assert law(-1) == 3.0
    npt.assert_array_equal(law(np.array([0, 1, 2, 3])), [1.0, 2.0, 3.0, 1.0])
    npt.assert_allclose(law.shifted(1).values, (1.0, 1.5, 0.5))


def test_trivial_law_is_a_solution():
    for k in (2, 3):
        for theta in (0.3, 2.0, 11.0):
            params = ModelParams(k, theta)
            for q in (2, 3, 4):
                assert boundary_law_residual(PeriodicLaw.ones(q), params) == 0.0


def test_known_solutions_theta_7():
    params = ModelParams(2, 7.0)
    assert boundary_law_residual(PeriodicLaw((1.0, 4.0)), params) < 1e-12
    assert boundary_law_residual(PeriodicLaw((1.0, 0.25)), params) < 1e-12
    # literal period-2 form with x != 1
    assert pattern_residual((12.25, 12.25), params) < 1e-12
    assert pattern_residual((0.765625, 3.0625), params) < 1e-12
    assert pattern_residual((196.0, 49.0), params) < 1e-12
    assert boundary_law_residual(PeriodicLaw((1.0, 3.0)), params) > 1e-3


def test_recursion_rhs_fixed_point():
    params = ModelParams(2, 7.0)
    npt.assert_allclose(recursion_rhs([1.0, 4.0], params), [1.0, 4.0])


def test_residual_requires_law():
    with pytest.raises(TypeError):
        boundary_law_residual((1.0, 4.0), ModelParams(2, 7.0))


def test_cyclic_shift_orbit():
    orbit = cyclic_shift_orbit(PeriodicLaw((1.0, 4.0)))
    assert len(orbit) == 2
    npt.assert_allclose(orbit[1].values, (1.0, 0.25))
    assert len(cyclic_shift_orbit(PeriodicLaw.ones(3))) == 1
    # (1, x, 1, x) has period 2 inside period 4
    assert len(cyclic_shift_orbit(PeriodicLaw((1.0, 3.0, 1.0, 3.0)))) == 2


def test_shift_vectors_without_renormalisation():
    shifts = shift_vectors((1.0, 4.0), renormalize=False)
    npt.assert_allclose(shifts, [(1.0, 4.0), (4.0, 1.0)])


def test_vectors_close():
    assert vectors_close((1.0, 2.0), (1.0, 2.0 + 1e-12), 1e-10)
    assert not vectors_close((1.0, 2.0), (1.0, 2.1), 1e-10)
    assert not vectors_close((1.0, 2.0), (1.0, 2.0, 3.0), 1e-10)


@pytest.mark.parametrize('theta', [0.1, 1.0, 7.0, 123.0])
def test_transfer_weight_is_symmetric(theta):
    params = ModelParams(3, theta)
    deltas = np.arange(-4, 5)
    npt.assert_array_equal(transfer_weight(deltas, params), transfer_weight(-deltas, params))


@pytest.mark.parametrize('k', [2, 3, 5])
def test_all_ones_law_on_a_theta_grid(k):
    for theta in np.geomspace(1e-3, 1e3, 120):
        params = ModelParams(k, float(theta))
        for q in (2, 3, 4, 5):
            assert boundary_law_residual(PeriodicLaw.ones(q), params) == 0.0


def _solutions_k2():
    # period 2 at theta = 7, period 3 at theta = 10 (diagonal and x = 1 loci),
    # and an asymmetric period-4 law at theta = 7
    diagonal = (77 + np.sqrt(77**2 - 16))/8
    on_x_eq_1 = (77 + np.sqrt(77**2 - 16))/2
    phi1 = (35 + np.sqrt(1141.0))/2
    x = (phi1 + np.sqrt(phi1**2 - 16/49))/2
    return [(7.0, (1.0, 4.0)), (10.0, (1.0, diagonal, diagonal)), (10.0, (1.0, 1.0, on_x_eq_1)),
            (7.0, (1.0, x, 1.0, 4/(49*x)))]


@pytest.mark.parametrize('theta, values', _solutions_k2())
def test_shifts_of_a_solution_stay_solutions(theta, values):
    params = ModelParams(2, theta)
    law = PeriodicLaw(values)
    assert boundary_law_residual(law, params) < 1e-10
    for member in cyclic_shift_orbit(law):
        assert boundary_law_residual(member, params) < 1e-10
        npt.assert_allclose(boundary_law_residual(member, params)/max(member.values),
                            boundary_law_residual(law, params)/max(law.values), atol=1e-12)


def test_residual_tolerance_scales_for_large_k():
    law = PeriodicLaw((1.0, 1e5))
    assert residual_tolerance(law, ModelParams(2, 7.0)) == 1e-10
    assert residual_tolerance(law, ModelParams(3, 7.0)) == 1e-10
    npt.assert_allclose(residual_tolerance(law, ModelParams(4, 7.0)), 1e-5)
    assert residual_tolerance(PeriodicLaw.ones(2), ModelParams(5, 7.0)) == 1e-10


def test_polish_law():
    params = ModelParams(2, 7.0)
    rough = PeriodicLaw((1.0, 4.0 + 1e-6))
    polished = polish_law(rough, params)
    assert boundary_law_residual(polished, params) < 1e-3*boundary_law_residual(rough, params)
    npt.assert_allclose(polished.values, (1.0, 4.0), rtol=1e-10)
    # exact solutions are left alone
    assert polish_law(PeriodicLaw.ones(3), params) == PeriodicLaw.ones(3)
