import io

import numpy.testing as npt
import pytest

from sosggm.errors import ModelDomainError
from sosggm.model import ModelParams, critical_constants
from sosggm.sweep import Sweep, numeric_count, refine_transitions, sweep_row, theta_grid
from sosggm.transcode import decode_sweep_csv


def test_theta_grid_by_index():
    grid = theta_grid(0.5, 10.0, 400)
    assert len(grid) == 400
    assert grid[0] == 0.5 and grid[-1] == 10.0
    assert grid[137] == 0.5 + 137*9.5/399


def test_theta_grid_two_steps():
    assert list(theta_grid(1.0, 2.0, 2)) == [1.0, 2.0]


@pytest.mark.parametrize('args', [(0.0, 1.0, 5), (-1.0, 1.0, 5), (1.0, 0.5, 5), (1.0, 2.0, 1)])
def test_theta_grid_validation(args):
    with pytest.raises(ModelDomainError):
        theta_grid(*args)
    with pytest.raises(TypeError):
        theta_grid(1.0, 2.0, 3.0)


def test_sweep_row_columns():
    row = sweep_row(2, ModelParams(2, 5.0))
    assert set(row.columns) == {'TRIVIAL', 'DIAGONAL'}
    assert row.columns['DIAGONAL'] == pytest.approx(6.25)
    assert (row.nu, row.raw, row.theorem) == (2, 2, 2)

    row = sweep_row(2, ModelParams(2, 7.0))
    assert row.columns['X_EQ_1.0'] == pytest.approx(0.25)
    assert row.columns['OFFDIAG_TAU2'] == pytest.approx(3.0625)
    assert row.nu == 6


def test_sweep_rows_and_csv():
    sweep = Sweep(2, 2, 5.0, 7.0, 5)
    rows = sweep.run()
    assert [row.nu for row in rows] == [2, 2, 2, 6, 6]
    stream = io.StringIO()
    sweep.write(stream)
    comments, decoded = decode_sweep_csv(stream.getvalue())
    assert len(decoded) == 5
    assert decoded[0]['X_EQ_1.0'] is None
    assert decoded[-1]['X_EQ_1.1'] == pytest.approx(4.0)


def test_sweep_is_deterministic_across_workers():
    texts = []
    for workers in (1, 3):
        sweep = Sweep(4, 2, 1.0, 8.0, 8, workers=workers)
        sweep.run()
        stream = io.StringIO()
        sweep.write(stream)
        texts.append(stream.getvalue())
    assert texts[0] == texts[1]


def test_refine_bifurcation_at_theta_c():
    sweep = Sweep(2, 2, 5.5, 6.5, 3)
    sweep.run()
    transitions = sweep.refine()
    assert len(transitions) == 1
    certificate = transitions[0]
    npt.assert_allclose(certificate.theta, 6.0, atol=1e-5)
    assert certificate.count_lo == 2 and certificate.count_hi > 2
    stream = io.StringIO()
    sweep.write(stream)
    assert '# transition nu2 2 ->' in stream.getvalue()


def test_refine_second_asymmetric_pair():
    theta_c3 = critical_constants(2).theta_c3
    rows = [sweep_row(4, ModelParams(2, theta)) for theta in (6.7, 6.8)]
    transitions = refine_transitions(4, 2, rows)
    assert len(transitions) == 1
    npt.assert_allclose(transitions[0].theta, theta_c3, atol=1e-5)
    assert (transitions[0].count_lo, transitions[0].count_hi) == (4, 5)


def test_numeric_count_ignores_threshold_rule():
    # at theta_0 the closed form gives 1 and so does the solver
    assert numeric_count(2, ModelParams(2, 2.0)) == 1
    assert numeric_count(2, ModelParams(2, 7.0)) == 6


def test_sweep_validation():
    with pytest.raises(ModelDomainError):
        Sweep(5, 2, 1.0, 2.0, 3)
    with pytest.raises(ModelDomainError):
        Sweep(2, 2, 1.0, 2.0, 3, workers=0)
