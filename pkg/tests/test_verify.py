import pytest

from sosggm.errors import ModelDomainError
from sosggm.verify import SuiteResult, levels, run_verify, suites


def _single(k, name, **kwargs):
    report = run_verify(k, names=[name], **kwargs)
    assert [s.name for s in report.suites] == [name]
    return report.suites[0]


@pytest.mark.parametrize('name', ['residual', 'reciprocity', 'vieta', 'discriminant'])
def test_cheap_suites_pass_k2(name):
    result = _single(2, name)
    assert result.status == 'pass'
    assert result.checks > 0


def test_injected_fault_is_reported():
    result = _single(2, 'residual', inject_fault=True)
    assert result.status == 'fail'
    assert result.failures
    assert not run_verify(2, names=['residual'], inject_fault=True).passed


def test_vieta_skips_for_k3():
    result = _single(3, 'vieta')
    assert result.status == 'skip'
    assert result.skipped == 'k=2 only'
    assert result.passed


def test_discriminant_passes_k3():
    assert _single(3, 'discriminant').passed


@pytest.mark.slow
def test_oracle_notes_skipped_period_4():
    result = _single(3, 'oracle')
    assert result.passed
    assert 'q=4 skipped: k=2 only' in result.notes


@pytest.mark.slow
def test_count_and_consistency_k2():
    report = run_verify(2, names=['count', 'consistency'])
    assert report.passed, report.summary()


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_verify(2, level='thorough')
    with pytest.raises(ValueError):
        run_verify(2, names=['residual', 'nonsense'])
    with pytest.raises(ModelDomainError):
        run_verify(1)


def test_suite_result_bookkeeping():
    result = SuiteResult('demo')
    result.check(True, 'fine')
    result.check(False, 'broken')
    assert (result.checks, result.failures, result.status) == (2, ['broken'], 'fail')
    summary = result.as_dict()
    assert summary['status'] == 'fail' and summary['reason'] is None


def test_summary_lists_requested_suites():
    summary = run_verify(2, level='full', names=['discriminant']).summary()
    assert summary['level'] == 'full' and summary['passed']
    assert [s['name'] for s in summary['suites']] == ['discriminant']
    assert set(levels) == {'quick', 'full'}
    assert list(suites)[0] == 'residual'
