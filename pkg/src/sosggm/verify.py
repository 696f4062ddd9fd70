'''Self-check suites run by `sosggm verify`.

Each suite exercises one family of invariants across the solvers and records
every failed check as a message. A suite that does not apply to the given k is
skipped with a reason. The report serialises to a machine-readable summary.
'''
import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from numpy.polynomial import Polynomial

from .branches import (CaseTag, p2_tau_roots, phase_count, phi, solve_period, asymmetric_discriminant,
                       x_eq_1_parameters)
from .errors import SosGgmError
from .measure import ENUMERATION_CAP, FiniteSubtree, check_consistency
from .model import (ModelParams, PeriodicLaw, boundary_law_residual, critical_constants, residual_tolerance,
                    validate_k)
from .oracle import oracle_solve

log = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    skipped: Optional[str] = None
    notes: List[str] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self):
        return self.skipped is not None or not self.failures

    @property
    def status(self):
        if self.skipped is not None:
            return 'skip'
        return 'pass' if not self.failures else 'fail'

    def check(self, condition, message):
        self.checks += 1
        if not condition:
            self.failures.append(message)
            log.warning('%s: %s', self.name, message)

    def as_dict(self):
        return {'name': self.name, 'status': self.status, 'checks': self.checks, 'failures': list(self.failures),
                'reason': self.skipped, 'notes': list(self.notes), 'elapsed': round(self.elapsed, 3)}


@dataclass
class VerifyReport:
    k: int
    level: str
    suites: List[SuiteResult] = field(default_factory=list)

    @property
    def passed(self):
        return all(s.passed for s in self.suites)

    def summary(self):
        return {'k': self.k, 'level': self.level, 'passed': self.passed,
                'suites': [s.as_dict() for s in self.suites]}


class SuiteSkipped(Exception):
    '''Raised inside a suite that does not apply to the given parameters.'''


def run_verify(k, level='quick', inject_fault=False, names=None):
    '''
    Runs the verification suites.

    Parameters
    ----------
    k : int
    level : {'quick', 'full'}
        'full' uses the dense grids and every oracle test point.
    inject_fault : bool, optional
        Perturb the laws checked by the residual suite, so that it fails.
        Used to check that failures are reported.
    names : sequence of str, optional
        Subset of the suites to run, by name. Defaults to all.

    Returns
    -------
    VerifyReport
    '''
    validate_k(k)
    if level not in levels:
        err_msg = f'\'level\' must be one of {sorted(levels)}, got {level!r}'
        raise ValueError(err_msg)
    names = list(suites) if names is None else list(names)
    unknown = [n for n in names if n not in suites]
    if unknown:
        err_msg = f'unknown suites {unknown}; available: {", ".join(suites)}'
        raise ValueError(err_msg)

    report = VerifyReport(k=int(k), level=level)
    for name in names:
        result = SuiteResult(name)
        start = time.perf_counter()
        try:
            suites[name](result, int(k), levels[level], inject_fault)
        except SuiteSkipped as skip:
            result.skipped = str(skip)
            log.warning('suite %s skipped: %s', name, skip)
        except SosGgmError as err:
            result.failures.append(f'{type(err).__name__}: {err}')
            log.error('suite %s raised %s: %s', name, type(err).__name__, err)
        result.elapsed = time.perf_counter() - start
        log.info('suite %s: %s (%d checks, %.2f s)', name, result.status, result.checks, result.elapsed)
        report.suites.append(result)
    return report


#########################################################
# suites
def suite_residual(result, k, settings, inject_fault):
    '''Every branch of every period has a law residual below its residual_tolerance.'''
    grid = np.linspace(0.5, 20.0, settings['grid_points'])
    for q in (2, 3, 4):
        for theta in grid:
            params = ModelParams(k, float(theta))
            for branch in solve_period(q, params):
                law = branch.law
                if inject_fault:
                    values = list(law.values)
                    values[1] *= 1 + FAULT_SIZE
                    law = PeriodicLaw(tuple(values))
                residual = boundary_law_residual(law, params)
                result.check(residual < residual_tolerance(law, params),
                             f'q = {q}, theta = {theta!r}: {branch.label} has residual {residual:.3e}')


def suite_reciprocity(result, k, settings, inject_fault):
    '''Roots of the tau equation and of the x = 1 equation come in reciprocal pairs.'''
    theta_c = critical_constants(k).theta_c
    grid = np.linspace(theta_c, theta_c + 14.0, settings['grid_points'] + 1)[1:]
    for theta in grid:
        params = ModelParams(k, float(theta))
        taus = p2_tau_roots(params).roots
        result.check(len(taus) == 2 and abs(taus[0]*taus[1] - 1) < RECIPROCITY_TOL,
                     f'theta = {theta!r}: tau roots {taus} are not a reciprocal pair')
        ys = sorted(b.values[1] for b in solve_period(2, params) if b.case_tag is CaseTag.X_EQ_1)
        result.check(len(ys) == 2 and abs(ys[0]*ys[1] - 1) < RECIPROCITY_TOL,
                     f'theta = {theta!r}: x = 1 roots {ys} are not a reciprocal pair')


def suite_vieta(result, k, settings, inject_fault):
    '''Sums and products of paired roots against their closed forms (k = 2).'''
    if k != 2:
        raise SuiteSkipped('k=2 only')
    for theta in settings['vieta_thetas']:
        params = ModelParams(k, theta)
        ys = [b.values[1] for b in solve_period(2, params) if b.case_tag is CaseTag.X_EQ_1]
        _check_pair(result, f'q = 2 x = 1, theta = {theta}', ys, (theta**2 - 4*theta - 4)/4, 1.0)

        branches = solve_period(3, params)
        diagonal = [b.values[0] for b in branches if b.case_tag is CaseTag.DIAGONAL]
        _check_pair(result, f'q = 3 diagonal, theta = {theta}', diagonal, (theta**2 - 2*theta - 3)/4, 0.25)
        on_x_eq_1 = [b.values[1] for b in branches if b.case_tag is CaseTag.X_EQ_1]
        _check_pair(result, f'q = 3 x = 1, theta = {theta}', on_x_eq_1, theta**2 - 2*theta - 3, 4.0)

        product = 4/theta**2
        asymmetric = solve_period(4, params)
        for tag, total in zip((CaseTag.ASYM_PHI1, CaseTag.ASYM_PHI2), phi(theta)):
            for branch in (b for b in asymmetric if b.case_tag is tag):
                x, y = branch.values
                result.check(abs(x + y - total) <= VIETA_RTOL*total and abs(x*y - product) <= VIETA_RTOL*product,
                             f'q = 4 {branch.label}, theta = {theta}: x + y = {x + y!r}, x y = {x*y!r}')


def suite_count(result, k, settings, inject_fault):
    '''Numeric census against the closed-form counts.'''
    constants = critical_constants(k)
    grid = np.linspace(0.5, 2*constants.theta_c + 2, settings['grid_points'])
    for theta in grid:
        count = phase_count(ModelParams(k, float(theta)))
        result.check(count.agrees, f'theta = {theta!r}: census {count.nu} against closed form {count.theorem}')
    if k == 2:
        for q, table in expected_counts_k2.items():
            for theta, expected in table.items():
                nu = phase_count(ModelParams(k, theta), periods=(q,)).nu[q]
                result.check(nu == expected, f'nu{q}(theta = {theta}) = {nu}, expected {expected}')


def suite_oracle(result, k, settings, inject_fault):
    '''The brute-force oracle finds exactly the branch solutions.'''
    for q, thetas in _oracle_points(k, settings['oracle_subset']).items():
        if q == 4 and k != 2:
            result.notes.append('q=4 skipped: k=2 only')
            log.warning('oracle check of period 4 skipped for k = %d: k=2 only', k)
            continue
        for theta in thetas:
            params = ModelParams(k, theta)
            reference = [b.vector for b in solve_period(q, params)]
            report = oracle_solve(q, params, reference=reference)
            result.check(report.agreement,
                         f'q = {q}, theta = {theta}: oracle found {len(report.vectors)} solutions, '
                         f'branch solvers {len(reference)}')


def suite_consistency(result, k, settings, inject_fault):
    '''Depth-1 measures are the marginals of depth-2 measures for solutions, and not for perturbed laws.'''
    half_tree = FiniteSubtree(k, 2).n_configs > ENUMERATION_CAP
    if half_tree:
        result.notes.append('half trees: the full depth-2 tree exceeds the enumeration cap')
    small, large = FiniteSubtree(k, 1, half_tree=half_tree), FiniteSubtree(k, 2, half_tree=half_tree)
    for q, theta in _consistency_points(k).items():
        params = ModelParams(k, theta)
        branch = solve_period(q, params)[-1]
        deviation = check_consistency(branch.law, small, large, params)
        result.check(deviation < CONSISTENCY_TOL,
                     f'q = {q}, theta = {theta}: {branch.label} deviates by {deviation:.3e}')
        values = list(branch.law.values)
        values[1] += PERTURBATION
        deviation = check_consistency(PeriodicLaw(tuple(values)), small, large, params)
        result.check(deviation > PERTURBED_MIN_DEVIATION,
                     f'q = {q}, theta = {theta}: perturbed {branch.label} deviates only by {deviation:.3e}')


def suite_discriminant(result, k, settings, inject_fault):
    '''Positivity of the asymmetric period-4 discriminant and the x = 1 discriminant at theta_c.'''
    h = Polynomial([16.0, 0.0, -4.0, 1.0])
    stationary = [r.real for r in h.deriv().roots() if abs(r.imag) < 1e-12 and r.real > 1e-9]
    result.check(len(stationary) == 1 and abs(stationary[0] - 8/3) < 1e-10,
                 f'positive stationary points of theta**3 - 4 theta**2 + 16: {stationary}')
    if stationary:
        result.check(abs(h(stationary[0]) - 176/27) < 1e-10, f'minimum {h(stationary[0])!r}, expected 176/27')
    grid = np.linspace(1e-3, 20.0, settings['discriminant_points'])
    result.check(all(asymmetric_discriminant(t) > 0 for t in grid), 'asymmetric discriminant not positive on the grid')

    details = x_eq_1_parameters(ModelParams(k, critical_constants(k).theta_c))
    result.check(abs(details.discriminant) < 1e-9, f'x = 1 discriminant at theta_c is {details.discriminant!r}')
    result.check(abs(details.a_minus - details.a_plus) <= 1e-6*details.a_plus,
                 f'a_minus = {details.a_minus!r} and a_plus = {details.a_plus!r} differ at theta_c')


#########################################################
# helpers
def _check_pair(result, where, roots, total, product):
    result.check(len(roots) == 2, f'{where}: expected 2 roots, got {roots}')
    if len(roots) == 2:
        a, b = roots
        result.check(abs(a + b - total) <= VIETA_RTOL*abs(total) and abs(a*b - product) <= VIETA_RTOL*product,
                     f'{where}: sum {a + b!r} (expected {total!r}), product {a*b!r} (expected {product!r})')


def _oracle_points(k, subset):
    if k == 2:
        points = oracle_points_k2
    else:
        c = critical_constants(k)
        spread = (c.theta_0/2, 0.5*(c.theta_0 + c.theta_cr), c.theta_c + 1, 2*c.theta_c)
        points = {2: spread, 3: spread, 4: spread}
    if subset:
        return {q: thetas[::2] for q, thetas in points.items()}
    return points


def _consistency_points(k):
    if k == 2:
        return {2: 7.0, 3: 10.0, 4: 8.0}
    theta = critical_constants(k).theta_c + 2
    return {2: theta, 3: theta, 4: theta}


#########################################################
# constants
FAULT_SIZE = 1e-3
RECIPROCITY_TOL = 1e-10
VIETA_RTOL = 1e-9
CONSISTENCY_TOL = 1e-12
PERTURBATION = 0.1
PERTURBED_MIN_DEVIATION = 1e-6

levels = {
    'quick': {'grid_points': 12, 'oracle_subset': True, 'discriminant_points': 10**4,
              'vieta_thetas': (7.0, 10.0)},
    'full': {'grid_points': 100, 'oracle_subset': False, 'discriminant_points': 10**4,
             'vieta_thetas': (5.0, 7.0, 8.0, 10.0, 12.0)},
}

suites = {
    'residual': suite_residual,
    'reciprocity': suite_reciprocity,
    'vieta': suite_vieta,
    'count': suite_count,
    'oracle': suite_oracle,
    'consistency': suite_consistency,
    'discriminant': suite_discriminant,
}

expected_counts_k2 = {
    2: {1.0: 2, 2.0: 1, 4.0: 2, 6.0: 2, 7.0: 6, 10.0: 6},
    3: {3.0: 1, 4.0: 3, 10.0: 5},
    4: {1.0: 1, 3.0: 2, 6.0: 3, 6.5: 4, 7.0: 5},
}

oracle_points_k2 = {
    2: (1.0, 3.0, 5.0, 7.0, 10.0, 12.0),
    3: (2.0, 3.5, 5.0, 7.0, 10.0, 12.0),
    4: (1.0, 3.0, 5.0, 6.5, 7.0, 8.0, 10.0, 12.0),
}
