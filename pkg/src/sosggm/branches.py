'''Enumeration of the q-periodic constant boundary laws for q = 2, 3, 4 and the
resulting counts of gradient Gibbs measures.

Each period has its own pattern of unknowns:

    q = 2   (x, y)          both classes free
    q = 3   (1, x, y)       class 0 pinned
    q = 4   (1, x, 1, y)    classes 0 and 2 pinned

Period 2 and the symmetric period-4 case reduce to univariate polynomials and
are solved with rootfind. The asymmetric period-4 case (k = 2) has closed
forms. Period 3 is enumerated by multistart Newton from starts on the
symmetry loci of the system.
'''
import enum
import functools
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .errors import (IncompleteEnumerationError, ModelDomainError, NumericError, TransitionNotFoundError,
                     UnknownBranchError, UnsupportedParameterError)
from .model import (ModelParams, PeriodicLaw, boundary_law_residual, critical_constants, cyclic_shift_orbit,
                    pattern_residual, polish_law, residual_tolerance, shift_vectors, validate_k, vectors_close)
from .newton import damped_newton
from .rootfind import positive_roots

log = logging.getLogger(__name__)


#########################################################
# types
class CaseTag(enum.Enum):
    TRIVIAL = 'all-ones solution'
    X_EQ_1 = 'first free coordinate equal to 1'
    Y_EQ_1 = 'second free coordinate equal to 1'
    DIAGONAL = 'equal free coordinates, not 1'
    OFFDIAG_TAU1 = 'unequal coordinates, y = tau1**k x'
    OFFDIAG_TAU2 = 'unequal coordinates, y = tau2**k x'
    ASYM_PHI1 = 'asymmetric pair with x + y = phi1'
    ASYM_PHI2 = 'asymmetric pair with x + y = phi2'
    OFF_LOCUS = 'solution off every symmetry locus'


@dataclass(frozen=True)
class SolutionBranch:
    '''
    One positive solution of the boundary-law equation in the pattern of
    period q.

    `values` are the free unknowns ((x, y), or (x,) for the period-2 diagonal
    branch), `vector` is the full pattern vector and `law` its normalisation
    to class 0 = 1. A branch with multiplicity > 1 is a double root sitting at
    a bifurcation point.
    '''
    q: int
    case_tag: CaseTag
    values: Tuple[float, ...]
    vector: Tuple[float, ...]
    law: PeriodicLaw
    theta: float
    k: int
    multiplicity: int = 1
    label: str = ''

    @property
    def params(self):
        return ModelParams(self.k, self.theta)

    @property
    def degenerate(self):
        return self.multiplicity > 1

    @property
    def residual(self):
        return boundary_law_residual(self.law, self.params)

    @property
    def second_coordinate(self):
        return self.values[-1]


@dataclass(frozen=True)
class PhaseCount:
    '''
    Solution census at one theta, per period q.

    nu[q] counts classes of pattern vectors under shifts that keep the
    pattern (the GGM count as tabulated in closed form), except on a critical
    activity where the closed-form value is used and exact_threshold[q] is
    set. raw[q] is the number of branches before identification, orbit[q]
    the number of classes under renormalised cyclic shifts of the laws, and
    theorem[q] the closed-form staircase (a lower bound when lower_bound[q]).
    '''
    theta: float
    k: int
    nu: Dict[int, int] = field(default_factory=dict)
    raw: Dict[int, int] = field(default_factory=dict)
    orbit: Dict[int, int] = field(default_factory=dict)
    theorem: Dict[int, int] = field(default_factory=dict)
    exact_threshold: Dict[int, bool] = field(default_factory=dict)
    lower_bound: Dict[int, bool] = field(default_factory=dict)
    x_eq_1_roots: Optional[int] = None

    @property
    def nu2(self):
        return self.nu.get(2)

    @property
    def nu3(self):
        return self.nu.get(3)

    @property
    def nu4(self):
        return self.nu.get(4)

    @property
    def raw2(self):
        return self.raw.get(2)

    @property
    def raw3(self):
        return self.raw.get(3)

    @property
    def raw4(self):
        return self.raw.get(4)

    @property
    def agrees(self):
        return all(_agrees(self, q) for q in self.nu)


@dataclass(frozen=True)
class XEq1Parameters:
    '''Auxiliary quantities governing the number of roots of the x = 1 equation.
    t and a_minus/a_plus are None below theta_c.'''
    a: float
    b: float
    discriminant: float
    t_minus: Optional[float] = None
    t_plus: Optional[float] = None
    a_minus: Optional[float] = None
    a_plus: Optional[float] = None


@dataclass(frozen=True)
class TransitionCertificate:
    '''A bisection result: the count is count_lo at lo and count_hi at hi.'''
    k: int
    lo: float
    hi: float
    count_lo: int
    count_hi: int

    @property
    def theta(self):
        return 0.5*(self.lo + self.hi)

    def __float__(self):
        return self.theta


#########################################################
# period 2
def p2_solve_x_eq_1(params):
    '''
    Solutions (1, y) of the period-2 system, i.e. positive roots of
    y = ((theta y + 2)/(theta + 2 y))**k.

    Parameters
    ----------
    params : ModelParams

    Returns
    -------
    list of SolutionBranch
        Always the trivial (1, 1). Above theta_c also the two roots y0 > 1 and
        y1 = 1/y0. At theta_c a single degenerate branch at y = 1 with
        multiplicity 2 is added.
    '''
    branches = [_make_branch(2, CaseTag.TRIVIAL, (1.0, 1.0), (1.0, 1.0), params)]
    roots = _x_eq_1_roots(params)
    for y, mult in zip(roots.roots, roots.multiplicities):
        branches.append(_make_branch(2, CaseTag.X_EQ_1, (1.0, y), (1.0, y), params, multiplicity=mult))
    return branches


def p2_solve_diagonal(params):
    '''
    The diagonal branch (x1, x1), x1 = s**k with s the unique positive root
    of 2 s**(k-1) - theta (s**(k-2) + ... + 1). None when s = 1, i.e. at
    theta_0 = 2/(k-1).
    '''
    coef = [-params.theta]*(params.k - 1) + [2.0]
    roots = positive_roots(coef)
    if len(roots) != 1:
        err_msg = f'expected one positive diagonal root at theta = {params.theta}, got {list(roots)}'
        raise NumericError(err_msg)
    s = roots[0]
    if abs(s - 1) <= DEDUP_TOL:
        log.debug('diagonal branch absent at theta = %r (s = 1)', params.theta)
        return None
    x = s**params.k
    return _make_branch(2, CaseTag.DIAGONAL, (x,), (x, x), params)


def p2_tau_roots(params):
    '''
    Positive roots of 2 tau**k + (2 - theta)(tau**(k-1) + ... + tau) + 2,
    as a RootSet. The roots come in reciprocal pairs.
    '''
    coef = [2.0] + [2.0 - params.theta]*(params.k - 1) + [2.0]
    return positive_roots(coef)


def p2_solve_offdiagonal(params):
    '''
    The two off-diagonal branches (x2, tau2**k x2) and (x3, tau1**k x3),
    tau1 = 1/tau2 < 1 < tau2, which exist for theta > theta_c.

    Each x is h**k, h the unique positive root of
    2 t**k h**(k-1) - theta (h**(k-2) + ... + 1) with t the tau of the branch.
    Returns an empty list for theta <= theta_c.
    '''
    tau_roots = p2_tau_roots(params)
    taus = [t for t, m in zip(tau_roots.roots, tau_roots.multiplicities) if m == 1 and abs(t - 1) > DEDUP_TOL]
    if len(taus) != 2:
        return []
    tau1, tau2 = sorted(taus)
    k = params.k
    branches = []
    for tag, tau in ((CaseTag.OFFDIAG_TAU1, tau1), (CaseTag.OFFDIAG_TAU2, tau2)):
        roots = positive_roots([-params.theta]*(k - 1) + [2*tau**k])
        if len(roots) != 1:
            err_msg = f'expected one positive root for {tag.name} at theta = {params.theta}, got {list(roots)}'
            raise NumericError(err_msg)
        x = roots[0]**k
        y = tau**k*x
        branches.append(_make_branch(2, tag, (x, y), (x, y), params))
    return branches


def p2_count(params):
    '''Number of 2-height-periodic gradient Gibbs measures.'''
    return census(2, solve_period(2, params), params)['nu']


def x_eq_1_parameters(params):
    '''
    The quantities a = (2/theta)**(k+1), b = theta**2/4, the discriminant
    D = (k(b-1) - (b+1))**2 - 4b, and, for theta >= theta_c, the roots t-/t+
    of (b + t)(1 + t) = k(b - 1)t with a(t) = (1/t)((1 + t)/(b + t))**k.

    The x = 1 equation has three positive roots exactly when
    a_minus < a < a_plus.
    '''
    k, theta = params.k, params.theta
    a = (2/theta)**(k + 1)
    b = theta**2/4
    discriminant = (k*(b - 1) - (b + 1))**2 - 4*b
    theta_c = critical_constants(k).theta_c
    if theta < theta_c - THRESHOLD_TOL:
        return XEq1Parameters(a=a, b=b, discriminant=discriminant)
    root = np.sqrt(max(discriminant, 0.0))
    t_minus = ((b - 1)*(k - 1) - 2 - root)/2
    t_plus = ((b - 1)*(k - 1) - 2 + root)/2
    a_minus = (1/t_minus)*((1 + t_minus)/(b + t_minus))**k
    a_plus = (1/t_plus)*((1 + t_plus)/(b + t_plus))**k
    return XEq1Parameters(a=a, b=b, discriminant=discriminant, t_minus=t_minus, t_plus=t_plus,
                          a_minus=a_minus, a_plus=a_plus)


#########################################################
# period 3
def p3_solve(params, starts=None):
    '''
    All positive solutions (x, y) of the period-3 system

        x = ((1 + y + theta x)/(theta + x + y))**k
        y = ((1 + x + theta y)/(theta + x + y))**k

    by damped Newton in log coordinates from a deterministic start set.

    Parameters
    ----------
    params : ModelParams
    starts : array_like, optional
        (m, 2) positive starting points. Defaults to the 5 x 5 grid
        {1e-2, ..., 1e2}**2 plus 20 log-spaced points on each of the loci
        x = y, x = 1 and y = 1.

    Returns
    -------
    list of SolutionBranch
        Tagged TRIVIAL, DIAGONAL (x = y), X_EQ_1 (pattern (1, 1, y)),
        Y_EQ_1 (pattern (1, x, 1)) or OFF_LOCUS. Swap partners (y, x) are
        always both present.

    Raises
    ------
    IncompleteEnumerationError
        If the swap partner of a found solution cannot be polished.
    '''
    starts = p3_default_starts() if starts is None else np.atleast_2d(np.asarray(starts, dtype=float))
    if np.any(starts <= 0):
        err_msg = '\'starts\' must be strictly positive'
        raise ModelDomainError(err_msg)
    fun, jac = _p3_system(params)
    result = damped_newton(fun, jac, np.log(starts), ftol=NEWTON_FTOL, bounds=LOG_BOUNDS)
    log.debug('period 3 at theta = %r: %d of %d starts converged', params.theta,
              int(np.count_nonzero(result['success'])), len(starts))

    loci = _p3_loci(params)
    candidates = []
    for u in result['x'][result['success']]:
        x, y = np.exp(u)
        law = PeriodicLaw((1.0, x, y))
        residual = boundary_law_residual(law, params)
        if residual < residual_tolerance(law, params):
            candidates.append((residual, _p3_snap(float(x), float(y), loci)))
    candidates.sort()
    kept = []
    for _, point in candidates:
        if not any(vectors_close(point, other, DEDUP_TOL) for other in kept):
            kept.append(point)

    for x, y in list(kept):
        if any(vectors_close((y, x), other, DEDUP_TOL) for other in kept):
            continue
        polished = damped_newton(fun, jac, np.log([y, x]), ftol=NEWTON_FTOL)
        partner = _p3_snap(*(float(v) for v in np.exp(polished['x'])), loci)
        if not polished['success'] or not vectors_close(partner, (y, x), P3_LOCUS_TOL):
            err_msg = f'swap partner of ({x!r}, {y!r}) not found at theta = {params.theta}'
            raise IncompleteEnumerationError(err_msg)
        kept.append(partner)

    branches = []
    for x, y in kept:
        tag = _p3_case(x, y)
        if tag is CaseTag.OFF_LOCUS:
            log.warning('period-3 solution (%r, %r) at theta = %r lies off the symmetry loci', x, y, params.theta)
        branches.append(_make_branch(3, tag, (x, y), (1.0, x, y), params))
    return branches


def p3_default_starts():
    grid = [1e-2, 1e-1, 1.0, 1e1, 1e2]
    line = np.geomspace(1e-2, 1e2, 20)
    starts = [list(p) for p in itertools.product(grid, grid)]
    starts += [[v, v] for v in line] + [[1.0, v] for v in line] + [[v, 1.0] for v in line]
    return np.array(starts)


def p3_find_theta_c1(k, tol=None):
    '''
    Activity theta_c1 at which the period-3 system gains solutions other
    than (1, 1).

    Bisection on the number of distinct solutions returned by p3_solve,
    starting from [theta_0, theta_cr] and widening the upper end up to
    P3_SEARCH_MAX if needed.

    Parameters
    ----------
    k : int
    tol : float, optional
        Width of the final bracket. Defaults to P3_THETA_TOL.

    Returns
    -------
    TransitionCertificate
        count_lo == 1 at lo, count_hi > 1 at hi, hi - lo <= tol.

    Raises
    ------
    TransitionNotFoundError
        If the count at theta_0 is not 1, or stays 1 up to P3_SEARCH_MAX.
    '''
    validate_k(k)
    return _p3_find_theta_c1(int(k), P3_THETA_TOL if tol is None else float(tol))


@functools.lru_cache(maxsize=None)
def _p3_find_theta_c1(k, tol):
    constants = critical_constants(k)

    def count(theta):
        return len(p3_solve(ModelParams(k, theta)))

    lo, hi = constants.theta_0, constants.theta_cr
    count_lo, count_hi = count(lo), count(hi)
    if count_lo != 1:
        err_msg = f'period-3 count at theta_0 = {lo} is {count_lo}, expected 1'
        raise TransitionNotFoundError(err_msg)
    while count_hi <= 1:
        lo, hi = hi, 2*hi
        if hi > P3_SEARCH_MAX:
            err_msg = f'no period-3 transition found in ({constants.theta_0}, {P3_SEARCH_MAX}) for k = {k}'
            raise TransitionNotFoundError(err_msg)
        count_hi = count(hi)
    while hi - lo > tol:
        mid = 0.5*(lo + hi)
        count_mid = count(mid)
        if count_mid > 1:
            hi, count_hi = mid, count_mid
        else:
            lo = mid
    log.info('theta_c1(k=%d) in [%.9f, %.9f]: %d solution(s) below, %d above', k, lo, hi, count_lo, count_hi)
    return TransitionCertificate(k=k, lo=lo, hi=hi, count_lo=count_lo, count_hi=count_hi)


def p3_count(params):
    '''Number of 3-height-periodic gradient Gibbs measures.'''
    return census(3, solve_period(3, params), params)['nu']


def _p3_system(params):
    k, theta = params.k, params.theta

    def fun(u):
        x, y = np.exp(u[:, 0]), np.exp(u[:, 1])
        denominator = np.log(theta + x + y)
        f1 = u[:, 0] - k*(np.log(1 + y + theta*x) - denominator)
        f2 = u[:, 1] - k*(np.log(1 + x + theta*y) - denominator)
        return np.stack([f1, f2], axis=1)

    def jac(u):
        x, y = np.exp(u[:, 0]), np.exp(u[:, 1])
        n1, n2, d = 1 + y + theta*x, 1 + x + theta*y, theta + x + y
        j = np.empty((u.shape[0], 2, 2))
        j[:, 0, 0] = 1 - k*(theta*x/n1 - x/d)
        j[:, 0, 1] = -k*(y/n1 - y/d)
        j[:, 1, 0] = -k*(x/n2 - x/d)
        j[:, 1, 1] = 1 - k*(theta*y/n2 - y/d)
        return j

    return fun, jac


def _p3_case(x, y, tol=None):
    tol = DEDUP_TOL if tol is None else tol
    x_is_1 = abs(x - 1) <= tol
    y_is_1 = abs(y - 1) <= tol
    if x_is_1 and y_is_1:
        return CaseTag.TRIVIAL
    if vectors_close((x,), (y,), tol):
        return CaseTag.DIAGONAL
    if x_is_1:
        return CaseTag.X_EQ_1
    if y_is_1:
        return CaseTag.Y_EQ_1
    return CaseTag.OFF_LOCUS


def _p3_loci(params):
    '''Positive roots of the diagonal and of the x = 1 locus polynomials of period 3.'''
    k, theta = params.k, params.theta
    t = Polynomial([0.0, 1.0])
    diagonal = positive_roots(t*(theta + 2*t)**k - ((theta + 1)*t + 1)**k).roots
    on_locus = positive_roots(t*(theta + 1 + t)**k - (theta*t + 2)**k).roots
    return diagonal, on_locus


def _p3_snap(x, y, loci):
    '''
    Replaces a Newton solution lying near a symmetry locus by the nearest
    root of the locus polynomials, so that repeated finds of one solution
    are bit-identical. Points near no locus are returned unchanged.

    Near theta_cr the diagonal and both x = 1 and y = 1 families meet the
    trivial solution, so every locus within P3_LOCUS_TOL competes and the
    nearest root wins.
    '''
    diagonal, on_locus = loci
    options = []
    if vectors_close((x,), (y,), P3_LOCUS_TOL):
        options += [(r, r) for r in diagonal]
    if abs(x - 1) <= P3_LOCUS_TOL:
        options += [(1.0, r) for r in on_locus]
    if abs(y - 1) <= P3_LOCUS_TOL:
        options += [(r, 1.0) for r in on_locus]
    options = [point for point in options if vectors_close(point, (x, y), P3_LOCUS_TOL)]
    if not options:
        return x, y
    snapped = min(options, key=lambda point: max(abs(point[0] - x), abs(point[1] - y)))
    return tuple(1.0 if abs(v - 1) <= DEDUP_TOL else float(v) for v in snapped)


#########################################################
# period 4
def p4_solve_symmetric(params):
    '''
    Symmetric solutions (x, x) of the period-4 pattern (1, x, 1, x). x solves
    the same equation as the x = 1 family of period 2, so there are 1, 2
    (one degenerate) or 3 branches below, at and above theta_c.
    '''
    branches = [_make_branch(4, CaseTag.TRIVIAL, (1.0, 1.0), (1.0, 1.0, 1.0, 1.0), params)]
    roots = _x_eq_1_roots(params)
    for x, mult in zip(roots.roots, roots.multiplicities):
        branches.append(_make_branch(4, CaseTag.DIAGONAL, (x, x), (1.0, x, 1.0, x), params, multiplicity=mult))
    return branches


def asymmetric_discriminant(theta):
    '''D(theta) = theta (theta**3 - 4 theta**2 + 16).'''
    theta = _positive_theta(theta)
    return theta*(theta**3 - 4*theta**2 + 16)


def phi(theta):
    '''
    The two values (phi1, phi2) = ((theta**2 - 2 theta) +- sqrt(D))/2 that x + y
    takes on the asymmetric period-4 branches at k = 2.
    '''
    theta = _positive_theta(theta)
    root = np.sqrt(asymmetric_discriminant(theta))
    return 0.5*(theta**2 - 2*theta + root), 0.5*(theta**2 - 2*theta - root)


def p4_solve_asymmetric(params):
    '''
    Asymmetric solutions (x, y), x != y, of the period-4 pattern (1, x, 1, y)
    for k = 2.

    With u = sqrt(x), v = sqrt(y) the system reduces to u v = 2/theta, so x
    and y are the roots of t**2 - phi t + 4/theta**2 for phi in (phi1, phi2).

    Parameters
    ----------
    params : ModelParams
        Must have k = 2.

    Returns
    -------
    list of SolutionBranch
        Nothing for theta < 2. For 2 < theta the pair (x3, y3), (y3, x3)
        with x3 + y3 = phi1, and from theta_c3 ~ 6.766 on also (x4, y4),
        (y4, x4) with x4 + y4 = phi2. Where the two roots coincide (theta = 2
        for phi1, theta_c3 for phi2) a single degenerate branch with
        multiplicity 2 is returned instead of the pair.

    Raises
    ------
    UnsupportedParameterError
        If k != 2.
    '''
    if params.k != 2:
        err_msg = f'asymmetric period-4 solutions are only available for k = 2, got k = {params.k}'
        raise UnsupportedParameterError(err_msg)
    theta = params.theta
    product = 4/theta**2
    branches = []
    for tag, total in zip((CaseTag.ASYM_PHI1, CaseTag.ASYM_PHI2), phi(theta)):
        if total <= 0:
            continue
        disc = total**2 - 4*product
        if disc < 0:
            continue
        root = np.sqrt(disc)
        x = 0.5*(total + root)
        y = product/x
        if root <= DEDUP_TOL*total:
            branches.append(_make_branch(4, tag, (x, y), (1.0, x, 1.0, y), params, multiplicity=2))
            continue
        for a, b in ((y, x), (x, y)):
            branches.append(_make_branch(4, tag, (a, b), (1.0, a, 1.0, b), params))
    return branches


def p4_count(params):
    '''Number of 4-height-periodic gradient Gibbs measures (a lower bound for k != 2).'''
    return census(4, solve_period(4, params), params)['nu']


#########################################################
# dispatch and counting
def solve_period(q, params):
    '''
    Every branch of period q at params, labelled and in a stable order.

    Labels are the case tag name, with a '.i' suffix (ascending in the
    second coordinate) for tags that can carry several branches.
    '''
    if q not in solvers:
        err_msg = f'\'q\' must be one of {sorted(solvers)}, got {q!r}'
        raise ModelDomainError(err_msg)
    branches = []
    for solver in solvers[q]:
        if solver is p4_solve_asymmetric and params.k != 2:
            log.info('skipping asymmetric period-4 branches for k = %d', params.k)
            continue
        found = solver(params)
        if found is None:
            continue
        branches.extend(found if isinstance(found, list) else [found])
    branches = _labelled(q, branches)
    log.info('q = %d, k = %d, theta = %r: %d branches', q, params.k, params.theta, len(branches))
    return branches


def find_branch(branches, label):
    '''The branch with the given label, else UnknownBranchError.'''
    for branch in branches:
        if branch.label == label:
            return branch
    raise UnknownBranchError(label, [b.label for b in branches])


def critical_thresholds(q, k):
    '''Activities at which the closed-form count of period q changes value.'''
    constants = critical_constants(k)
    if q == 2:
        return (constants.theta_0, constants.theta_c)
    if q == 3:
        return (p3_find_theta_c1(k).theta, constants.theta_cr)
    if q == 4:
        if k == 2:
            return (2.0, constants.theta_c, constants.theta_c3)
        return (constants.theta_c,)
    err_msg = f'\'q\' must be one of {sorted(solvers)}, got {q!r}'
    raise ModelDomainError(err_msg)


def on_threshold(q, params, tol=None):
    tol = THRESHOLD_TOL if tol is None else tol
    return any(abs(params.theta - c) <= _threshold_width(q, params.k, c, tol)
               for c in critical_thresholds(q, params.k))


def theorem_count(q, params, tol=None):
    '''
    Closed-form number of q-height-periodic GGMs (period 4 with k != 2: a
    lower bound). Activities within `tol` of a critical value take the
    value at that critical value.
    '''
    tol = THRESHOLD_TOL if tol is None else tol
    theta, k = params.theta, params.k
    constants = critical_constants(k)

    def near(c):
        return abs(theta - c) <= _threshold_width(q, k, c, tol)

    if q == 2:
        if near(constants.theta_0):
            return 1
        return 2 if theta <= constants.theta_c or near(constants.theta_c) else 6
    if q == 3:
        theta_c1 = p3_find_theta_c1(k).theta
        if near(theta_c1) or near(constants.theta_cr):
            return 3
        return 1 if theta < theta_c1 else 5
    if q == 4:
        if k != 2:
            if near(constants.theta_c):
                return 2
            return 1 if theta < constants.theta_c else 3
        for c, value in ((2.0, 2), (constants.theta_c, 3), (constants.theta_c3, 5)):
            if near(c):
                return value
        if theta < 2:
            return 1
        if theta < constants.theta_c:
            return 2
        return 4 if theta < constants.theta_c3 else 5
    err_msg = f'\'q\' must be one of {sorted(solvers)}, got {q!r}'
    raise ModelDomainError(err_msg)


def phase_count(params, periods=(2, 3, 4)):
    '''
    Census of all requested periods at one activity.

    Returns
    -------
    PhaseCount
    '''
    counts = {name: {} for name in ('nu', 'raw', 'orbit', 'theorem', 'exact_threshold', 'lower_bound')}
    for q in periods:
        result = census(q, solve_period(q, params), params)
        for name in counts:
            counts[name][q] = result[name]
    roots = _x_eq_1_roots(params).roots
    x_eq_1_roots = 1 + sum(1 for y in roots if abs(y - 1) > DEDUP_TOL)
    return PhaseCount(theta=params.theta, k=params.k, x_eq_1_roots=x_eq_1_roots, **counts)


def pattern_classes(vectors, renormalize=False, rtol=None):
    '''
    Number of classes of `vectors` under cyclic shifts.

    With renormalize=False two vectors are identified only when one is a
    plain shift of the other, which keeps the pinned classes of a pattern in
    place. With renormalize=True the laws are compared, i.e. the classes are
    cyclic-shift orbits.
    '''
    rtol = DEDUP_TOL if rtol is None else rtol
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    parent = list(range(len(vectors)))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, v in enumerate(vectors):
        if renormalize:
            shifts = [law.as_array() for law in cyclic_shift_orbit(PeriodicLaw.from_vector(v))]
        else:
            shifts = shift_vectors(v, renormalize=False)
        for j in range(i + 1, len(vectors)):
            other = vectors[j]/vectors[j][0] if renormalize else vectors[j]
            if any(vectors_close(s, other, rtol) for s in shifts):
                parent[root(j)] = root(i)
    return len({root(i) for i in range(len(vectors))})


def census(q, branches, params):
    '''Census dict (nu, raw, orbit, theorem, exact_threshold, lower_bound) of the branches of period q.'''
    theorem = theorem_count(q, params)
    exact = on_threshold(q, params)
    lower_bound = q == 4 and params.k != 2
    vectors = [b.vector for b in branches]
    numeric = pattern_classes(vectors)
    result = {'nu': theorem if exact else numeric,
              'raw': len(branches),
              'orbit': pattern_classes(vectors, renormalize=True),
              'theorem': theorem,
              'exact_threshold': exact,
              'lower_bound': lower_bound}
    agrees = exact or (numeric >= theorem if lower_bound else numeric == theorem)
    if not agrees:
        log.warning('q = %d, k = %d, theta = %r: %d classes found, closed form gives %d',
                    q, params.k, params.theta, numeric, theorem)
    return result


def _agrees(count, q):
    if count.exact_threshold.get(q):
        return True
    if count.lower_bound.get(q):
        return count.nu[q] >= count.theorem[q]
    return count.nu[q] == count.theorem[q]


#########################################################
# helpers
def _x_eq_1_roots(params):
    '''Positive roots other than y = 1 of (theta y + 2)**k - y (theta + 2 y)**k.'''
    k, theta = params.k, params.theta
    poly = Polynomial([2.0, theta])**k - Polynomial([0.0, 1.0])*Polynomial([theta, 2.0])**k
    quotient, remainder = divmod(poly, Polynomial([-1.0, 1.0]))
    log.debug('x = 1 polynomial deflated by (y - 1), remainder %s', remainder.coef)
    return positive_roots(quotient)


def _make_branch(q, tag, values, vector, params, multiplicity=1):
    law = polish_law(PeriodicLaw.from_vector(vector), params)
    residual = boundary_law_residual(law, params)
    tol = residual_tolerance(law, params)
    if not residual < tol:
        err_msg = (f'{tag.name} branch {tuple(values)} at k = {params.k}, theta = {params.theta} '
                   f'has residual {residual:.3e}, above {tol:.3e}')
        raise NumericError(err_msg)
    log.debug('%s branch %s: law residual %.3e, pattern residual %.3e', tag.name, tuple(values), residual,
              pattern_residual(vector, params))
    return SolutionBranch(q=q, case_tag=tag, values=tuple(float(v) for v in values),
                          vector=tuple(float(v) for v in vector), law=law, theta=params.theta, k=params.k,
                          multiplicity=int(multiplicity))


def _labelled(q, branches):
    order = list(CaseTag)
    branches = sorted(branches, key=lambda b: (order.index(b.case_tag), b.values[-1], b.values[0]))
    labelled = []
    for tag, group in itertools.groupby(branches, key=lambda b: b.case_tag):
        group = list(group)
        if tag in multi_member_tags[q]:
            labelled.extend(replace(b, label=f'{tag.name}.{i}') for i, b in enumerate(group))
        else:
            labelled.extend(replace(b, label=tag.name) for b in group)
    return labelled


def _threshold_width(q, k, c, tol):
    # theta_c1 is itself only known to the width of its bisection bracket
    if q == 3 and c != critical_constants(k).theta_cr:
        certificate = p3_find_theta_c1(k)
        return max(tol, certificate.hi - certificate.lo)
    return tol


def _positive_theta(theta):
    if isinstance(theta, ModelParams):
        theta = theta.theta
    theta = float(theta)
    if not np.isfinite(theta) or theta <= 0:
        err_msg = f'\'theta\' must be positive and finite, got {theta}'
        raise ModelDomainError(err_msg)
    return theta


#########################################################
# constants
DEDUP_TOL = 1e-8
THRESHOLD_TOL = 1e-9
P3_LOCUS_TOL = 1e-6
P3_THETA_TOL = 1e-6
P3_SEARCH_MAX = 100.0
NEWTON_FTOL = 1e-13
LOG_BOUNDS = (np.log(1e-12), np.log(1e12))

solvers = {
    2: (p2_solve_x_eq_1, p2_solve_diagonal, p2_solve_offdiagonal),
    3: (p3_solve,),
    4: (p4_solve_symmetric, p4_solve_asymmetric),
}

multi_member_tags = {
    2: {CaseTag.X_EQ_1},
    3: {CaseTag.DIAGONAL, CaseTag.X_EQ_1, CaseTag.Y_EQ_1, CaseTag.OFF_LOCUS},
    4: {CaseTag.DIAGONAL, CaseTag.ASYM_PHI1, CaseTag.ASYM_PHI2},
}
