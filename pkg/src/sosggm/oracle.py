'''Brute-force solver for the constant boundary-law equation

    z_i = ((theta z_i + z_{i-1} + z_{i+1}) / (theta + z_{-1} + z_1))**k

restricted to the period-q pattern, used to cross-check the branch solvers.

The oracle knows nothing about case reductions: it runs damped Newton in log
coordinates on the free classes of the pattern from a deterministic Halton
lattice of starts and clusters what converges. It must not import the branch
solvers.
'''
import logging
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import qmc

from .errors import ModelDomainError
from .model import (ModelParams, PeriodicLaw, boundary_law_residual, residual_tolerance, validate_k,
                    vectors_close)
from .newton import damped_newton

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleReport:
    '''
    Distinct solutions found at one theta.

    `vectors` are the full pattern vectors (free classes solved, pinned
    classes 1) and `found_solutions` their normalised laws. `agreement` is
    None unless reference vectors were supplied. `tracks` holds persistent
    branch ids when the report is part of a sweep.
    '''
    theta: float
    k: int
    q: int
    vectors: Tuple[Tuple[float, ...], ...]
    found_solutions: Tuple[PeriodicLaw, ...]
    max_residual: float
    n_starts: int
    n_discarded: int
    agreement: Optional[bool] = None
    tracks: Optional[Tuple[int, ...]] = None


def oracle_solve(q, params, starts=None, reference=None, n_starts=None):
    '''
    Solve the pattern system of period q by multistart damped Newton.

    Parameters
    ----------
    q : int
        Period, one of 2, 3, 4.
    params : ModelParams
    starts : array_like, optional
        (m, n_free) positive starting points. Defaults to the first
        `n_starts` points of an unscrambled Halton sequence mapped to
        10**START_LOG10_RANGE.
    reference : sequence of array_like, optional
        Pattern vectors to compare with (e.g. from the branch solvers).
    n_starts : int, optional
        Defaults to N_STARTS.

    Returns
    -------
    OracleReport
    '''
    if q not in free_classes:
        err_msg = f'\'q\' must be one of {sorted(free_classes)}, got {q!r}'
        raise ModelDomainError(err_msg)
    free = free_classes[q]
    if starts is None:
        starts = default_starts(len(free), N_STARTS if n_starts is None else n_starts)
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[1] != len(free) or np.any(starts <= 0):
        err_msg = f'\'starts\' must be positive with {len(free)} columns, got shape {starts.shape}'
        raise ModelDomainError(err_msg)

    fun, jac = _pattern_system(q, params)
    lo, hi = COORD_BOUNDS
    result = damped_newton(fun, jac, np.log(starts), ftol=1e-13, bounds=(np.log(lo), np.log(hi)))

    found = []
    for u in result['x'][result['success']]:
        vector = _assemble(q, np.exp(u))
        if np.any(vector <= lo) or np.any(vector >= hi):
            continue
        law = PeriodicLaw.from_vector(vector)
        residual = boundary_law_residual(law, params)
        if residual < residual_tolerance(law, params):
            found.append((residual, tuple(vector.tolist()), law))
    n_discarded = len(starts) - len(found)

    found.sort(key=lambda item: item[0])
    vectors, laws, residuals = [], [], []
    for residual, vector, law in found:
        if not any(vectors_close(vector, other, CLUSTER_TOL) for other in vectors):
            vectors.append(vector)
            laws.append(law)
            residuals.append(residual)
    order = sorted(range(len(vectors)), key=lambda i: vectors[i])
    vectors = tuple(vectors[i] for i in order)
    laws = tuple(laws[i] for i in order)

    agreement = None
    if reference is not None:
        agreement = compare_solution_sets(vectors, reference)
    log.info('oracle q = %d, k = %d, theta = %r: %d distinct solutions from %d starts (%d discarded)',
             q, params.k, params.theta, len(vectors), len(starts), n_discarded)
    return OracleReport(theta=params.theta, k=params.k, q=q, vectors=vectors, found_solutions=laws,
                        max_residual=max(residuals, default=0.0), n_starts=len(starts), n_discarded=n_discarded,
                        agreement=agreement)


def oracle_sweep(q, k, theta_grid, starts=None):
    '''
    oracle_solve over an ascending theta grid, with solutions linked into
    tracks between neighbouring grid points.

    Tracks are matched by minimum-cost assignment on the max-norm distance
    of the log pattern vectors. A match costing more than TRACK_MAX_JUMP
    starts a new track.

    Returns
    -------
    list of OracleReport
    '''
    validate_k(k)
    theta_grid = np.asarray(theta_grid, dtype=float)
    if theta_grid.ndim != 1 or np.any(np.diff(theta_grid) < 0):
        err_msg = '\'theta_grid\' must be a 1-d ascending sequence'
        raise ModelDomainError(err_msg)
    reports = []
    previous, previous_tracks = None, ()
    next_track = 0
    for theta in theta_grid:
        report = oracle_solve(q, ModelParams(k, float(theta)), starts=starts)
        current = np.log(np.array(report.vectors)) if report.vectors else np.empty((0, q))
        tracks = [-1]*len(report.vectors)
        if previous is not None and len(previous) and len(current):
            cost = np.max(np.abs(previous[:, None, :] - current[None, :, :]), axis=2)
            rows, cols = linear_sum_assignment(cost)
            for r, c in zip(rows, cols):
                if cost[r, c] <= TRACK_MAX_JUMP:
                    tracks[c] = previous_tracks[r]
        for i, track in enumerate(tracks):
            if track < 0:
                tracks[i] = next_track
                next_track += 1
        reports.append(replace(report, tracks=tuple(tracks)))
        previous, previous_tracks = current, tuple(tracks)
    return reports


def compare_solution_sets(found, reference, rtol=None):
    '''
    True when both sets of pattern vectors have the same number of distinct
    members and can be paired one-to-one within relative `rtol`.
    '''
    rtol = CLUSTER_TOL if rtol is None else rtol
    distinct = []
    for vector in reference:
        if not any(vectors_close(vector, other, rtol) for other in distinct):
            distinct.append(tuple(float(v) for v in vector))
    if len(distinct) != len(found):
        log.warning('oracle found %d solutions, reference has %d', len(found), len(distinct))
        return False
    if not found:
        return True
    cost = np.array([[0.0 if vectors_close(a, b, rtol) else 1.0 for b in distinct] for a in found])
    rows, cols = linear_sum_assignment(cost)
    matched = bool(cost[rows, cols].sum() == 0)
    if not matched:
        log.warning('oracle solutions do not pair up with the reference set')
    return matched


def default_starts(n_free, n_starts):
    lo, hi = START_LOG10_RANGE
    points = qmc.Halton(d=n_free, scramble=False).random(n_starts)
    return 10**(lo + (hi - lo)*points)


#########################################################
# helpers
def _assemble(q, free_values):
    vector = np.ones(q)
    vector[list(free_classes[q])] = free_values
    return vector


def _pattern_system(q, params):
    '''Residual and Jacobian of u_i - k (log N_i - log D) over the free classes, u = log z.'''
    k, theta = params.k, params.theta
    free = list(free_classes[q])
    coupling = theta*np.eye(q)
    denominator_weights = np.zeros(q)
    for i in range(q):
        coupling[i, (i - 1) % q] += 1
        coupling[i, (i + 1) % q] += 1
    denominator_weights[q - 1] += 1
    denominator_weights[1 % q] += 1

    def expand(u):
        z = np.ones((u.shape[0], q))
        z[:, free] = np.exp(u)
        return z

    def fun(u):
        z = expand(u)
        numerator = z @ coupling.T
        denominator = theta + z @ denominator_weights
        return u - k*(np.log(numerator[:, free]) - np.log(denominator)[:, None])

    def jac(u):
        z = expand(u)
        numerator = z @ coupling.T
        denominator = theta + z @ denominator_weights
        zf = z[:, free]
        d_num = coupling[np.ix_(free, free)][None, :, :]*zf[:, None, :]/numerator[:, free][:, :, None]
        d_den = (denominator_weights[free]*zf/denominator[:, None])[:, None, :]
        return np.eye(len(free))[None, :, :] - k*(d_num - d_den)

    return fun, jac


#########################################################
# constants
N_STARTS = 256
START_LOG10_RANGE = (-4.0, 4.0)
COORD_BOUNDS = (1e-12, 1e12)
CLUSTER_TOL = 1e-8
TRACK_MAX_JUMP = 0.5

free_classes = {
    2: (0, 1),
    3: (1, 2),
    4: (1, 3),
}
