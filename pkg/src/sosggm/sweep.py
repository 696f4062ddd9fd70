'''Theta sweeps: one row of branch coordinates and solution counts per grid
point, written as the bifurcation CSV.

Grid points are independent, so a Sweep may spread them over a thread pool.
Rows are kept by grid index and written in that order, which makes the output
independent of scheduling.
'''
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import transcode
from .branches import TransitionCertificate, census, p3_find_theta_c1, pattern_classes, solve_period
from .errors import ModelDomainError
from .model import ModelParams, validate_k

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    '''
    Sweep result at one theta.

    `columns` maps a branch label to the second coordinate of that branch.
    Branches absent at theta have no key, and are written as empty cells.
    '''
    theta: float
    columns: Dict[str, float] = field(default_factory=dict)
    nu: int = 0
    raw: int = 0
    orbit: int = 0
    theorem: int = 0


def theta_grid(theta_min, theta_max, steps):
    '''
    Closed grid theta_min + i (theta_max - theta_min)/(steps - 1), i = 0..steps-1.

    Every point is computed from its index, and the last point is exactly
    theta_max.
    '''
    if isinstance(steps, bool) or not isinstance(steps, (int, np.integer)):
        err_msg = f'\'steps\' must be an int, not a {type(steps).__name__}'
        raise TypeError(err_msg)
    if steps < 2:
        err_msg = f'\'steps\' must be >= 2, got {steps}'
        raise ModelDomainError(err_msg)
    if not (np.isfinite(theta_min) and theta_min > 0):
        err_msg = f'\'theta_min\' must be > 0, got {theta_min}'
        raise ModelDomainError(err_msg)
    if not (np.isfinite(theta_max) and theta_max >= theta_min):
        err_msg = f'\'theta_max\' must be >= theta_min = {theta_min}, got {theta_max}'
        raise ModelDomainError(err_msg)
    width = float(theta_max) - float(theta_min)
    grid = np.array([theta_min + i*width/(steps - 1) for i in range(steps)], dtype=float)
    grid[-1] = theta_max
    return grid


def sweep_row(q, params):
    '''Solves period q at params and collects the row.'''
    branches = solve_period(q, params)
    counts = census(q, branches, params)
    wanted = set(transcode.sweep_columns[q])
    columns = {b.label: b.second_coordinate for b in branches if b.label in wanted}
    return SweepRow(theta=params.theta, columns=columns, nu=counts['nu'], raw=counts['raw'],
                    orbit=counts['orbit'], theorem=counts['theorem'])


def refine_transitions(q, k, rows, tol=None):
    '''
    Bisects every change of nu between consecutive rows.

    The bisection runs on the numeric class count, never on the closed-form
    value, so the returned brackets locate the transitions independently of
    the critical constants. A change that the numeric count does not see at
    the two grid points (an isolated threshold value hit by the grid) is
    skipped.

    Parameters
    ----------
    q, k : int
    rows : sequence of SweepRow
        In ascending theta.
    tol : float, optional
        Width of the final brackets. Defaults to REFINE_TOL.

    Returns
    -------
    list of TransitionCertificate
    '''
    tol = REFINE_TOL if tol is None else tol
    transitions = []
    for previous, current in zip(rows, rows[1:]):
        if previous.nu == current.nu:
            continue
        lo, hi = previous.theta, current.theta
        count_lo, count_hi = numeric_count(q, ModelParams(k, lo)), numeric_count(q, ModelParams(k, hi))
        if count_lo == count_hi:
            log.debug('nu%d changes in [%r, %r] only at a threshold value, not refined', q, lo, hi)
            continue
        while hi - lo > tol:
            mid = 0.5*(lo + hi)
            if numeric_count(q, ModelParams(k, mid)) == count_lo:
                lo = mid
            else:
                hi = mid
        count_hi = numeric_count(q, ModelParams(k, hi))
        log.info('nu%d transition %d -> %d in [%.9f, %.9f]', q, count_lo, count_hi, lo, hi)
        transitions.append(TransitionCertificate(k=k, lo=lo, hi=hi, count_lo=count_lo, count_hi=count_hi))
    return transitions


def numeric_count(q, params):
    '''Number of classes of the branch vectors of period q, without the exact-threshold rule.'''
    return pattern_classes([b.vector for b in solve_period(q, params)])


class Sweep:
    '''
    A theta sweep of one period.

    Parameters
    ----------
    q : int
        Period, one of the keys of transcode.sweep_columns.
    k : int
    theta_min, theta_max : float
    steps : int
    workers : int, optional
        Number of threads the grid points are spread over.
    '''

    def __init__(self, q, k, theta_min, theta_max, steps, workers=1):
        validate_k(k)
        if q not in transcode.sweep_columns:
            err_msg = f'\'q\' must be one of {sorted(transcode.sweep_columns)}, got {q!r}'
            raise ModelDomainError(err_msg)
        if isinstance(workers, bool) or not isinstance(workers, (int, np.integer)) or workers < 1:
            err_msg = f'\'workers\' must be a positive int, got {workers!r}'
            raise ModelDomainError(err_msg)
        self.q = q
        self.k = int(k)
        self.grid = theta_grid(theta_min, theta_max, steps)
        self.workers = int(workers)
        self.rows = {}  # grid index -> SweepRow
        self.transitions = []

    def run(self):
        '''Computes every row not computed yet and returns all rows in grid order.'''
        if self.q == 3:
            # cached bisection, computed once before the threads need it
            p3_find_theta_c1(self.k)
        todo = [i for i in range(len(self.grid)) if i not in self.rows]
        if self.workers == 1:
            for i in todo:
                self.rows[i] = self._row(i)
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                for i, row in zip(todo, pool.map(self._row, todo)):
                    self.rows[i] = row
        log.info('sweep q = %d, k = %d: %d rows on [%r, %r]', self.q, self.k, len(self.grid), self.grid[0],
                 self.grid[-1])
        return self.get_rows()

    def refine(self, tol=None):
        self.transitions = refine_transitions(self.q, self.k, self.get_rows(), tol=tol)
        return self.transitions

    def get_rows(self):
        return [self.rows[i] for i in sorted(self.rows)]

    def write(self, stream, stamp: Optional[str] = None):
        '''Writes the CSV: header comments, the column header, the rows, then any refined transitions.'''
        table = transcode.encode_sweep_header(self.q, self.k, stamp=stamp)
        table += [transcode.encode_sweep_row(row, self.q) for row in self.get_rows()]
        table += [transcode.encode_transition(self.q, t) for t in self.transitions]
        transcode.write_csv(table, stream)

    def _row(self, index):
        row = sweep_row(self.q, ModelParams(self.k, float(self.grid[index])))
        log.debug('sweep row %d at theta = %r: nu%d = %d', index, row.theta, self.q, row.nu)
        return row


#########################################################
# constants
REFINE_TOL = 1e-6
