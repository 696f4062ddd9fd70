'''Batched damped Newton iteration for small nonlinear systems.

Every start is iterated in parallel as one row of a 2-d array. The step is
halved until the max-norm residual decreases; rows that cannot decrease it,
leave the bounds, or stop moving are frozen.
'''
import logging

import numpy as np

log = logging.getLogger(__name__)


def damped_newton(fun, jac, x0, ftol=1e-12, maxiter=None, step_tol=None, bounds=None, max_halvings=30):
    '''
    Finds roots of F(x) = 0 from many starting points at once.

    Parameters
    ----------
    fun : callable
        Takes an (m, n) array and returns the (m, n) array of residuals.
    jac : callable
        Takes an (m, n) array and returns the (m, n, n) stack of Jacobians.
    x0 : array_like
        (m, n) starting points, or a single (n,) point.
    ftol : float, optional
        A row is successful when its max-norm residual is at most `ftol`.
    maxiter : int, optional
        Iteration cap. Defaults to MAX_ITER.
    step_tol : float, optional
        A row stops once its accepted step is below step_tol*(1 + |x|).
        Defaults to STEP_TOL.
    bounds : tuple of float, optional
        (lo, hi) box for every coordinate. Rows that leave it are frozen as
        failures.
    max_halvings : int, optional
        Maximum number of step halvings per iteration.

    Returns
    -------
    dict
        'x' final points (m, n), 'success' boolean (m,), 'fun' residual
        max-norms (m,), 'nit' iterations used per row (m,).
    '''
    maxiter = MAX_ITER if maxiter is None else maxiter
    step_tol = STEP_TOL if step_tol is None else step_tol
    x = np.array(x0, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    m = x.shape[0]

    fx = _norms(fun, x)
    active = np.isfinite(fx)
    nit = np.zeros(m, dtype=int)
    escaped = np.zeros(m, dtype=bool)

    for _ in range(maxiter):
        active &= fx > ftol*1e-3
        if not np.any(active):
            break
        rows = np.flatnonzero(active)
        xa = x[rows]
        step = _solve(jac(xa), -fun(xa))
        lam = np.ones(rows.size)
        trial_norm = np.full(rows.size, np.inf)
        pending = np.ones(rows.size, dtype=bool)
        for _halving in range(max_halvings):
            trial = xa[pending] + lam[pending, None]*step[pending]
            trial_norm[pending] = _norms(fun, trial)
            pending[pending] = ~(trial_norm[pending] < fx[rows][pending])
            if not np.any(pending):
                break
            lam[pending] *= 0.5
        nit[rows] += 1

        improved = ~pending
        moved = rows[improved]
        delta = lam[improved, None]*step[improved]
        x[moved] += delta
        fx[moved] = trial_norm[improved]
        # no decrease possible: converged to noise level or stuck
        active[rows[pending]] = False
        small = np.max(np.abs(delta), axis=1) <= step_tol*(1 + np.max(np.abs(x[moved]), axis=1))
        active[moved[small]] = False

        if bounds is not None:
            out = np.any((x[rows] < bounds[0]) | (x[rows] > bounds[1]), axis=1)
            escaped[rows[out]] = True
            active[rows[out]] = False

    success = (fx <= ftol) & ~escaped
    log.debug('damped newton: %d of %d starts converged', int(np.count_nonzero(success)), m)
    if single:
        return {'x': x[0], 'success': bool(success[0]), 'fun': float(fx[0]), 'nit': int(nit[0])}
    return {'x': x, 'success': success, 'fun': fx, 'nit': nit}


def _norms(fun, x):
    with np.errstate(all='ignore'):
        f = fun(x)
    norms = np.max(np.abs(f), axis=1)
    return np.where(np.isfinite(norms), norms, np.inf)


def _solve(jacobians, rhs):
    with np.errstate(all='ignore'):
        try:
            return np.linalg.solve(jacobians, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            # at least one singular Jacobian in the batch
            return np.einsum('mij,mj->mi', np.linalg.pinv(jacobians), rhs)


#########################################################
# constants
MAX_ITER = 200
STEP_TOL = 1e-14
