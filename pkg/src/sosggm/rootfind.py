'''Positive real roots of the low-degree polynomials that the boundary-law
equations reduce to.

Only positive reals are ever candidates for a boundary law, so no complex root
is computed. Roots are isolated by sign changes on a geometric grid spanning
the Cauchy bounds of the polynomial, refined with scipy's brentq and polished
by one guarded Newton step. Tangential (even multiplicity) roots do not change
sign; they are found as local minima of |p| that dip below DOUBLE_ROOT_TOL.
'''
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .errors import ModelDomainError, RootIsolationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootSet:
    '''
    Sorted positive roots of a polynomial with their multiplicities.

    Parameters
    ----------
    roots : tuple of float
        Positive roots in ascending order.
    multiplicities : tuple of int
        Multiplicity of each root. 1 for simple roots.
    sign_changes : int
        Descartes count of the coefficient sequence.
    complete : bool
        False when the search was restricted by a bracket hint, in which case
        only the upper Descartes bound is checked.

    Raises
    ------
    RootIsolationError
        If the multiplicity-weighted root count exceeds `sign_changes` or, for
        a complete search, differs from it by an odd number.
    '''
    roots: Tuple[float, ...]
    multiplicities: Tuple[int, ...]
    sign_changes: int
    complete: bool = True

    def __post_init__(self):
        if len(self.roots) != len(self.multiplicities):
            err_msg = f'{len(self.roots)} roots but {len(self.multiplicities)} multiplicities'
            raise RootIsolationError(err_msg)
        counted = sum(self.multiplicities)
        if counted > self.sign_changes or (self.complete and (self.sign_changes - counted) % 2):
            err_msg = (f'found {counted} positive roots (with multiplicity) {list(self.roots)}, '
                       f'inconsistent with {self.sign_changes} coefficient sign changes')
            raise RootIsolationError(err_msg)

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __getitem__(self, index):
        return self.roots[index]

    @property
    def has_multiple_root(self):
        return any(m > 1 for m in self.multiplicities)

    def multiplicity_of(self, root, rtol=1e-9):
        for r, m in zip(self.roots, self.multiplicities):
            if abs(r - root) <= rtol*max(abs(r), abs(root)):
                return m
        return 0


def as_polynomial(p):
    '''
    Coerce coefficients (ascending degree) or a numpy Polynomial into a
    Polynomial of degree >= 1 with nonzero leading coefficient.

    Raises
    ------
    ModelDomainError
        If all coefficients vanish, the polynomial is constant, or a
        coefficient is not finite.
    '''
    coef = np.array(p.coef if isinstance(p, Polynomial) else p, dtype=float).ravel()
    if coef.size == 0 or not np.any(coef):
        err_msg = '\'p\' must have at least one nonzero coefficient'
        raise ModelDomainError(err_msg)
    if not np.all(np.isfinite(coef)):
        err_msg = f'\'p\' has non-finite coefficients {coef.tolist()}'
        raise ModelDomainError(err_msg)
    coef = np.trim_zeros(coef, 'b')
    if coef.size < 2:
        err_msg = f'\'p\' must have degree >= 1, got the constant {coef[0]!r}'
        raise ModelDomainError(err_msg)
    return Polynomial(coef)


def descartes_sign_changes(p):
    '''
    Number of strict sign changes in the nonzero coefficient sequence.

    Parameters
    ----------
    p : numpy.polynomial.Polynomial or array_like
        Coefficients in ascending degree order.

    Returns
    -------
    int
        An upper bound on the number of positive roots counted with
        multiplicity, with the same parity.

    Raises
    ------
    ModelDomainError
        If the polynomial is identically zero or constant.
    '''
    coef = as_polynomial(p).coef
    signs = np.sign(coef[coef != 0])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def positive_roots(p, bracket_hint=None, rtol=None, double_root_tol=None):
    '''
    All positive real roots of a polynomial.

    Parameters
    ----------
    p : numpy.polynomial.Polynomial or array_like
        Coefficients in ascending degree order.
    bracket_hint : tuple of float, optional
        (lo, hi) restricting the search. By default the interval between
        the lower and upper Cauchy bounds is scanned.
    rtol : float, optional
        Relative accuracy of the refined roots. Defaults to ROOT_RTOL.
    double_root_tol : float, optional
        Relative size of |p| below which a sign-preserving local minimum is
        accepted as a root of even multiplicity. Defaults to DOUBLE_ROOT_TOL.

    Returns
    -------
    RootSet

    Raises
    ------
    ModelDomainError
        If `p` is not a valid polynomial or `bracket_hint` is not a positive
        increasing pair.
    RootIsolationError
        If the roots found contradict Descartes' rule of signs.

    Notes
    -----
    Zero roots are deflated before scanning. Multiplicities of sign-changing
    roots are estimated from successive derivatives and forced odd, and
    those of tangential roots forced even.
    '''
    rtol = ROOT_RTOL if rtol is None else rtol
    double_root_tol = DOUBLE_ROOT_TOL if double_root_tol is None else double_root_tol
    poly = as_polynomial(p)
    sign_changes = descartes_sign_changes(poly)

    # deflate roots at zero
    coef = poly.coef
    n_zero = int(np.argmax(coef != 0))
    poly = Polynomial(coef[n_zero:])
    if poly.degree() == 0 or sign_changes == 0:
        return RootSet((), (), sign_changes, complete=bracket_hint is None)

    lo, hi = _cauchy_bounds(poly.coef)
    complete = True
    if bracket_hint is not None:
        hint_lo, hint_hi = (float(v) for v in bracket_hint)
        if not 0 < hint_lo < hint_hi:
            err_msg = f'\'bracket_hint\' must satisfy 0 < lo < hi, got {bracket_hint}'
            raise ModelDomainError(err_msg)
        lo, hi = max(lo, hint_lo), min(hi, hint_hi)
        complete = False
        if lo >= hi:
            return RootSet((), (), sign_changes, complete=False)

    deg = poly.degree()
    dpoly = poly.deriv()

    n_grid = max(int(math.ceil(math.log10(hi/lo)*GRID_POINTS_PER_DECADE)) + 1, 3)
    grid = np.geomspace(lo, hi, n_grid)
    values = poly(grid)
    log.debug('scanning %d grid points on [%g, %g] for a degree %d polynomial', n_grid, lo, hi, deg)

    # (root, multiplicity or None, sign change)
    found = []
    for i in np.flatnonzero(values == 0):
        # on the scan edge there is no neighbour pair to tell crossing from touching
        crosses = bool(values[i - 1]*values[i + 1] < 0) if 0 < i < n_grid - 1 else None
        found.append((float(grid[i]), None, crosses))
    for i in np.flatnonzero(values[:-1]*values[1:] < 0):
        a, b = float(grid[i]), float(grid[i + 1])
        root = brentq(poly, a, b, xtol=rtol*a*1e-3, rtol=4*np.finfo(float).eps)
        found.append((_polish(poly, dpoly, root, a, b), None, True))

    # |p| has a local minimum without a sign change: either a tangential
    # root, or a pair of close simple roots around the critical point
    mag = np.abs(values)
    for i in range(1, n_grid - 1):
        if values[i] == 0 or not (mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]):
            continue
        if values[i - 1]*values[i] <= 0 or values[i]*values[i + 1] <= 0:
            continue
        a, b = float(grid[i - 1]), float(grid[i + 1])
        if dpoly(a)*dpoly(b) < 0:
            r = brentq(dpoly, a, b, xtol=rtol*a*1e-3, rtol=4*np.finfo(float).eps)
        else:
            r = float(grid[i])
        pr = poly(r)
        if abs(pr) <= double_root_tol*_local_magnitude(poly, r):
            log.debug('tangential root at %r (|p| = %g)', r, abs(pr))
            found.append((r, 2, False))
        elif pr*values[i] < 0:
            log.debug('splitting a close root pair at the critical point %r', r)
            for left, right in ((a, r), (r, b)):
                root = brentq(poly, left, right, xtol=rtol*left*1e-3, rtol=4*np.finfo(float).eps)
                found.append((_polish(poly, dpoly, root, left, right), None, True))

    roots, multiplicities, crossing = [], [], []
    for r, mult, crosses in sorted(found, key=lambda item: item[0]):
        if mult is None:
            mult = _multiplicity(poly, r, double_root_tol, odd=crosses)
        if roots and abs(r - roots[-1]) <= ISOLATION_RTOL*r:
            multiplicities[-1] = max(multiplicities[-1], mult)
            continue
        roots.append(r)
        multiplicities.append(mult)
        crossing.append(crosses)

    counted = sum(multiplicities)
    if counted > sign_changes or (complete and (sign_changes - counted) % 2):
        # a cluster of close simple roots looks locally like one multiple root
        log.debug('multiplicities %s inconsistent with %d sign changes, counting crossings as simple',
                  multiplicities, sign_changes)
        multiplicities = [1 if c else m for c, m in zip(crossing, multiplicities)]
    return RootSet(tuple(roots), tuple(multiplicities), sign_changes, complete=complete)


def _cauchy_bounds(coef):
    '''Bounds lo < |r| < hi for every nonzero root; coef[0] and coef[-1] must be nonzero.'''
    hi = 1 + float(np.max(np.abs(coef[:-1]))/abs(coef[-1]))
    lo = 1/(1 + float(np.max(np.abs(coef[1:]))/abs(coef[0])))
    return lo/2, hi*2


def _polish(poly, dpoly, root, a, b):
    '''One Newton step, kept only if it stays in [a, b] and does not increase |p|.'''
    slope = dpoly(root)
    if slope == 0 or not np.isfinite(slope):
        return root
    candidate = root - poly(root)/slope
    if a <= candidate <= b and abs(poly(candidate)) <= abs(poly(root)):
        return float(candidate)
    return root


def _local_magnitude(poly, r):
    '''sum_i |c_i| r**i, the size of the terms that cancel in p(r).'''
    return float(np.polynomial.polynomial.polyval(r, np.abs(poly.coef)))


def _multiplicity(poly, r, rel_tol, odd):
    '''
    Multiplicity of the root r from the Taylor terms |p^(m)(r)| r**m / m!
    measured against the local magnitude of p. `odd` forces the parity
    (True for sign changes, False for touching roots, None for no forcing).
    '''
    deg = poly.degree()
    tol = rel_tol*_local_magnitude(poly, r)
    if odd and abs(poly.deriv()(r))*r > tol:
        return 1
    mult = 1
    derivative = poly
    while mult < deg:
        derivative = derivative.deriv()
        if abs(derivative(r))*r**mult/math.factorial(mult) > tol:
            break
        mult += 1
    if odd is True and mult % 2 == 0:
        mult += 1
    elif odd is False and mult % 2 == 1:
        mult += 1
    return mult


#########################################################
# constants
ROOT_RTOL = 1e-12
DOUBLE_ROOT_TOL = 1e-9
ISOLATION_RTOL = 1e-9
GRID_POINTS_PER_DECADE = 400
