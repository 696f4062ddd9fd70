'''Model parameters, the transfer kernel and the boundary-law recursion of the
alternating-magnetism SOS model on the Cayley tree of order k.

Heights live on Z and neighbouring heights may differ by at most one (the
constraint graph G). After clearing the common factor, the transfer kernel is

    Q(0) = theta,   Q(+1) = Q(-1) = 1,   Q(d) = 0 otherwise,

with theta = exp(J beta). J and beta never enter separately.
'''
import logging
import numbers
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ModelDomainError, NumericError

log = logging.getLogger(__name__)


#########################################################
# types
@dataclass(frozen=True)
class ModelParams:
    '''
    Branching number and activity of the model.

    Parameters
    ----------
    k : int
        Branching number. Every vertex of the tree has k + 1 neighbours. Must
        be at least 2.
    theta : float
        Activity theta = exp(J beta). Must be positive and finite.

    Raises
    ------
    TypeError
        If `k` is not an integer or `theta` is not a real number.
    ModelDomainError
        If `k` < 2 or `theta` is not a positive finite number.
    '''
    k: int
    theta: float

    def __post_init__(self):
        validate_k(self.k)
        if isinstance(self.theta, bool) or not isinstance(self.theta, numbers.Real):
            err_msg = f'\'theta\' must be a real number, not a {type(self.theta).__name__}'
            raise TypeError(err_msg)
        if not np.isfinite(self.theta) or self.theta <= 0:
            err_msg = f'\'theta\' must be positive and finite, got {self.theta}'
            raise ModelDomainError(err_msg)
        object.__setattr__(self, 'k', int(self.k))
        object.__setattr__(self, 'theta', float(self.theta))

    def with_theta(self, theta):
        return ModelParams(self.k, theta)


@dataclass(frozen=True)
class PeriodicLaw:
    '''
    A q-height-periodic constant boundary law, stored as the q values of its
    residue classes with class 0 normalised to 1.

    Parameters
    ----------
    values : tuple of float
        The value of the law on residue classes 0, 1, ..., q-1. All values
        must be positive and finite, and values[0] must equal 1 to within
        NORMALIZATION_TOL (it is then set to exactly 1).

    See Also
    --------
    PeriodicLaw.from_vector : Builds a law from an unnormalised vector.
    '''
    values: Tuple[float, ...]

    def __post_init__(self):
        values = _validated_vector(self.values, 'values')
        if abs(values[0] - 1.0) > NORMALIZATION_TOL:
            err_msg = f'class 0 of a PeriodicLaw must be 1, got {values[0]!r}; use PeriodicLaw.from_vector to normalise'
            raise ModelDomainError(err_msg)
        values[0] = 1.0
        object.__setattr__(self, 'values', tuple(float(v) for v in values))

    @classmethod
    def from_vector(cls, vector):
        '''Normalise a positive q-vector by its class-0 entry.'''
        vector = _validated_vector(vector, 'vector')
        return cls(tuple(vector / vector[0]))

    @classmethod
    def ones(cls, q):
        return cls((1.0,) * int(q))

    @property
    def q(self):
        return len(self.values)

    def as_array(self):
        return np.array(self.values, dtype=float)

    def shifted(self, shift):
        '''The law l'(i) = l(i + shift), renormalised so that class 0 is 1.'''
        return PeriodicLaw.from_vector(np.roll(self.as_array(), -int(shift)))

    def isclose(self, other, rtol=None):
        rtol = NORMALIZATION_TOL if rtol is None else rtol
        return self.q == other.q and vectors_close(self.as_array(), other.as_array(), rtol)

    def __call__(self, height):
        '''Evaluate the law at an integer height (or an integer array of heights).'''
        return self.as_array()[np.mod(height, self.q)]


@dataclass(frozen=True)
class CriticalConstants:
    '''
    Critical activities for branching number k.

    theta_0 is where the diagonal period-2 branch passes through 1, theta_c
    where the x = 1 family bifurcates (a pitchfork at y = 1), theta_cr where
    the period-3 symmetric branch crosses the trivial solution. theta_c3 and
    theta_star2 are only defined for k = 2 and are None otherwise.
    '''
    k: int
    theta_0: float
    theta_c: float
    theta_cr: float
    theta_c3: Optional[float] = None
    theta_star2: Optional[float] = None

    def as_dict(self):
        return {'k': self.k, 'theta_0': self.theta_0, 'theta_c': self.theta_c, 'theta_cr': self.theta_cr,
                'theta_c3': self.theta_c3, 'theta_star2': self.theta_star2}


#########################################################
# kernel and constants
def transfer_weight(delta, params):
    '''
    Edge weight of the alternating-magnetism SOS model on G-admissible
    configurations, in cleared form.

    Parameters
    ----------
    delta : int or array of int
        Height difference across the edge.
    params : ModelParams
        Model parameters. Only theta is used.

    Returns
    -------
    float or numpy.ndarray
        theta if delta == 0, 1 if |delta| == 1, 0 otherwise.
    '''
    delta = np.asarray(delta)
    weight = np.where(delta == 0, params.theta, np.where(np.abs(delta) == 1, 1.0, 0.0))
    if weight.ndim == 0:
        return float(weight)
    return weight


def critical_constants(k):
    '''
    Critical activities theta_0 < theta_cr < theta_c (and, for k = 2, the
    radicals theta_c3 ~ 6.766 and theta_star2 ~ 2.931).

    Parameters
    ----------
    k : int
        Branching number, k >= 2.

    Returns
    -------
    CriticalConstants

    Raises
    ------
    ModelDomainError
        If k < 2.

    Notes
    -----
    theta_star2 is the real root of theta**3 - 2*theta**2 - 8 = 0, written with
    Cardano's formula as 2/3 + (c + 4/c)/3 with c = cbrt(116 + 12*sqrt(93)).
    '''
    validate_k(k)
    k = int(k)
    theta_c3 = None
    theta_star2 = None
    if k == 2:
        c3 = np.cbrt(54 + 6*np.sqrt(33))
        theta_c3 = float(2/3*c3 + 8/c3 + 2)
        c2 = np.cbrt(116 + 12*np.sqrt(93))
        theta_star2 = float(2/3 + (c2 + 4/c2)/3)
    return CriticalConstants(k=k,
                             theta_0=2/(k - 1),
                             theta_c=2*(k + 1)/(k - 1),
                             theta_cr=(k + 2)/(k - 1),
                             theta_c3=theta_c3,
                             theta_star2=theta_star2)


#########################################################
# recursion
def recursion_rhs(vector, params):
    '''
    Right hand side of the constant boundary-law equation

        z_i = ((theta z_i + z_{i-1} + z_{i+1}) / (theta + z_{-1} + z_1))**k

    for a q-periodic vector z (indices mod q). The denominator uses the
    constant theta, exactly as the recursion is written with z_0 = 1; for
    vectors with z_0 != 1 this is the literal form solved by the period-2
    system.
    '''
    z = np.asarray(vector, dtype=float)
    numerator = params.theta*z + np.roll(z, 1) + np.roll(z, -1)
    denominator = params.theta + z[-1] + z[1 % z.size]
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        rhs = (numerator/denominator)**params.k
    if not np.all(np.isfinite(rhs)):
        err_msg = f'non-finite value in the boundary-law recursion for z = {z.tolist()}, theta = {params.theta}'
        raise NumericError(err_msg)
    return rhs


def boundary_law_residual(law, params):
    '''
    Max-norm residual of a PeriodicLaw in the constant boundary-law equation.

    Parameters
    ----------
    law : PeriodicLaw
        The candidate law.
    params : ModelParams

    Returns
    -------
    float
        max_i |z_i - RHS_i(z)|; zero exactly for solutions.

    Raises
    ------
    TypeError
        If `law` is not a PeriodicLaw.
    NumericError
        If an intermediate value is not finite.
    '''
    if not isinstance(law, PeriodicLaw):
        err_msg = f'\'law\' must be a PeriodicLaw, not a {type(law).__name__}'
        raise TypeError(err_msg)
    z = law.as_array()
    return float(np.max(np.abs(z - recursion_rhs(z, params))))


def pattern_residual(vector, params):
    '''Relative residual max_i |z_i - RHS_i(z)| / z_i of an unnormalised vector.'''
    z = _validated_vector(vector, 'vector')
    return float(np.max(np.abs(z - recursion_rhs(z, params))/z))


def shift_vectors(vector, renormalize=True):
    '''
    All q cyclic shifts z'(i) = z(i + d), d = 0..q-1, of a vector, optionally
    renormalised to class 0 = 1. Near-duplicates are dropped; order follows d.
    '''
    z = _validated_vector(vector, 'vector')
    shifts = []
    for d in range(z.size):
        shifted = np.roll(z, -d)
        if renormalize:
            shifted = shifted/shifted[0]
        if not any(vectors_close(shifted, other, NORMALIZATION_TOL) for other in shifts):
            shifts.append(shifted)
    return shifts


def cyclic_shift_orbit(law):
    '''
    Cyclic-shift orbit of a periodic boundary law.

    Laws in the same orbit define the same gradient Gibbs measure.

    Parameters
    ----------
    law : PeriodicLaw

    Returns
    -------
    tuple of PeriodicLaw
        The distinct shifts l(. + d), renormalised to class 0 = 1, starting
        with `law` itself (d = 0).

    See Also
    --------
    shift_vectors : The same operation on raw (unnormalised) pattern vectors.
    '''
    if not isinstance(law, PeriodicLaw):
        err_msg = f'\'law\' must be a PeriodicLaw, not a {type(law).__name__}'
        raise TypeError(err_msg)
    return tuple(PeriodicLaw(tuple(v)) for v in shift_vectors(law.as_array(), renormalize=True))


def residual_tolerance(law, params):
    '''
    Largest accepted boundary_law_residual for `law`.

    RESIDUAL_TOL itself for k in ABSOLUTE_RESIDUAL_KS. For higher k the
    coordinates of solutions grow like theta**k and double precision cannot
    resolve an absolute 1e-10 there, so the tolerance is scaled by
    max(1, max_i z_i).
    '''
    if params.k in ABSOLUTE_RESIDUAL_KS:
        return RESIDUAL_TOL
    return RESIDUAL_TOL*max(1.0, float(np.max(law.as_array())))


def polish_law(law, params):
    '''
    One Newton step on the boundary-law equation in classes 1..q-1, class 0
    held at 1. The step is kept only if it lowers the residual.
    '''
    z = law.as_array()
    k, theta = params.k, params.theta
    q = z.size
    numerator = theta*z + np.roll(z, 1) + np.roll(z, -1)
    denominator = theta + z[-1] + z[1 % q]
    ratio = numerator/denominator
    # d numerator_i / d z_j and d denominator / d z_j
    d_numerator = theta*np.eye(q) + np.roll(np.eye(q), 1, axis=0) + np.roll(np.eye(q), -1, axis=0)
    d_denominator = np.zeros(q)
    d_denominator[-1] += 1.0
    d_denominator[1 % q] += 1.0
    d_ratio = (d_numerator - np.outer(ratio, d_denominator))/denominator
    jacobian = np.eye(q) - k*(ratio**(k - 1))[:, None]*d_ratio
    residual = z - ratio**k
    step = np.linalg.lstsq(jacobian[1:, 1:], -residual[1:], rcond=None)[0]
    candidate = z.copy()
    candidate[1:] += step
    if not np.all(np.isfinite(candidate)) or np.any(candidate <= 0):
        return law
    polished = PeriodicLaw(tuple(candidate))
    if boundary_law_residual(polished, params) < boundary_law_residual(law, params):
        return polished
    return law


#########################################################
# helpers
def validate_k(k):
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        err_msg = f'\'k\' must be an int, not a {type(k).__name__}'
        raise TypeError(err_msg)
    if k < 2:
        err_msg = f'\'k\' must be >= 2, got {k}'
        raise ModelDomainError(err_msg)


def vectors_close(a, b, rtol):
    '''Relative max-norm comparison used for deduplication everywhere.'''
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return False
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
    return bool(np.all(np.abs(a - b) <= rtol*scale))


def _validated_vector(vector, name):
    z = np.array(vector, dtype=float).ravel()
    if z.size < 2:
        err_msg = f'\'{name}\' must hold at least 2 residue classes, got {z.size}'
        raise ModelDomainError(err_msg)
    if not np.all(np.isfinite(z)) or np.any(z <= 0):
        err_msg = f'\'{name}\' must be strictly positive and finite, got {z.tolist()}'
        raise ModelDomainError(err_msg)
    return z


#########################################################
# constants
RESIDUAL_TOL = 1e-10
NORMALIZATION_TOL = 1e-12
ABSOLUTE_RESIDUAL_KS = (2, 3)
