'''Pinned and mixed gradient Gibbs measures on finite subtrees of the Cayley
tree, built from a periodic boundary law by exhaustive enumeration of the
gradient configurations.

A gradient configuration assigns zeta_b in {-1, 0, +1} to every edge b of the
subtree. Its weight with the residue class s pinned at the root w is

    prod_{y in boundary} l(s + sum_{b on the path w -> y} zeta_b) * prod_b Q(zeta_b)

and the mixed (translation invariant) weight sums this over s in Z_q.
Configurations are indexed in base 3 with digits 0, 1, 2 for zeta = -1, 0, +1
and the first edge most significant, so the configurations of a subtree that
shares the first edges of a larger one are blocks of consecutive indices.
'''
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import EnumerationSizeError, ModelDomainError
from .model import PeriodicLaw, boundary_law_residual, residual_tolerance, validate_k

log = logging.getLogger(__name__)


class FiniteSubtree:
    '''
    The ball of radius `depth` around a root w of the Cayley tree of order k.

    The root has k + 1 children (k with half_tree=True), every other interior
    vertex has k children. Vertices are numbered breadth first, so edge e
    always leads from its parent to vertex e + 1.

    Parameters
    ----------
    k : int
        Branching number.
    depth : int
        Distance from the root to the boundary, at least 1.
    half_tree : bool, optional
        Give the root only k children.
    '''

    def __init__(self, k, depth, half_tree=False):
        validate_k(k)
        if isinstance(depth, bool) or not isinstance(depth, (int, np.integer)):
            err_msg = f'\'depth\' must be an int, not a {type(depth).__name__}'
            raise TypeError(err_msg)
        if depth < 1:
            err_msg = f'\'depth\' must be >= 1, got {depth}'
            raise ModelDomainError(err_msg)
        self.k = int(k)
        self.depth = int(depth)
        self.half_tree = bool(half_tree)

        edges = []
        parent = [-1]
        frontier = [0]
        for _ in range(self.depth):
            next_frontier = []
            for v in frontier:
                n_children = self.k + (0 if (v != 0 or self.half_tree) else 1)
                for _child in range(n_children):
                    child = len(parent)
                    parent.append(v)
                    edges.append((v, child))
                    next_frontier.append(child)
            frontier = next_frontier
        self.edges = tuple(edges)
        self.parent = tuple(parent)
        self.boundary = tuple(frontier)

        # path[i, e] = 1 when edge e lies on the path from the root to boundary vertex i
        path = np.zeros((len(self.boundary), len(self.edges)), dtype=np.int64)
        for i, v in enumerate(self.boundary):
            while v != 0:
                path[i, v - 1] = 1
                v = self.parent[v]
        self.path = path

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_vertices(self):
        return len(self.parent)

    @property
    def n_configs(self):
        return 3**self.n_edges

    def is_nested_in(self, other):
        '''True when this subtree is a rooted subtree of `other` with the same root.'''
        return (isinstance(other, FiniteSubtree) and self.k == other.k and self.half_tree == other.half_tree
                and self.depth <= other.depth)

    def __repr__(self):
        return f'FiniteSubtree(k={self.k}, depth={self.depth}, half_tree={self.half_tree})'


@dataclass(frozen=True, eq=False)
class GradientMarginal:
    '''
    Distribution of the gradient configuration on a finite subtree.

    probabilities[i] is the probability of configuration i in the base-3
    indexing of the module. pin is the pinned residue class, or None for
    the mixed measure.
    '''
    probabilities: np.ndarray
    tree: FiniteSubtree
    law: PeriodicLaw
    theta: float
    k: int
    pin: Optional[int]

    def configs(self):
        '''All gradient configurations as an (n_configs, n_edges) array of -1, 0, +1.'''
        return gradient_configs(self.tree.n_edges, 0, self.tree.n_configs)

    def probability(self, zeta):
        zeta = np.asarray(zeta, dtype=int)
        if zeta.shape != (self.tree.n_edges,) or np.any(np.abs(zeta) > 1):
            err_msg = f'\'zeta\' must hold {self.tree.n_edges} values in (-1, 0, 1), got {zeta.tolist()}'
            raise ModelDomainError(err_msg)
        return float(self.probabilities[np.ravel_multi_index(tuple(zeta + 1), (3,)*self.tree.n_edges)])

    def __len__(self):
        return self.probabilities.size


#########################################################
# marginals
def pinned_marginal(law, tree, s, params, validate=True):
    '''
    Gradient marginal with residue class s pinned at the root.

    Parameters
    ----------
    law : PeriodicLaw
        A boundary law of period q.
    tree : FiniteSubtree
    s : int
        Residue class at the root, 0 <= s < q.
    params : ModelParams
    validate : bool, optional
        Require that `law` solves the boundary-law equation to within
        model.residual_tolerance.

    Returns
    -------
    GradientMarginal

    Raises
    ------
    ModelDomainError
        If `s` is out of range or, with `validate`, `law` is not a solution.
    EnumerationSizeError
        If the subtree has more than ENUMERATION_CAP configurations.
    '''
    _check_law(law, params, validate)
    if isinstance(s, bool) or not isinstance(s, (int, np.integer)) or not 0 <= s < law.q:
        err_msg = f'\'s\' must be a residue class in 0..{law.q - 1}, got {s!r}'
        raise ModelDomainError(err_msg)
    return _marginal(law, tree, params, (int(s),), pin=int(s))


def mixed_marginal(law, tree, params, validate=True):
    '''
    Translation-invariant gradient marginal: the unnormalised pinned weights
    summed over all q residue classes, then normalised.

    Raises the same errors as pinned_marginal.
    '''
    _check_law(law, params, validate)
    return _marginal(law, tree, params, tuple(range(law.q)), pin=None)


def marginalize(marginal, tree):
    '''Marginal of `marginal` on the edges of the rooted subtree `tree`.'''
    if not tree.is_nested_in(marginal.tree):
        err_msg = f'{tree!r} is not a rooted subtree of {marginal.tree!r}'
        raise ModelDomainError(err_msg)
    probabilities = marginal.probabilities.reshape(tree.n_configs, -1).sum(axis=1)
    return GradientMarginal(probabilities, tree, marginal.law, marginal.theta, marginal.k, marginal.pin)


def check_consistency(law, tree_small, tree_large, params, pin=None):
    '''
    Maximum absolute deviation between the marginal of the tree_large
    measure on tree_small and the measure computed on tree_small directly.

    The law is not required to be a solution; for solutions the deviation is
    at rounding level.

    Parameters
    ----------
    law : PeriodicLaw
    tree_small, tree_large : FiniteSubtree
        tree_small must be a rooted subtree of tree_large.
    params : ModelParams
    pin : int, optional
        Residue class of the pinned measures. None compares mixed measures.

    Returns
    -------
    float
    '''
    if not tree_small.is_nested_in(tree_large):
        err_msg = f'{tree_small!r} is not a rooted subtree of {tree_large!r}'
        raise ModelDomainError(err_msg)
    if pin is None:
        large = mixed_marginal(law, tree_large, params, validate=False)
        small = mixed_marginal(law, tree_small, params, validate=False)
    else:
        large = pinned_marginal(law, tree_large, pin, params, validate=False)
        small = pinned_marginal(law, tree_small, pin, params, validate=False)
    deviation = float(np.max(np.abs(marginalize(large, tree_small).probabilities - small.probabilities)))
    log.info('consistency of %r inside %r (pin %s): max deviation %.3e', tree_small, tree_large, pin, deviation)
    return deviation


def edge_gradient_distribution(marginal):
    '''
    Distribution of each single edge gradient.

    Returns
    -------
    numpy.ndarray
        (n_edges, 3) array; row e holds P(zeta_e = -1), P(zeta_e = 0),
        P(zeta_e = +1).
    '''
    n_edges = marginal.tree.n_edges
    p = marginal.probabilities
    return np.array([p.reshape(3**e, 3, -1).sum(axis=(0, 2)) for e in range(n_edges)])


def gradient_configs(n_edges, start, stop):
    digits = np.unravel_index(np.arange(start, stop), (3,)*n_edges)
    return np.stack(digits, axis=1).astype(np.int64) - 1


#########################################################
# helpers
def _check_law(law, params, validate):
    if not isinstance(law, PeriodicLaw):
        err_msg = f'\'law\' must be a PeriodicLaw, not a {type(law).__name__}'
        raise TypeError(err_msg)
    if validate:
        residual = boundary_law_residual(law, params)
        if not residual < residual_tolerance(law, params):
            err_msg = f'\'law\' {law.values} does not solve the boundary-law equation (residual {residual:.3e})'
            raise ModelDomainError(err_msg)


def _marginal(law, tree, params, pins, pin):
    if tree.k != params.k:
        err_msg = f'tree has k = {tree.k} but the model has k = {params.k}'
        raise ModelDomainError(err_msg)
    n_configs = tree.n_configs
    if n_configs > ENUMERATION_CAP:
        raise EnumerationSizeError(n_configs, ENUMERATION_CAP)
    log_space = tree.depth > LOG_SPACE_DEPTH
    values = law.as_array()
    log_values = np.log(values)
    q = law.q

    weights = np.empty(n_configs)
    for start in range(0, n_configs, CHUNK_SIZE):
        stop = min(start + CHUNK_SIZE, n_configs)
        zeta = gradient_configs(tree.n_edges, start, stop)
        heights = zeta @ tree.path.T
        n_flat = np.count_nonzero(zeta == 0, axis=1)
        if log_space:
            per_pin = np.stack([log_values[(s + heights) % q].sum(axis=1) for s in pins], axis=1)
            weights[start:stop] = logsumexp(per_pin, axis=1) + n_flat*np.log(params.theta)
        else:
            per_pin = np.stack([values[(s + heights) % q].prod(axis=1) for s in pins], axis=1)
            weights[start:stop] = per_pin.sum(axis=1)*params.theta**n_flat
        log.debug('enumerated configurations %d..%d of %d', start, stop, n_configs)

    if log_space:
        probabilities = np.exp(weights - logsumexp(weights))
    else:
        probabilities = weights/weights.sum()
    return GradientMarginal(probabilities, tree, law, params.theta, params.k, pin)


#########################################################
# constants
ENUMERATION_CAP = 3**15
LOG_SPACE_DEPTH = 1
CHUNK_SIZE = 3**10
