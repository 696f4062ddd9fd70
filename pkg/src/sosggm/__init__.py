__version__ = '0.1.0'

from . import transcode
from .model import ModelParams, PeriodicLaw, CriticalConstants, critical_constants, boundary_law_residual, cyclic_shift_orbit
from .rootfind import RootSet, positive_roots
from .branches import CaseTag, SolutionBranch, PhaseCount, solve_period, phase_count, p3_find_theta_c1   # the usual entry points
from .measure import FiniteSubtree, GradientMarginal, pinned_marginal, mixed_marginal, check_consistency
from .oracle import OracleReport, oracle_solve, oracle_sweep
from .sweep import Sweep, SweepRow, theta_grid
from .errors import SosGgmError, ModelDomainError
