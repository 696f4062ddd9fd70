'''Command-line front end.

    sosggm constants --k 2 [--details [--theta T]]
    sosggm solve --q 2 --k 2 --theta 7 [--format json|table] [--with-oracle [--strict]]
    sosggm sweep --q 4 --k 2 --min 0.5 --max 10 --steps 400 [--out FILE] [--workers N] [--stamp]
    sosggm measure --q 2 --k 2 --theta 7 --branch X_EQ_1.1 --depth 2 [--pin 0|mixed] [--out FILE]
    sosggm verify --k 2 [--level quick|full]

Data goes to stdout or --out; logging goes to stderr. The exit codes are
listed in `exit_codes`.
'''
import argparse
import logging
import sys
from dataclasses import asdict
from typing import List, Optional

from . import __version__, transcode
from .branches import find_branch, p3_find_theta_c1, phase_count, solve_period, x_eq_1_parameters
from .errors import EnumerationSizeError, ModelDomainError, SosGgmError, UnknownBranchError, UnsupportedParameterError
from .measure import (FiniteSubtree, check_consistency, edge_gradient_distribution, mixed_marginal,
                      pinned_marginal)
from .model import ModelParams, critical_constants
from .oracle import oracle_solve
from .sweep import Sweep
from .verify import levels, run_verify

log = logging.getLogger(__name__)


def build_parser():
    p = argparse.ArgumentParser(prog='sosggm',
                                description='Periodic boundary laws and gradient Gibbs measures of the '
                                            'alternating-magnetism SOS model on Cayley trees.')
    p.add_argument('-v', '--verbose', action='count', default=0, help='INFO logging, -vv for DEBUG')
    p.add_argument('-q', '--quiet', action='store_true', help='only log errors')
    p.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = p.add_subparsers(dest='command', required=True)

    c = sub.add_parser('constants', help='critical activities for a branching number')
    c.add_argument('--k', type=int, required=True, help='branching number, k >= 2')
    c.add_argument('--details', action='store_true', help='add the x = 1 parameters and the period-3 bracket')
    c.add_argument('--theta', type=float, default=None, help='activity for --details (default theta_c)')
    c.set_defaults(handler=cmd_constants)

    s = sub.add_parser('solve', help='all periodic boundary laws at one activity')
    _add_point_arguments(s)
    s.add_argument('--format', choices=('json', 'table'), default='json')
    s.add_argument('--with-oracle', action='store_true', help='cross-check with the brute-force oracle')
    s.add_argument('--strict', action='store_true', help='exit 3 when the oracle disagrees')
    s.set_defaults(handler=cmd_solve)

    w = sub.add_parser('sweep', help='bifurcation CSV over a theta grid')
    w.add_argument('--q', type=int, choices=(2, 3, 4), required=True, help='period')
    w.add_argument('--k', type=int, required=True, help='branching number, k >= 2')
    w.add_argument('--min', dest='theta_min', type=float, required=True, help='first grid point, > 0')
    w.add_argument('--max', dest='theta_max', type=float, required=True, help='last grid point')
    w.add_argument('--steps', type=int, required=True, help='number of grid points, >= 2')
    w.add_argument('--out', default=None, help='CSV file (default stdout)')
    w.add_argument('--workers', type=int, default=1, help='threads for the grid points')
    w.add_argument('--stamp', action='store_true', help='write the package version in a comment line')
    w.set_defaults(handler=cmd_sweep)

    m = sub.add_parser('measure', help='gradient marginal of one branch on a finite subtree')
    _add_point_arguments(m)
    m.add_argument('--branch', required=True, help='branch label as listed by solve')
    m.add_argument('--depth', type=int, default=1, help='subtree depth, >= 1')
    m.add_argument('--pin', default='mixed', help='residue class at the root, or "mixed"')
    m.add_argument('--half-tree', action='store_true', help='give the root only k children')
    m.add_argument('--out', default=None, help='JSON file (default stdout)')
    m.set_defaults(handler=cmd_measure)

    v = sub.add_parser('verify', help='run the self-check suites')
    v.add_argument('--k', type=int, required=True, help='branching number, k >= 2')
    v.add_argument('--level', choices=tuple(levels), default='quick')
    v.add_argument('--inject-fault', action='store_true', help=argparse.SUPPRESS)
    v.set_defaults(handler=cmd_verify)
    return p


#########################################################
# commands
def cmd_constants(args):
    constants = critical_constants(args.k)
    details = None
    if args.details:
        theta = constants.theta_c if args.theta is None else args.theta
        params = ModelParams(args.k, theta)
        certificate = p3_find_theta_c1(args.k)
        details = {'theta': params.theta,
                   'x_eq_1': asdict(x_eq_1_parameters(params)),
                   'theta_c1_bracket': [certificate.lo, certificate.hi]}
    _emit(transcode.dumps(transcode.encode_constants(constants, details)), None)
    return exit_codes['ok']


def cmd_solve(args):
    params = ModelParams(args.k, args.theta)
    branches = solve_period(args.q, params)
    count = phase_count(params, periods=(args.q,))
    report = None
    if args.with_oracle:
        if args.q == 4 and args.k != 2:
            err_msg = f'the oracle comparison of period 4 needs k = 2, got k = {args.k}'
            raise UnsupportedParameterError(err_msg)
        report = oracle_solve(args.q, params, reference=[b.vector for b in branches])

    if args.format == 'json':
        _emit(transcode.dumps(transcode.encode_solve_report(args.q, params, branches, count, report)), None)
    else:
        _emit(_solve_table(args.q, params, branches, count, report), None)

    if report is not None and not report.agreement:
        log.warning('oracle disagrees with the branch solvers at q = %d, theta = %r', args.q, params.theta)
        if args.strict:
            return exit_codes['oracle_disagreement']
    return exit_codes['ok']


def cmd_sweep(args):
    sweep = Sweep(args.q, args.k, args.theta_min, args.theta_max, args.steps, workers=args.workers)
    sweep.run()
    sweep.refine()
    stamp = __version__ if args.stamp else None
    if args.out is None:
        sweep.write(sys.stdout, stamp=stamp)
    else:
        with open(args.out, 'w', encoding='utf-8', newline='') as f:
            sweep.write(f, stamp=stamp)
        log.info('wrote %d rows to %s', len(sweep.grid), args.out)
    return exit_codes['ok']


def cmd_measure(args):
    params = ModelParams(args.k, args.theta)
    branch = find_branch(solve_period(args.q, params), args.branch)
    pin = _parse_pin(args.pin)
    tree = FiniteSubtree(args.k, args.depth, half_tree=args.half_tree)
    if pin is None:
        marginal = mixed_marginal(branch.law, tree, params)
    else:
        marginal = pinned_marginal(branch.law, tree, pin, params)

    consistency = None
    if tree.depth > 1:
        smaller = FiniteSubtree(args.k, tree.depth - 1, half_tree=args.half_tree)
        deviation = check_consistency(branch.law, smaller, tree, params, pin=pin)
        consistency = {'depth': smaller.depth, 'max_deviation': deviation}
    document = transcode.encode_marginal(marginal, edge_gradient_distribution(marginal), consistency,
                                         label=branch.label)
    _emit(transcode.dumps(document), args.out)
    return exit_codes['ok']


def cmd_verify(args):
    report = run_verify(args.k, level=args.level, inject_fault=args.inject_fault)
    _emit(transcode.dumps(report.summary()), None)
    return exit_codes['ok'] if report.passed else exit_codes['verify_failed']


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    level = logging.ERROR if args.quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')

    try:
        return args.handler(args)
    except UnknownBranchError as err:
        log.error('%s', err)
        return exit_codes['unknown_branch']
    except EnumerationSizeError as err:
        log.error('%s', err)
        return exit_codes['size_cap']
    except (ModelDomainError, TypeError) as err:
        log.error('%s', err)
        return exit_codes['bad_params']
    except OSError as err:
        log.error('%s', err)
        return exit_codes['io']
    except SosGgmError as err:
        log.error('%s: %s', type(err).__name__, err)
        return exit_codes['verify_failed']


#########################################################
# helpers
def _add_point_arguments(p):
    p.add_argument('--q', type=int, choices=(2, 3, 4), required=True, help='period')
    p.add_argument('--k', type=int, required=True, help='branching number, k >= 2')
    p.add_argument('--theta', type=float, required=True, help='activity exp(J beta), > 0')


def _parse_pin(text):
    if text == 'mixed':
        return None
    try:
        return int(text)
    except ValueError:
        err_msg = f'\'--pin\' must be a residue class or "mixed", got {text!r}'
        raise ModelDomainError(err_msg) from None


def _solve_table(q, params, branches, count, report):
    lines = [f'q = {q}, k = {params.k}, theta = {params.theta!r}',
             f'{"label":<14} {"case":<14} {"values":<44} {"residual":>10} mult']
    for b in branches:
        values = ', '.join(f'{v:.12g}' for v in b.values)
        lines.append(f'{b.label:<14} {b.case_tag.name:<14} {values:<44} {b.residual:>10.2e} {b.multiplicity}')
    census = transcode.encode_census(count, q)
    lines.append(f'nu{q} = {census["nu"]}  raw{q} = {census["raw"]}  orbit{q} = {census["orbit"]}  '
                 f'theorem{q} = {census["theorem"]}' + ('  (exact threshold)' if census['exact_threshold'] else '')
                 + ('  (lower bound)' if census['lower_bound'] else ''))
    if report is not None:
        lines.append(f'oracle: {len(report.vectors)} solutions from {report.n_starts} starts, '
                     f'agreement = {str(report.agreement).lower()}')
    return '\n'.join(lines) + '\n'


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    log.info('wrote %s', path)


#########################################################
# constants
exit_codes = {
    'ok': 0,
    'verify_failed': 1,
    'bad_params': 2,
    'oracle_disagreement': 3,
    'io': 4,
    'unknown_branch': 5,
    'size_cap': 6,
}
