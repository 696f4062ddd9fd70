'''Encoders and decoders for everything sosggm writes: branch listings, oracle
reports, gradient marginals, critical constants and the sweep CSV.

JSON documents are plain dicts in a fixed key order carrying
'schema_version'. Floats are left to the json module, which writes the
shortest repr that round-trips the double. The CSV writer uses the same repr
and leaves absent branches as empty cells.
'''
import csv
import io
import json

import numpy as np

from .errors import ModelDomainError

#########################################################
# encodes
def encode_branch(branch):
    '''
    Encodes a SolutionBranch as a JSON-ready dict.

    Parameters
    ----------
    branch : SolutionBranch

    Returns
    -------
    dict
        label, q, case_tag, values, vector, law, theta, k, residual and
        multiplicity of the branch.
    '''
    return {'label': branch.label,
            'q': branch.q,
            'case_tag': branch.case_tag.name,
            'values': list(branch.values),
            'vector': list(branch.vector),
            'law': list(branch.law.values),
            'theta': branch.theta,
            'k': branch.k,
            'residual': branch.residual,
            'multiplicity': branch.multiplicity}


def encode_census(count, q):
    '''The census of one period from a PhaseCount.'''
    return {'nu': count.nu[q],
            'raw': count.raw[q],
            'orbit': count.orbit[q],
            'theorem': count.theorem[q],
            'exact_threshold': count.exact_threshold[q],
            'lower_bound': count.lower_bound[q]}


def encode_solve_report(q, params, branches, count, oracle_report=None):
    '''
    Encodes a single-point solve: all branches, the census and optionally
    the oracle cross-check.

    Parameters
    ----------
    q : int
    params : ModelParams
    branches : list of SolutionBranch
    count : PhaseCount
        Must contain period q.
    oracle_report : OracleReport, optional

    Returns
    -------
    dict
    '''
    document = {'schema_version': SCHEMA_VERSION,
                'q': q,
                'k': params.k,
                'theta': params.theta,
                'branches': [encode_branch(b) for b in branches],
                'census': encode_census(count, q)}
    if oracle_report is not None:
        document['oracle'] = encode_oracle_report(oracle_report)
    return document


def encode_oracle_report(report):
    '''Encodes an OracleReport in the branch schema, flagged with "oracle": true.'''
    document = {'oracle': True,
                'q': report.q,
                'k': report.k,
                'theta': report.theta,
                'solutions': [{'vector': list(v), 'law': list(law.values)}
                              for v, law in zip(report.vectors, report.found_solutions)],
                'max_residual': report.max_residual,
                'n_starts': report.n_starts,
                'n_discarded': report.n_discarded,
                'agreement': report.agreement}
    if report.tracks is not None:
        document['tracks'] = list(report.tracks)
    return document


def encode_marginal(marginal, distributions=None, consistency=None, label=None):
    '''
    Encodes a GradientMarginal.

    Parameters
    ----------
    marginal : GradientMarginal
    distributions : numpy.ndarray, optional
        Per-edge distributions from edge_gradient_distribution.
    consistency : dict, optional
        Result of the consistency check against the next smaller depth.
    label : str, optional
        Branch label the law came from.

    Returns
    -------
    dict
        'edges' as [parent, child] pairs, 'table' as a list of
        {'zeta': [...], 'p': ...} in configuration order.
    '''
    configs = marginal.configs()
    document = {'schema_version': SCHEMA_VERSION,
                'branch': label,
                'k': marginal.k,
                'depth': marginal.tree.depth,
                'half_tree': marginal.tree.half_tree,
                'edges': [list(e) for e in marginal.tree.edges],
                'theta': marginal.theta,
                'q': marginal.law.q,
                'law': list(marginal.law.values),
                'pin': marginal.pin,
                'table': [{'zeta': zeta.tolist(), 'p': float(p)} for zeta, p in zip(configs, marginal.probabilities)]}
    if distributions is not None:
        document['edge_distributions'] = [dict(zip(('-1', '0', '+1'), (float(v) for v in row)))
                                          for row in np.asarray(distributions)]
    if consistency is not None:
        document['consistency'] = consistency
    return document


def encode_constants(constants, details=None):
    '''CriticalConstants (and optionally the x = 1 parameters at some theta) as a dict.'''
    document = {'schema_version': SCHEMA_VERSION}
    document.update(constants.as_dict())
    if details is not None:
        document['details'] = details
    return document


def dumps(document):
    return json.dumps(document, indent=2) + '\n'


def encode_sweep_header(q, k, stamp=None):
    '''
    '#' comment lines and the column header of the sweep CSV of period q.

    Returns
    -------
    list of list of str
        Rows for csv.writer. Comment rows are single cells starting with '#'.
    '''
    if q not in sweep_columns:
        err_msg = f'\'q\' must be one of {sorted(sweep_columns)}, got {q!r}'
        raise ModelDomainError(err_msg)
    rows = [[f'# sosggm sweep, period q = {q}, k = {k}, schema_version {SCHEMA_VERSION}'],
            ['# theta: activity exp(J beta); branch columns: second coordinate of the branch, empty if absent'],
            [f'# nu{q}: number of GGMs; raw{q}: branches before identification; '
             f'orbit{q}: classes under renormalised cyclic shifts; theorem{q}: closed-form count']]
    if stamp is not None:
        rows.append([f'# generated by sosggm {stamp}'])
    rows.append(['theta'] + list(sweep_columns[q]) + [f'nu{q}', f'raw{q}', f'orbit{q}', f'theorem{q}'])
    return rows


def encode_sweep_row(row, q):
    '''One SweepRow as CSV cells in the column order of sweep_columns[q].'''
    cells = [repr(float(row.theta))]
    for column in sweep_columns[q]:
        value = row.columns.get(column)
        cells.append('' if value is None else repr(float(value)))
    cells += [str(row.nu), str(row.raw), str(row.orbit), str(row.theorem)]
    return cells


def encode_transition(q, transition):
    '''A refined count transition as a '#' comment row.'''
    return [f'# transition nu{q} {transition.count_lo} -> {transition.count_hi} '
            f'in [{transition.lo!r}, {transition.hi!r}]']


def write_csv(rows, stream):
    '''Writes table rows; single-cell rows starting with '#' go out verbatim as comment lines.'''
    writer = csv.writer(stream, lineterminator='\n')
    for row in rows:
        if len(row) == 1 and row[0].startswith('#'):
            stream.write(row[0] + '\n')
        else:
            writer.writerow(row)


#########################################################
# decodes
def decode_sweep_csv(text):
    '''
    Reads a sweep CSV back.

    Parameters
    ----------
    text : str
        The file contents.

    Returns
    -------
    tuple
        (comments, rows): the '#' comment lines without their marker, and
        one dict per data row mapping column name to float, int or None for
        empty cells.
    '''
    comments = []
    lines = []
    for line in text.splitlines():
        if line.startswith('#'):
            comments.append(line[1:].strip())
        elif line.strip():
            lines.append(line)
    reader = csv.reader(io.StringIO('\n'.join(lines)))
    header = next(reader, None)
    rows = []
    for cells in reader:
        row = {}
        for name, cell in zip(header, cells):
            if cell == '':
                row[name] = None
            elif name.startswith(count_prefixes):
                row[name] = int(cell)
            else:
                row[name] = float(cell)
        rows.append(row)
    return comments, rows


def decode_document(text):
    '''Parses a JSON document written by sosggm and checks its schema version.'''
    document = json.loads(text)
    version = document.get('schema_version')
    if version != SCHEMA_VERSION:
        err_msg = f'unsupported schema_version {version!r}, expected {SCHEMA_VERSION}'
        raise ModelDomainError(err_msg)
    return document


#########################################################
# constants
SCHEMA_VERSION = 1

count_prefixes = ('nu', 'raw', 'orbit', 'theorem')

sweep_columns = {
    2: ('TRIVIAL', 'X_EQ_1.0', 'X_EQ_1.1', 'DIAGONAL', 'OFFDIAG_TAU1', 'OFFDIAG_TAU2'),
    3: ('TRIVIAL', 'DIAGONAL.0', 'DIAGONAL.1', 'X_EQ_1.0', 'X_EQ_1.1', 'Y_EQ_1.0', 'Y_EQ_1.1'),
    4: ('TRIVIAL', 'DIAGONAL.0', 'DIAGONAL.1', 'ASYM_PHI1.0', 'ASYM_PHI1.1', 'ASYM_PHI2.0', 'ASYM_PHI2.1'),
    }
