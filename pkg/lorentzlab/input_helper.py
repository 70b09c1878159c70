"""
Readers and writers for the text formats, and InputHelper, which turns
command-line arguments into loaded spacetimes, measures and paths.

Spacetime file grammar (one statement per line, '#' starts a comment):

    n <count>
    dim <d>                      optional, required before coords
    coords                       optional, followed by n lines of d floats
    weights <w_0> ... <w_n-1>    optional (default 1), may wrap over lines
    labels <name_0> ...          optional
    ell                          followed by triples "i j value"
    end

value is a float, 'inf' or '-inf'; unlisted pairs are -inf off the diagonal
and 0 on it. Instead of 'ell' a generator stanza may follow 'n' or open the
file on its own:

    generator
    family minkowski | hyperbolic_lp
    dim <d>
    p <p>                        hyperbolic_lp only
    extent <lo_0> <hi_0> ...     one pair, or one pair per axis
    resolution <r> ...           one count, or one per axis
    end

Measure files hold lines "index weight"; path files hold "t index" on a
discrete spacetime or "t x_0 x_1 ..." for a curve in a model space.

Run configuration grammar (one statement per line, '#' or ';' starts a
comment):

    [<section>]                  core_spacetime, hyperbolic_norms, curves,
                                 transport, curvature, calculus, acceptance
                                 or cli; each section at most once
    <key> = <value>              belongs to the latest section header

value is 'true' or 'false', one number, several whitespace-separated
numbers (a list), a JSON object or list opening with '{' or '[' (on one
line), or otherwise a string; surrounding double quotes are dropped.
Keys may use '-' or '_'; a key appears at most once per section.
"""

import json
import logging
import os

import numpy as np
import requests
import six

from lorentzlab import spacetime as st
from lorentzlab.curves import SampledCausalPath
from lorentzlab.errors import LabError, ParseError
from lorentzlab.norms import HyperbolicNorm
from lorentzlab.transport import DiscreteMeasure
from lorentzlab.utils import format_value

log = logging.getLogger(__name__)

CONFIG_SECTIONS = ('core_spacetime', 'hyperbolic_norms', 'curves', 'transport',
                   'curvature', 'calculus', 'acceptance', 'cli')


def _tokens(text):
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if line:
            yield number, line.split()


def _float(token, source, line):
    try:
        return float(token)
    except ValueError:
        raise ParseError("expected a number, got %r" % token, source, line)


def _int(token, source, line):
    try:
        return int(token)
    except ValueError:
        raise ParseError("expected an integer, got %r" % token, source, line)


def _parse_generator(lines, source):
    stanza = {}
    for number, words in lines:
        key = words[0]
        if key == 'end':
            return stanza, number
        if key == 'family':
            stanza['family'] = words[1] if len(words) > 1 else ''
        elif key == 'dim':
            stanza['dim'] = _int(words[1], source, number)
        elif key == 'p':
            stanza['p'] = _float(words[1], source, number)
        elif key == 'extent':
            values = [_float(w, source, number) for w in words[1:]]
            if not values or len(values) % 2:
                raise ParseError("extent needs (lo, hi) pairs", source, number)
            stanza['extent'] = [values[k:k + 2] for k in range(0, len(values), 2)]
        elif key == 'resolution':
            stanza['resolution'] = [_int(w, source, number) for w in words[1:]]
        else:
            raise ParseError("unknown generator key %r" % key, source, number)
    raise ParseError("generator stanza is not closed by 'end'", source)


def _finish_generator(stanza, source, line):
    dim = stanza.get('dim', 2)
    extent = stanza.get('extent', [[0.0, 1.0]])
    if len(extent) == 1:
        extent = extent * dim
    stanza['extent'] = extent
    resolution = stanza.get('resolution', [4])
    if isinstance(resolution, (list, tuple)) and len(resolution) == 1:
        resolution = resolution[0]
    stanza['resolution'] = resolution
    try:
        return st.generate(stanza)
    except LabError as e:
        raise ParseError(str(e), source, line)


def parse_spacetime(text, source='<string>'):
    """Parse the spacetime grammar above into a DiscreteSpacetime."""
    lines = iter(list(_tokens(text)))
    n = dim = None
    coords, weights, labels, entries = None, None, None, []
    closed = False
    for number, words in lines:
        key = words[0]
        if key == 'generator':
            stanza, end_line = _parse_generator(lines, source)
            space = _finish_generator(stanza, source, end_line)
            if n is not None and n != space.n_points:
                raise ParseError("generator yields %d points, header says %d" % (space.n_points, n),
                                 source, end_line)
            return space
        if key == 'n':
            n = _int(words[1], source, number) if len(words) > 1 else None
            if n is None or n < 1:
                raise ParseError("n must be a positive integer", source, number)
        elif key == 'dim':
            dim = _int(words[1], source, number)
        elif key == 'coords':
            if n is None or dim is None:
                raise ParseError("coords need n and dim first", source, number)
            rows = []
            for _ in range(n):
                try:
                    row_number, row = next(lines)
                except StopIteration:
                    raise ParseError("expected %d coordinate rows" % n, source, number)
                if len(row) != dim:
                    raise ParseError("expected %d coordinates" % dim, source, row_number)
                rows.append([_float(w, source, row_number) for w in row])
            coords = np.array(rows)
        elif key == 'weights':
            if n is None:
                raise ParseError("weights need n first", source, number)
            values = [_float(w, source, number) for w in words[1:]]
            while len(values) < n:
                try:
                    row_number, row = next(lines)
                except StopIteration:
                    raise ParseError("expected %d weights" % n, source, number)
                values.extend(_float(w, source, row_number) for w in row)
            if len(values) != n:
                raise ParseError("expected %d weights, got %d" % (n, len(values)), source, number)
            weights = np.array(values)
        elif key == 'labels':
            labels = words[1:]
        elif key == 'ell':
            if n is None:
                raise ParseError("ell entries need n first", source, number)
            for row_number, row in lines:
                if row[0] == 'end':
                    closed = True
                    break
                if len(row) != 3:
                    raise ParseError("expected 'i j value'", source, row_number)
                i, j = _int(row[0], source, row_number), _int(row[1], source, row_number)
                if not (0 <= i < n and 0 <= j < n):
                    raise ParseError("point index out of range", source, row_number)
                entries.append((i, j, _float(row[2], source, row_number)))
        elif key == 'end':
            closed = True
        else:
            raise ParseError("unknown keyword %r" % key, source, number)
        if closed:
            break
    if n is None:
        raise ParseError("missing header 'n'", source)
    if not closed:
        raise ParseError("missing 'end'", source)
    try:
        return st.DiscreteSpacetime.from_entries(n, entries, m_weights=weights, coords=coords, labels=labels)
    except LabError as e:
        raise ParseError(str(e), source)


def read_spacetime(path):
    with open(path, 'r') as f:
        return parse_spacetime(f.read(), source=path)


def format_spacetime(space):
    """Text form of a spacetime; lossless for explicit entries."""
    out = ['n %d' % space.n_points]
    if space.coords is not None:
        out.append('dim %d' % space.coords.shape[1])
        out.append('coords')
        out.extend(' '.join(format_value(float(v)) for v in row) for row in space.coords)
    out.append('weights ' + ' '.join(format_value(float(w)) for w in space.m_weights))
    if space.labels:
        out.append('labels ' + ' '.join(space.labels))
    out.append('ell')
    matrix = space.ell_matrix()
    for i in range(space.n_points):
        for j in range(space.n_points):
            default = 0.0 if i == j else -np.inf
            if matrix[i, j] != default:
                out.append('%d %d %s' % (i, j, format_value(float(matrix[i, j]))))
    out.append('end')
    return '\n'.join(out) + '\n'


def write_spacetime(space, path):
    with open(path, 'w', newline='') as f:
        f.write(format_spacetime(space))
    return path


def parse_measure(text, n_points, source='<string>'):
    pairs = []
    for number, words in _tokens(text):
        if len(words) != 2:
            raise ParseError("expected 'index weight'", source, number)
        i = _int(words[0], source, number)
        if not 0 <= i < n_points:
            raise ParseError("point index %d out of range" % i, source, number)
        pairs.append((i, _float(words[1], source, number)))
    if not pairs:
        raise ParseError("empty measure", source)
    try:
        return DiscreteMeasure.from_pairs(n_points, pairs)
    except LabError as e:
        raise ParseError(str(e), source)


def read_measure(path, n_points):
    with open(path, 'r') as f:
        return parse_measure(f.read(), n_points, source=path)


def write_measure(measure, path):
    with open(path, 'w', newline='') as f:
        for i, w in measure.items():
            f.write('%d %s\n' % (i, format_value(w)))
    return path


def parse_function(text, n_points, default=float('-inf'), source='<string>'):
    """Lines 'index value'; unlisted points get default."""
    values = np.full(n_points, default, dtype=float)
    seen = {}
    for number, words in _tokens(text):
        if len(words) != 2:
            raise ParseError("expected 'index value'", source, number)
        i = _int(words[0], source, number)
        if not 0 <= i < n_points:
            raise ParseError("point index %d out of range" % i, source, number)
        values[i] = _float(words[1], source, number)
        seen[i] = values[i]
    return values, seen


def read_function(path, n_points, default=float('-inf')):
    with open(path, 'r') as f:
        return parse_function(f.read(), n_points, default, source=path)


def parse_path(text, spacetime=None, norm=None, source='<string>'):
    times, rest = [], []
    for number, words in _tokens(text):
        if len(words) < 2:
            raise ParseError("expected 't index' or 't x_0 x_1 ...'", source, number)
        times.append(_float(words[0], source, number))
        rest.append((number, words[1:]))
    if not times:
        raise ParseError("empty path", source)
    if spacetime is not None:
        indices = []
        for number, words in rest:
            if len(words) != 1:
                raise ParseError("expected a single point index", source, number)
            indices.append(_int(words[0], source, number))
        return SampledCausalPath.from_spacetime(spacetime, times, indices)
    if norm is None:
        raise ParseError("a coordinate path needs a norm", source)
    coords = [[_float(w, source, number) for w in words] for number, words in rest]
    return SampledCausalPath.from_coordinates(norm, times, coords)


def read_path(path, spacetime=None, norm=None):
    with open(path, 'r') as f:
        return parse_path(f.read(), spacetime, norm, source=path)


def _config_lines(text):
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw
        for mark in ('#', ';'):
            line = line.split(mark, 1)[0]
        line = line.strip()
        if line:
            yield number, line


def _config_number(word):
    for kind in (int, float):
        try:
            return kind(word)
        except ValueError:
            pass
    return None


def _config_value(text, source, line):
    if text in ('true', 'false'):
        return text == 'true'
    if text[0] in '{[':
        try:
            return json.loads(text)
        except ValueError as e:
            raise ParseError("bad JSON value: %s" % e, source, line)
    if len(text) > 1 and text[0] == text[-1] == '"':
        return text[1:-1]
    numbers = [_config_number(w) for w in text.split()]
    if all(v is not None for v in numbers):
        return numbers[0] if len(numbers) == 1 else numbers
    return text


def parse_config(text, source='<config>'):
    """Parse run configuration text into {section: {key: value}}."""
    config = {}
    section = None
    for number, line in _config_lines(text):
        if line.startswith('['):
            if not line.endswith(']'):
                raise ParseError("unterminated section header", source, number)
            section = line[1:-1].strip()
            if section not in CONFIG_SECTIONS:
                raise ParseError("unknown section %r (expected one of %s)"
                                 % (section, ', '.join(CONFIG_SECTIONS)), source, number)
            if section in config:
                raise ParseError("section %r repeated" % section, source, number)
            config[section] = {}
            continue
        key, eq, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not eq or not key or not value:
            raise ParseError("expected 'key = value'", source, number)
        if section is None:
            raise ParseError("key %r outside a section" % key, source, number)
        if key in config[section]:
            raise ParseError("key %r repeated in section %r" % (key, section), source, number)
        config[section][key] = _config_value(value, source, number)
    return config


def load_config(path):
    """Read a run configuration file; see the module docstring for the grammar."""
    try:
        with open(path, 'r') as f:
            text = f.read()
    except IOError as e:
        raise ParseError(str(e), path)
    return parse_config(text, source=path)


class InputHelper:
    SPACETIME_FILE = 0
    GENERATOR = 1
    REMOTE = 2
    MEASURE = 3
    PATH = 4

    def __init__(self, input_type, **kwargs):
        self.input_type = input_type

        if input_type == InputHelper.SPACETIME_FILE:
            attr_defaults = {
                'source': None,
            }
        elif input_type == InputHelper.GENERATOR:
            attr_defaults = {
                'stanza': None,
            }
        elif input_type == InputHelper.REMOTE:
            attr_defaults = {
                'url': None,
                'timeout': 30,
                'keep': '',
            }
        elif input_type == InputHelper.MEASURE:
            attr_defaults = {
                'source': None,
                'n_points': None,
            }
        elif input_type == InputHelper.PATH:
            attr_defaults = {
                'source': None,
                'spacetime': False,
                'norm': False,
            }
        else:
            raise ValueError("unknown input type %r" % input_type)

        for (attr, default) in six.iteritems(attr_defaults):
            val = kwargs.get(attr, default)
            if val is None:
                raise Exception("'%s' attribute can't be None" % attr)
            else:
                setattr(self, attr, val)

    def get_inputs(self):
        if self.input_type == InputHelper.SPACETIME_FILE:
            return read_spacetime(self.source)
        if self.input_type == InputHelper.GENERATOR:
            return _finish_generator(dict(self.stanza), '<generator>', None)
        if self.input_type == InputHelper.REMOTE:
            return self._fetch_remote()
        if self.input_type == InputHelper.MEASURE:
            return read_measure(self.source, self.n_points)
        return read_path(self.source, self.spacetime or None, self.norm or None)

    def _fetch_remote(self):
        try:
            r = requests.get(self.url, timeout=self.timeout)
            r.raise_for_status()
        except requests.RequestException as e:
            raise ParseError("could not fetch spacetime: %s" % e, self.url)
        if self.keep:
            with open(self.keep, 'w') as f:
                f.write(r.text)
            log.info("remote spacetime stored in %s", os.path.abspath(self.keep))
        return parse_spacetime(r.text, source=self.url)


def norm_from_args(kind, p=None, dim=2, g=None):
    d = {'kind': kind, 'n': int(dim)}
    if p is not None:
        d['p'] = p
    if g is not None:
        d['g'] = g
    return HyperbolicNorm.from_dict(d)
