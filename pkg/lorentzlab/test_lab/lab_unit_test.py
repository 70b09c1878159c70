import json
import os
import shutil
import tempfile

from lorentzlab.errors import EXIT_NUMERICAL
from lorentzlab.lorentzlab import main

from lorentzlab.test_lab.global_test_params import *


class LabUnitTest(object):
    """
    One JSON case: {"args": [...], "exit_code": 0, "values": {"<report>/<key>": value},
    "checks": {"<report>/<check>": true}, "files": ["lq.csv", ...], "rel_tol": 1e-9}.
    "{data}" in an argument expands to the shipped data directory.
    """

    def __init__(self, name, data):
        self.name = name
        self.data = data

    def argv(self, out):
        args = [a.replace('{data}', DATA_DIR) for a in self.data['args']]
        return ['--quiet', '--out', out] + args

    def expected_exit(self):
        return self.data.get('exit_code', 0)

    def run_test(self):
        out = tempfile.mkdtemp(prefix='lorentzlab-')
        try:
            try:
                exit_code = main(self.argv(out))
            except SystemExit as e:
                exit_code = e.code
            except Exception:
                return EXCEPTION
            if exit_code == EXIT_NUMERICAL and self.data.get('timeout_ok'):
                return TIME_OUT
            if exit_code != self.expected_exit():
                return WRONG_EXIT
            return self.compare_with_summary(out)
        finally:
            shutil.rmtree(out, ignore_errors=True)

    def compare_with_summary(self, out):
        path = os.path.join(out, 'summary.json')
        if not os.path.isfile(path):
            return EMPTY_RESULT
        with open(path) as f:
            summary = json.load(f)
        for name in self.data.get('files', []):
            if not os.path.isfile(os.path.join(out, name)):
                return EMPTY_RESULT
        reports = dict((r['report'], r) for r in summary['reports'])
        for key, expected in self.data.get('values', {}).items():
            report, _, value = key.partition('/')
            try:
                actual = reports[report]['values'][value]
            except KeyError:
                return EMPTY_RESULT
            if not self._same(actual, expected):
                return FAIL
        for key, expected in self.data.get('checks', {}).items():
            report, _, check = key.partition('/')
            found = [c for c in reports.get(report, {}).get('checks', []) if c['name'] == check]
            if not found:
                return EMPTY_RESULT
            if found[0]['passed'] != expected:
                return FAIL
        return PASS

    def _same(self, actual, expected):
        if isinstance(expected, (int, float)) and not isinstance(expected, bool) and \
                isinstance(actual, (int, float)):
            tol = self.data.get('rel_tol', 1e-9)
            return abs(actual - expected) <= tol * max(1.0, abs(expected))
        return actual == expected
