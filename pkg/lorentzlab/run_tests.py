#!/usr/bin/env python
# Runs every JSON case under test_lab/test_data through the CLI and tallies
# the outcomes.

import glob
import json
import os
import sys

import six

from lorentzlab.test_lab.global_test_params import (
    PASS, FAIL, TIME_OUT, EXCEPTION, EMPTY_RESULT, WRONG_EXIT, TEST_DATA_DIR)
from lorentzlab.test_lab.lab_unit_test import LabUnitTest


def status(exit_code):
    if exit_code == 100: return "Pass"
    if exit_code == 101: return "Fail"
    if exit_code == 102: return "Time out"
    if exit_code == 104: return "Exception"
    if exit_code == 105: return "Empty result"
    if exit_code == 106: return "Wrong exit code"

    return str(exit_code)


def main():
    files = sorted(glob.glob(os.path.join(TEST_DATA_DIR, '*.json')))
    test_cases = {}
    for f in files:
        with open(f) as fp:
            test_cases.update(json.load(fp))

    tally = dict((code, []) for code in (PASS, FAIL, TIME_OUT, EXCEPTION, EMPTY_RESULT, WRONG_EXIT))

    six.print_("*****************************************************")
    six.print_("                      Start                          ")
    for testname, testdata in sorted(test_cases.items()):
        six.print_()
        six.print_("===============Loading: %s====================" % testname)
        exit_code = LabUnitTest(testname, testdata).run_test()
        six.print_("===============%s!====================" % status(exit_code).upper())
        tally.setdefault(exit_code, []).append(testname)

    six.print_("Done!")
    six.print_("Total: ", len(test_cases))
    six.print_()
    six.print_("Pass: ", len(tally[PASS]))
    for code in (FAIL, TIME_OUT, EXCEPTION, EMPTY_RESULT, WRONG_EXIT):
        six.print_()
        six.print_("%s: " % status(code), len(tally[code]), tally[code])
    return 0 if len(tally[PASS]) == len(test_cases) else 1


if __name__ == '__main__':
    sys.exit(main())
