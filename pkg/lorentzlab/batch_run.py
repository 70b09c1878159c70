#!/usr/bin/env python
# Runs a manifest of lab invocations on a worker pool and aggregates their
# summaries into one CSV. A manifest is a JSON list of entries
#   {"name": ..., "args": [<subcommand> ...], "config": <path>, "out": <dir>}
# with paths relative to the manifest file; "config" is optional and "out"
# defaults to the entry name.

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import six
from tqdm import tqdm

from lorentzlab import global_params
from lorentzlab.errors import EXIT_FAILED, EXIT_OK, EXIT_PARSE, LabError, ParseError
from lorentzlab.lorentzlab import OUT_ENV
from lorentzlab.utils import write_csv

log = logging.getLogger(__name__)

BATCH_HEADER = ('name', 'command', 'exit_code', 'passed', 'out', 'failed_checks')


def load_manifest(path):
    try:
        with open(path, 'r') as f:
            entries = json.load(f)
    except ValueError as e:
        raise ParseError(str(e), path, getattr(e, 'lineno', None))
    except IOError as e:
        raise ParseError(str(e), path)
    if not isinstance(entries, list):
        raise ParseError("manifest must be a JSON list", path, 1)
    manifest = []
    outs = {}
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict) or not isinstance(entry.get('args'), list) or not entry['args']:
            raise ParseError("entry %d needs a nonempty 'args' list" % k, path)
        name = str(entry.get('name', 'entry%d' % k))
        out = os.path.normpath(entry.get('out', name))
        if out in outs:
            raise ParseError("entries %r and %r share the output directory %s"
                             % (outs[out], name, out), path)
        outs[out] = name
        manifest.append({'name': name, 'args': [str(a) for a in entry['args']],
                         'config': entry.get('config'), 'out': out})
    return manifest


def run_entry(entry, base, root):
    """Run one entry in this process; returns the aggregate row."""
    from lorentzlab.lorentzlab import main

    os.chdir(base)
    out = os.path.join(root, entry['out']) if root else entry['out']
    argv = ['--quiet', '--out', out]
    if entry['config']:
        argv += ['--config', entry['config']]
    argv += entry['args']
    try:
        exit_code = main(argv)
    except SystemExit as e:
        exit_code = e.code if isinstance(e.code, int) else EXIT_PARSE
    summary = {}
    path = os.path.join(out, 'summary.json')
    if os.path.isfile(path):
        with open(path, 'r') as f:
            summary = json.load(f)
    failed = []
    for report in summary.get('reports', []):
        failed += ['%s/%s' % (report['report'], c['name']) for c in report['checks'] if not c['passed']]
    return (entry['name'], entry['args'][0], exit_code, exit_code == EXIT_OK, out, ' '.join(failed))


def batch(manifest, base='.', out=None, workers=None):
    """
    Run every entry; per-entry failures are isolated in their rows.

    :return: (rows in manifest order, exit code)
    """
    if not manifest:
        rows = []
    else:
        workers = workers or global_params.BATCH_WORKERS
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_entry, entry, base, out) for entry in manifest]
            rows = []
            for entry, future in zip(manifest, tqdm(futures, desc='batch', disable=len(manifest) < 2)):
                try:
                    rows.append(future.result())
                except Exception as e:
                    log.critical("entry %s crashed: %s", entry['name'], e)
                    rows.append((entry['name'], entry['args'][0], EXIT_FAILED, False, entry['out'], str(e)))
    exit_code = EXIT_OK if all(row[3] for row in rows) else EXIT_FAILED
    return rows, exit_code


def main(argv=None):
    parser = argparse.ArgumentParser(prog='lorentzlab-batch')
    parser.add_argument("manifest", help="JSON manifest of runs", type=str)
    parser.add_argument("-o", "--out", help="Root of the entry output directories", type=str)
    parser.add_argument("-w", "--workers", help="Worker processes", type=int)
    args = parser.parse_args(argv)

    logging.basicConfig()
    logging.getLogger(None).setLevel(level=logging.INFO)

    try:
        manifest = load_manifest(args.manifest)
    except LabError as e:
        logging.critical(str(e))
        return e.exit_code
    base = os.path.dirname(os.path.abspath(args.manifest))
    root = os.environ.pop(OUT_ENV, None) or args.out
    if root:
        root = os.path.abspath(root)
    rows, exit_code = batch(manifest, base, root, args.workers)
    report = os.path.join(root or base, 'batch.csv')
    write_csv(report, BATCH_HEADER, rows)
    six.print_("%d entries, %d passed; aggregate report in %s"
               % (len(rows), sum(1 for row in rows if row[3]), report))
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
