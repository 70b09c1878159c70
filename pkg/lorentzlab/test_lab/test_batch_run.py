import json

import pytest

from lorentzlab.batch_run import batch, load_manifest, main, run_entry
from lorentzlab.errors import EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, ParseError
from lorentzlab.lorentzlab import OUT_ENV

from lorentzlab.test_lab.conftest import data_file
from lorentzlab.test_lab.global_test_params import DATA_DIR


def _write(tmp_path, entries):
    path = tmp_path / 'manifest.json'
    path.write_text(u'' + json.dumps(entries))
    return str(path)


def test_acceptance_manifest():
    manifest = load_manifest(data_file('acceptance.json'))
    assert len(manifest) == 31
    assert manifest[0] == {'name': 'chain-validate', 'args': ['validate', '--spacetime', 'chain.txt'],
                           'config': None, 'out': 'chain-validate'}
    assert sum(1 for entry in manifest if entry['config']) == 2
    criteria = [entry['args'][2] for entry in manifest if entry['args'][0] == 'acceptance']
    assert criteria == [str(k) for k in range(1, 12)]


def test_manifest_args_are_strings(tmp_path):
    manifest = load_manifest(_write(tmp_path, [{'name': 'x', 'args': ['norms', '--dim', 3]}]))
    assert manifest[0]['args'] == ['norms', '--dim', '3']


def test_default_names(tmp_path):
    manifest = load_manifest(_write(tmp_path, [{'args': ['validate']}, {'args': ['validate']}]))
    assert [entry['out'] for entry in manifest] == ['entry0', 'entry1']


@pytest.mark.parametrize('entries', [
    {'name': 'x', 'args': ['validate']},
    [{'name': 'x'}],
    [{'name': 'x', 'args': []}],
    [{'name': 'x', 'args': ['validate']}, {'name': 'y', 'out': 'x', 'args': ['validate']}],
])
def test_bad_manifest(tmp_path, entries):
    with pytest.raises(ParseError):
        load_manifest(_write(tmp_path, entries))


def test_manifest_not_json(tmp_path):
    path = tmp_path / 'manifest.json'
    path.write_text(u'[{"name": ')
    with pytest.raises(ParseError):
        load_manifest(str(path))


def test_empty_batch():
    assert batch([]) == ([], EXIT_OK)


def test_run_entry(tmp_path, monkeypatch):
    monkeypatch.delenv(OUT_ENV, raising=False)
    monkeypatch.chdir(str(tmp_path))
    entry = load_manifest(data_file('acceptance.json'))[0]
    name, command, exit_code, passed, out, failed = run_entry(entry, DATA_DIR, str(tmp_path))
    assert (name, command, exit_code, passed, failed) == ('chain-validate', 'validate', EXIT_OK, True, '')
    assert (tmp_path / 'chain-validate' / 'summary.json').is_file()


def test_run_entry_failed_check(tmp_path, monkeypatch):
    monkeypatch.delenv(OUT_ENV, raising=False)
    monkeypatch.chdir(str(tmp_path))
    entry = {'name': 'violation', 'args': ['validate', '--spacetime', 'three_point_violation.txt'],
             'config': None, 'out': 'violation'}
    row = run_entry(entry, DATA_DIR, str(tmp_path))
    assert row[2] == EXIT_PRECONDITION
    assert row[3] is False
    assert 'Spacetime axioms/reverse triangle' in row[5]


def test_main_rejects_bad_manifest(tmp_path, monkeypatch):
    monkeypatch.delenv(OUT_ENV, raising=False)
    path = _write(tmp_path, {'args': ['validate']})
    assert main([path]) == EXIT_PARSE
