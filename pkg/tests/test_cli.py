"""
Tests for the command line entry point
"""
import io
import json

import pandas as pd
import pytest

from main import main


def run(capsys, *argv):
    status = main(list(argv))
    return status, capsys.readouterr().out


class TestQueries:
    def test_eppf_default_model(self, capsys):
        status, out = run(capsys, 'eppf', '--blocks', '2,1')
        assert status == 0
        assert json.loads(out)['value'] == pytest.approx(0.125)

    def test_kpmf(self, capsys):
        _, out = run(capsys, 'kpmf', '--n', '3')
        assert [row['probability'] for row in json.loads(out)['pmf']] == pytest.approx([0.375, 0.375, 0.25])

    def test_predict_csv(self, capsys):
        _, out = run(capsys, '--format', 'csv', 'predict', '--blocks', '2,1')
        frame = pd.read_csv(io.StringIO(out))
        assert frame['probability'].sum() == pytest.approx(1.0)
        assert frame.loc[frame['atom'] == 'new', 'probability'].item() == pytest.approx(1.0 / 3.0)

    def test_model_file(self, capsys, tmp_path):
        path = tmp_path / 'model.json'
        path.write_text(json.dumps({'alpha': 0.4, 'family': {'type': 'generalized_gamma', 'lambda': 1.0}}))
        status, out = run(capsys, '--model', str(path), 'kpmf', '--n', '4')
        doc = json.loads(out)
        assert status == 0
        assert doc['model']['family']['type'] == 'generalized_gamma'
        assert sum(row['probability'] for row in doc['pmf']) == pytest.approx(1.0)

    def test_domain_error_exit_code(self, capsys):
        status = main(['eppf', '--blocks', '0,1'])
        assert status == 1
        assert 'DomainError' in capsys.readouterr().err

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(['--version'])
        assert exc.value.code == 0


class TestSampling:
    def test_partitions_reproducible(self, capsys):
        _, first = run(capsys, '--seed', '3', 'sample-partition', '--n', '6', '--draws', '4')
        _, second = run(capsys, '--seed', '3', 'sample-partition', '--n', '6', '--draws', '4')
        assert first == second
        assert all(sum(p) == 6 for p in json.loads(first)['partitions'])

    def test_posterior_to_file(self, capsys, tmp_path):
        out = tmp_path / 'posterior.json'
        status = main(['--out', str(out), 'sample-posterior', '--blocks', '2,1', '--draws', '2', '--eps', '0.01',
                       '--representation', 'T2'])
        assert status == 0
        draws = json.loads(out.read_text())['draws']
        assert len(draws) == 2
        assert {d['representation'] for d in draws} == {'T2'}
        assert capsys.readouterr().out == ''

    def test_species(self, capsys):
        status, out = run(capsys, 'species', '--blocks', '2,1', '--m', '10,100', '--reps', '50')
        doc = json.loads(out)
        assert status == 0
        assert set(doc['ks_by_m']) == {'10', '100'}
        assert len(doc['limit']) == 50


class TestVerify:
    def test_small_suite_passes(self, capsys, tmp_path):
        config = tmp_path / 'config.json'
        config.write_text(json.dumps({'eppf_alpha_grid': [0.5],
                                      'partitions': {'stirling_n_max': 5, 'recursion_n_max': 6}}))
        status, out = run(capsys, '--config', str(config), 'verify', 'stirling')
        doc = json.loads(out)
        assert status == 0
        assert doc['suite_name'] == 'stirling' and doc['overall_pass']

    def test_csv_report_file(self, capsys, tmp_path):
        config = tmp_path / 'config.json'
        config.write_text(json.dumps({'eppf_alpha_grid': [0.5],
                                      'partitions': {'stirling_n_max': 5, 'recursion_n_max': 6}}))
        report = tmp_path / 'report.csv'
        status = main(['--config', str(config), '--format', 'csv', '--out', str(report), '--seed', '8',
                       'verify', 'stirling'])
        frame = pd.read_csv(report)
        assert status == 0
        assert frame['seed'].unique().tolist() == [8]
        assert frame['pass'].all()

    def test_unknown_suite_rejected_by_parser(self):
        with pytest.raises(SystemExit):
            main(['verify', 'no-such-suite'])
