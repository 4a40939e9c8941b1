import json
import logging

import pytest
import typer

from tbpp import config
from tbpp.__main__ import (
    Family, about, bench, check, default, emit_smt, gen, simulate, validate, van,
)
from tbpp.executor import Methods
from tbpp.logging import handler
from tbpp.model import Mode
from tbpp.multiclock import GameMode
from tbpp.semantics import Run, run_to_tree


def _exit_code(fn, *args, **kwargs):
    with pytest.raises(typer.Exit) as e:
        fn(*args, **kwargs)
    return e.value.exit_code


def test_about(capsys):
    about()
    assert 'TBPP-check' in capsys.readouterr().out


def test_check(example_file, tmp_path, capsys):
    outfile = tmp_path / 'verdict.json'
    assert _exit_code(check, example_file, outfile=outfile) == 10
    assert json.loads(capsys.readouterr().out)['answer'] == 'sat'
    assert json.loads(outfile.read_text())['answer'] == 'sat'
    assert _exit_code(check, example_file, query=Mode.reach) == 11
    assert _exit_code(check, example_file, targets=['Y', 'Y']) == 11


def test_check_bad_model(tmp_path):
    url = tmp_path / 'bad.tbpp'
    url.write_text('clocks x; nonterminals X; rule Q -> X;')
    assert _exit_code(check, url) == 2


def test_gen(tmp_path, capsys):
    outfile = tmp_path / 'g.tbpp'
    gen(Family.subsetsum_tbpp, outfile, params='{"S": [3, 5], "t": 8}')
    assert outfile.exists()
    sidecar = json.loads((tmp_path / 'g.json').read_text())
    assert sidecar['groundTruth'] is True
    assert sidecar['params'] == {'S': [3, 5], 't': 8}
    assert json.loads(capsys.readouterr().out)['family'] == 'subsetsum-tbpp'
    assert _exit_code(check, outfile) == 10


def test_gen_countdown_target(tmp_path):
    gen(Family.countdown, tmp_path / 'c.tbpp', params='{"states": ["p"], "transitions": [["p", 2, "p"]]}', k=3)
    sidecar = json.loads((tmp_path / 'c.json').read_text())
    assert sidecar['params']['k'] == 3
    assert sidecar['groundTruth'] is False


def test_emit_smt(example_file, tmp_path):
    outfile = tmp_path / 'q.smt2'
    emit_smt(example_file, outfile)
    script = outfile.read_text()
    assert script.rstrip().endswith('(check-sat)')
    assert '(declare-fun' in script


def test_van(example_file, capsys):
    van(example_file)
    assert set(json.loads(capsys.readouterr().out)) == {'X', 'Y', 'Z'}


def test_simulate(example_file, tmp_path, capsys):
    run = tmp_path / 'run.json'
    run.write_text(json.dumps([{'fire': 0, 'at': 0}, {'elapse': '0'}]))
    simulate(example_file, run)
    out = capsys.readouterr().out
    assert 'target reached: True' in out


def test_validate(example_file, example, tmp_path, capsys):
    validate(example_file)
    assert capsys.readouterr().out.strip() == 'valid'

    good = Run.from_dict([{'fire': 0, 'at': 0}])
    run = tmp_path / 'good.json'
    run.write_text(good.to_json())
    tree = tmp_path / 'tree.json'
    tree.write_text(json.dumps(run_to_tree(example, 'X', good).to_dict()))
    validate(example_file, run=run, tree=tree)
    assert capsys.readouterr().out.strip() == 'valid'

    bad = tmp_path / 'bad.json'
    bad.write_text(json.dumps([{'elapse': '1'}]))
    assert _exit_code(validate, example_file, run=bad) == 2


def test_validate_zones(tmp_path, capsys):
    outfile = tmp_path / 'ta.tbpp'
    gen(Family.subsetsum_ta, outfile, params='{"S": [1, 2], "a": 3}')
    capsys.readouterr()
    validate(outfile, zones=True)
    assert capsys.readouterr().out.strip() == 'valid'


@pytest.mark.slow
def test_bench(tmp_path, capsys):
    outfile = tmp_path / 'bench.csv'
    bench(Family.subsetsum_ta, outfile, count=2, seed=0, method=Methods.Map, game_mode=GameMode.discrete)
    summary = json.loads(capsys.readouterr().out)
    assert summary['instances'] == 2
    assert summary['disagreements'] == 0
    assert outfile.exists()


def test_config_option(tmp_path, monkeypatch):
    monkeypatch.setattr(config, 'settings', config.settings)
    monkeypatch.setattr(handler, 'level', handler.level)
    url = tmp_path / 'settings.json'
    config.Settings(skeleton_limit=7).save(url)
    default(config_file=url, verbose=2, quiet=False)
    assert config.settings.skeleton_limit == 7
    assert handler.level == logging.DEBUG
    default(config_file=None, verbose=1, quiet=True)
    assert handler.level == logging.WARNING


def test_settings_round_trip(tmp_path):
    url = tmp_path / 'settings.json'
    settings = config.Settings(search_node_limit=50, la_backend='builtin', smt_timeout=1000)
    settings.save(url)
    assert config.Settings.load(url) == settings
    assert json.loads(url.read_text())['search_node_limit'] == 50
    url.write_text(json.dumps({'search_nodes': 3}))
    with pytest.raises(ValueError):
        config.Settings.load(url)
