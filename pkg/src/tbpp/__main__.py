import inspect
import json
import multiprocessing
import random
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

import typer

from tbpp import __version__
from tbpp import config
from tbpp.logging import logger, logfile, set_verbosity
from tbpp.executor import Methods
from tbpp.model import Mode, Query, TbppModel, parse_document
from tbpp.multiclock import GameMode

__author__ = "Geyer Bisschoff"
__copyright__ = "Geyer Bisschoff"
__license__ = "MIT"

logger.debug(f'Logging setup. Saving to {logfile=}')
app = typer.Typer()


class Family(str, Enum):
    subsetsum_ta = 'subsetsum-ta'
    subsetsum_tbpp = 'subsetsum-tbpp'
    ssg = 'ssg'
    countdown = 'countdown'
    cfg_nfa = 'cfg-nfa'


def _load(url: Path) -> Tuple[TbppModel, Optional[Query]]:
    url = Path(url)
    if url.suffix == '.json':
        return TbppModel.load(url), None
    return parse_document(url.read_text(encoding='utf8'))


def _query(
        model: TbppModel,
        document_query: Optional[Query],
        mode: Optional[Mode],
        init: Optional[str],
        targets: Optional[List[str]],
        delta: Optional[str],
) -> Query:
    '''The query of the document with command line overrides.'''
    if document_query is None and init is None:
        raise ValueError('no query: add init/targets/query statements to the model or pass --init')
    base = document_query or Query(Mode.cover, init)
    return Query(
        mode=mode or base.mode,
        initial=init or base.initial,
        targets=tuple(targets) if targets else base.targets,
        delta=Fraction(delta) if delta is not None else base.delta,
        u=base.u,
        v=base.v,
    )


def _fail(e: Exception):
    logger.error(e)
    raise typer.Exit(code=2)


@app.command()
def about():
    '''
    Print TBPP-check about information.
    '''

    return typer.echo(
    f"""
    TBPP-check
    =========================
    Version: {__version__}
    Copyright: {__copyright__}
    License: {__license__}
    Author: {__author__}
    """
    )


@app.command()
def check(
        model: Path,
        query: Optional[Mode] = None,
        init: Optional[str] = None,
        targets: Optional[List[str]] = None,
        delta: Optional[str] = None,
        game_mode: GameMode = GameMode.discrete,
        outfile: Optional[Path] = None,
):
    '''
    Decide a query and print the verdict as JSON.

    :param model: path to the model (.tbpp text or .json).
    :param query: the decision problem; defaults to the document's query.
    :param init: initial nonterminal; defaults to the document's init statement.
    :param targets: target nonterminals, repeat the option for multisets.
    :param delta: duration of a ternary query, e.g. 3/2.
    :param game_mode: reachability with several clocks, 'discrete' or 'dense-attempt'.
    :param outfile: also save the verdict JSON here.

    Exits with 10 when the query holds, 11 when it does not and 0 when the answer is unknown.
    '''
    try:
        from tbpp.executor import dispatch

        logger.info(f'Loading model ({model=}).')
        m, document_query = _load(model)
        q = _query(m, document_query, query, init, targets, delta)
        verdict = dispatch(m, q, game_mode)
        text = json.dumps(verdict.to_dict(), indent=4)
        if outfile:
            logger.info(f'Saving verdict ({outfile=}).')
            Path(outfile).write_text(text, encoding='utf8')
    except Exception as e:
        _fail(e)
    typer.echo(text)
    raise typer.Exit(code=verdict.answer.exit_code)


@app.command()
def simulate(model: Path, run: Path):
    '''
    Replay a run from the initial configuration and print the configurations.

    :param model: path to the model; it must carry an init statement.
    :param run: path to the run JSON, a list of {"elapse": "1/2"} and {"fire": 0, "at": 0} records.
    '''
    try:
        from tbpp.semantics import Elapse, Run, elapse, fire, initial_configuration, satisfies

        m, q = _load(model)
        if q is None:
            raise ValueError('the model has no init statement')
        steps = Run.from_json(Path(run).read_text(encoding='utf8')).steps
        c = initial_configuration(m, q.initial)
        lines = [' '.join(map(str, c)) or '0']
        for s in steps:
            c = elapse(c, s.amount) if isinstance(s, Elapse) else fire(c, s.at, m.rules[s.rule])
            lines.append(' '.join(map(str, c)) or '0')
        reached = q.mode is not Mode.ternary and satisfies(c, q)
    except Exception as e:
        _fail(e)
    typer.echo('\n'.join(lines))
    typer.echo(f'target reached: {reached}')


@app.command()
def gen(
        family: Family,
        outfile: Path,
        params: Optional[str] = None,
        k: Optional[int] = None,
        seed: int = 0,
):
    '''
    Generate an instance with its ground truth sidecar (<outfile>.json).

    :param family: the reduction.
    :param outfile: path of the .tbpp file.
    :param params: generator arguments as a JSON object, e.g. '{"S": [3, 5], "t": 8}'. Missing arguments are
        sampled with the seed.
    :param k: shorthand for the countdown target.
    :param seed: seed of the sampler.
    '''
    try:
        from tbpp.bench import FAMILIES

        generate, sample = FAMILIES[family.value]
        arguments = inspect.signature(generate).bind(*sample(random.Random(seed))).arguments
        arguments.update(json.loads(params) if params else {})
        if k is not None:
            arguments['k'] = k
        logger.info(f'Generating {family.value} instance ({outfile=}).')
        instance = generate(**arguments)
        sidecar = instance.save(outfile)
    except Exception as e:
        _fail(e)
    typer.echo(json.dumps({'model': str(outfile), 'sidecar': str(sidecar), **instance.sidecar()}, indent=4))


@app.command()
def emit_smt(model: Path, outfile: Optional[Path] = None):
    '''
    Print the SMT-LIB script of the formula behind a 1-clock query.

    :param model: path to the model with its query.
    :param outfile: save the script instead of printing it.
    '''
    try:
        from tbpp.la import export_smt
        from tbpp.tbpp1 import query_formula

        m, q = _load(model)
        if q is None:
            raise ValueError('the model has no query')
        script = export_smt(query_formula(m, q))
        if outfile:
            Path(outfile).write_text(script, encoding='utf8')
            return
    except Exception as e:
        _fail(e)
    typer.echo(script)


@app.command()
def van(model: Path):
    '''
    Print the vanishing predicates of a 1-clock model as JSON.

    :param model: path to the model.
    '''
    try:
        from tbpp.games1 import compute_van
        from tbpp.tbpp1 import normalize_for_one_clock

        m, _ = _load(model)
        text = compute_van(normalize_for_one_clock(m)).to_json()
    except Exception as e:
        _fail(e)
    typer.echo(text)


@app.command()
def validate(model: Path, run: Optional[Path] = None, tree: Optional[Path] = None, zones: bool = False):
    '''
    Check a model and, optionally, a witness for its query.

    :param model: path to the model.
    :param run: a run JSON that must reach the query's target.
    :param tree: a derivation tree JSON that must witness the query.
    :param zones: cross-check a ternary query against the zone engine.

    Exits with 2 when the model or a witness is invalid.
    '''
    try:
        from tbpp.model import validate as diagnostics, validate_query
        from tbpp.semantics import Run, TreeNode, check_derivation_tree, initial_configuration, replay, satisfies

        m, q = _load(model)
        problems = [str(d) for d in diagnostics(m)]
        if q is not None:
            problems += [str(d) for d in validate_query(m, q)]
        if (run or tree or zones) and q is None:
            raise ValueError('witnesses need a query in the model')
        if run:
            c = replay(m, initial_configuration(m, q.initial), Run.from_json(Path(run).read_text(encoding='utf8')))
            if not satisfies(c, q):
                problems.append(f'run: final configuration {" ".join(map(str, c))} misses the target')
        if tree:
            with open(tree, 'r') as f:
                if not check_derivation_tree(m, TreeNode.from_dict(json.load(f)), q):
                    problems.append('tree: not a derivation tree witnessing the query')
        if zones:
            from tbpp.multiclock import decide_ternary_zones
            from tbpp.ta1 import decide_ternary

            a = decide_ternary(m, q.initial, q.targets[0], q.u, q.v, q.delta).answer
            b = decide_ternary_zones(m, q.initial, q.targets[0], q.u, q.v, q.delta).answer
            if a != b:
                problems.append(f'zones: ternary decider answers {a.value}, zone engine answers {b.value}')
    except Exception as e:
        _fail(e)
    for p in problems:
        logger.error(p)
    if problems:
        raise typer.Exit(code=2)
    typer.echo('valid')


@app.command()
def bench(
        family: Family,
        outfile: Path,
        count: int = 20,
        seed: int = 0,
        method: Methods = Methods.Map,
        game_mode: GameMode = GameMode.discrete,
):
    '''
    Decide a random corpus and compare every verdict with the ground truth.

    :param family: the reduction.
    :param outfile: the path to the result table; .csv, .xlsx, .json, .html, .parquet or .pkl.
    :param count: number of instances.
    :param seed: seed of the corpus.
    :param method: one of either 'map', 'process_map' or 'thread_map'. Depending on the selection the
        execution engine changes.

            map: decides all instances in series.

            process_map: decides the instances in parallel, but not all computers support parallel processing.

            thread_map: decides the instances in a threaded manner.
    :param game_mode: reachability with several clocks, 'discrete' or 'dense-attempt'.
    '''
    try:
        from tbpp.bench import corpus, run_corpus

        logger.info(f'Generating corpus ({family.value=}, {count=}, {seed=}).')
        results = run_corpus(corpus(family.value, count, seed), method=method, outfile=outfile, game_mode=game_mode)
        summary = {
            'instances': len(results),
            'decided': int((results['answer'] != 'unknown').sum()) if len(results) else 0,
            'disagreements': int((results['agrees'] == False).sum()) if len(results) else 0,  # noqa: E712
        }
    except Exception as e:
        _fail(e)
    typer.echo(json.dumps(summary, indent=4))


@app.callback()
def default(
        config_file: Optional[Path] = typer.Option(None, '--config', help='Settings JSON.'),
        verbose: int = typer.Option(1, '--verbose', '-v', count=True, help='Repeat for debug output.'),
        quiet: bool = typer.Option(False, '--quiet', '-q', help='Only warnings and errors.'),
):
    '''
    TBPP-check entry point
    '''
    set_verbosity(0 if quiet else verbose)
    if config_file is not None:
        config.settings = config.Settings.load(config_file)
        logger.debug(f'Using settings from {config_file}.')


def main():
    multiprocessing.freeze_support()
    app()


if __name__ == "__main__":
    main()
