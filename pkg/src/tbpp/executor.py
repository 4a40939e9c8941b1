from enum import Enum
from time import perf_counter

from pandas import DataFrame
from tqdm.auto import tqdm
from tqdm.contrib.concurrent import thread_map, process_map

from .logging import logger
from .model import Mode, ModelError, Query, TbppModel
from .multiclock import GameMode, decide_cover_multi, decide_reach_multi
from .tbpp1 import decide_query
from .verdict import Answer, Verdict


class Methods(str, Enum):
    '''
    Methods

    Specifies different execution methods:

    * ``Map``: One instance at a time. This takes the longest to run, but is the most robust. This method has to be
        used if the corpus is decided in an interactive session.
    * ``ThreadMap``: Each instance is decided in its own thread. Decision procedures are CPU bound, so this mostly
        helps when instances write files.
    * ``ProcessMap``: Each instance is decided in parallel in its own worker. This provides true parallel processing.
        This only works in non-interactive sessions, i.e. via the terminal.

    '''
    Map = 'map'
    ProcessMap = 'process_map'
    ThreadMap = 'thread_map'

    def executor(self, *args, **kwargs):
        return {
            Methods.Map: lambda fn, x, **k: list(map(fn, tqdm(x, **k))),
            Methods.ThreadMap: thread_map,
            Methods.ProcessMap: process_map,
        }.get(self)(*args, **kwargs)


def dispatch(model: TbppModel, query: Query, game_mode: GameMode = GameMode.discrete) -> Verdict:
    '''
    Decide a query with the procedure matching the number of clocks.

    1-clock models go to :func:`tbpp.tbpp1.decide_query` (ternary queries to :mod:`tbpp.ta1`); models with more
    clocks use the zone engine for coverability and the reachability game otherwise.
    '''
    logger.debug(f'Dispatching {query.mode.value} query on {len(model.clocks)} clocks.')
    if len(model.clocks) == 1:
        return decide_query(model, query)
    if query.mode is Mode.ternary:
        raise ModelError(f'ternary queries need a 1-clock automaton, got {len(model.clocks)} clocks')
    if query.mode in (Mode.cover, Mode.simple_cover):
        return decide_cover_multi(model, query.initial, query.targets)
    return decide_reach_multi(model, query.initial, query.targets, mode=game_mode)


def agreement(ground_truth, answer: Answer):
    '''``True``/``False`` when the verdict is decisive and the ground truth is known, else ``None``.'''
    if not isinstance(ground_truth, bool) or answer is Answer.Unknown:
        return None
    return ground_truth == (answer is Answer.Sat)


class Executor:
    '''
    Executor

    Decides a corpus of generated instances. Uses :class:`Methods` to specify the execution method.

    '''

    def __init__(self, method: Methods = Methods.Map, game_mode: GameMode = GameMode.discrete):
        self.method = Methods(method)
        self.game_mode = GameMode(game_mode)

    @staticmethod
    def _run_instance(args):
        '''
        Decide a single instance

        :param args: Tuple(index, instance, game_mode)
        '''
        index, instance, game_mode = args
        start = perf_counter()
        try:
            verdict = dispatch(instance.model, instance.query, game_mode)
            answer, reason = verdict.answer, verdict.reason
        except Exception as e:
            logger.error(f'Instance {index} ({instance.family}) failed: {e}')
            answer, reason = Answer.Unknown, str(e)
        return {
            'index': index,
            'family': instance.family,
            'params': instance.params_text,
            'mode': instance.query.mode.value,
            'clocks': len(instance.model.clocks),
            'ground_truth': instance.ground_truth,
            'answer': answer.value,
            'agrees': agreement(instance.ground_truth, answer),
            'reason': reason,
            'seconds': perf_counter() - start,
        }

    def execute(self, instances) -> DataFrame:
        '''
        Decide every instance.

        :param instances: a list of :class:`tbpp.bench.Instance`.

        :return: a ``DataFrame`` with one row per instance, ordered by instance index.
        '''
        args = [(i, instance, self.game_mode) for i, instance in enumerate(instances)]
        rows = self.method.executor(self._run_instance, args, desc='Instances', position=0)
        return DataFrame(rows).sort_values('index').reset_index(drop=True) if rows else DataFrame()
