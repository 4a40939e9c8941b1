'''
Procedures for models with any number of clocks: a zone engine (:mod:`~tbpp.multiclock.dbm`,
:mod:`~tbpp.multiclock.zones`), coverability over bounded configurations
(:mod:`~tbpp.multiclock.cover`) and reachability through timed games
(:mod:`~tbpp.multiclock.games`).
'''
from .cover import BoundedConfig, decide_cover_multi
from .dbm import Dbm
from .games import (
    GameMode, GameState, ReachGame, SimpleReduction, build_simple_reach_game, decide_reach_multi,
    reduce_reach_to_simple, solve_game_discrete,
)
from .zones import Step, concretize, decide_ternary_zones, explore, ta_reach
