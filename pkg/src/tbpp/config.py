'''
Settings

Resource limits and tuning knobs shared by the decision procedures. Settings can be saved to and
loaded from JSON so that benchmark runs are reproducible.

'''
import json
from dataclasses import dataclass, asdict, fields, replace
from pathlib import Path
from typing import Optional

from .logging import logger


@dataclass(frozen=True)
class Settings:
    '''
    Settings

    :param max_multiplicity: largest multiplicity of a single nonterminal in a target multiset.
    :param bnb_node_limit: branch-and-bound nodes per integer conjunction before giving up.
    :param search_node_limit: search nodes of the lazy disjunction search before giving up.
    :param la_backend: decision procedure of existential formulas: ``builtin``, ``z3`` or ``auto``
        (z3 when z3-solver is installed).
    :param smt_timeout: milliseconds z3 may spend on one formula (``None``: no limit).
    :param explorer_max_steps: configurations expanded by the discretized explorer.
    :param explorer_max_size: largest configuration kept by the explorer (``None``: targets + 2).
    :param explorer_horizon: time horizon of the explorer (``None``: derived from the constants).
    :param red_checkpoint_bound: red checkpoints per branch of a reachability skeleton
        (``None``: number of regions).
    :param skeleton_limit: skeletons tried by the 1-clock deciders before answering Unknown.
    :param game_state_limit: states of the discrete game solver and the zone engine.
    :param fixpoint_margin: extra rounds allowed above the 4n^3 bound of the game fixpoint.
    '''
    max_multiplicity: int = 16
    bnb_node_limit: int = 20000
    search_node_limit: int = 200000
    la_backend: str = 'auto'
    smt_timeout: Optional[int] = None
    explorer_max_steps: int = 20000
    explorer_max_size: Optional[int] = None
    explorer_horizon: Optional[str] = None
    red_checkpoint_bound: Optional[int] = None
    skeleton_limit: int = 5000
    game_state_limit: int = 500000
    fixpoint_margin: int = 2

    def update(self, **kwargs):
        '''Return a copy with the given fields replaced.'''
        return replace(self, **kwargs)

    def save(self, url: Path):
        with open(url, 'w') as f:
            json.dump(asdict(self), f, indent=4)
        return self

    @classmethod
    def load(cls, url: Path):
        logger.debug(f'Loading settings ({url=}).')
        with open(url, 'r') as f:
            data = json.load(f)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f'Unknown settings: {sorted(unknown)}')
        return cls(**data)


settings = Settings()
