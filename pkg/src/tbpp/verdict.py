'''
Verdicts

Every decision procedure in the package answers with a :class:`Verdict`.

'''
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional


class Answer(str, Enum):
    '''
    Answer

    * ``Sat``: the query holds and the verdict usually carries a witness.
    * ``Unsat``: the query does not hold.
    * ``Unknown``: a resource limit was hit or the procedure is incomplete for the instance.

    '''
    Sat = 'sat'
    Unsat = 'unsat'
    Unknown = 'unknown'

    @property
    def exit_code(self) -> int:
        return {Answer.Sat: 10, Answer.Unsat: 11}.get(self, 0)


def jsonable(x: Any) -> Any:
    '''Convert witnesses (fractions, tuples, objects with ``to_dict``) into JSON friendly data.'''
    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, 'to_dict'):
        return x.to_dict()
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in x]
    if isinstance(x, Enum):
        return x.value
    return x


@dataclass
class Verdict:
    '''
    Verdict

    :param answer: the :class:`Answer`.
    :param witness: evidence for the answer, typically a valuation, a run or a derivation tree.
    :param statistics: counters collected while deciding.
    :param reason: a human readable explanation, mostly for ``Unknown``.
    '''
    answer: Answer
    witness: Optional[Any] = None
    statistics: dict = field(default_factory=dict)
    reason: Optional[str] = None

    @classmethod
    def sat(cls, witness=None, **statistics):
        return cls(Answer.Sat, witness, statistics)

    @classmethod
    def unsat(cls, **statistics):
        return cls(Answer.Unsat, None, statistics)

    @classmethod
    def unknown(cls, reason: str, **statistics):
        return cls(Answer.Unknown, None, statistics, reason)

    def __bool__(self):
        return self.answer is Answer.Sat

    @property
    def is_sat(self):
        return self.answer is Answer.Sat

    @property
    def is_unsat(self):
        return self.answer is Answer.Unsat

    def to_dict(self):
        return {
            'answer': self.answer.value,
            'witness': jsonable(self.witness),
            'statistics': jsonable(self.statistics),
            'reason': self.reason,
        }
