import logging

import numpy as np

from densesim import QuantumState, parse_state_spec, top_eigenvector
from merlin.base import BaseMerlinStrategy

logger = logging.getLogger(__name__)


class FixedStateMerlin(BaseMerlinStrategy):
    """Sends the same state, read from a state spec or file, for every challenge"""

    kind = 'fixed'

    def __init__(self, instance, state, source=None, params=None, mode='direct'):
        super().__init__(instance, params=params, mode=mode)
        expected = instance.system.total_qubits
        if state.n != expected:
            raise ValueError(f"Fixed state has {state.n} qubits, the system has {expected}")
        self.state = state
        self.source = source

    @classmethod
    def from_spec(cls, argument, instance, params=None, mode='direct'):
        if argument is None:
            raise ValueError("Strategy 'fixed' needs a state, e.g. fixed:mixed or fixed:state.json")
        state = parse_state_spec(argument, instance.system.total_qubits)
        return cls(instance, state, source=argument, params=params, mode=mode)

    def _build_state(self, y):
        return self.state

    def to_dict(self):
        return {'kind': self.kind, 'source': self.source}


class OptimalMerlin(BaseMerlinStrategy):
    """Top eigenvector of the per-challenge acceptance operator: the best possible cheat"""

    kind = 'optimal'

    def __init__(self, instance, params=None, mode='direct'):
        if params is None:
            raise ValueError("Strategy 'optimal' needs the protocol parameters")
        super().__init__(instance, params=params, mode=mode)

    def _build_state(self, y):
        from protocol import acceptance_operator

        element = acceptance_operator(self.params, self.instance, y, mode=self.mode)
        value, vector = top_eigenvector(element.matrix)
        logger.debug(f"Optimal cheat for y={y}: {value:.12g}")
        return QuantumState(vector / np.linalg.norm(vector), validate=False)

    def to_dict(self):
        return {'kind': self.kind, 'mode': self.mode}
