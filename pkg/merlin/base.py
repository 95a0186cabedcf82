import logging

logger = logging.getLogger(__name__)


class BaseMerlinStrategy:
    """Base class for Merlin strategies: a rule y -> (N+m)-qubit state"""

    kind = 'base'

    def __init__(self, instance, params=None, mode='direct'):
        self.instance = instance
        self.params = params
        self.mode = mode
        self._states = {}

    @classmethod
    def from_spec(cls, argument, instance, params=None, mode='direct'):
        if argument is not None:
            raise ValueError(f"Strategy '{cls.kind}' takes no argument, got {argument!r}")
        return cls(instance, params=params, mode=mode)

    def state_for(self, y):
        """
        The state Merlin sends for challenge y, built once per challenge

        Args:
            y (int): challenge index in 0..2^s-1

        Returns:
            QuantumState: state on the N+m system qubits
        """
        if y not in self._states:
            self._states[y] = self._build_state(y)
        return self._states[y]

    def _build_state(self, y):
        raise NotImplementedError("Subclasses must implement _build_state()")

    def to_dict(self):
        return {'kind': self.kind}
