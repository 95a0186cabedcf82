import logging

from densesim import maximally_mixed, mixture
from merlin.base import BaseMerlinStrategy

logger = logging.getLogger(__name__)


class HonestMerlin(BaseMerlinStrategy):
    """Sends the graph state connected to the instance's witness for y"""

    kind = 'honest'

    def _build_state(self, y):
        return self.instance.honest_state(y)


class DepolarizingMerlin(BaseMerlinStrategy):
    """Honest state mixed with the maximally mixed state: (1 - mu) rho_honest + mu I/2^(N+m)"""

    kind = 'depolarizing'

    def __init__(self, instance, mu, params=None, mode='direct'):
        super().__init__(instance, params=params, mode=mode)
        if not 0 <= mu <= 1:
            raise ValueError(f"Depolarizing strength must lie in [0, 1], got {mu}")
        self.mu = mu

    @classmethod
    def from_spec(cls, argument, instance, params=None, mode='direct'):
        if argument is None:
            raise ValueError("Strategy 'depolarizing' needs a strength, e.g. depolarizing:0.1")
        try:
            mu = float(argument)
        except ValueError as e:
            raise ValueError(f"Depolarizing strength {argument!r} is not a number") from e
        return cls(instance, mu, params=params, mode=mode)

    def _build_state(self, y):
        honest = self.instance.honest_state(y)
        noise = maximally_mixed(honest.n)
        return mixture([honest, noise], [1 - self.mu, self.mu])

    def to_dict(self):
        return {'kind': self.kind, 'mu': self.mu}
