import importlib
import logging

logger = logging.getLogger(__name__)

# Strategy class cache to avoid repeated imports
_strategy_cache = {}

# Strategy name -> (module path, class name)
STRATEGY_MAP = {
    'honest': ('merlin.honest', 'HonestMerlin'),
    'depolarizing': ('merlin.honest', 'DepolarizingMerlin'),
    'fixed': ('merlin.adversarial', 'FixedStateMerlin'),
    'optimal': ('merlin.adversarial', 'OptimalMerlin'),
}


def _import_strategy(module_path, class_name):
    """
    Import a strategy class from a module path

    Args:
        module_path (str): The module path (e.g., 'merlin.honest')
        class_name (str): The class name (e.g., 'HonestMerlin')

    Returns:
        class: The strategy class
    """
    cache_key = f"{module_path}.{class_name}"
    if cache_key not in _strategy_cache:
        module = importlib.import_module(module_path)
        _strategy_cache[cache_key] = getattr(module, class_name)
    return _strategy_cache[cache_key]


def parse_strategy_spec(spec):
    """
    Split "name:argument" into its parts

    Returns:
        tuple: (name, argument or None)
    """
    name, _, argument = spec.strip().partition(':')
    return name.lower(), (argument or None)


def get_strategy(spec, instance, params=None, mode='direct'):
    """
    Build the Merlin strategy named by a spec string

    Args:
        spec (str): 'honest', 'depolarizing:<mu>', 'fixed:<state spec or file>' or 'optimal'
        instance (ProtocolInstance): the instance Merlin plays on
        params (ProtocolParams): schedule used by the optimal strategy
        mode (str): 'direct' or 'mbqc', the branch semantics the optimal strategy targets

    Returns:
        BaseMerlinStrategy: an instance of the strategy class

    Raises:
        ValueError: unknown strategy name or malformed argument
    """
    name, argument = parse_strategy_spec(spec)
    if name not in STRATEGY_MAP:
        raise ValueError(f"Unsupported Merlin strategy: {spec}")
    module_path, class_name = STRATEGY_MAP[name]
    strategy_class = _import_strategy(module_path, class_name)
    logger.debug(f"Using strategy {class_name} with argument {argument!r}")
    return strategy_class.from_spec(argument, instance, params=params, mode=mode)


def available_strategies():
    return sorted(STRATEGY_MAP)
