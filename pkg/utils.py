import json
import math
import dataclasses
from fractions import Fraction
from pathlib import Path

import numpy as np

from errors import FormatError

# Significant digits kept for every float in a report
REPORT_DIGITS = 12


# Custom JSON encoder for numpy values, complex numbers and dataclasses
class ReportEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        elif isinstance(o, np.integer):
            return int(o)
        elif isinstance(o, np.floating):
            return float(o)
        elif isinstance(o, np.bool_):
            return bool(o)
        elif isinstance(o, (complex, np.complexfloating)):
            return [float(o.real), float(o.imag)]
        elif isinstance(o, Fraction):
            return float(o)
        elif dataclasses.is_dataclass(o) and not isinstance(o, type):
            return dataclasses.asdict(o)
        return super().default(o)


def _round_float(value):
    if math.isnan(value) or math.isinf(value):
        return None
    if value == 0:
        return 0.0
    return float(f"{value:.{REPORT_DIGITS}g}")


def canonicalize(obj):
    """
    Normalize a report tree so that dumping it is deterministic

    Args:
        obj: nested dicts/lists/tuples of scalars, numpy values or dataclasses

    Returns:
        The same tree with floats rounded to REPORT_DIGITS significant digits,
        tuples turned into lists and dict keys turned into strings
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {str(key): canonicalize(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return canonicalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Fraction)):
        return _round_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round_float(float(obj.real)), _round_float(float(obj.imag))]
    return obj


def canonical_json(report):
    """Dump a report with sorted keys and fixed float formatting"""
    return json.dumps(canonicalize(report), sort_keys=True, indent=2, cls=ReportEncoder) + "\n"


def make_rng(seed):
    return np.random.default_rng(np.random.SeedSequence(seed))


def spawn_rngs(seed, count):
    """
    Split one seed into independent generators, one per trial or sweep case

    Child i depends only on (seed, i), so adding cases never changes
    earlier ones.

    Args:
        seed (int): root seed
        count (int): number of child generators

    Returns:
        list: numpy Generators
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def load_json_source(source):
    """
    Load JSON from a dict, a JSON text, or a path to a JSON file

    Args:
        source (dict | str | Path): already-parsed object, JSON text, or file path

    Returns:
        The parsed object
    """
    if isinstance(source, (dict, list)):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        path = Path(source)
        text = path.read_text()
    else:
        text = source
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"Invalid JSON: {e}") from e


def complex_matrix_from_json(rows):
    """
    Parse an array-of-arrays of [re, im] pairs (or plain reals) into a complex matrix
    """
    try:
        matrix = np.array(
            [[complex(entry[0], entry[1]) if isinstance(entry, (list, tuple)) else complex(entry) for entry in row]
             for row in rows],
            dtype=complex,
        )
    except (TypeError, IndexError, ValueError) as e:
        raise FormatError(f"Malformed complex matrix: {e}") from e
    if matrix.ndim != 2:
        raise FormatError("Matrix must be a two-dimensional array")
    return matrix


def complex_matrix_to_json(matrix):
    return [[[float(entry.real), float(entry.imag)] for entry in row] for row in np.asarray(matrix)]
