"""N-fold Pauli group algebra and stabilizer generator validation.

A PauliString stores i^phase_exp * (X^x_0 Z^z_0) (x) ... (x) (X^x_{n-1} Z^z_{n-1}).
The letter for (x, z) = (1, 1) is X.Z = -iY, so a Hermitian Y costs one
factor of i in phase_exp. Qubit 0 is the leftmost tensor factor and the most
significant bit of basis-state labels.
"""
import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np

import config
from errors import (
    DenseCapExceeded,
    Dependent,
    DimensionMismatch,
    FormatError,
    ImaginaryPhase,
    NonCommuting,
    ValidationError,
)
from utils import load_json_source

logger = logging.getLogger(__name__)

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {letter: bits for bits, letter in _LETTERS.items()}
_SIGN_PREFIXES = {"+": 0, "": 0, "-": 2, "+i": 1, "i": 1, "-i": 3}
_SIGN_LABELS = {0: "+", 1: "+i", 2: "-", 3: "-i"}

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_LETTER_MATRICES = {(0, 0): np.eye(2, dtype=complex), (1, 0): _X, (0, 1): _Z, (1, 1): _X @ _Z}


@dataclass(frozen=True)
class PauliString:
    n: int
    x_bits: tuple
    z_bits: tuple
    phase_exp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x_bits", tuple(int(b) & 1 for b in self.x_bits))
        object.__setattr__(self, "z_bits", tuple(int(b) & 1 for b in self.z_bits))
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % 4)
        if len(self.x_bits) != self.n or len(self.z_bits) != self.n:
            raise DimensionMismatch(f"Bit vectors must have length {self.n}")

    @classmethod
    def identity(cls, n):
        return cls(n, (0,) * n, (0,) * n, 0)

    @classmethod
    def from_label(cls, label):
        """
        Parse a label such as "+XZ", "-YY", "IZX" or "-iX"

        Letters are the usual Hermitian Paulis; the optional prefix is one of
        +, -, +i, i, -i.

        Args:
            label (str): sign prefix followed by letters from I, X, Y, Z

        Returns:
            PauliString: the operator the label denotes
        """
        text = label.strip()
        letters_start = 0
        while letters_start < len(text) and text[letters_start] in "+-i":
            letters_start += 1
        prefix, letters = text[:letters_start], text[letters_start:].upper()
        if prefix not in _SIGN_PREFIXES:
            raise FormatError(f"Unknown sign prefix {prefix!r} in Pauli label {label!r}")
        if not letters or any(letter not in _BITS for letter in letters):
            raise FormatError(f"Invalid Pauli letters in label {label!r}")
        x_bits = tuple(_BITS[letter][0] for letter in letters)
        z_bits = tuple(_BITS[letter][1] for letter in letters)
        y_count = letters.count("Y")
        return cls(len(letters), x_bits, z_bits, _SIGN_PREFIXES[prefix] + y_count)

    @classmethod
    def single(cls, n, qubit, letter, sign=1):
        """One-qubit Pauli `letter` on `qubit`, identity elsewhere"""
        letters = ["I"] * n
        letters[qubit] = letter
        return cls.from_label(("-" if sign < 0 else "+") + "".join(letters))

    @property
    def y_count(self):
        return sum(x & z for x, z in zip(self.x_bits, self.z_bits))

    @property
    def sign_exp(self):
        """Power of i multiplying the Hermitian letter string"""
        return (self.phase_exp - self.y_count) % 4

    @property
    def is_hermitian(self):
        return self.sign_exp in (0, 2)

    @property
    def letters(self):
        return "".join(_LETTERS[(x, z)] for x, z in zip(self.x_bits, self.z_bits))

    @property
    def is_identity(self):
        return not any(self.x_bits) and not any(self.z_bits)

    def label(self):
        return _SIGN_LABELS[self.sign_exp] + self.letters

    def masks(self):
        """Integer bit masks (x_mask, z_mask) with qubit 0 as the most significant bit"""
        x_mask = 0
        z_mask = 0
        for x, z in zip(self.x_bits, self.z_bits):
            x_mask = (x_mask << 1) | x
            z_mask = (z_mask << 1) | z
        return x_mask, z_mask

    def symplectic_row(self):
        return np.array(self.x_bits + self.z_bits, dtype=np.uint8)

    def negated(self):
        return PauliString(self.n, self.x_bits, self.z_bits, self.phase_exp + 2)

    def __mul__(self, other):
        return pauli_mul(self, other)

    def __str__(self):
        return self.label()


def _check_same_n(p, q):
    if p.n != q.n:
        raise DimensionMismatch(f"Pauli strings act on {p.n} and {q.n} qubits")


def pauli_mul(p, q):
    """
    Multiply two Pauli strings with exact phase tracking

    (X^a Z^b)(X^c Z^d) = (-1)^(b.c) X^(a+c) Z^(b+d) per qubit.

    Args:
        p (PauliString): left factor
        q (PauliString): right factor

    Returns:
        PauliString: the product p.q
    """
    _check_same_n(p, q)
    cross = sum(zp & xq for zp, xq in zip(p.z_bits, q.x_bits))
    return PauliString(
        p.n,
        tuple(a ^ b for a, b in zip(p.x_bits, q.x_bits)),
        tuple(a ^ b for a, b in zip(p.z_bits, q.z_bits)),
        p.phase_exp + q.phase_exp + 2 * cross,
    )


def commutes(p, q):
    """True iff pq = qp, via the symplectic inner product"""
    _check_same_n(p, q)
    form = sum(xp & zq for xp, zq in zip(p.x_bits, q.z_bits)) + sum(zp & xq for zp, xq in zip(p.z_bits, q.x_bits))
    return form % 2 == 0


def dense_matrix(p):
    """
    Dense 2^n x 2^n matrix of a Pauli string

    Raises:
        DenseCapExceeded: if p.n is above the configured mixed-state cap
    """
    cap = config.settings.mixed_cap
    if p.n > cap:
        raise DenseCapExceeded(p.n, cap, kind="operator")
    factors = [_LETTER_MATRICES[(x, z)] for x, z in zip(p.x_bits, p.z_bits)]
    matrix = reduce(np.kron, factors, np.ones((1, 1), dtype=complex))
    return (1, 1j, -1, -1j)[p.phase_exp] * matrix


@dataclass(frozen=True)
class SubsetSelector:
    bits: tuple

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) & 1 for b in self.bits))

    @classmethod
    def from_int(cls, value, length):
        """Selector whose bit j is bit (length-1-j) of value, so k_1 is the most significant"""
        return cls(tuple((value >> (length - 1 - j)) & 1 for j in range(length)))

    def __len__(self):
        return len(self.bits)

    def to_string(self):
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class StabilizerGroup:
    n: int
    generators: tuple

    def __len__(self):
        return len(self.generators)

    @property
    def size(self):
        return len(self.generators)

    def labels(self):
        return [g.label() for g in self.generators]

    def to_dict(self):
        return {"n": self.n, "generators": self.labels()}


def _gf2_dependency(generators):
    """
    Symplectic Gaussian elimination over GF(2)

    Returns:
        tuple or None: indices of a subset whose product is +-I, or None if independent
    """
    rows = [g.symplectic_row().copy() for g in generators]
    combos = [1 << i for i in range(len(rows))]
    pivot_row = 0
    width = rows[0].size
    for column in range(width):
        pivot = next((r for r in range(pivot_row, len(rows)) if rows[r][column]), None)
        if pivot is None:
            continue
        rows[pivot_row], rows[pivot] = rows[pivot], rows[pivot_row]
        combos[pivot_row], combos[pivot] = combos[pivot], combos[pivot_row]
        for r in range(len(rows)):
            if r != pivot_row and rows[r][column]:
                rows[r] ^= rows[pivot_row]
                combos[r] ^= combos[pivot_row]
        pivot_row += 1
    for r in range(pivot_row, len(rows)):
        # Zero row: its combination is a dependent subset
        return tuple(i for i in range(len(generators)) if combos[r] >> i & 1)
    return None


def validate_stabilizer(gens):
    """
    Validate a generator list and wrap it as a StabilizerGroup

    Checks, in order: every generator has a real sign, every pair commutes,
    and no nonempty subset multiplies to +-I (which also rules out -I in the
    generated group).

    Args:
        gens (list): PauliString generators on a common qubit count

    Returns:
        StabilizerGroup: the validated group

    Raises:
        ImaginaryPhase: a generator carries +-i
        NonCommuting: a pair of generators anticommutes
        Dependent: a subset of generators multiplies to +-I
    """
    gens = list(gens)
    if not gens:
        raise ValidationError("A stabilizer needs at least one generator")
    n = gens[0].n
    for g in gens:
        _check_same_n(gens[0], g)
    for index, g in enumerate(gens):
        if not g.is_hermitian:
            raise ImaginaryPhase(index)
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if not commutes(gens[i], gens[j]):
                raise NonCommuting(i, j)
    subset = _gf2_dependency(gens)
    if subset is not None:
        product = reduce(pauli_mul, (gens[i] for i in subset))
        sign = -1 if product.sign_exp == 2 else 1
        raise Dependent(subset, sign)
    logger.debug(f"Validated stabilizer with {len(gens)} generators on {n} qubits")
    return StabilizerGroup(n, tuple(gens))


def subset_product(g, k):
    """
    s_k = prod_j g_j^(k_j), taken in generator order

    Args:
        g (StabilizerGroup): validated group
        k (SubsetSelector | sequence): one bit per generator

    Returns:
        PauliString: Hermitian element of the group with sign +-1
    """
    bits = k.bits if isinstance(k, SubsetSelector) else tuple(k)
    if len(bits) != g.size:
        raise DimensionMismatch(f"Selector has {len(bits)} bits but the group has {g.size} generators")
    result = PauliString.identity(g.n)
    for bit, generator in zip(bits, g.generators):
        if bit:
            result = pauli_mul(result, generator)
    return result


def parse_stabilizer(obj):
    """
    Build a validated group from {"n": int, "generators": ["+XZ", "-ZX", ...]}

    Raises:
        FormatError: malformed document
        ImaginaryPhase: an i or -i prefix
    """
    try:
        n = int(obj["n"])
        labels = list(obj["generators"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"Stabilizer file needs 'n' and 'generators': {e}") from e
    gens = [PauliString.from_label(label) for label in labels]
    for index, g in enumerate(gens):
        if g.n != n:
            raise FormatError(f"Generator {index} ({labels[index]}) has {g.n} letters, expected {n}")
    return validate_stabilizer(gens)


def load_stabilizer(source):
    return parse_stabilizer(load_json_source(source))
