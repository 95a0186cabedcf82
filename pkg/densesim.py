"""Dense state-vector / density-matrix simulator for desk-scale qubit counts.

Qubit 0 is the most significant bit of basis-state labels everywhere.
"""
import logging
from functools import reduce

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

import config
from errors import (
    DenseCapExceeded,
    DimensionMismatch,
    FormatError,
    ImaginaryPhase,
    InvalidState,
    NotUnitary,
    ValidationError,
)
from utils import complex_matrix_from_json, load_json_source

logger = logging.getLogger(__name__)


def _check_cap(n, kind):
    cap = config.settings.pure_cap if kind == "pure" else config.settings.mixed_cap
    if n > cap:
        raise DenseCapExceeded(n, cap, kind=kind)


def _qubits_for_dim(dim):
    n = int(round(np.log2(dim))) if dim > 0 else -1
    if n < 0 or 2 ** n != dim:
        raise DimensionMismatch(f"Dimension {dim} is not a power of two")
    return n


def is_hermitian(matrix, tol=None):
    tol = config.settings.tol_valid if tol is None else tol
    return np.allclose(matrix, matrix.conj().T, atol=tol, rtol=0)


class QuantumState:
    """
    Pure state (vector of length 2^n) or mixed state (2^n x 2^n density matrix)

    Instances are treated as immutable: the underlying array is read-only.
    """

    def __init__(self, data, validate=True):
        data = np.array(data, dtype=complex)
        if data.ndim not in (1, 2):
            raise InvalidState("State data must be a vector or a square matrix")
        if data.ndim == 2 and data.shape[0] != data.shape[1]:
            raise InvalidState("Density matrix must be square")
        self.n = _qubits_for_dim(data.shape[0])
        self.is_pure = data.ndim == 1
        _check_cap(self.n, "pure" if self.is_pure else "mixed")
        data.setflags(write=False)
        self.data = data
        if validate:
            self._validate()

    def _validate(self):
        tol = config.settings.tol_valid
        if self.is_pure:
            norm = np.linalg.norm(self.data)
            if abs(norm - 1) > tol:
                raise InvalidState(f"State vector has norm {norm:.12g}, expected 1")
            return
        if not is_hermitian(self.data, tol):
            raise InvalidState("Density matrix is not Hermitian")
        trace = np.trace(self.data).real
        if abs(trace - 1) > tol:
            raise InvalidState(f"Density matrix has trace {trace:.12g}, expected 1")
        smallest = np.linalg.eigvalsh(self.data).min()
        if smallest < -tol:
            raise InvalidState(f"Density matrix has negative eigenvalue {smallest:.3e}")

    @property
    def dim(self):
        return 2 ** self.n

    def density_matrix(self):
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def as_mixed(self):
        if not self.is_pure:
            return self
        return QuantumState(self.density_matrix(), validate=False)

    def tensor(self, other):
        """self (x) other, self's qubits first"""
        if self.is_pure and other.is_pure:
            return QuantumState(np.kron(self.data, other.data), validate=False)
        return QuantumState(np.kron(self.density_matrix(), other.density_matrix()), validate=False)

    def purity(self):
        if self.is_pure:
            return 1.0
        return float(np.trace(self.data @ self.data).real)

    def __repr__(self):
        kind = "pure" if self.is_pure else "mixed"
        return f"QuantumState(n={self.n}, {kind})"


class ObservableElement:
    """POVM element: Hermitian M with 0 <= M <= I"""

    def __init__(self, matrix, validate=True):
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch("Observable must be a square matrix")
        self.n = _qubits_for_dim(matrix.shape[0])
        _check_cap(self.n, "mixed")
        matrix.setflags(write=False)
        self.matrix = matrix
        if validate:
            tol = config.settings.tol_valid
            if not is_hermitian(matrix, tol):
                raise ValidationError("POVM element is not Hermitian")
            eigenvalues = np.linalg.eigvalsh(matrix)
            if eigenvalues.min() < -tol or eigenvalues.max() > 1 + tol:
                raise ValidationError(
                    f"POVM element eigenvalues [{eigenvalues.min():.3e}, {eigenvalues.max():.3e}] leave [0, 1]"
                )

    @classmethod
    def identity(cls, n):
        return cls(np.eye(2 ** n), validate=False)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((2 ** n, 2 ** n)), validate=False)

    @classmethod
    def projector(cls, state):
        """|psi><psi| for a pure state"""
        if not state.is_pure:
            raise InvalidState("Projector needs a pure state")
        return cls(np.outer(state.data, state.data.conj()), validate=False)

    def __repr__(self):
        return f"ObservableElement(n={self.n})"


# Single- and two-qubit gate library; parametrized gates are callables
_SQRT_HALF = 1 / np.sqrt(2)
GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex),
    "TDG": np.diag([1, np.exp(-1j * np.pi / 4)]).astype(complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "RX": lambda theta: np.array(
        [[np.cos(theta / 2), -1j * np.sin(theta / 2)], [-1j * np.sin(theta / 2), np.cos(theta / 2)]], dtype=complex
    ),
    "RY": lambda theta: np.array(
        [[np.cos(theta / 2), -np.sin(theta / 2)], [np.sin(theta / 2), np.cos(theta / 2)]], dtype=complex
    ),
    "RZ": lambda theta: np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]),
    "P": lambda theta: np.diag([1, np.exp(1j * theta)]).astype(complex),
    "CRY": lambda theta: scipy.linalg.block_diag(np.eye(2), GATES["RY"](theta)).astype(complex),
}
GATES["CNOT"] = GATES["CX"]


def gate_matrix(name, params=()):
    """
    Look up a named gate

    Args:
        name (str): key of GATES, case-insensitive
        params (sequence): angles for parametrized gates

    Returns:
        ndarray: the gate's unitary
    """
    key = name.upper()
    if key not in GATES:
        raise FormatError(f"Unknown gate: {name}")
    entry = GATES[key]
    if callable(entry):
        if len(params) != 1:
            raise FormatError(f"Gate {name} takes exactly one angle")
        return entry(float(params[0]))
    if params:
        raise FormatError(f"Gate {name} takes no parameters")
    return entry


def is_unitary(matrix, tol=None):
    tol = config.settings.tol_valid if tol is None else tol
    matrix = np.asarray(matrix)
    return np.allclose(matrix.conj().T @ matrix, np.eye(matrix.shape[0]), atol=tol, rtol=0)


def _apply_to_axes(tensor, op, axes):
    """Contract a 2^k x 2^k operator into the listed tensor axes, keeping axis order"""
    k = len(axes)
    op_tensor = op.reshape((2,) * (2 * k))
    moved = np.tensordot(op_tensor, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(moved, list(range(k)), list(axes))


def _embed(state, op, targets):
    """Apply op on targets: U psi for pure states, U rho U^dagger for mixed ones"""
    n = state.n
    if state.is_pure:
        tensor = state.data.reshape((2,) * n)
        out = _apply_to_axes(tensor, op, targets)
        return QuantumState(out.reshape(2 ** n), validate=False)
    tensor = state.data.reshape((2,) * (2 * n))
    out = _apply_to_axes(tensor, op, targets)
    out = _apply_to_axes(out, op.conj(), [n + t for t in targets])
    return QuantumState(out.reshape(2 ** n, 2 ** n), validate=False)


def _check_targets(state, targets):
    if len(set(targets)) != len(targets):
        raise ValidationError(f"Repeated target qubits in {list(targets)}")
    for t in targets:
        if not 0 <= t < state.n:
            raise ValidationError(f"Qubit index {t} out of range for {state.n} qubits")


def basis_state(bits):
    """Computational basis state from a bit string or sequence like "010" """
    bits = [int(b) for b in bits]
    n = len(bits)
    _check_cap(n, "pure")
    vector = np.zeros(2 ** n, dtype=complex)
    vector[int("".join(map(str, bits)) or "0", 2)] = 1
    return QuantumState(vector, validate=False)


def plus_state(n):
    """|+>^n"""
    if n < 1:
        raise ValidationError("plus_state needs at least one qubit")
    _check_cap(n, "pure")
    return QuantumState(np.full(2 ** n, 2 ** (-n / 2), dtype=complex), validate=False)


def product_state(labels):
    """Product of single-qubit states labelled 0, 1, + or -"""
    singles = {
        "0": np.array([1, 0], dtype=complex),
        "1": np.array([0, 1], dtype=complex),
        "+": np.array([1, 1], dtype=complex) * _SQRT_HALF,
        "-": np.array([1, -1], dtype=complex) * _SQRT_HALF,
    }
    if not labels or any(label not in singles for label in labels):
        raise FormatError(f"Product-state labels must use 0, 1, +, -: {labels!r}")
    _check_cap(len(labels), "pure")
    vector = reduce(np.kron, (singles[label] for label in labels))
    return QuantumState(vector, validate=False)


def maximally_mixed(n):
    _check_cap(n, "mixed")
    return QuantumState(np.eye(2 ** n, dtype=complex) / 2 ** n, validate=False)


def mixture(states, weights):
    """Convex combination sum_i w_i rho_i"""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > config.settings.tol_valid:
        raise ValidationError("Mixture weights must be non-negative and sum to 1")
    matrix = sum(w * s.density_matrix() for w, s in zip(weights, states))
    return QuantumState(matrix, validate=False)


def apply_cz(s, i, j):
    """
    Controlled-Z on qubits i and j (diagonal, symmetric, an involution)
    """
    if i == j:
        raise ValidationError("CZ needs two distinct qubits")
    _check_targets(s, [i, j])
    signs = cz_signs(s.n, [(i, j)])
    if s.is_pure:
        return QuantumState(s.data * signs, validate=False)
    return QuantumState(signs[:, None] * s.data * signs[None, :], validate=False)


def cz_signs(n, pairs):
    """Diagonal of prod CZ over the given qubit pairs, as a +-1 vector"""
    index = np.arange(2 ** n)
    parity = np.zeros(2 ** n, dtype=np.int64)
    for i, j in pairs:
        parity ^= ((index >> (n - 1 - i)) & 1) & ((index >> (n - 1 - j)) & 1)
    return (1 - 2 * parity).astype(complex)


def apply_diagonal(s, diagonal):
    diagonal = np.asarray(diagonal)
    if s.is_pure:
        return QuantumState(s.data * diagonal, validate=False)
    return QuantumState(diagonal[:, None] * s.data * diagonal.conj()[None, :], validate=False)


def apply_unitary(s, U, targets):
    """
    Apply a unitary on the listed target qubits

    Args:
        s (QuantumState): input state
        U (ndarray): 2^k x 2^k unitary, first target is its most significant qubit
        targets (sequence): k distinct qubit indices

    Returns:
        QuantumState: transformed state, same representation as the input
    """
    U = np.asarray(U, dtype=complex)
    targets = list(targets)
    _check_targets(s, targets)
    if U.shape != (2 ** len(targets), 2 ** len(targets)):
        raise DimensionMismatch(f"Unitary of shape {U.shape} does not fit {len(targets)} targets")
    if not is_unitary(U):
        raise NotUnitary("Matrix is not unitary within tolerance")
    return _embed(s, U, targets)


def apply_gate(s, name, targets, params=()):
    return apply_unitary(s, gate_matrix(name, params), targets)


def circuit_unitary(n, gates):
    """
    Dense unitary of a gate list [{"gate": name, "targets": [...], "params": [...]}, ...]
    """
    _check_cap(n, "mixed")
    columns = np.eye(2 ** n, dtype=complex)
    tensor = columns.reshape((2,) * n + (2 ** n,))
    for gate in gates:
        try:
            name = gate["gate"]
            targets = list(gate["targets"])
        except (KeyError, TypeError) as e:
            raise FormatError(f"Gate entries need 'gate' and 'targets': {gate!r}") from e
        for t in targets:
            if not 0 <= t < n:
                raise ValidationError(f"Gate {name} targets qubit {t} outside 0..{n - 1}")
        op = gate_matrix(name, gate.get("params", ()))
        if op.shape[0] != 2 ** len(targets):
            raise FormatError(f"Gate {name} acts on {_qubits_for_dim(op.shape[0])} qubits, got targets {targets}")
        tensor = _apply_to_axes(tensor, op, targets)
    return tensor.reshape(2 ** n, 2 ** n)


_I_POWERS = (1, 1j, -1, -1j)


def _pauli_action(p, n):
    """
    Permutation and phases of a Pauli string: P|b> = f(b) |b XOR x_mask>

    Returns:
        tuple: (targets array b XOR x_mask, factors array f(b))
    """
    if p.n != n:
        raise DimensionMismatch(f"Pauli on {p.n} qubits applied to {n}-qubit state")
    x_mask, z_mask = p.masks()
    index = np.arange(2 ** n)
    parity = np.zeros(2 ** n, dtype=np.int64)
    masked = index & z_mask
    while np.any(masked):
        parity ^= masked & 1
        masked = masked >> 1
    factors = _I_POWERS[p.phase_exp] * (1 - 2 * parity).astype(complex)
    return index ^ x_mask, factors


def _pauli_times(p, matrix):
    """P @ matrix for a matrix (or vector) indexed by basis states along axis 0"""
    n = _qubits_for_dim(matrix.shape[0])
    targets, factors = _pauli_action(p, n)
    out = np.empty_like(matrix)
    if matrix.ndim == 1:
        out[targets] = factors * matrix
    else:
        out[targets] = factors[:, None] * matrix
    return out


def apply_pauli(s, p):
    """P psi (pure) or P rho P^dagger (mixed) using bit masks instead of dense matrices"""
    if s.is_pure:
        return QuantumState(_pauli_times(p, s.data), validate=False)
    left = _pauli_times(p, s.data)
    both = _pauli_times(p, left.conj().T).conj().T
    return QuantumState(both, validate=False)


def pauli_expectation(s, p):
    """<P> = Tr(P rho), real for Hermitian P"""
    if s.is_pure:
        return float(np.vdot(s.data, _pauli_times(p, s.data)).real)
    return float(np.trace(_pauli_times(p, s.data)).real)


def measure_pauli(s, p, rng):
    """
    Projective measurement of a Hermitian Pauli string

    Args:
        s (QuantumState): state on p.n qubits
        p (PauliString): observable with real sign
        rng (numpy.random.Generator): randomness source

    Returns:
        tuple: (outcome +1 or -1, renormalized post-measurement state)
    """
    if p.n != s.n:
        raise DimensionMismatch(f"Pauli on {p.n} qubits measured on {s.n}-qubit state")
    if not p.is_hermitian:
        raise ImaginaryPhase(0)
    expectation_value = pauli_expectation(s, p)
    p_plus = min(max((1 + expectation_value) / 2, 0.0), 1.0)
    outcome = 1 if rng.random() < p_plus else -1
    branch_probability = p_plus if outcome == 1 else 1 - p_plus
    if branch_probability <= 1e-15:
        raise ValidationError("Selected a zero-probability measurement branch")
    if s.is_pure:
        projected = (s.data + outcome * _pauli_times(p, s.data)) / 2
        return outcome, QuantumState(projected / np.sqrt(branch_probability), validate=False)
    # (I + oP)/2 rho (I + oP)/2 = (rho + o P rho + o rho P + P rho P) / 4, with rho P = (P rho)^dagger
    rho = s.data
    p_rho = _pauli_times(p, rho)
    projected = (rho + outcome * (p_rho + p_rho.conj().T) + apply_pauli(s, p).data) / 4
    return outcome, QuantumState(projected / branch_probability, validate=False)


def expectation(s, M):
    """
    Tr(M rho) for a POVM element or Hermitian matrix M

    Returns:
        float: the real expectation value
    """
    matrix = M.matrix if isinstance(M, ObservableElement) else np.asarray(M)
    if matrix.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"Observable of shape {matrix.shape} on a {s.n}-qubit state")
    if s.is_pure:
        return float(np.vdot(s.data, matrix @ s.data).real)
    return float(np.trace(matrix @ s.data).real)


def trace_norm_distance(rho, tau):
    """
    Schatten-1 norm ||rho - tau||_1

    Args:
        rho (QuantumState): first state
        tau (QuantumState | ndarray): a state or any Hermitian matrix of the same size,
            e.g. the unnormalized Lambda rho Lambda

    Returns:
        float: sum of absolute eigenvalues of the Hermitian difference
    """
    tau_matrix = tau.density_matrix() if isinstance(tau, QuantumState) else np.asarray(tau, dtype=complex)
    if tau_matrix.shape != (rho.dim, rho.dim):
        raise DimensionMismatch(f"Cannot compare {rho.n}-qubit state with matrix of shape {tau_matrix.shape}")
    difference = rho.density_matrix() - tau_matrix
    if not is_hermitian(difference):
        raise ValidationError("Trace-norm distance needs Hermitian arguments")
    return float(np.abs(np.linalg.eigvalsh(difference)).sum())


def fidelity(pure, s):
    """<phi|rho|phi> for a pure reference state"""
    if not pure.is_pure:
        raise InvalidState("Reference state must be pure")
    if s.is_pure:
        return float(abs(np.vdot(pure.data, s.data)) ** 2)
    return float(np.vdot(pure.data, s.data @ pure.data).real)


def partial_trace(s, keep):
    """
    Reduced state on the qubits in `keep`, in the order given

    Returns:
        QuantumState: mixed state on len(keep) qubits (pure input with keep = all
        qubits in order is returned unchanged)
    """
    keep = list(keep)
    _check_targets(s, keep)
    n = s.n
    if keep == list(range(n)):
        return s
    traced = [q for q in range(n) if q not in keep]
    if s.is_pure:
        tensor = s.data.reshape((2,) * n)
        tensor = np.transpose(tensor, keep + traced).reshape(2 ** len(keep), 2 ** len(traced))
        return QuantumState(tensor @ tensor.conj().T, validate=False)
    tensor = s.data.reshape((2,) * (2 * n))
    order = keep + traced + [n + q for q in keep] + [n + q for q in traced]
    tensor = np.transpose(tensor, order).reshape(2 ** len(keep), 2 ** len(traced), 2 ** len(keep), 2 ** len(traced))
    return QuantumState(np.einsum("ajbj->ab", tensor), validate=False)


def lambda_max(matrix):
    """Largest eigenvalue of a Hermitian matrix"""
    matrix = np.asarray(matrix)
    dim = matrix.shape[0]
    return float(scipy.linalg.eigh(matrix, eigvals_only=True, subset_by_index=[dim - 1, dim - 1])[0])


def top_eigenvector(matrix):
    """(lambda_max, normalized eigenvector) of a Hermitian matrix"""
    matrix = np.asarray(matrix)
    dim = matrix.shape[0]
    values, vectors = scipy.linalg.eigh(matrix, subset_by_index=[dim - 1, dim - 1])
    return float(values[0]), vectors[:, 0]


def random_pure_state(n, rng):
    """Haar-random pure state"""
    _check_cap(n, "pure")
    vector = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return QuantumState(vector / np.linalg.norm(vector), validate=False)


def random_density_matrix(n, rng, rank=None):
    """
    Hilbert-Schmidt random mixed state: A A^dagger / Tr(A A^dagger), A complex Gaussian

    Args:
        n (int): qubit count
        rng (numpy.random.Generator): randomness source
        rank (int): columns of A (full rank when omitted)
    """
    _check_cap(n, "mixed")
    dim = 2 ** n
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    rho = (rho + rho.conj().T) / 2
    return QuantumState(rho / np.trace(rho).real, validate=False)


def random_unitary(dim, rng):
    return unitary_group.rvs(dim, random_state=rng)


def random_povm_element(n, rng):
    """U diag(u) U^dagger with Haar U and eigenvalues uniform in [0, 1]"""
    dim = 2 ** n
    u = random_unitary(dim, rng) if dim > 1 else np.eye(1)
    eigenvalues = rng.uniform(0, 1, size=dim)
    matrix = (u * eigenvalues) @ u.conj().T
    return ObservableElement((matrix + matrix.conj().T) / 2, validate=False)


def parse_state_spec(spec, n=None):
    """
    Build a state from a compact description

    Accepted forms:
        "01+-"                product state labels
        "mixed"               maximally mixed (needs n)
        [[re, im], ...]       amplitude vector
        {"amplitudes": ...}   same
        {"matrix": ...}       density matrix of [re, im] pairs
        {"graph": {...}}      graph state
        "path/to/file.json"   any of the above stored in a file

    Args:
        spec: description as above
        n (int): expected qubit count, checked when given

    Returns:
        QuantumState: the validated state
    """
    if isinstance(spec, str) and spec == "mixed":
        if n is None:
            raise FormatError("'mixed' needs an explicit qubit count")
        state = maximally_mixed(n)
    elif isinstance(spec, str) and spec and all(ch in "01+-" for ch in spec):
        state = product_state(spec)
    elif isinstance(spec, str):
        return parse_state_spec(load_json_source(spec), n)
    elif isinstance(spec, list):
        amplitudes = np.array(
            [complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a) for a in spec], dtype=complex
        )
        state = QuantumState(amplitudes)
    elif isinstance(spec, dict) and "amplitudes" in spec:
        return parse_state_spec(spec["amplitudes"], n)
    elif isinstance(spec, dict) and "matrix" in spec:
        state = QuantumState(complex_matrix_from_json(spec["matrix"]))
    elif isinstance(spec, dict) and "graph" in spec:
        from graphstate import graph_state, parse_graph

        state = graph_state(parse_graph(spec["graph"]))
    else:
        raise FormatError(f"Unrecognized state spec: {spec!r}")
    if n is not None and state.n != n:
        raise DimensionMismatch(f"State spec describes {state.n} qubits, expected {n}")
    return state


def parse_observable(spec, n=None):
    """
    Build a POVM element from a matrix of [re, im] pairs, a named observable
    ("identity", "zero"), or {"projector": <state spec>}
    """
    if isinstance(spec, str) and spec in ("identity", "zero"):
        if n is None:
            raise FormatError(f"Named observable {spec!r} needs a qubit count")
        return ObservableElement.identity(n) if spec == "identity" else ObservableElement.zero(n)
    if isinstance(spec, str):
        return parse_observable(load_json_source(spec), n)
    if isinstance(spec, dict) and "projector" in spec:
        element = ObservableElement.projector(parse_state_spec(spec["projector"], n))
    elif isinstance(spec, dict) and "matrix" in spec:
        element = ObservableElement(complex_matrix_from_json(spec["matrix"]))
    elif isinstance(spec, list):
        element = ObservableElement(complex_matrix_from_json(spec))
    else:
        raise FormatError(f"Unrecognized observable spec: {spec!r}")
    if n is not None and element.n != n:
        raise DimensionMismatch(f"Observable acts on {element.n} qubits, expected {n}")
    return element
