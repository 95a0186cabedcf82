"""Adaptive single-qubit measurement patterns on small entangled resource states.

An XY-plane measurement at angle theta projects onto (|0> + (-1)^r e^(i theta)|1>)/sqrt(2)
for outcome r. Measuring qubit a of CZ(psi (x) |+>) leaves X^r H P(-theta) psi
on the partner qubit, which is the building block of every chain pattern here.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from densesim import QuantumState, apply_cz, apply_gate, fidelity, plus_state, random_pure_state
from errors import DimensionMismatch, FormatError, PatternError
from utils import load_json_source

logger = logging.getLogger(__name__)

PLANES = ("XY", "Z")
# Branches with probability below this are never selected
ZERO_BRANCH = 1e-15


@dataclass(frozen=True)
class BasisSpec:
    plane: str = "XY"
    angle: float = 0.0

    def __post_init__(self):
        if self.plane not in PLANES:
            raise PatternError(f"Unknown measurement plane {self.plane!r}, expected one of {PLANES}")
        if not math.isfinite(self.angle):
            raise PatternError(f"Measurement angle must be finite, got {self.angle}")

    def bra(self, outcome, angle=None):
        """Row vector <phi_r| of the eigenbasis element for outcome r"""
        if self.plane == "Z":
            vector = np.zeros(2, dtype=complex)
            vector[outcome] = 1
            return vector
        theta = self.angle if angle is None else angle
        return np.array([1, (-1) ** outcome * np.exp(-1j * theta)], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class MeasurementStep:
    qubit: int
    basis: BasisSpec
    x_deps: tuple = ()
    z_deps: tuple = ()

    def effective_angle(self, outcomes):
        """(-1)^(parity of x_deps) theta + pi (parity of z_deps)"""
        sign = (-1) ** _parity(outcomes, self.x_deps)
        return sign * self.basis.angle + math.pi * _parity(outcomes, self.z_deps)

    def bra(self, physical, outcomes):
        return self.basis.bra(physical, self.effective_angle(outcomes))

    def record(self, physical, outcomes):
        """Outcome as seen by later steps; Z-plane readings absorb the X frame"""
        if self.basis.plane == "Z":
            return physical ^ _parity(outcomes, self.x_deps)
        return physical

    def to_dict(self):
        return {
            "qubit": self.qubit,
            "plane": self.basis.plane,
            "angle": self.basis.angle,
            "deps": list(self.x_deps),
            "z_deps": list(self.z_deps),
        }


@dataclass(frozen=True)
class Byproduct:
    """X^(parity of x_steps) then Z^(parity of z_steps) on one output qubit"""

    qubit: int
    x_steps: tuple = ()
    z_steps: tuple = ()


@dataclass(frozen=True)
class MeasurementPattern:
    steps: tuple
    outputs: tuple
    byproducts: tuple = field(default=())

    def __post_init__(self):
        measured = set()
        for index, step in enumerate(self.steps):
            if step.qubit in measured:
                raise PatternError(f"Step {index} measures qubit {step.qubit} a second time")
            measured.add(step.qubit)
            for dep in step.x_deps + step.z_deps:
                if not 0 <= dep < index:
                    raise PatternError(f"Step {index} depends on step {dep}, which does not come earlier")
        if len(set(self.outputs)) != len(self.outputs):
            raise PatternError(f"Repeated output qubits {list(self.outputs)}")
        for q in self.outputs:
            if q in measured:
                raise PatternError(f"Output qubit {q} is also measured")
        for rule in self.byproducts:
            if rule.qubit not in self.outputs:
                raise PatternError(f"Byproduct on qubit {rule.qubit}, which is not an output")
            for dep in rule.x_steps + rule.z_steps:
                if not 0 <= dep < len(self.steps):
                    raise PatternError(f"Byproduct on qubit {rule.qubit} references missing step {dep}")

    @property
    def measured_qubits(self):
        return [step.qubit for step in self.steps]

    def check_fits(self, n):
        """All referenced qubits exist on an n-qubit state"""
        for q in self.measured_qubits + list(self.outputs):
            if not 0 <= q < n:
                raise PatternError(f"Pattern references qubit {q}, state has {n} qubits")

    def leftover_qubits(self, n):
        used = set(self.measured_qubits) | set(self.outputs)
        return [q for q in range(n) if q not in used]

    def corrections(self, outcomes):
        """(output position, x bit, z bit) for every byproduct rule"""
        return [
            (self.outputs.index(rule.qubit), _parity(outcomes, rule.x_steps), _parity(outcomes, rule.z_steps))
            for rule in self.byproducts
        ]

    def to_dict(self):
        return {
            "steps": [step.to_dict() for step in self.steps],
            "outputs": list(self.outputs),
            "byproduct": {
                "x": {str(rule.qubit): list(rule.x_steps) for rule in self.byproducts},
                "z": {str(rule.qubit): list(rule.z_steps) for rule in self.byproducts},
            },
        }


@dataclass
class PatternResult:
    outcomes: list
    state: QuantumState


def _parity(outcomes, deps):
    return sum(outcomes[d] for d in deps) % 2


def parse_pattern(obj):
    """
    Build a pattern from its JSON form

    Accepted forms:
        {"steps": [{"qubit", "plane", "angle", "deps", "z_deps"}, ...],
         "outputs": [...], "byproduct": {"x": {"q": [steps]}, "z": {"q": [steps]}}}
        {"chain": [q0, q1, ...], "angles": [...]}   linear cluster chain

    Raises:
        FormatError: malformed document
        PatternError: structurally invalid pattern
    """
    if not isinstance(obj, dict):
        raise FormatError(f"Pattern must be a JSON object, got {type(obj).__name__}")
    if "chain" in obj:
        try:
            return linear_chain_pattern([int(q) for q in obj["chain"]], [float(a) for a in obj.get("angles", [])])
        except (TypeError, ValueError) as e:
            raise FormatError(f"Malformed chain pattern: {e}") from e
    try:
        steps = tuple(
            MeasurementStep(
                int(entry["qubit"]),
                BasisSpec(entry.get("plane", "XY"), float(entry.get("angle", 0.0))),
                tuple(int(d) for d in entry.get("deps", ())),
                tuple(int(d) for d in entry.get("z_deps", ())),
            )
            for entry in obj.get("steps", [])
        )
        outputs = tuple(int(q) for q in obj["outputs"])
        rules = obj.get("byproduct", {}) or {}
        x_rules = {int(q): tuple(int(d) for d in deps) for q, deps in rules.get("x", {}).items()}
        z_rules = {int(q): tuple(int(d) for d in deps) for q, deps in rules.get("z", {}).items()}
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise FormatError(f"Malformed pattern: {e}") from e
    byproducts = tuple(
        Byproduct(q, x_rules.get(q, ()), z_rules.get(q, ())) for q in sorted(set(x_rules) | set(z_rules))
    )
    return MeasurementPattern(steps, outputs, byproducts)


def load_pattern(source):
    return parse_pattern(load_json_source(source))


def linear_chain_pattern(chain, angles):
    """
    Pattern for a 1D cluster chain realising prod_j H P(-theta_j)

    The first chain qubit holds the input, the last one is the output. Step j's
    angle is flipped by the outcomes of steps j-1, j-3, ...; the final X frame
    collects steps last, last-2, ... and the Z frame last-1, last-3, ...

    Args:
        chain (list): qubit indices along the chain, input first
        angles (list): one XY angle per measured qubit (len(chain) - 1)

    Returns:
        MeasurementPattern: the adaptive pattern
    """
    if not chain:
        raise PatternError("A chain needs at least one qubit")
    if len(angles) != len(chain) - 1:
        raise PatternError(f"Chain of {len(chain)} qubits needs {len(chain) - 1} angles, got {len(angles)}")
    steps = tuple(
        MeasurementStep(chain[j], BasisSpec("XY", angles[j]), tuple(range(j - 1, -1, -2)))
        for j in range(len(chain) - 1)
    )
    last = len(steps) - 1
    byproducts = ()
    if steps:
        byproducts = (Byproduct(chain[-1], tuple(range(last, -1, -2)), tuple(range(last - 1, -1, -2))),)
    return MeasurementPattern(steps, (chain[-1],), byproducts)


def teleportation_pattern(angle=0.0):
    """Measure qubit 0 of a two-qubit cluster; output H P(-angle) psi on qubit 1"""
    return linear_chain_pattern([0, 1], [angle])


def chain_resource(length):
    """
    Resource builder: psi on qubit 0 followed by |+>^(length-1), CZ between neighbours
    """

    def build(psi):
        state = psi.tensor(plus_state(length - 1)) if length > 1 else psi
        for i in range(length - 1):
            state = apply_cz(state, i, i + 1)
        return state

    return build


def teleport_resource(psi):
    return chain_resource(2)(psi)


def _project(tensor, live, qubit, bra, pure):
    """Contract <phi| into the qubit's axis (and its column axis for a density matrix)"""
    axis = live.index(qubit)
    out = np.tensordot(bra, tensor, axes=([0], [axis]))
    if not pure:
        k = len(live)
        out = np.tensordot(bra.conj(), out, axes=([0], [k - 1 + axis]))
    return out


def _weight(tensor, remaining, pure):
    if pure:
        return float(np.vdot(tensor, tensor).real)
    dim = 2 ** remaining
    return float(np.trace(tensor.reshape(dim, dim)).real)


def outcome_probabilities(state, qubit, basis):
    """
    Born-rule probabilities (p0, p1) of measuring one qubit in the given basis
    """
    if not 0 <= qubit < state.n:
        raise PatternError(f"Qubit {qubit} out of range for {state.n} qubits")
    n = state.n
    tensor = state.data.reshape((2,) * (n if state.is_pure else 2 * n))
    live = list(range(n))
    weights = [_weight(_project(tensor, live, qubit, basis.bra(r), state.is_pure), n - 1, state.is_pure) for r in (0, 1)]
    return weights[0], weights[1]


def _finish(tensor, live, pure, pat):
    """Trace out unmeasured non-output qubits and order the rest as pat.outputs"""
    outputs = list(pat.outputs)
    leftover = [q for q in live if q not in outputs]
    order = [live.index(q) for q in outputs] + [live.index(q) for q in leftover]
    k = len(outputs)
    dim_out, dim_left = 2 ** k, 2 ** len(leftover)
    if pure:
        matrix = np.transpose(tensor, order).reshape(dim_out, dim_left)
        if not leftover:
            vector = matrix[:, 0]
            return QuantumState(vector / np.linalg.norm(vector), validate=False)
        rho = matrix @ matrix.conj().T
    else:
        width = len(live)
        full_order = order + [width + i for i in order]
        rho = np.einsum(
            "ajbj->ab", np.transpose(tensor, full_order).reshape(dim_out, dim_left, dim_out, dim_left)
        )
    rho = (rho + rho.conj().T) / 2
    return QuantumState(rho / np.trace(rho).real, validate=False)


def _apply_corrections(state, pat, outcomes):
    for position, x_bit, z_bit in pat.corrections(outcomes):
        if x_bit:
            state = apply_gate(state, "X", [position])
        if z_bit:
            state = apply_gate(state, "Z", [position])
    return state


def execute_pattern(state, pat, rng):
    """
    Run a pattern: adaptive measurements in step order, then the Pauli frame

    Args:
        state (QuantumState): resource state, pure or mixed
        pat (MeasurementPattern): the pattern
        rng (numpy.random.Generator): randomness for every outcome

    Returns:
        PatternResult: recorded outcomes and the corrected state on the output qubits

    Raises:
        PatternError: a qubit index outside the state
    """
    pat.check_fits(state.n)
    n = state.n
    pure = state.is_pure
    if not pat.steps and list(pat.outputs) == list(range(n)):
        return PatternResult([], state)
    tensor = state.data.reshape((2,) * (n if pure else 2 * n))
    live = list(range(n))
    outcomes = []
    for step in pat.steps:
        branches = [_project(tensor, live, step.qubit, step.bra(r, outcomes), pure) for r in (0, 1)]
        weights = [_weight(branch, len(live) - 1, pure) for branch in branches]
        total = weights[0] + weights[1]
        physical = 0 if rng.random() < weights[0] / total else 1
        if weights[physical] / total <= ZERO_BRANCH:
            physical = 1 - physical
        scale = math.sqrt(weights[physical]) if pure else weights[physical]
        tensor = branches[physical] / scale
        live.remove(step.qubit)
        outcomes.append(step.record(physical, outcomes))
    logger.debug(f"Pattern outcomes {outcomes}")
    post = _finish(tensor, live, pure, pat)
    return PatternResult(outcomes, _apply_corrections(post, pat, outcomes))


def _correction_operator(pat, outcomes, width):
    """Dense Z^z X^x frame correction on outputs, identity on leftover qubits"""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1, -1]).astype(complex)
    factors = [np.eye(2, dtype=complex) for _ in range(width)]
    for position, x_bit, z_bit in pat.corrections(outcomes):
        factors[position] = np.linalg.matrix_power(z, z_bit) @ np.linalg.matrix_power(x, x_bit)
    operator = np.ones((1, 1), dtype=complex)
    for factor in factors:
        operator = np.kron(operator, factor)
    return operator


def pattern_kraus_operators(pat, n):
    """
    Kraus operators of a pattern, one per outcome string

    Each K maps the n-qubit input space to outputs (in pat.outputs order)
    followed by the leftover unmeasured qubits in ascending order, with the
    Pauli frame already applied. sum_s K_s^dagger K_s = I.

    Returns:
        list: (outcome tuple, K) pairs
    """
    pat.check_fits(n)
    outputs = list(pat.outputs)
    leftover = pat.leftover_qubits(n)
    width = len(outputs) + len(leftover)
    operators = []
    for physical_bits in itertools.product((0, 1), repeat=len(pat.steps)):
        tensor = np.eye(2 ** n, dtype=complex).reshape((2,) * n + (2 ** n,))
        live = list(range(n))
        outcomes = []
        for step, physical in zip(pat.steps, physical_bits):
            tensor = _project(tensor, live, step.qubit, step.bra(physical, outcomes), True)
            live.remove(step.qubit)
            outcomes.append(step.record(physical, outcomes))
        order = [live.index(q) for q in outputs + leftover]
        matrix = np.transpose(tensor, order + [len(live)]).reshape(2 ** width, 2 ** n)
        operators.append((tuple(outcomes), _correction_operator(pat, outcomes, width) @ matrix))
    return operators


def pattern_acceptance_operator(pat, n, accept_qubit):
    """
    POVM element of "pattern runs, then accept_qubit reads 1"

    Returns:
        ndarray: sum_s K_s^dagger (|1><1| on accept_qubit) K_s on the n input qubits
    """
    if accept_qubit not in pat.outputs:
        raise PatternError(f"Accept qubit {accept_qubit} is not an output of the pattern")
    position = list(pat.outputs).index(accept_qubit)
    width = len(pat.outputs) + len(pat.leftover_qubits(n))
    mask = ((np.arange(2 ** width) >> (width - 1 - position)) & 1).astype(float)
    element = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for _, kraus in pattern_kraus_operators(pat, n):
        element += kraus.conj().T @ (mask[:, None] * kraus)
    return (element + element.conj().T) / 2


def enumerate_branches(state, pat):
    """
    Every outcome string with its probability and corrected output state

    Returns:
        list: (outcomes, probability, QuantumState or None for zero-probability branches)
    """
    pat.check_fits(state.n)
    leftover = pat.leftover_qubits(state.n)
    rho = state.density_matrix()
    branches = []
    for outcomes, kraus in pattern_kraus_operators(pat, state.n):
        image = kraus @ rho @ kraus.conj().T
        probability = float(np.trace(image).real)
        if probability <= ZERO_BRANCH:
            branches.append((outcomes, probability, None))
            continue
        dim_out = 2 ** len(pat.outputs)
        dim_left = 2 ** len(leftover)
        reduced = np.einsum("ajbj->ab", image.reshape(dim_out, dim_left, dim_out, dim_left)) / probability
        branches.append((outcomes, probability, QuantumState((reduced + reduced.conj().T) / 2, validate=False)))
    return branches


def pattern_vs_circuit(pat, resource_builder, U, trials, rng):
    """
    Largest fidelity deficit between the pattern's output and U psi over random inputs

    Args:
        pat (MeasurementPattern): pattern claiming to implement U
        resource_builder (callable): psi -> resource state the pattern runs on
        U (ndarray): target unitary on the input qubits
        trials (int): random inputs to try
        rng (numpy.random.Generator): randomness for inputs and outcomes

    Returns:
        float: max over trials of 1 - |<U psi|out>|^2
    """
    U = np.asarray(U, dtype=complex)
    k = int(round(math.log2(U.shape[0])))
    if len(pat.outputs) != k:
        raise DimensionMismatch(f"Pattern has {len(pat.outputs)} outputs, unitary acts on {k} qubits")
    worst = 0.0
    for _ in range(trials):
        psi = random_pure_state(k, rng)
        result = execute_pattern(resource_builder(psi), pat, rng)
        target = QuantumState(U @ psi.data, validate=False)
        worst = max(worst, 1 - fidelity(target, result.state))
    logger.info(f"Pattern vs circuit over {trials} inputs: max deficit {worst:.3e}")
    return worst
