"""The single-qubit-measurement Arthur-Merlin protocol.

Arthur sends a random challenge y, Merlin answers with an (N+m)-qubit state,
and Arthur either runs the computation for y (probability q) or the stabilizer
test on the extended graph generators (probability 1 - q).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

import config
from densesim import (
    ObservableElement,
    apply_diagonal,
    apply_unitary,
    circuit_unitary,
    expectation,
    is_unitary,
    lambda_max,
    measure_pauli,
    parse_state_spec,
    partial_trace,
    plus_state,
    top_eigenvector,
)
from errors import DimensionMismatch, FormatError, MissingPattern, NotUnitary, ParameterError
from graphstate import (
    connect_unitary_diagonal,
    connect_witness,
    extended_test_stabilizers,
    parse_connected_system,
    witness_from_vector,
)
from mbqc import execute_pattern, parse_pattern, pattern_acceptance_operator
from pauli import PauliString, SubsetSelector, dense_matrix, subset_product
from stabtest import lambda_projector, run_test_round
from utils import complex_matrix_from_json, load_json_source

logger = logging.getLogger(__name__)

MODES = ("direct", "mbqc")
# Challenges sampled when 2^s is too large to enumerate
DEFAULT_CHALLENGE_SAMPLES = 1024


@dataclass(frozen=True)
class ProtocolParams:
    x_size: int
    a: float
    b: float
    epsilon: float
    delta: float
    q: float
    alpha: float
    beta: float
    gap: float
    printed_bound: float
    identity_residual: float
    s: int = 0
    m: int = 0
    v: int = 0

    @property
    def gap_dominates_printed_bound(self):
        return self.gap >= self.printed_bound - config.settings.tol_exact

    def beta_for(self, b):
        """q(b + delta) + 1 - q with b replaced by an instance-exact value"""
        return self.q * (b + self.delta) + 1 - self.q

    def to_dict(self):
        return {
            "x_size": self.x_size,
            "a": self.a,
            "b": self.b,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "q": self.q,
            "alpha": self.alpha,
            "beta": self.beta,
            "gap": self.gap,
            "printed_bound": self.printed_bound,
            "gap_dominates_printed_bound": self.gap_dominates_printed_bound,
            "identity_residual": self.identity_residual,
            "s": self.s,
            "m": self.m,
            "v": self.v,
        }


def make_params(x_size, a, b, epsilon=None, s=0, m=0, v=0):
    """
    Parameter schedule of the protocol

    epsilon = 1/(128 |x|^2) unless overridden, delta = 2 sqrt(2 epsilon),
    q = epsilon/(1 + epsilon - delta), alpha = q a + 1 - q,
    beta = q b + q delta + 1 - q, gap = alpha - beta.

    Args:
        x_size (int): instance size |x|
        a (float): completeness of the underlying system
        b (float): soundness of the underlying system
        epsilon (float): test-failure budget override

    Returns:
        ProtocolParams: the full schedule

    Raises:
        ParameterError: a <= b, bounds outside [0, 1], or a degenerate q
    """
    if x_size < 1:
        raise ParameterError(f"Instance size must be positive, got {x_size}")
    if not (0 <= b < a <= 1):
        raise ParameterError(f"Need 0 <= b < a <= 1, got a={a}, b={b}")
    if epsilon is None:
        epsilon = 1 / (128 * x_size ** 2)
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    delta = 2 * math.sqrt(2 * epsilon)
    if delta >= 1 + epsilon:
        raise ParameterError(f"delta = {delta:.6g} >= 1 + epsilon leaves q undefined")
    q = epsilon / (1 + epsilon - delta)
    if q > 1:
        raise ParameterError(f"q = {q:.6g} exceeds 1 for epsilon = {epsilon}")
    residual = q - q * delta + q * epsilon - epsilon
    if abs(residual) > config.settings.tol_exact:
        raise ParameterError(f"Parameter identity off by {residual:.3e}")
    alpha = q * a + 1 - q
    beta = q * b + q * delta + 1 - q
    gap = alpha - beta
    if gap <= 0:
        logger.warning(f"Non-positive gap {gap:.6g}: a - b = {a - b:.6g} does not exceed delta = {delta:.6g}")
    return ProtocolParams(
        x_size=x_size,
        a=a,
        b=b,
        epsilon=epsilon,
        delta=delta,
        q=q,
        alpha=alpha,
        beta=beta,
        gap=gap,
        printed_bound=1 / (12 * 129 * x_size ** 2),
        identity_residual=residual,
        s=s,
        m=m,
        v=v,
    )


@dataclass
class VerifierCircuit:
    """
    Arthur's circuits A_y on the witness register (qubits 0..m-1) followed by
    v ancillas prepared in |+>; acceptance is reading 1 on `output`
    """

    s: int
    m: int
    v: int
    output: int
    unitaries: dict

    def __post_init__(self):
        width = self.m + self.v
        if not 0 <= self.output < width:
            raise ParameterError(f"Output qubit {self.output} outside 0..{width - 1}")
        for y in self.challenges():
            if y not in self.unitaries:
                raise FormatError(f"No circuit given for challenge {self.challenge_label(y)}")
            U = np.asarray(self.unitaries[y], dtype=complex)
            if U.shape != (2 ** width, 2 ** width):
                raise DimensionMismatch(f"Circuit for y={y} has shape {U.shape}, expected {2 ** width}")
            if not is_unitary(U):
                raise NotUnitary(f"Circuit for challenge {self.challenge_label(y)} is not unitary")
            self.unitaries[y] = U

    @classmethod
    def from_gates(cls, s, m, v, output, gates_by_y):
        """Build from {y: [{"gate", "targets", "params"}, ...]}"""
        unitaries = {int(y): circuit_unitary(m + v, gates) for y, gates in gates_by_y.items()}
        return cls(s, m, v, output, unitaries)

    @property
    def width(self):
        return self.m + self.v

    def challenges(self):
        return range(2 ** self.s)

    def challenge_label(self, y):
        return format(y, f"0{self.s}b") if self.s else ""

    def to_dict(self):
        return {"s": self.s, "m": self.m, "v": self.v, "output": self.output}


def _ancilla_isometry(m, v):
    """I_m (x) |+>^v as a 2^(m+v) x 2^m matrix"""
    plus = np.full((2 ** v, 1), 2 ** (-v / 2), dtype=complex)
    return np.kron(np.eye(2 ** m, dtype=complex), plus)


def _output_mask(width, qubit):
    return ((np.arange(2 ** width) >> (width - 1 - qubit)) & 1).astype(float)


def witness_acceptance_operator(circuit, y):
    """
    <+^v| A_y^dagger Pi_1 A_y |+^v> on the m witness qubits

    Returns:
        ndarray: 2^m x 2^m POVM element
    """
    V = circuit.unitaries[y] @ _ancilla_isometry(circuit.m, circuit.v)
    mask = _output_mask(circuit.width, circuit.output)
    element = V.conj().T @ (mask[:, None] * V)
    return (element + element.conj().T) / 2


def best_witness_acceptance(circuit, y):
    """
    Best single-challenge acceptance over all witnesses

    Returns:
        tuple: (lambda_max of the witness acceptance operator, optimal witness vector)
    """
    return top_eigenvector(witness_acceptance_operator(circuit, y))


def _witness_lookup(witnesses):
    if callable(witnesses):
        return witnesses
    return lambda y: witnesses[y]


def qam_acceptance(circuit, witnesses, rng=None, samples=DEFAULT_CHALLENGE_SAMPLES):
    """
    p_acc = (1/2^s) sum_y ||Pi_1 A_y |psi_y> |+>^v||^2

    Challenges are enumerated when s <= max_challenge_bits, otherwise sampled.

    Args:
        circuit (VerifierCircuit): Arthur's circuits
        witnesses (dict | list | callable): y -> m-qubit state
        rng (numpy.random.Generator): needed only when sampling
        samples (int): challenges drawn when sampling

    Returns:
        float: the acceptance probability (an estimate when sampled)
    """
    lookup = _witness_lookup(witnesses)
    if circuit.s <= config.settings.max_challenge_bits:
        ys = list(circuit.challenges())
    else:
        if rng is None:
            raise ParameterError(f"s = {circuit.s} is too large to enumerate and no rng was given")
        logger.warning(f"Sampling {samples} of 2^{circuit.s} challenges")
        ys = [int(y) for y in rng.integers(0, 2 ** circuit.s, size=samples)]
    total = 0.0
    for y in ys:
        witness = lookup(y)
        if witness.n != circuit.m:
            raise DimensionMismatch(f"Witness for y={y} has {witness.n} qubits, circuit expects {circuit.m}")
        total += expectation(witness, witness_acceptance_operator(circuit, y))
    return total / len(ys)


@dataclass
class ProtocolInstance:
    """Connected system, Arthur's circuits, optional patterns and witnesses, and the schedule inputs"""

    system: object
    circuit: VerifierCircuit
    x_size: int = 1
    a: float = 2 / 3
    b: float = 1 / 3
    epsilon: float | None = None
    patterns: dict = field(default_factory=dict)
    mbqc_output: int | None = None
    witnesses: dict = field(default_factory=dict)
    strategy: str = "honest"
    name: str = "instance"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.circuit.m != self.system.witness_size:
            raise DimensionMismatch(
                f"Circuit uses {self.circuit.m} witness qubits, system has {self.system.witness_size}"
            )
        for y, witness in self.witnesses.items():
            if witness.n != self.circuit.m:
                raise DimensionMismatch(f"Witness for y={y} has {witness.n} qubits, expected {self.circuit.m}")

    @property
    def mbqc_width(self):
        return self.system.total_qubits + self.circuit.v

    def params(self):
        return make_params(
            self.x_size, self.a, self.b, self.epsilon, s=self.circuit.s, m=self.circuit.m, v=self.circuit.v
        )

    def witness_for(self, y):
        """Registered witness for y, else the best witness for A_y"""
        if y in self.witnesses:
            return self.witnesses[y]
        key = ("witness", y)
        if key not in self._cache:
            _, vector = best_witness_acceptance(self.circuit, y)
            self._cache[key] = witness_from_vector(vector)
        return self._cache[key]

    def honest_state(self, y):
        return connect_witness(self.witness_for(y), self.system)

    def pattern_for(self, y):
        if y not in self.patterns:
            raise MissingPattern(y)
        return self.patterns[y]

    def pattern_output(self, y):
        pattern = self.pattern_for(y)
        return pattern.outputs[0] if self.mbqc_output is None else self.mbqc_output

    def test_group(self):
        if "group" not in self._cache:
            self._cache["group"] = extended_test_stabilizers(self.system)
        return self._cache["group"]

    def cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def to_dict(self):
        return {
            "name": self.name,
            "system": self.system.to_dict(),
            "circuit": self.circuit.to_dict(),
            "x_size": self.x_size,
            "a": self.a,
            "b": self.b,
            "epsilon": self.epsilon,
            "patterns": sorted(self.patterns),
            "strategy": self.strategy,
        }


def _keyed_by_challenge(obj, what):
    try:
        return {int(y): value for y, value in (obj or {}).items()}
    except (AttributeError, TypeError, ValueError) as e:
        raise FormatError(f"'{what}' must map challenge indices to entries: {e}") from e


def _parse_circuit(obj, m):
    try:
        s = int(obj["s"])
        v = int(obj.get("v", 0))
        output = int(obj.get("output", 0))
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"Circuit needs 's' (and optionally 'v', 'output'): {e}") from e
    if "unitaries" in obj:
        return VerifierCircuit.from_gates(s, m, v, output, _keyed_by_challenge(obj["unitaries"], "unitaries"))
    if "matrices" in obj:
        matrices = {y: complex_matrix_from_json(rows) for y, rows in _keyed_by_challenge(obj["matrices"], "matrices").items()}
        return VerifierCircuit(s, m, v, output, matrices)
    raise FormatError("Circuit needs 'unitaries' (gate lists) or 'matrices'")


def parse_instance(obj):
    """
    Build a ProtocolInstance from its JSON form

    {"name", "system": {...}, "circuit": {"s", "v", "output", "unitaries" | "matrices"},
     "patterns": {y: pattern}, "mbqc_output": int, "witnesses": {y: state spec},
     "params": {"x_size", "a", "b", "epsilon"}, "strategy": str}
    """
    if not isinstance(obj, dict) or "system" not in obj or "circuit" not in obj:
        raise FormatError("Instance file needs 'system' and 'circuit'")
    system = parse_connected_system(obj["system"])
    circuit = _parse_circuit(obj["circuit"], system.witness_size)
    params = obj.get("params", {}) or {}
    try:
        x_size = int(params.get("x_size", 1))
        a = float(params.get("a", 2 / 3))
        b = float(params.get("b", 1 / 3))
        epsilon = None if params.get("epsilon") is None else float(params["epsilon"])
    except (TypeError, ValueError) as e:
        raise FormatError(f"Malformed params block: {e}") from e
    patterns = {y: parse_pattern(p) for y, p in _keyed_by_challenge(obj.get("patterns"), "patterns").items()}
    witnesses = {
        y: parse_state_spec(spec, system.witness_size)
        for y, spec in _keyed_by_challenge(obj.get("witnesses"), "witnesses").items()
    }
    instance = ProtocolInstance(
        system=system,
        circuit=circuit,
        x_size=x_size,
        a=a,
        b=b,
        epsilon=epsilon,
        patterns=patterns,
        mbqc_output=obj.get("mbqc_output"),
        witnesses=witnesses,
        strategy=obj.get("strategy", "honest"),
        name=obj.get("name", "instance"),
    )
    logger.info(f"Loaded instance {instance.name}: N={system.N}, m={system.witness_size}, s={circuit.s}")
    return instance


def load_instance(source):
    return parse_instance(load_json_source(source))


def subset_average(group):
    """S_bar = 2^-n sum_k s_k over all 2^n subset products"""
    count = 2 ** group.size
    total = np.zeros((2 ** group.n, 2 ** group.n), dtype=complex)
    for value in range(count):
        total += dense_matrix(subset_product(group, SubsetSelector.from_int(value, group.size)))
    return total / count


def subset_average_deviation(instance):
    """
    Max entrywise deviation between S_bar and Lambda_ext for the instance's test group
    """
    group = instance.test_group()
    return float(np.abs(subset_average(group) - lambda_projector(group).matrix).max())


def stabilizer_test_operator(instance):
    """E_test = (I + Lambda_ext)/2 on the N+m system qubits"""

    def build():
        lam = lambda_projector(instance.test_group()).matrix
        return (np.eye(lam.shape[0], dtype=complex) + lam) / 2

    return instance.cached("stabilizer_test_operator", build)


def computation_operator(instance, y, mode="direct"):
    """
    POVM element of the computation branch on the N+m system qubits

    direct: D^dagger (I_V1 (x) E_y) D with D the connecting CZs and E_y the
    witness acceptance operator. mbqc: the pattern's exact acceptance element
    with Arthur's |+>^v ancillas appended after the system qubits.

    Raises:
        MissingPattern: mbqc mode without a pattern for y
    """
    if mode not in MODES:
        raise ParameterError(f"Unknown mode {mode!r}, expected one of {MODES}")

    def build_direct():
        witness_element = witness_acceptance_operator(instance.circuit, y)
        full = np.kron(np.eye(2 ** instance.system.N, dtype=complex), witness_element)
        d = connect_unitary_diagonal(instance.system)
        return d.conj()[:, None] * full * d[None, :]

    def build_mbqc():
        pattern = instance.pattern_for(y)
        element = pattern_acceptance_operator(pattern, instance.mbqc_width, instance.pattern_output(y))
        iso = _ancilla_isometry(instance.system.total_qubits, instance.circuit.v)
        return iso.conj().T @ element @ iso

    builder = build_direct if mode == "direct" else build_mbqc
    return instance.cached(("computation", mode, y), builder)


def acceptance_operator(params, instance, y, mode="direct"):
    """
    E_y = q E_acc,y + (1 - q) E_test, acceptance being Tr(E_y rho) for Merlin's rho

    Returns:
        ObservableElement: the per-challenge acceptance element
    """
    matrix = params.q * computation_operator(instance, y, mode) + (1 - params.q) * stabilizer_test_operator(instance)
    return ObservableElement((matrix + matrix.conj().T) / 2, validate=False)


def optimal_cheat(params, instance, y, mode="direct"):
    """lambda_max(E_y): the best acceptance any Merlin state achieves for challenge y"""
    return lambda_max(acceptance_operator(params, instance, y, mode).matrix)


@dataclass
class ChallengeRecord:
    y: int
    label: str
    p_computation: float
    p_test: float
    p_accept: float
    optimal: float
    b_y: float
    beta_y: float
    in_y1: bool

    def to_dict(self):
        return {
            "y": self.label,
            "p_computation": self.p_computation,
            "p_test": self.p_test,
            "p_accept": self.p_accept,
            "optimal": self.optimal,
            "b_y": self.b_y,
            "beta_y": self.beta_y,
            "in_y1": self.in_y1,
        }


@dataclass
class AcceptanceBreakdown:
    records: list
    p_acc: float
    optimal_p_acc: float
    y1: list
    y2: list
    chain_bound: float
    b_exact: float
    beta_exact: float
    mode: str = "direct"

    @property
    def dominated(self):
        """Every per-challenge acceptance at or below the spectral optimum"""
        tol = config.settings.tol_valid
        return all(r.p_accept <= r.optimal + tol for r in self.records)

    @property
    def optimum_within_beta(self):
        tol = config.settings.tol_valid
        return all(r.optimal <= r.beta_y + tol for r in self.records)

    def to_dict(self):
        return {
            "mode": self.mode,
            "per_challenge": [r.to_dict() for r in self.records],
            "p_acc": self.p_acc,
            "optimal_p_acc": self.optimal_p_acc,
            "y1": self.y1,
            "y2": self.y2,
            "chain_bound": self.chain_bound,
            "b_exact": self.b_exact,
            "beta_exact": self.beta_exact,
            "dominated": self.dominated,
            "optimum_within_beta": self.optimum_within_beta,
        }


def soundness_breakdown(params, instance, merlin, mode="direct"):
    """
    Exact per-challenge acceptance of a Merlin strategy with the Y1/Y2 split

    Y1 holds the challenges whose test pass probability is at least 1 - epsilon.
    The chain bound averages q(b_y + delta) + 1 - q over Y1 and
    q + (1 - q)(1 - epsilon) over Y2.

    Args:
        params (ProtocolParams): schedule
        instance (ProtocolInstance): instance
        merlin (BaseMerlinStrategy): strategy under test
        mode (str): 'direct' or 'mbqc'

    Returns:
        AcceptanceBreakdown: records, aggregates and bounds
    """
    q = params.q
    threshold = 1 - params.epsilon - config.settings.tol_valid
    records = []
    for y in instance.circuit.challenges():
        rho = merlin.state_for(y)
        p_comp = expectation(rho, computation_operator(instance, y, mode))
        p_test = expectation(rho, stabilizer_test_operator(instance))
        b_y, _ = best_witness_acceptance(instance.circuit, y)
        records.append(
            ChallengeRecord(
                y=y,
                label=instance.circuit.challenge_label(y),
                p_computation=p_comp,
                p_test=p_test,
                p_accept=q * p_comp + (1 - q) * p_test,
                optimal=optimal_cheat(params, instance, y, mode),
                b_y=b_y,
                beta_y=params.beta_for(b_y),
                in_y1=p_test >= threshold,
            )
        )
    count = len(records)
    chain = sum(r.beta_y if r.in_y1 else q + (1 - q) * (1 - params.epsilon) for r in records) / count
    b_exact = sum(r.b_y for r in records) / count
    breakdown = AcceptanceBreakdown(
        records=records,
        p_acc=sum(r.p_accept for r in records) / count,
        optimal_p_acc=sum(r.optimal for r in records) / count,
        y1=[r.label for r in records if r.in_y1],
        y2=[r.label for r in records if not r.in_y1],
        chain_bound=chain,
        b_exact=b_exact,
        beta_exact=params.beta_for(b_exact),
        mode=mode,
    )
    logger.info(f"Soundness breakdown ({mode}): p_acc {breakdown.p_acc:.12g}, optimum {breakdown.optimal_p_acc:.12g}")
    return breakdown


def honest_acceptance(params, instance):
    """(1/2^s) sum_y [q ||Pi_1 A_y psi_y (x) |+>^v||^2 + (1 - q)] for the instance's honest witnesses"""
    return params.q * qam_acceptance(instance.circuit, instance.witness_for) + 1 - params.q


@dataclass
class Transcript:
    y: str
    branch: str
    detail: dict
    accept: bool

    def to_dict(self):
        return {"y": self.y, "branch": self.branch, "detail": self.detail, "accept": self.accept}


def _read_output(state, position, rng):
    """Z measurement of one qubit; returns the bit read (1 means accept)"""
    outcome, _ = measure_pauli(state, PauliString.single(state.n, position, "Z"), rng)
    return 0 if outcome == 1 else 1


def _direct_branch(instance, y, rho, rng):
    """Undo the connecting CZs, keep the witness register, run A_y, read the output"""
    circuit = instance.circuit
    unconnected = apply_diagonal(rho, connect_unitary_diagonal(instance.system))
    witness = partial_trace(unconnected, instance.system.witness_qubits())
    register = witness.tensor(plus_state(circuit.v)) if circuit.v else witness
    final = apply_unitary(register, circuit.unitaries[y], range(circuit.width))
    bit = _read_output(final, circuit.output, rng)
    return {"output": bit}, bit == 1


def _mbqc_branch(instance, y, rho, rng):
    pattern = instance.pattern_for(y)
    full = rho.tensor(plus_state(instance.circuit.v)) if instance.circuit.v else rho
    result = execute_pattern(full, pattern, rng)
    position = list(pattern.outputs).index(instance.pattern_output(y))
    bit = _read_output(result.state, position, rng)
    return {"outcomes": result.outcomes, "output": bit}, bit == 1


def run_protocol_round(params, instance, merlin, mode, rng):
    """
    One full interaction: challenge, Merlin's state, branch, verdict

    Args:
        params (ProtocolParams): schedule (q decides the branch)
        instance (ProtocolInstance): system, circuit and patterns
        merlin (BaseMerlinStrategy): Merlin's rule
        mode (str): 'direct' runs A_y in the circuit model, 'mbqc' executes the pattern
        rng (numpy.random.Generator): all randomness

    Returns:
        Transcript: challenge, branch tag, branch detail and acceptance
    """
    if mode not in MODES:
        raise ParameterError(f"Unknown mode {mode!r}, expected one of {MODES}")
    circuit = instance.circuit
    y = int(rng.integers(0, 2 ** circuit.s))
    rho = merlin.state_for(y)
    if rho.n != instance.system.total_qubits:
        raise DimensionMismatch(f"Merlin sent {rho.n} qubits, the system has {instance.system.total_qubits}")
    if rng.random() < params.q:
        branch_run = _direct_branch if mode == "direct" else _mbqc_branch
        detail, accept = branch_run(instance, y, rho, rng)
        return Transcript(circuit.challenge_label(y), "computation", detail, accept)
    result = run_test_round(rho, instance.test_group(), rng)
    detail = {"k": result.selector.to_string(), "outcome": result.outcome}
    return Transcript(circuit.challenge_label(y), "test", detail, result.passed)


@dataclass
class SimulationReport:
    rounds: int
    accepts: int
    computation_rounds: int
    test_rounds: int
    test_passes: int

    @property
    def rate(self):
        return self.accepts / self.rounds if self.rounds else None

    @property
    def stderr(self):
        if not self.rounds:
            return None
        rate = self.rate
        return math.sqrt(rate * (1 - rate) / self.rounds)

    @property
    def test_pass_rate(self):
        return self.test_passes / self.test_rounds if self.test_rounds else None

    def to_dict(self):
        return {
            "rounds": self.rounds,
            "accepts": self.accepts,
            "rate": self.rate,
            "stderr": self.stderr,
            "computation_rounds": self.computation_rounds,
            "test_rounds": self.test_rounds,
            "test_pass_rate": self.test_pass_rate,
        }


def simulate_protocol(params, instance, merlin, mode, rounds, rng):
    """Monte Carlo acceptance over independent rounds"""
    report = SimulationReport(rounds, 0, 0, 0, 0)
    for _ in range(rounds):
        transcript = run_protocol_round(params, instance, merlin, mode, rng)
        report.accepts += transcript.accept
        if transcript.branch == "computation":
            report.computation_rounds += 1
        else:
            report.test_rounds += 1
            report.test_passes += transcript.accept
    logger.info(f"Simulated {rounds} rounds ({mode}): rate {report.rate}")
    return report


def toy_instance_document(kind="yes", epsilon=None):
    """
    JSON form of the shipped toy instances on the edge graph with one witness qubit

    yes: A_0 = I and A_1 = H S^dagger H on the witness, both realisable by the
    chain 2-0-1 with angles (0, 0) and (0, pi/2); best witnesses accept with probability 1.
    no: one |+> ancilla, A_y = CRY(phi_y) after H on the ancilla, so the best
    witness accepts with probability sin^2(phi_y/2).
    """
    system = {"graph": {"n": 2, "edges": [[0, 1]]}, "m": 1, "connect": [[0, 0]]}
    params = {"x_size": 1, "a": 2 / 3, "b": 1 / 3, "epsilon": epsilon}
    if kind == "yes":
        return {
            "name": "toy-yes",
            "system": system,
            "circuit": {
                "s": 1,
                "v": 0,
                "output": 0,
                "unitaries": {
                    "0": [],
                    "1": [{"gate": "H", "targets": [0]}, {"gate": "SDG", "targets": [0]}, {"gate": "H", "targets": [0]}],
                },
            },
            "patterns": {
                "0": {"chain": [2, 0, 1], "angles": [0.0, 0.0]},
                "1": {"chain": [2, 0, 1], "angles": [0.0, math.pi / 2]},
            },
            "mbqc_output": 1,
            "params": params,
            "strategy": "honest",
        }
    if kind == "no":
        return {
            "name": "toy-no",
            "system": system,
            "circuit": {
                "s": 1,
                "v": 1,
                "output": 1,
                "unitaries": {
                    "0": [{"gate": "H", "targets": [1]}, {"gate": "CRY", "targets": [0, 1], "params": [math.pi / 3]}],
                    "1": [{"gate": "H", "targets": [1]}, {"gate": "CRY", "targets": [0, 1], "params": [math.pi / 4]}],
                },
            },
            "params": params,
            "strategy": "optimal",
        }
    raise ParameterError(f"Unknown toy instance kind {kind!r}")


def toy_instance(kind="yes", epsilon=None):
    return parse_instance(toy_instance_document(kind, epsilon))
