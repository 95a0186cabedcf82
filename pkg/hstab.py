"""Maximum acceptance over stabilized states, h = max Tr(M rho) with rho on the codespace.

The maximum is lambda_max(Lambda M Lambda). The module also carries the
two-branch verification of this quantity (POVM {M, I - M} with probability q,
stabilizer test otherwise) and the schedule that makes it sound.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

import config
from densesim import (
    ObservableElement,
    QuantumState,
    expectation,
    fidelity,
    lambda_max,
    parse_observable,
    random_povm_element,
    top_eigenvector,
)
from errors import DimensionMismatch, FormatError, InstanceNotApplicable, ParameterError
from graphstate import connect_witness, decode_codespace_state, extended_test_stabilizers, witness_from_vector
from pauli import parse_stabilizer
from stabtest import (
    SweepSummary,
    exact_pass_probability,
    lambda_projector,
    random_codespace_state,
    random_stabilizer_group,
    run_test_round,
)
from utils import load_json_source, spawn_rngs

logger = logging.getLogger(__name__)


@dataclass
class HstabInstance:
    group: object
    M: ObservableElement
    a: float = 2 / 3
    b: float = 1 / 3
    gap_floor: float = 0.0

    def __post_init__(self):
        if not (0 <= self.b < self.a <= 1):
            raise ParameterError(f"Need 0 <= b < a <= 1, got a={self.a}, b={self.b}")
        if self.a - self.b < self.gap_floor:
            raise ParameterError(f"a - b = {self.a - self.b:.6g} is below the floor {self.gap_floor}")
        if self.M.n != self.group.n:
            raise DimensionMismatch(f"M acts on {self.M.n} qubits, the group on {self.group.n}")

    def to_dict(self):
        return {"group": self.group.to_dict(), "a": self.a, "b": self.b, "gap_floor": self.gap_floor}


def codespace_operator(inst):
    """Lambda M Lambda"""
    lam = lambda_projector(inst.group).matrix
    compressed = lam @ inst.M.matrix @ lam
    return (compressed + compressed.conj().T) / 2


def h_stab(inst):
    """
    Exact maximum of Tr(M rho) over states supported on the codespace

    Returns:
        float: lambda_max(Lambda M Lambda)
    """
    value = lambda_max(codespace_operator(inst))
    # Lambda M Lambda is PSD; clip eigen-solver noise below zero
    return max(value, 0.0)


def h_stab_sampling_oracle(inst, samples, rng):
    """
    Best Tr(M sigma) over random pure codespace states; never above h_stab

    Args:
        inst (HstabInstance): instance
        samples (int): random codespace states drawn
        rng (numpy.random.Generator): randomness source

    Returns:
        float: the sampled maximum
    """
    basis = lambda_projector(inst.group).codespace_basis()
    rank = basis.shape[1]
    coefficients = rng.normal(size=(rank, samples)) + 1j * rng.normal(size=(rank, samples))
    vectors = basis @ coefficients
    vectors /= np.linalg.norm(vectors, axis=0)
    values = np.einsum("ij,ij->j", vectors.conj(), inst.M.matrix @ vectors).real
    return float(values.max())


def best_codespace_state(inst):
    """
    A codespace state reaching h_stab

    When h_stab is 0 the top eigenvector of Lambda M Lambda may lie outside the
    codespace, so it is projected back, falling back to a codespace basis vector.

    Returns:
        QuantumState: pure state with Tr(Lambda sigma) = 1
    """
    projector = lambda_projector(inst.group)
    _, vector = top_eigenvector(codespace_operator(inst))
    image = projector.matrix @ vector
    norm = np.linalg.norm(image)
    if norm <= 1e-6:
        image, norm = projector.codespace_basis()[:, 0], 1.0
    return QuantumState(image / norm, validate=False)


@dataclass(frozen=True)
class QmaParams:
    a: float
    b: float
    epsilon: float
    delta: float
    q_star: float
    alpha: float
    beta1: float
    beta2: float
    delta1: float
    delta2: float
    lower_bound: float

    def delta1_at(self, q):
        """alpha - beta1 = q(a - 1 - epsilon) + epsilon"""
        return q * (self.a - 1 - self.epsilon) + self.epsilon

    def delta2_at(self, q):
        """alpha - beta2 = q(a - b - delta)"""
        return q * (self.a - self.b - self.delta)

    @property
    def beta(self):
        return max(self.beta1, self.beta2)

    @property
    def bound_holds(self):
        return self.delta2 >= self.lower_bound - config.settings.tol_exact

    def to_dict(self):
        return {
            "a": self.a,
            "b": self.b,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "q_star": self.q_star,
            "alpha": self.alpha,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "Delta1": self.delta1,
            "Delta2": self.delta2,
            "lower_bound": self.lower_bound,
            "bound_holds": self.bound_holds,
        }


def qma_params(a, b):
    """
    Schedule for verifying h with POVM {M, I - M} and the stabilizer test

    epsilon = (a - b)^2 / 32, delta = 2 sqrt(2 epsilon),
    q* = epsilon / (1 + epsilon - b - delta) equalizes both gaps.

    Raises:
        ParameterError: a <= b, or 1 + epsilon - b - delta <= 0
    """
    if not (0 <= b < a <= 1):
        raise ParameterError(f"Need 0 <= b < a <= 1, got a={a}, b={b}")
    epsilon = (a - b) ** 2 / 32
    delta = 2 * math.sqrt(2 * epsilon)
    denominator = 1 + epsilon - b - delta
    if denominator <= 0:
        raise ParameterError(f"Degenerate schedule: 1 + epsilon - b - delta = {denominator:.6g}")
    q = epsilon / denominator
    if q > 1:
        raise ParameterError(f"q* = {q:.6g} exceeds 1")
    alpha = q * a + 1 - q
    beta1 = 1 - epsilon + q * epsilon
    beta2 = q * (b + delta) + 1 - q
    params = QmaParams(
        a=a,
        b=b,
        epsilon=epsilon,
        delta=delta,
        q_star=q,
        alpha=alpha,
        beta1=beta1,
        beta2=beta2,
        delta1=alpha - beta1,
        delta2=alpha - beta2,
        lower_bound=(a - b) ** 3 / 128,
    )
    if abs(params.delta1 - params.delta2) > config.settings.tol_exact:
        raise ParameterError(f"Gaps differ at q*: {params.delta1} vs {params.delta2}")
    return params


@dataclass
class QmaReport:
    rounds: int
    accepts: int
    exact: float
    povm_value: float
    pass_probability: float

    @property
    def rate(self):
        return self.accepts / self.rounds if self.rounds else None

    @property
    def stderr(self):
        if not self.rounds:
            return None
        return math.sqrt(self.rate * (1 - self.rate) / self.rounds)

    def to_dict(self):
        return {
            "rounds": self.rounds,
            "accepts": self.accepts,
            "rate": self.rate,
            "stderr": self.stderr,
            "exact": self.exact,
            "povm_value": self.povm_value,
            "pass_probability": self.pass_probability,
        }


def qma_verify(inst, prover_state, params, rounds, rng):
    """
    Monte Carlo run of the two-branch verifier against one prover state

    With probability q* measure {M, I - M} and accept on M, otherwise run the
    stabilizer test. The exact expectation is q Tr(M rho) + (1 - q) p_pass.

    Returns:
        QmaReport: sampled rate and exact value
    """
    if prover_state.n != inst.group.n:
        raise DimensionMismatch(f"Prover sent {prover_state.n} qubits, the instance has {inst.group.n}")
    q = params.q_star
    povm_value = expectation(prover_state, inst.M)
    pass_probability = exact_pass_probability(prover_state, inst.group)
    accepts = 0
    for _ in range(rounds):
        if rng.random() < q:
            accepts += rng.random() < povm_value
        else:
            accepts += run_test_round(prover_state, inst.group, rng).passed
    exact = q * povm_value + (1 - q) * pass_probability
    logger.info(f"QMA verifier: {accepts}/{rounds} accepts, exact {exact:.12g}")
    return QmaReport(rounds, int(accepts), exact, povm_value, pass_probability)


@dataclass
class SoundnessReport:
    h_stab: float
    optimum: float
    beta1: float
    beta2: float

    @property
    def bound(self):
        return max(self.beta1, self.beta2)

    @property
    def holds(self):
        return self.optimum <= self.bound + config.settings.tol_valid

    def to_dict(self):
        return {
            "h_stab": self.h_stab,
            "optimum": self.optimum,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "bound": self.bound,
            "holds": self.holds,
        }


def verifier_operator(inst, params):
    """q* M + (1 - q*)(I + Lambda)/2"""
    lam = lambda_projector(inst.group).matrix
    test = (np.eye(lam.shape[0], dtype=complex) + lam) / 2
    return params.q_star * inst.M.matrix + (1 - params.q_star) * test


def qma_soundness_check(inst, params=None):
    """
    Best prover value on a no-instance against max(beta1, beta2)

    Raises:
        InstanceNotApplicable: h > b, so the instance is not a no-instance
    """
    params = params or qma_params(inst.a, inst.b)
    h = h_stab(inst)
    if h > inst.b + config.settings.tol_valid:
        raise InstanceNotApplicable(f"h = {h:.12g} exceeds b = {inst.b}; not a no-instance")
    optimum = lambda_max(verifier_operator(inst, params))
    report = SoundnessReport(h, optimum, params.beta1, params.beta2)
    logger.debug(f"Soundness: optimum {optimum:.12g} vs bound {report.bound:.12g}")
    return report


def random_no_instance(n, rng, a=2 / 3, b=1 / 3, complete=None):
    """
    Random group and POVM element, M rescaled by b/h when h exceeds b
    """
    if complete is None:
        complete = bool(rng.random() < 0.5)
    group = random_stabilizer_group(n, rng, complete=complete)
    M = random_povm_element(n, rng)
    inst = HstabInstance(group, M, a, b)
    h = h_stab(inst)
    if h > b:
        inst = HstabInstance(group, ObservableElement(M.matrix * (b / h), validate=False), a, b)
    return inst


def soundness_sweep(cases, seed, n_max=4):
    """Soundness check over random no-instances with random promise pairs"""
    summary = SweepSummary("qma_soundness")
    for index, rng in enumerate(spawn_rngs(seed, cases)):
        n = int(rng.integers(1, n_max + 1))
        b = float(rng.uniform(0, 0.5))
        a = float(rng.uniform(b + 0.05, 1))
        inst = random_no_instance(n, rng, a, b)
        report = qma_soundness_check(inst)
        summary.record(index, report.optimum, report.bound)
    logger.info(f"Soundness sweep: {summary.violations} violations in {summary.cases} cases")
    return summary


def equalizing_sweep(cases, seed):
    """|Delta1(q*) - Delta2(q*)| over random promise pairs"""
    summary = SweepSummary("gap_equalization")
    for index, rng in enumerate(spawn_rngs(seed, cases)):
        b = float(rng.uniform(0, 0.9))
        a = float(rng.uniform(b + 1e-3, 1))
        params = qma_params(a, b)
        summary.record(index, abs(params.delta1_at(params.q_star) - params.delta2_at(params.q_star)), 0.0)
    return summary


def _round_trip(system, rng, trials):
    """Worst fidelity of connect -> decode and worst decode norm of random codespace states"""
    group = extended_test_stabilizers(system)
    projector = lambda_projector(group)
    worst_fidelity = 1.0
    worst_norm = 1.0
    for _ in range(trials):
        xi = witness_from_vector(rng.normal(size=2 ** system.witness_size) + 1j * rng.normal(size=2 ** system.witness_size))
        decoded, _ = decode_codespace_state(connect_witness(xi, system), system)
        worst_fidelity = min(worst_fidelity, fidelity(xi, witness_from_vector(decoded)))
        inside = random_codespace_state(projector, rng)
        vector, norm = decode_codespace_state(inside, system)
        worst_norm = min(worst_norm, norm)
        rebuilt = connect_witness(witness_from_vector(vector), system)
        worst_fidelity = min(worst_fidelity, fidelity(rebuilt, inside))
    return projector.rank, worst_fidelity, worst_norm


def reduction_witness_demo(instances, rng, trials=20):
    """
    Connected-system instances as h problems

    For each instance and challenge, g is the extended test group and M the
    direct-mode computation operator; h must equal the best witness
    acceptance. The codespace rank must be 2^m and every codespace state must
    decode to a witness and re-connect to itself.

    Args:
        instances (list): ProtocolInstance objects
        rng (numpy.random.Generator): randomness for the round trips
        trials (int): random witnesses and codespace states per instance

    Returns:
        dict: per-instance report with an overall "holds" flag
    """
    from protocol import best_witness_acceptance, computation_operator

    tol = config.settings.tol_valid
    reports = []
    for instance in instances:
        system = instance.system
        group = extended_test_stabilizers(system)
        rows = []
        for y in instance.circuit.challenges():
            M = ObservableElement(computation_operator(instance, y, "direct"), validate=False)
            h = h_stab(HstabInstance(group, M, instance.a, instance.b))
            best, _ = best_witness_acceptance(instance.circuit, y)
            rows.append({"y": instance.circuit.challenge_label(y), "h_stab": h, "best_witness": best, "agree": abs(h - best) <= tol})
        rank, worst_fidelity, worst_norm = _round_trip(system, rng, trials)
        witness_dim = 2 ** system.witness_size
        reports.append({
            "name": instance.name,
            "rank": rank,
            "witness_dim": witness_dim,
            "per_challenge": rows,
            "min_round_trip_fidelity": worst_fidelity,
            "min_decode_norm": worst_norm,
            "holds": rank == witness_dim
            and all(row["agree"] for row in rows)
            and worst_fidelity >= 1 - tol
            and worst_norm >= 1 - tol,
        })
    return {"instances": reports, "holds": all(r["holds"] for r in reports)}


def parse_hstab_instance(obj):
    """
    {"stabilizer": <stabilizer object or file>, "M": <observable spec>, "a", "b", "gap_floor"}
    """
    if not isinstance(obj, dict) or "stabilizer" not in obj or "M" not in obj:
        raise FormatError("h instance needs 'stabilizer' and 'M'")
    group = parse_stabilizer(load_json_source(obj["stabilizer"]))
    M = parse_observable(obj["M"], group.n)
    try:
        a = float(obj.get("a", 2 / 3))
        b = float(obj.get("b", 1 / 3))
        floor = float(obj.get("gap_floor", 0.0))
    except (TypeError, ValueError) as e:
        raise FormatError(f"Malformed a/b in instance: {e}") from e
    return HstabInstance(group, M, a, b, floor)


def load_hstab_instance(source):
    return parse_hstab_instance(load_json_source(source))
