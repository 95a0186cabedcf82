"""The stabilizer test and the inequalities that certify it.

Pick k uniformly from {0,1}^n, measure s_k = prod_j g_j^(k_j), pass on +1.
p_pass = (1 + Tr(Lambda rho)) / 2 with Lambda = prod_j (I + g_j)/2.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

import config
from densesim import (
    QuantumState,
    expectation,
    is_hermitian,
    measure_pauli,
    mixture,
    pauli_expectation,
    random_density_matrix,
    random_povm_element,
    trace_norm_distance,
)
from errors import DimensionMismatch, HypothesisViolated, ValidationError, ZeroOverlap
from pauli import SubsetSelector, dense_matrix, subset_product, validate_stabilizer
from utils import spawn_rngs

logger = logging.getLogger(__name__)

# Tr(Lambda rho) below this is treated as orthogonal to the codespace
ZERO_OVERLAP = 1e-12
# Largest generator count for which the 2^n subset products are enumerated
MAX_ENUMERATED_GENERATORS = 20


@dataclass(frozen=True)
class LambdaProjector:
    group: object
    matrix: np.ndarray

    @property
    def rank(self):
        return int(round(np.trace(self.matrix).real))

    def overlap(self, rho):
        """Tr(Lambda rho)"""
        return expectation(rho, self.matrix)

    def codespace_basis(self):
        """Orthonormal columns spanning the +1 eigenspace"""
        values, vectors = np.linalg.eigh(self.matrix)
        return vectors[:, values > 0.5]


@dataclass
class TestReport:
    rounds: int
    passes: int
    sampled_pass_rate: float | None
    stderr: float | None
    exact_pass_probability: float | None = None
    epsilon_budget: float | None = None

    def to_dict(self):
        return {
            "rounds": self.rounds,
            "passes": self.passes,
            "sampled_rate": self.sampled_pass_rate,
            "stderr": self.stderr,
            "exact": self.exact_pass_probability,
            "epsilon_budget": self.epsilon_budget,
        }


class RoundResult(NamedTuple):
    selector: SubsetSelector
    outcome: int
    passed: bool


class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


@dataclass
class BoundsReport:
    lower: float
    actual: float
    upper: float
    sigma_value: float
    epsilon: float
    holds: bool

    def to_dict(self):
        return {
            "lower": self.lower,
            "actual": self.actual,
            "upper": self.upper,
            "sigma_value": self.sigma_value,
            "epsilon": self.epsilon,
            "holds": self.holds,
        }


@dataclass
class SweepSummary:
    name: str
    cases: int = 0
    violations: int = 0
    max_excess: float = -math.inf
    skipped: int = 0
    failures: list = field(default_factory=list)

    def record(self, index, lhs, rhs):
        """Count a case; lhs <= rhs + tol is required"""
        self.cases += 1
        excess = lhs - rhs
        self.max_excess = max(self.max_excess, excess)
        if excess > config.settings.tol_valid:
            self.violations += 1
            self.failures.append(index)

    def to_dict(self):
        return {
            "name": self.name,
            "cases": self.cases,
            "violations": self.violations,
            "max_excess": None if self.cases == 0 else self.max_excess,
            "skipped": self.skipped,
            "failures": self.failures[:20],
        }


def _check_dims(rho, g):
    if rho.n != g.n:
        raise DimensionMismatch(f"{rho.n}-qubit state tested against a stabilizer on {g.n} qubits")


def run_test_round(rho, g, rng):
    """
    One round of the stabilizer test

    Args:
        rho (QuantumState): tested state
        g (StabilizerGroup): generators
        rng (numpy.random.Generator): randomness for k and the measurement

    Returns:
        RoundResult: the selector k, the measured outcome, and whether the round passed
    """
    _check_dims(rho, g)
    k = SubsetSelector(tuple(rng.integers(0, 2, size=g.size)))
    s_k = subset_product(g, k)
    if s_k.is_identity:
        # s_k = +I: outcome +1 without touching the state
        return RoundResult(k, 1, True)
    outcome, _ = measure_pauli(rho, s_k, rng)
    return RoundResult(k, outcome, outcome == 1)


def lambda_projector(g):
    """
    Lambda = prod_j (I + g_j)/2, a rank-2^(N-n) orthogonal projector

    Raises:
        DenseCapExceeded: N above the mixed-state cap
    """
    dim = 2 ** g.n
    identity = np.eye(dim, dtype=complex)
    matrix = identity
    for generator in g.generators:
        matrix = matrix @ ((identity + dense_matrix(generator)) / 2)
    return LambdaProjector(g, matrix)


def exact_pass_probability(rho, g, method="auto"):
    """
    Exact p_pass, by enumerating the 2^n subset products or via (1 + Tr(Lambda rho))/2

    Args:
        rho (QuantumState): tested state
        g (StabilizerGroup): generators
        method (str): "enumerate", "lambda" or "auto" (enumerate up to 10 generators, or whenever Lambda would exceed the mixed cap)

    Returns:
        float: the pass probability
    """
    _check_dims(rho, g)
    if method == "auto":
        # Lambda is dense in N; pure states above the mixed cap enumerate instead
        dense_ok = g.n <= config.settings.mixed_cap
        method = "enumerate" if g.size <= 10 or not dense_ok else "lambda"
    if method == "lambda":
        return (1 + lambda_projector(g).overlap(rho)) / 2
    if method != "enumerate":
        raise ValidationError(f"Unknown pass-probability method: {method}")
    if g.size > MAX_ENUMERATED_GENERATORS:
        raise ValidationError(f"Refusing to enumerate 2^{g.size} subset products")
    total = 0.0
    count = 2 ** g.size
    for value in range(count):
        s_k = subset_product(g, SubsetSelector.from_int(value, g.size))
        total += (1 + pauli_expectation(rho, s_k)) / 2
    return total / count


def run_stabilizer_test(rho, g, rounds, rng, with_exact=True):
    """
    Repeat the test `rounds` times and summarize

    Returns:
        TestReport: sampled rate with its standard error, and the exact value when requested
    """
    passes = sum(run_test_round(rho, g, rng).passed for _ in range(rounds))
    rate = passes / rounds if rounds else None
    stderr = math.sqrt(rate * (1 - rate) / rounds) if rounds else None
    exact = exact_pass_probability(rho, g) if with_exact else None
    logger.info(f"Stabilizer test: {passes}/{rounds} passes, exact {exact}")
    return TestReport(
        rounds=rounds,
        passes=passes,
        sampled_pass_rate=rate,
        stderr=stderr,
        exact_pass_probability=exact,
        epsilon_budget=None if exact is None else max(0.0, 1 - exact),
    )


def nearest_stabilized_state(rho, g, projector=None):
    """
    sigma = Lambda rho Lambda / Tr(Lambda rho)

    Raises:
        ZeroOverlap: Tr(Lambda rho) <= 1e-12
    """
    _check_dims(rho, g)
    projector = projector or lambda_projector(g)
    overlap = projector.overlap(rho)
    if overlap <= ZERO_OVERLAP:
        raise ZeroOverlap(overlap)
    lam = projector.matrix
    if rho.is_pure:
        image = lam @ rho.data
        return QuantumState(image / np.sqrt(overlap), validate=False)
    sigma = lam @ rho.data @ lam / overlap
    return QuantumState((sigma + sigma.conj().T) / 2, validate=False)


def is_stabilized(state, g, tol=None):
    """g_j sigma g_j = sigma for every generator"""
    tol = config.settings.tol_valid if tol is None else tol
    sigma = state.density_matrix()
    for generator in g.generators:
        p = dense_matrix(generator)
        if not np.allclose(p @ sigma @ p.conj().T, sigma, atol=tol, rtol=0):
            return False
    return True


def gentle_measurement_check(rho, g, projector=None):
    """
    ||rho - Lambda rho Lambda||_1 <= 2 sqrt(1 - Tr(Lambda rho))

    Returns:
        InequalityCheck: (lhs, rhs, holds) with tolerance tol_valid
    """
    _check_dims(rho, g)
    projector = projector or lambda_projector(g)
    lam = projector.matrix
    squeezed = lam @ rho.density_matrix() @ lam
    lhs = trace_norm_distance(rho, (squeezed + squeezed.conj().T) / 2)
    rhs = 2 * math.sqrt(max(0.0, 1 - projector.overlap(rho)))
    return InequalityCheck(lhs, rhs, lhs <= rhs + config.settings.tol_valid)


def closeness_bounds(rho, g, M, epsilon, projector=None):
    """
    Tr(M sigma)(1 - 2 eps) - 2 sqrt(2 eps) <= Tr(M rho) <= Tr(M sigma) + 2 sqrt(2 eps)

    Args:
        rho (QuantumState): state with p_pass >= 1 - epsilon
        g (StabilizerGroup): generators
        M (ObservableElement): POVM element
        epsilon (float): failure budget

    Returns:
        BoundsReport: lower, actual, upper and whether the sandwich holds

    Raises:
        HypothesisViolated: p_pass < 1 - epsilon
    """
    _check_dims(rho, g)
    projector = projector or lambda_projector(g)
    p_pass = (1 + projector.overlap(rho)) / 2
    tol = config.settings.tol_valid
    if p_pass < 1 - epsilon - tol:
        raise HypothesisViolated(p_pass, epsilon)
    sigma = nearest_stabilized_state(rho, g, projector)
    sigma_value = expectation(sigma, M)
    actual = expectation(rho, M)
    slack = 2 * math.sqrt(2 * max(epsilon, 0.0))
    lower = sigma_value * (1 - 2 * epsilon) - slack
    upper = sigma_value + slack
    holds = lower <= actual + tol and actual <= upper + tol
    return BoundsReport(lower, actual, upper, sigma_value, epsilon, holds)


def pass_probability_identity_check(rho, g, projector=None):
    """
    p_pass (enumerated) against (1 + Tr(Lambda rho))/2

    Returns:
        InequalityCheck: lhs = enumerated p_pass, rhs = Lambda identity, holds = equal within tol_valid
    """
    _check_dims(rho, g)
    projector = projector or lambda_projector(g)
    lhs = exact_pass_probability(rho, g, method="enumerate")
    rhs = (1 + projector.overlap(rho)) / 2
    return InequalityCheck(lhs, rhs, abs(lhs - rhs) <= config.settings.tol_valid)


def random_stabilizer_group(n, rng, complete=True):
    """
    Random graph-state stabilizer with random signs; optionally a random nonempty subset of it
    """
    from graphstate import graph_stabilizers, random_graph

    gens = list(graph_stabilizers(random_graph(n, rng)).generators)
    gens = [gen.negated() if rng.random() < 0.5 else gen for gen in gens]
    if not complete:
        size = int(rng.integers(1, n + 1))
        chosen = sorted(rng.choice(n, size=size, replace=False))
        gens = [gens[i] for i in chosen]
    return validate_stabilizer(gens)


def random_codespace_state(projector, rng):
    """Haar-random pure state inside the codespace of a projector"""
    basis = projector.codespace_basis()
    coefficients = rng.normal(size=basis.shape[1]) + 1j * rng.normal(size=basis.shape[1])
    vector = basis @ coefficients
    return QuantumState(vector / np.linalg.norm(vector), validate=False)


def _random_case(rng, n_max):
    n = int(rng.integers(1, n_max + 1))
    group = random_stabilizer_group(n, rng, complete=bool(rng.random() < 0.5))
    return n, group


def identity_sweep(cases, seed, n_max=5):
    """Enumerated p_pass versus the Lambda identity on random states and groups"""
    summary = SweepSummary("pass_probability_identity")
    for index, rng in enumerate(spawn_rngs(seed, cases)):
        n, group = _random_case(rng, n_max)
        rho = random_density_matrix(n, rng)
        check = pass_probability_identity_check(rho, group)
        summary.record(index, abs(check.lhs - check.rhs), 0.0)
    logger.info(f"Identity sweep: {summary.violations} violations in {summary.cases} cases")
    return summary


def gentle_sweep(cases, seed, n_max=5):
    """Gentle-measurement inequality on random mixed states and groups"""
    summary = SweepSummary("gentle_measurement")
    for index, rng in enumerate(spawn_rngs(seed, cases)):
        n, group = _random_case(rng, n_max)
        rank = int(rng.integers(1, 2 ** n + 1))
        rho = random_density_matrix(n, rng, rank=rank)
        check = gentle_measurement_check(rho, group)
        summary.record(index, check.lhs, check.rhs)
    logger.info(f"Gentle sweep: {summary.violations} violations in {summary.cases} cases")
    return summary


def closeness_sweep(cases, seed, n_max=5):
    """
    Closeness sandwich on states built to pass the test with probability >= 1 - eps

    Each state mixes a random codespace state with a small weight of a random
    mixed state; eps is set to 1 - p_pass so the hypothesis holds exactly.
    """
    summary = SweepSummary("closeness_sandwich")
    for index, rng in enumerate(spawn_rngs(seed, cases)):
        n, group = _random_case(rng, n_max)
        projector = lambda_projector(group)
        inside = random_codespace_state(projector, rng)
        noise = random_density_matrix(n, rng)
        mu = float(rng.uniform(0, 0.2))
        rho = mixture([inside, noise], [1 - mu, mu])
        M = random_povm_element(n, rng)
        epsilon = max(0.0, 1 - (1 + projector.overlap(rho)) / 2)
        report = closeness_bounds(rho, group, M, epsilon, projector)
        # Both sides of the sandwich as a single excess
        excess = max(report.lower - report.actual, report.actual - report.upper)
        summary.record(index, excess, 0.0)
    logger.info(f"Closeness sweep: {summary.violations} violations in {summary.cases} cases")
    return summary


def assert_projector(projector, tol=None):
    """Lambda^dagger = Lambda and Lambda^2 = Lambda within tolerance"""
    tol = config.settings.tol_valid if tol is None else tol
    lam = projector.matrix
    return is_hermitian(lam, tol) and np.allclose(lam @ lam, lam, atol=tol, rtol=0)
