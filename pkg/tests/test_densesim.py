"""Dense simulator: states, gates, measurement and linear algebra helpers."""
import numpy as np
import pytest

import config
from densesim import (
    GATES,
    ObservableElement,
    QuantumState,
    apply_cz,
    apply_gate,
    apply_pauli,
    basis_state,
    circuit_unitary,
    expectation,
    fidelity,
    gate_matrix,
    lambda_max,
    maximally_mixed,
    measure_pauli,
    mixture,
    parse_observable,
    parse_state_spec,
    partial_trace,
    pauli_expectation,
    plus_state,
    product_state,
    random_density_matrix,
    random_povm_element,
    random_pure_state,
    top_eigenvector,
    trace_norm_distance,
)
from errors import DenseCapExceeded, DimensionMismatch, FormatError, InvalidState, NotUnitary
from pauli import PauliString, dense_matrix


class TestQuantumState:
    def test_rejects_unnormalized_vector(self):
        with pytest.raises(InvalidState):
            QuantumState([1, 1])

    def test_rejects_non_power_of_two(self):
        with pytest.raises(DimensionMismatch):
            QuantumState([1, 0, 0])

    def test_rejects_negative_density_matrix(self):
        with pytest.raises(InvalidState):
            QuantumState(np.diag([1.5, -0.5]))

    def test_data_is_read_only(self):
        state = basis_state("01")
        with pytest.raises(ValueError):
            state.data[0] = 1

    def test_cap(self):
        config.configure(pure_cap=2)
        with pytest.raises(DenseCapExceeded) as info:
            basis_state("000")
        assert info.value.cap == 2

    def test_tensor_order(self):
        state = basis_state("1").tensor(basis_state("0"))
        np.testing.assert_allclose(state.data, [0, 0, 1, 0])

    def test_purity(self):
        assert maximally_mixed(2).purity() == pytest.approx(0.25)
        assert plus_state(2).purity() == 1.0


class TestGates:
    def test_hadamard_on_zero(self):
        out = apply_gate(basis_state("0"), "H", [0])
        np.testing.assert_allclose(out.data, plus_state(1).data, atol=1e-12)

    def test_circuit_unitary_cx(self):
        U = circuit_unitary(2, [{"gate": "CX", "targets": [0, 1]}])
        np.testing.assert_allclose(U, GATES["CX"], atol=1e-15)

    def test_circuit_unitary_reversed_targets(self):
        U = circuit_unitary(2, [{"gate": "CNOT", "targets": [1, 0]}])
        expected = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])
        np.testing.assert_allclose(U, expected, atol=1e-15)

    def test_gate_order(self):
        U = circuit_unitary(1, [{"gate": "H", "targets": [0]}, {"gate": "S", "targets": [0]}])
        np.testing.assert_allclose(U, GATES["S"] @ GATES["H"], atol=1e-15)

    def test_parametrized(self):
        np.testing.assert_allclose(gate_matrix("P", [np.pi / 2]), GATES["S"], atol=1e-15)
        with pytest.raises(FormatError):
            gate_matrix("RY")

    def test_unknown_gate(self):
        with pytest.raises(FormatError):
            gate_matrix("FOO")

    def test_not_unitary(self):
        from densesim import apply_unitary

        with pytest.raises(NotUnitary):
            apply_unitary(basis_state("0"), np.diag([1, 2]), [0])

    def test_mixed_matches_pure(self, rng):
        psi = random_pure_state(2, rng)
        pure = apply_gate(psi, "CRY", [1, 0], [0.7])
        mixed = apply_gate(psi.as_mixed(), "CRY", [1, 0], [0.7])
        np.testing.assert_allclose(mixed.data, pure.density_matrix(), atol=1e-12)

    def test_cz_is_symmetric(self, rng):
        psi = random_pure_state(3, rng)
        np.testing.assert_allclose(apply_cz(psi, 0, 2).data, apply_cz(psi, 2, 0).data)


class TestPauliAction:
    def test_apply_pauli_matches_dense(self, rng):
        p = PauliString.from_label("-XYZ")
        rho = random_density_matrix(3, rng)
        P = dense_matrix(p)
        np.testing.assert_allclose(apply_pauli(rho, p).data, P @ rho.data @ P.conj().T, atol=1e-12)

    def test_expectation_matches_dense(self, rng):
        p = PauliString.from_label("YZ")
        psi = random_pure_state(2, rng)
        assert pauli_expectation(psi, p) == pytest.approx(expectation(psi, dense_matrix(p)), abs=1e-12)

    def test_graph_state_eigenvalue(self):
        state = apply_cz(plus_state(2), 0, 1)
        assert pauli_expectation(state, PauliString.from_label("XZ")) == pytest.approx(1.0)

    def test_measure_eigenstate(self, rng):
        for _ in range(20):
            outcome, post = measure_pauli(basis_state("0"), PauliString.from_label("Z"), rng)
            assert outcome == 1
            np.testing.assert_allclose(post.data, [1, 0])

    def test_measure_projects_mixed(self, rng):
        outcome, post = measure_pauli(maximally_mixed(1), PauliString.from_label("X"), rng)
        expected = plus_state(1) if outcome == 1 else product_state("-")
        assert fidelity(expected, post) == pytest.approx(1.0)
        assert np.trace(post.data).real == pytest.approx(1.0)

    @pytest.mark.slow
    @pytest.mark.parametrize("label, state", [("XZ", "00"), ("-YX", "random")])
    def test_measurement_frequencies(self, label, state, rng):
        p = PauliString.from_label(label)
        rho = basis_state(state) if state != "random" else random_density_matrix(2, rng)
        expected = expectation(rho, (np.eye(4) + dense_matrix(p)) / 2)
        if state == "00":
            assert expected == pytest.approx(0.5)
        trials = 100_000
        plus = sum(measure_pauli(rho, p, rng)[0] == 1 for _ in range(trials))
        sigma = np.sqrt(expected * (1 - expected) / trials)
        assert abs(plus / trials - expected) <= 4 * sigma


class TestMeasures:
    def test_trace_norm_zero_and_plus(self):
        assert trace_norm_distance(basis_state("0"), plus_state(1)) == pytest.approx(np.sqrt(2))

    def test_trace_norm_is_a_metric(self, rng):
        for n in (1, 2, 3):
            rho, tau, omega = (random_density_matrix(n, rng) for _ in range(3))
            assert trace_norm_distance(rho, rho) == pytest.approx(0.0, abs=1e-10)
            assert trace_norm_distance(rho, tau) == pytest.approx(trace_norm_distance(tau, rho), abs=1e-12)
            assert trace_norm_distance(rho, omega) <= (
                trace_norm_distance(rho, tau) + trace_norm_distance(tau, omega) + 1e-12
            )
            assert 0.0 <= trace_norm_distance(rho, tau) <= 2.0 + 1e-12

    def test_trace_norm_orthogonal(self):
        assert trace_norm_distance(basis_state("0"), basis_state("1")) == pytest.approx(2.0)

    def test_trace_norm_unnormalized_argument(self):
        rho = maximally_mixed(1)
        assert trace_norm_distance(rho, np.zeros((2, 2))) == pytest.approx(1.0)

    def test_partial_trace_of_bell_pair(self):
        bell = QuantumState(np.array([1, 0, 0, 1]) / np.sqrt(2))
        np.testing.assert_allclose(partial_trace(bell, [1]).data, np.eye(2) / 2, atol=1e-12)

    def test_partial_trace_keeps_order(self):
        state = basis_state("011")
        reduced = partial_trace(state, [2, 0])
        np.testing.assert_allclose(reduced.data, basis_state("10").density_matrix(), atol=1e-12)

    def test_lambda_max(self):
        assert lambda_max(np.diag([0.2, 0.7])) == pytest.approx(0.7)
        value, vector = top_eigenvector(np.diag([0.2, 0.7]))
        assert value == pytest.approx(0.7)
        assert abs(vector[1]) == pytest.approx(1.0)

    def test_mixture(self):
        rho = mixture([basis_state("0"), basis_state("1")], [0.5, 0.5])
        np.testing.assert_allclose(rho.data, np.eye(2) / 2)


class TestRandom:
    def test_random_states_are_valid(self, rng):
        QuantumState(random_pure_state(3, rng).data)
        QuantumState(random_density_matrix(3, rng).data)
        QuantumState(random_density_matrix(3, rng, rank=1).data)

    def test_random_povm_element(self, rng):
        element = random_povm_element(2, rng)
        ObservableElement(element.matrix)


class TestParsing:
    def test_labels(self):
        np.testing.assert_allclose(parse_state_spec("+-").data, product_state("+-").data)

    def test_mixed_needs_n(self):
        with pytest.raises(FormatError):
            parse_state_spec("mixed")
        assert parse_state_spec("mixed", 2).n == 2

    def test_amplitudes(self):
        state = parse_state_spec([[0.6, 0], [0, 0.8]])
        np.testing.assert_allclose(state.data, [0.6, 0.8j])

    def test_graph_spec(self):
        state = parse_state_spec({"graph": {"n": 2, "edges": [[0, 1]]}})
        np.testing.assert_allclose(state.data, [0.5, 0.5, 0.5, -0.5], atol=1e-12)

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            parse_state_spec("00", 3)

    def test_observables(self):
        assert parse_observable("identity", 1).matrix.shape == (2, 2)
        projector = parse_observable({"projector": "1"})
        np.testing.assert_allclose(projector.matrix, np.diag([0, 1]))
