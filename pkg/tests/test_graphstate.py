import numpy as np
import pytest

from densesim import basis_state, pauli_expectation, random_pure_state
from errors import DimensionMismatch, FormatError, InvalidGraph
from graphstate import (
    ConnectedSystem,
    Graph,
    connect_witness,
    cycle_graph,
    decode_codespace_state,
    extended_test_stabilizers,
    graph_stabilizers,
    graph_state,
    grid_graph,
    load_graph,
    parse_connected_system,
    path_graph,
    random_graph,
)


class TestGraph:
    def test_edge_order_is_normalized(self):
        graph = Graph.from_edges(3, [(2, 0), (1, 2)])
        assert graph.sorted_edges() == [(0, 2), (1, 2)]
        assert graph.neighbors(2) == [0, 1]

    @pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)], [(0, 5)], [("a", 1)]])
    def test_invalid_edges(self, edges):
        with pytest.raises(InvalidGraph):
            Graph.from_edges(3, edges)

    def test_named_graphs(self):
        assert len(path_graph(4).edges) == 3
        assert len(cycle_graph(4).edges) == 4
        assert len(grid_graph(2, 3).edges) == 7
        with pytest.raises(InvalidGraph):
            cycle_graph(2)

    def test_random_graph_is_valid(self, rng):
        graph = random_graph(5, rng)
        assert all(0 <= i < j < 5 for i, j in graph.edges)

    def test_load(self, instances_dir):
        graph = load_graph(str(instances_dir / "edge_graph.json"))
        assert graph.to_dict() == {"n": 2, "edges": [[0, 1]]}

    def test_load_missing_keys(self):
        with pytest.raises(FormatError):
            load_graph({"edges": []})


class TestGraphState:
    def test_edge_graph_amplitudes(self, edge):
        np.testing.assert_allclose(graph_state(edge).data, [0.5, 0.5, 0.5, -0.5], atol=1e-12)

    def test_generator_labels(self, edge_group):
        assert edge_group.labels() == ["+XZ", "+ZX"]

    @pytest.mark.parametrize("graph", [path_graph(4), cycle_graph(5), grid_graph(2, 2)])
    def test_graph_state_is_stabilized(self, graph):
        state = graph_state(graph)
        for g in graph_stabilizers(graph).generators:
            assert pauli_expectation(state, g) == pytest.approx(1.0)


class TestConnectedSystem:
    def test_extended_generators(self, edge_system):
        assert extended_test_stabilizers(edge_system).labels() == ["+XZZ", "+ZXI"]

    @pytest.mark.parametrize("m, connect", [(1, [(2, 0)]), (1, [(0, 1)]), (2, [(0, 0), (0, 0)]), (-1, [])])
    def test_invalid_connect_edges(self, edge, m, connect):
        with pytest.raises(InvalidGraph):
            ConnectedSystem.build(edge, m, connect)

    def test_qubit_numbering(self):
        system = ConnectedSystem.build(path_graph(3), 2, [(0, 1), (2, 0)])
        assert system.total_qubits == 5
        assert system.witness_qubits() == [3, 4]
        assert system.connect_qubit_pairs() == [(0, 4), (2, 3)]

    def test_parse(self):
        system = parse_connected_system({"graph": {"n": 2, "edges": [[0, 1]]}, "m": 1, "connect": [[1, 0]]})
        assert system.to_dict()["connect"] == [[1, 0]]

    def test_connected_state_is_stabilized(self, rng):
        system = ConnectedSystem.build(cycle_graph(3), 2, [(0, 0), (1, 1), (2, 0)])
        state = connect_witness(random_pure_state(2, rng), system)
        for g in extended_test_stabilizers(system).generators:
            assert pauli_expectation(state, g) == pytest.approx(1.0)

    def test_mixed_witness_is_stabilized(self, edge_system, rng):
        from densesim import random_density_matrix

        state = connect_witness(random_density_matrix(1, rng), edge_system)
        assert not state.is_pure
        for g in extended_test_stabilizers(edge_system).generators:
            assert pauli_expectation(state, g) == pytest.approx(1.0)

    def test_witness_size_mismatch(self, edge_system):
        with pytest.raises(DimensionMismatch):
            connect_witness(basis_state("00"), edge_system)

    def test_decode_recovers_witness(self, rng):
        system = ConnectedSystem.build(path_graph(3), 2, [(1, 0), (2, 1)])
        witness = random_pure_state(2, rng)
        decoded, norm = decode_codespace_state(connect_witness(witness, system), system)
        assert norm == pytest.approx(1.0)
        np.testing.assert_allclose(decoded, witness.data, atol=1e-12)
