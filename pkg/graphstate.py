"""Graphs, graph states and the witness-connected system Merlin prepares.

Vertex indexing is fixed: the graph part V1 occupies qubits 0..N-1 and the
witness register V2 occupies qubits N..N+m-1.
"""
import logging
from dataclasses import dataclass

import numpy as np

from densesim import QuantumState, apply_cz, apply_diagonal, cz_signs, plus_state
from errors import DimensionMismatch, FormatError, InvalidGraph
from pauli import PauliString, validate_stabilizer
from utils import load_json_source

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset

    @classmethod
    def from_edges(cls, n, edges):
        """
        Validate an edge list and build a Graph

        Args:
            n (int): vertex count
            edges (iterable): pairs (i, j) of vertex indices

        Raises:
            InvalidGraph: self-loop, duplicate edge, or index out of range
        """
        if n < 1:
            raise InvalidGraph("A graph needs at least one vertex")
        seen = set()
        for edge in edges:
            try:
                i, j = (int(v) for v in edge)
            except (TypeError, ValueError) as e:
                raise InvalidGraph(f"Edge {edge!r} is not a pair of integers") from e
            if i == j:
                raise InvalidGraph(f"Self-loop on vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidGraph(f"Edge ({i}, {j}) references a vertex outside 0..{n - 1}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InvalidGraph(f"Duplicate edge ({i}, {j})")
            seen.add(key)
        return cls(n, frozenset(seen))

    def neighbors(self, vertex):
        return sorted({j for i, j in self.edges if i == vertex} | {i for i, j in self.edges if j == vertex})

    def sorted_edges(self):
        return sorted(self.edges)

    def to_dict(self):
        return {"n": self.n, "edges": [list(e) for e in self.sorted_edges()]}


def edge_graph():
    return Graph.from_edges(2, [(0, 1)])


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    if n < 3:
        raise InvalidGraph("A cycle needs at least three vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def grid_graph(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(rows * cols, edges)


def random_graph(n, rng, p=0.5):
    """Erdos-Renyi graph G(n, p)"""
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)


def parse_graph(obj):
    try:
        return Graph.from_edges(int(obj["n"]), obj["edges"])
    except (KeyError, TypeError) as e:
        raise FormatError(f"Graph file needs 'n' and 'edges': {e}") from e


def load_graph(source):
    """
    Load a graph from {"n": int, "edges": [[i, j], ...]} given as text, dict or path
    """
    graph = parse_graph(load_json_source(source))
    logger.debug(f"Loaded graph with {graph.n} vertices and {len(graph.edges)} edges")
    return graph


@dataclass(frozen=True)
class ConnectedSystem:
    graph: Graph
    witness_size: int
    connect_edges: frozenset

    @classmethod
    def build(cls, graph, m, connect):
        """
        Validate and build a system; connect pairs are (graph vertex, witness qubit 0..m-1)
        """
        if m < 0:
            raise InvalidGraph("Witness size must be non-negative")
        pairs = set()
        for pair in connect:
            try:
                v1, v2 = (int(v) for v in pair)
            except (TypeError, ValueError) as e:
                raise InvalidGraph(f"Connect edge {pair!r} is not a pair of integers") from e
            if not 0 <= v1 < graph.n:
                raise InvalidGraph(f"Connect edge ({v1}, {v2}): vertex {v1} outside 0..{graph.n - 1}")
            if not 0 <= v2 < m:
                raise InvalidGraph(f"Connect edge ({v1}, {v2}): witness qubit {v2} outside 0..{m - 1}")
            if (v1, v2) in pairs:
                raise InvalidGraph(f"Duplicate connect edge ({v1}, {v2})")
            pairs.add((v1, v2))
        return cls(graph, m, frozenset(pairs))

    @property
    def N(self):
        return self.graph.n

    @property
    def total_qubits(self):
        return self.graph.n + self.witness_size

    def witness_qubit(self, w):
        return self.graph.n + w

    def witness_qubits(self):
        return list(range(self.graph.n, self.total_qubits))

    def connect_qubit_pairs(self):
        """Connect edges in system qubit numbering"""
        return [(v1, self.witness_qubit(v2)) for v1, v2 in sorted(self.connect_edges)]

    def witness_neighbors(self, vertex):
        return [self.witness_qubit(v2) for v1, v2 in sorted(self.connect_edges) if v1 == vertex]

    def to_dict(self):
        return {
            "graph": self.graph.to_dict(),
            "m": self.witness_size,
            "connect": [list(pair) for pair in sorted(self.connect_edges)],
        }


def parse_connected_system(obj):
    try:
        return ConnectedSystem.build(parse_graph(obj["graph"]), int(obj["m"]), obj.get("connect", []))
    except (KeyError, TypeError) as e:
        raise FormatError(f"Connected system needs 'graph', 'm' and 'connect': {e}") from e


def load_connected_system(source):
    return parse_connected_system(load_json_source(source))


def graph_state(g):
    """
    |G> = prod_{(i,j) in E} CZ_ij |+>^N
    """
    state = plus_state(g.n)
    for i, j in g.sorted_edges():
        state = apply_cz(state, i, j)
    return state


def _vertex_generator(n, vertex, z_support):
    x_bits = [0] * n
    z_bits = [0] * n
    x_bits[vertex] = 1
    for q in z_support:
        z_bits[q] = 1
    return PauliString(n, tuple(x_bits), tuple(z_bits), 0)


def graph_stabilizers(g):
    """
    g_j = X_j prod_{i in S_j} Z_i, one generator per vertex

    Returns:
        StabilizerGroup: the N validated graph-state generators
    """
    gens = [_vertex_generator(g.n, j, g.neighbors(j)) for j in range(g.n)]
    return validate_stabilizer(gens)


def connect_unitary_diagonal(sys):
    """Diagonal of prod_{e in E_connect} CZ_e on all N+m qubits"""
    return cz_signs(sys.total_qubits, sys.connect_qubit_pairs())


def connect_witness(witness, sys):
    """
    Honest Merlin's state: (prod_{e in E_connect} CZ_e)(|G> on V1 (x) witness on V2)

    Args:
        witness (QuantumState): m-qubit witness, pure or mixed
        sys (ConnectedSystem): graph, witness size and connect edges

    Returns:
        QuantumState: the (N+m)-qubit connected state
    """
    if witness.n != sys.witness_size:
        raise DimensionMismatch(f"Witness has {witness.n} qubits, system expects {sys.witness_size}")
    combined = graph_state(sys.graph).tensor(witness)
    return apply_diagonal(combined, connect_unitary_diagonal(sys))


def extended_test_stabilizers(sys):
    """
    Test generators X_j prod_{i in S_j} Z_i with S_j reaching into the witness register

    Returns:
        StabilizerGroup: N generators on N+m qubits
    """
    total = sys.total_qubits
    gens = [
        _vertex_generator(total, j, sys.graph.neighbors(j) + sys.witness_neighbors(j))
        for j in range(sys.N)
    ]
    return validate_stabilizer(gens)


def decode_codespace_state(state, sys):
    """
    Invert connect_witness on a codespace state

    Undo the connecting CZs and project V1 onto |G>; for a state in the
    codespace of extended_test_stabilizers the projection has norm 1.

    Returns:
        tuple: (witness vector of length 2^m, norm of the projection)
    """
    if not state.is_pure:
        raise DimensionMismatch("Decoding needs a pure state")
    unconnected = state.data * connect_unitary_diagonal(sys)
    graph_vector = graph_state(sys.graph).data
    blocks = unconnected.reshape(2 ** sys.N, 2 ** sys.witness_size)
    witness = graph_vector.conj() @ blocks
    return witness, float(np.linalg.norm(witness))


def witness_from_vector(vector):
    norm = np.linalg.norm(vector)
    return QuantumState(np.asarray(vector) / norm)
