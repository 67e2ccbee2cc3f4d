"""Unit tests for graph descriptions and graph-state stabilizers."""

# pylint: disable=redefined-outer-name

import time

import numpy as np
import pytest

from src.backend import BackendKind
from src.engine import HeraldMode, run
from src.errors import ConfigError, OddCycle
from src.graphs import (
    GraphSpec,
    atom_photon,
    load_graph,
    path_graph,
    remove_redundancy,
    ring_graph,
    ring_protocol_graph,
    save_graph,
    tree_graph,
    tree_protocol_graph,
)
from src.pauli import PauliString
from src.qubits import Basis
from src.stabilizers import (
    apply_local_ops,
    bipartition_settings,
    extract_graph,
    graph_state_tableau,
    graph_state_vector,
    measurable,
    stabilizer_generators,
    stabilizer_group_equal,
    tableau_state_vector,
    two_colouring,
)
from src.tableau import StabilizerTableau


@pytest.fixture
def box_graph():
    """Ring of four with the atoms and the first photons as redundant vertices."""
    return ring_protocol_graph(2, odd=False)


class TestGraphSpec:
    """Test suite for GraphSpec and the graph builders."""

    # --- Validation ---

    @pytest.mark.parametrize(
        "edges, encoding",
        [
            ([(0, 0)], None),
            ([(0, 5)], None),
            ([], {0: (0,), 1: (0,)}),
            ([], {0: (0, 1, 2), 1: (3,)}),
        ],
    )
    def test_invalid_graphs_rejected(self, edges, encoding):
        """Test self-loops, unknown vertices and broken encodings."""
        with pytest.raises(ValueError):
            GraphSpec.from_edges(2, edges, encoding)

    def test_edges_are_unordered(self):
        """Test that (1, 0) and (0, 1) are the same edge."""
        graph = GraphSpec.from_edges(2, [(1, 0)])
        assert graph.edges == frozenset({(0, 1)})
        assert graph.neighbours(0) == (1,)

    # --- Builders ---

    def test_ring_graph(self):
        """Test the cycle builder."""
        graph = ring_graph(5)
        assert len(graph.edges) == 5
        assert all(len(graph.neighbours(v)) == 2 for v in graph.vertices)

    def test_tree_graph(self):
        """Test breadth-first numbering of a 2-2 tree."""
        graph = tree_graph([2, 2])
        assert graph.neighbours(0) == (1, 2)
        assert graph.neighbours(1) == (0, 3, 4)
        assert len(graph.vertices) == 7

    def test_atom_photon_indices(self):
        """Test that photons follow the two spins in emission order."""
        assert [atom_photon(1, 1), atom_photon(2, 1), atom_photon(1, 2)] == [2, 3, 4]

    @pytest.mark.parametrize(
        "n_cycles, odd, name, n_vertices, n_qubits",
        [
            (1, False, "pair", 2, 4),
            (1, True, "triangle", 3, 4),
            (2, False, "box", 4, 6),
            (2, True, "pentagon", 5, 6),
            (3, False, "hexagon", 6, 8),
        ],
    )
    def test_ring_protocol_graph(self, n_cycles, odd, name, n_vertices, n_qubits):
        """Test the size of the rings the protocols produce."""
        graph = ring_protocol_graph(n_cycles, odd)
        assert graph.name == name
        assert len(graph.vertices) == n_vertices
        assert graph.n_qubits == n_qubits
        assert graph.encoding[0] == (0, 1)

    def test_single_cycle_pair_has_no_edge(self):
        """Test that the doubled edge of a two-vertex ring cancels."""
        graph = ring_protocol_graph(1, odd=False)
        assert graph.edges == frozenset()
        assert graph.redundant_vertices == (0, 1)

    def test_single_cycle_odd_ring_is_a_triangle(self):
        """Test the three-vertex ring of one odd cycle."""
        graph = ring_protocol_graph(1, odd=True)
        assert graph.same_graph(ring_graph(3))

    def test_ring_protocol_needs_a_cycle(self):
        """Test that zero cycles are rejected."""
        with pytest.raises(ValueError):
            ring_protocol_graph(0, odd=False)

    def test_tree_protocol_graph(self):
        """Test the tree protocol graph: redundant root, two children, two leaves each."""
        graph = tree_protocol_graph()
        assert graph.redundant_vertices == (0,)
        assert graph.n_qubits == 8
        assert graph.to_networkx().degree(0) == 2
        assert sorted(len(graph.neighbours(v)) for v in graph.vertices) == [1, 1, 1, 1, 2, 3, 3]

    def test_remove_redundancy_adds_isolated_vertex(self, box_graph):
        """Test that the second qubit becomes a new isolated vertex."""
        reduced = remove_redundancy(box_graph, 0)
        assert reduced.encoding[0] == (0,)
        assert reduced.encoding[4] == (1,)
        assert reduced.neighbours(4) == ()

    def test_remove_redundancy_of_plain_vertex_raises(self, box_graph):
        """Test that a single-qubit vertex cannot be reduced."""
        with pytest.raises(ValueError):
            remove_redundancy(box_graph, 1)

    def test_isomorphism(self, box_graph):
        """Test that the box protocol graph is a 4-cycle."""
        assert box_graph.isomorphic(ring_graph(4))
        assert not box_graph.isomorphic(path_graph(4))

    # --- File format ---

    def test_save_and_load(self, tmp_path):
        """Test that a saved graph loads back equal."""
        graph = tree_protocol_graph(absorb_photon_hadamards=True)
        path = tmp_path / "tree.json"
        save_graph(graph, path)
        assert load_graph(path).same_graph(graph)

    def test_load_missing_file(self, tmp_path):
        """Test that a missing graph file is a configuration error."""
        with pytest.raises(ConfigError):
            load_graph(tmp_path / "missing.json")

    def test_load_wrong_kind(self, tmp_path):
        """Test that a document of another kind is rejected."""
        path = tmp_path / "noise.json"
        path.write_text('{"kind": "noise", "vertices": [0]}', encoding="utf-8")
        with pytest.raises(ConfigError):
            load_graph(path)


class TestStabilizers:
    """Test suite for graph-state stabilizers."""

    def test_generators_of_path(self):
        """Test the generators X_v prod Z_N of a three-vertex path."""
        generators = stabilizer_generators(path_graph(3)).generators
        assert [str(g) for g in generators] == ["+XZI", "+ZXZ", "+IZX"]

    def test_redundant_vertex_generators(self, box_graph):
        """Test the -ZZ and XX generators of the atom vertex."""
        generators = stabilizer_generators(box_graph)
        assert generators.generators[0] == PauliString.from_letters(6, {0: "Z", 1: "Z"}, -1)
        assert generators.generators[1] == PauliString.from_letters(
            6, {0: "X", 1: "X", 4: "Z", 5: "Z"}
        )
        assert len(generators) == box_graph.n_qubits

    @pytest.mark.parametrize(
        "graph",
        [ring_protocol_graph(2, False), ring_protocol_graph(2, True), tree_protocol_graph(True)],
    )
    def test_generators_stabilize_reference_state(self, graph):
        """Test that every generator has expectation +1 on the dense graph state."""
        stabilizers = stabilizer_generators(graph)
        state = graph_state_vector(graph)
        assert stabilizers.commuting()
        for generator in stabilizers.generators:
            assert state.expectation(generator) == pytest.approx(1.0)

    def test_two_colouring(self):
        """Test that the lowest vertex gets colour 0."""
        colour = two_colouring(ring_graph(4))
        assert colour == {0: 0, 1: 1, 2: 0, 3: 1}

    def test_odd_cycle_has_no_colouring(self):
        """Test that a pentagon raises OddCycle."""
        with pytest.raises(OddCycle):
            two_colouring(ring_protocol_graph(2, odd=True))

    def test_bipartition_settings_cover_generators(self, box_graph):
        """Test that M_a and M_b together measure every generator."""
        setting_a, setting_b, stabilizers = bipartition_settings(
            stabilizer_generators(box_graph), box_graph
        )
        set_a, set_b = stabilizers.partition
        assert set_a | set_b == frozenset(range(len(stabilizers)))
        assert not set_a & set_b
        assert setting_a[0] is Basis.X and setting_b[0] is Basis.Z
        for generator in stabilizers.subset("a"):
            assert measurable(generator, setting_a)
        for generator in stabilizers.subset("b"):
            assert measurable(generator, setting_b)

    def test_leaf_hadamard_swaps_settings(self):
        """Test that absorbed leaf Hadamards swap X and Z in both settings."""
        graph = tree_protocol_graph(absorb_photon_hadamards=True)
        plain = tree_protocol_graph()
        setting_a, _, _ = bipartition_settings(stabilizer_generators(graph), graph)
        plain_a, _, _ = bipartition_settings(stabilizer_generators(plain), plain)
        leaf = atom_photon(1, 2)
        assert {setting_a[leaf], plain_a[leaf]} == {Basis.X, Basis.Z}

    def test_tableau_and_vector_agree(self, box_graph):
        """Test that the tableau's state equals the dense reference state."""
        state = tableau_state_vector(graph_state_tableau(box_graph))
        assert state.overlap(graph_state_vector(box_graph)) == pytest.approx(1.0)


class TestExtractGraph:
    """Test suite for reducing stabilizer tableaux to graph form."""

    def test_graph_state_needs_no_local_ops(self):
        """Test that a graph state is returned unchanged."""
        graph = ring_graph(5)
        extracted, local_ops = extract_graph(graph_state_tableau(graph))
        assert extracted.edges == graph.edges
        assert local_ops == []

    @pytest.mark.parametrize(
        "scramble",
        [
            [(0, "H")],
            [(1, "H"), (3, "H")],
            [(2, "Sdg"), (0, "H")],
            [(4, "Z"), (1, "Sdg"), (1, "H")],
        ],
    )
    def test_local_clifford_equivalent_state(self, scramble):
        """Test that the returned gates map a scrambled state to its graph state."""
        scrambled = apply_local_ops(graph_state_tableau(ring_graph(5)), scramble)
        extracted, local_ops = extract_graph(scrambled)
        assert stabilizer_group_equal(
            apply_local_ops(scrambled, local_ops), graph_state_tableau(extracted)
        )

    def test_product_state(self):
        """Test that a computational basis state becomes the empty graph."""
        tableau = graph_state_tableau(GraphSpec.from_edges(3, []))
        flipped = apply_local_ops(tableau, [(0, "Z")] + [(q, "H") for q in range(3)])
        extracted, local_ops = extract_graph(flipped)
        assert not extracted.edges
        assert stabilizer_group_equal(
            apply_local_ops(flipped, local_ops), graph_state_tableau(extracted)
        )

    @pytest.mark.slow
    def test_large_path_extraction_is_fast(self):
        """Test that a 1000-qubit graph state is reduced in under a second."""
        graph = path_graph(1000)
        tableau = graph_state_tableau(graph)
        start = time.perf_counter()
        extracted, local_ops = extract_graph(tableau)
        elapsed = time.perf_counter() - start
        assert extracted.edges == graph.edges
        assert not local_ops
        assert elapsed < 1.0

    def test_extracted_adjacency_is_symmetric(self):
        """Test that extraction never leaves a self-loop."""
        scrambled = apply_local_ops(graph_state_tableau(tree_graph([2, 2])), [(0, "H")])
        extracted, _ = extract_graph(scrambled)
        assert all(u != v for u, v in extracted.edges)
        assert len(extracted.vertices) == 7

    def test_bell_pair_round_trip(self):
        """Test that (|01> + |10>)/sqrt(2) becomes a single edge."""
        generators = [PauliString.parse("XX"), PauliString.parse("-ZZ")]
        pair = StabilizerTableau.from_generators(generators)
        extracted, local_ops = extract_graph(pair)
        assert extracted.edges == frozenset({(0, 1)})
        assert stabilizer_group_equal(
            apply_local_ops(pair, local_ops), graph_state_tableau(extracted)
        )

    @pytest.mark.parametrize("name", ["box_program", "hexagon_program", "tree_program"])
    def test_protocol_output_round_trip(self, name, request):
        """Test extraction on the tableau a protocol run leaves behind."""
        program = request.getfixturevalue(name)
        result = run(program, BackendKind.TABLEAU, seed=2, herald_mode=HeraldMode.FORCE)
        tableau = result.register.state
        extracted, local_ops = extract_graph(tableau)
        assert len(extracted.vertices) == tableau.n_qubits
        assert stabilizer_group_equal(
            apply_local_ops(tableau, local_ops), graph_state_tableau(extracted)
        )

    def test_scrambled_path_round_trip(self):
        """Test a path with Hadamards on a random half of its vertices."""
        rng = np.random.default_rng(11)
        flipped = rng.choice(60, size=30, replace=False)
        scrambled = apply_local_ops(
            graph_state_tableau(path_graph(60)), [(int(q), "H") for q in flipped]
        )
        extracted, local_ops = extract_graph(scrambled)
        assert stabilizer_group_equal(
            apply_local_ops(scrambled, local_ops), graph_state_tableau(extracted)
        )

    @pytest.mark.slow
    def test_large_scrambled_path_is_fast(self):
        """Test that a 1000-qubit path under random Hadamards is reduced in under a second."""
        rng = np.random.default_rng(5)
        flipped = np.flatnonzero(rng.random(1000) < 0.5)
        scrambled = apply_local_ops(
            graph_state_tableau(path_graph(1000)), [(int(q), "H") for q in flipped]
        )
        start = time.perf_counter()
        extracted, local_ops = extract_graph(scrambled)
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0
        assert all(u != v for u, v in extracted.edges)
        reduced = apply_local_ops(scrambled, local_ops)
        graph = graph_state_tableau(extracted)
        # both groups are maximal, so commuting generators mean equal groups up to signs
        symplectic = (
            reduced.xbits.astype(np.float32) @ graph.zbits.T.astype(np.float32)
            + reduced.zbits.astype(np.float32) @ graph.xbits.T.astype(np.float32)
        )
        assert not np.any(symplectic.astype(np.int64) % 2)
