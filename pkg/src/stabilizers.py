"""Stabilizer algebra of graph states.

Generators of a :class:`GraphSpec`, the two local measurement settings of
a bipartite graph, dense and tableau reference states, and reduction of an
arbitrary stabilizer tableau to graph form.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx
import numpy as np

from src import settings
from src.backend import HADAMARD
from src.dense import DenseState
from src.errors import OddCycle, TooLarge
from src.graphs import GraphSpec
from src.pauli import PauliString
from src.qubits import Basis
from src.tableau import StabilizerTableau

logger = logging.getLogger(__name__)

Setting = Dict[int, Basis]
LocalOp = Tuple[int, str]


@dataclass(frozen=True)
class StabilizerSet:
    """Generators of a graph state.

    Attributes:
        generators: One commuting generator per physical qubit.
        owners: Vertex each generator belongs to.
        partition: Generator indices of sets a and b, when bipartite.
    """

    generators: Tuple[PauliString, ...]
    owners: Tuple[int, ...]
    partition: Optional[Tuple[FrozenSet[int], FrozenSet[int]]] = None

    def __len__(self) -> int:
        return len(self.generators)

    def commuting(self) -> bool:
        """Whether every pair of generators commutes."""
        return all(
            a.commutes(b)
            for i, a in enumerate(self.generators)
            for b in self.generators[i + 1 :]
        )

    def subset(self, label: str) -> Tuple[PauliString, ...]:
        """Generators of set ``"a"`` or ``"b"``."""
        if self.partition is None:
            raise ValueError("Stabilizer set has no partition")
        indices = self.partition[0 if label == "a" else 1]
        return tuple(self.generators[i] for i in sorted(indices))


def _swap_for_leaf(pauli: PauliString, qubit: int) -> PauliString:
    letter = pauli.letter(qubit)
    swapped = {"X": "Z", "Z": "X"}.get(letter, letter)
    sign = -pauli.sign if letter == "Y" else pauli.sign
    letters = pauli.letters[:qubit] + swapped + pauli.letters[qubit + 1 :]
    return PauliString(letters, sign)


def stabilizer_generators(graph: GraphSpec) -> StabilizerSet:
    """Generators X_v prod Z_N, with the modified pair for redundant vertices.

    A redundant vertex (p, q) contributes -Z_p Z_q and X_p X_q prod Z_N;
    neighbours act with Z on the vertex's first qubit.
    """
    n = graph.n_qubits
    generators: List[PauliString] = []
    owners: List[int] = []
    for vertex in graph.vertices:
        qubits = graph.encoding[vertex]
        letters = {graph.anchor(u): "Z" for u in graph.neighbours(vertex)}
        if len(qubits) == 2:
            generators.append(PauliString.from_letters(n, {qubits[0]: "Z", qubits[1]: "Z"}, -1))
            owners.append(vertex)
        letters.update({q: "X" for q in qubits})
        generators.append(PauliString.from_letters(n, letters))
        owners.append(vertex)
    for qubit in sorted(graph.leaf_hadamard):
        generators = [_swap_for_leaf(g, qubit) for g in generators]
    return StabilizerSet(tuple(generators), tuple(owners))


def two_colouring(graph: GraphSpec) -> Dict[int, int]:
    """Colour 0/1 per vertex, the lowest vertex of each component getting 0.

    Raises:
        OddCycle: if the graph is not bipartite.
    """
    nx_graph = graph.to_networkx()
    if not nx.is_bipartite(nx_graph):
        raise OddCycle(
            f"graph {graph.name or ''} contains an odd cycle; "
            "a fidelity lower bound cannot be derived for it"
        )
    colour = nx.bipartite.color(nx_graph)
    for component in nx.connected_components(nx_graph):
        if colour[min(component)] == 1:
            for vertex in component:
                colour[vertex] ^= 1
    return colour


def bipartition_settings(
    stabilizers: StabilizerSet, graph: GraphSpec
) -> Tuple[Setting, Setting, StabilizerSet]:
    """Two local X/Z settings M_a and M_b covering all generators.

    Vertices of colour 0 are measured in X under M_a and in Z under M_b,
    colour 1 the other way round. A redundant vertex's -ZZ generator joins
    the set whose setting reads that vertex in Z.

    Returns:
        M_a, M_b and the stabilizer set with its partition filled in.
    """
    colour = two_colouring(graph)
    setting_a: Setting = {}
    setting_b: Setting = {}
    for vertex in graph.vertices:
        x_in_a = colour[vertex] == 0
        for qubit in graph.encoding[vertex]:
            setting_a[qubit] = Basis.X if x_in_a else Basis.Z
            setting_b[qubit] = Basis.Z if x_in_a else Basis.X
    for qubit in graph.leaf_hadamard:
        for setting in (setting_a, setting_b):
            setting[qubit] = Basis.Z if setting[qubit] is Basis.X else Basis.X

    set_a, set_b = [], []
    for i, generator in enumerate(stabilizers.generators):
        if measurable(generator, setting_a):
            set_a.append(i)
        elif measurable(generator, setting_b):
            set_b.append(i)
        else:
            raise OddCycle(f"generator {generator} fits neither local setting")
    partitioned = StabilizerSet(
        stabilizers.generators, stabilizers.owners, (frozenset(set_a), frozenset(set_b))
    )
    return setting_a, setting_b, partitioned


def measurable(pauli: PauliString, setting: Setting) -> bool:
    """Whether every letter of ``pauli`` matches the setting's basis."""
    return all(setting[q].value == pauli.letter(q) for q in pauli.support)


# --- Reference states ---


def graph_state_vector(
    graph: GraphSpec, max_qubits: int = settings.DENSE_QUBIT_LIMIT
) -> DenseState:
    """Dense graph state: |+> per vertex, CZ per edge, then encoding and leaf Hadamards."""
    n = graph.n_qubits
    if n > max_qubits:
        raise TooLarge(f"graph has {n} qubits, above the dense limit of {max_qubits}")
    state = DenseState.zeros(n, max_qubits)
    for vertex in graph.vertices:
        state.apply_matrix(graph.anchor(vertex), HADAMARD, "H")
    for u, v in sorted(graph.edges):
        state.apply_cz(graph.anchor(u), graph.anchor(v))
    for vertex in graph.redundant_vertices:
        first, second = graph.encoding[vertex]
        state.apply_cnot(first, second)
        state.apply_pauli(second, "X")
    for qubit in sorted(graph.leaf_hadamard):
        state.apply_hadamard(qubit)
    return state


def graph_state_tableau(graph: GraphSpec) -> StabilizerTableau:
    """Tableau whose rows are the graph's generators."""
    return StabilizerTableau.from_generators(stabilizer_generators(graph).generators)


def tableau_state_vector(
    tableau: StabilizerTableau, max_qubits: int = settings.DENSE_QUBIT_LIMIT
) -> DenseState:
    """Amplitudes of a tableau state, found by projecting a generic vector."""
    n = tableau.n_qubits
    if n > max_qubits:
        raise TooLarge(f"tableau has {n} qubits, above the dense limit of {max_qubits}")
    rng = np.random.default_rng(n)
    seed = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    state = DenseState(seed / np.linalg.norm(seed), max_qubits)
    for generator in tableau.generators():
        state.measure_pauli(generator, forced=1)
    return state


# --- Graph form of a tableau ---


def _swap_rows(tableau: StabilizerTableau, first: int, second: int) -> None:
    for bits in (tableau.xbits, tableau.zbits, tableau.signs):
        bits[[first, second]] = bits[[second, first]]


def _eliminate_x(tableau: StabilizerTableau) -> List[int]:
    """Row-reduce the X block in place; return its pivot columns."""
    pivots = []
    row = 0
    for col in range(tableau.n_qubits):
        candidates = np.flatnonzero(tableau.xbits[row:, col]) + row
        if candidates.size == 0:
            continue
        pivot = int(candidates[0])
        if pivot != row:
            _swap_rows(tableau, row, pivot)
        others = np.flatnonzero(tableau.xbits[:, col])
        tableau.multiply_rows(others[others != row], row)
        pivots.append(col)
        row += 1
        if row == tableau.n_qubits:
            break
    return pivots


def extract_graph(tableau: StabilizerTableau) -> Tuple[GraphSpec, List[LocalOp]]:
    """Bring a stabilizer state to graph form.

    Returns:
        The graph and the local gates (qubit, "H" | "Sdg" | "Z") which,
        applied in order to the input state, produce its graph state.
    """
    work = tableau.copy()
    n = work.n_qubits
    local_ops: List[LocalOp] = []

    pivots = _eliminate_x(work)
    if len(pivots) < n:
        # Rows without X commute with the X block, so the non-pivot columns
        # can be swapped in with Hadamards
        columns = np.setdiff1d(np.arange(n), pivots)
        work.signs ^= (
            np.sum(work.xbits[:, columns] & work.zbits[:, columns], axis=1) % 2
        ).astype(np.uint8)
        work.xbits[:, columns], work.zbits[:, columns] = (
            work.zbits[:, columns].copy(),
            work.xbits[:, columns].copy(),
        )
        local_ops.extend((int(q), "H") for q in columns)
        _eliminate_x(work)

    diagonal = np.flatnonzero(np.diag(work.zbits))
    work.zbits[diagonal, diagonal] = 0
    local_ops.extend((int(q), "Sdg") for q in diagonal)
    negative = np.flatnonzero(work.signs)
    work.signs[negative] = 0
    local_ops.extend((int(q), "Z") for q in negative)

    rows, cols = np.nonzero(np.triu(work.zbits, k=1))
    graph = GraphSpec.from_edges(n, zip(rows.tolist(), cols.tolist()))
    logger.debug(
        "Extracted graph with %d edges and %d local gates", len(graph.edges), len(local_ops)
    )
    return graph, local_ops


_LOCAL_GATES = {
    "H": HADAMARD,
    "Sdg": np.diag([1, -1j]).astype(complex),
    "Z": np.diag([1, -1]).astype(complex),
}


def apply_local_ops(tableau: StabilizerTableau, local_ops: List[LocalOp]) -> StabilizerTableau:
    """Copy of the tableau with the local gates applied."""
    result = tableau.copy()
    for qubit, gate in local_ops:
        result.apply_matrix(qubit, _LOCAL_GATES[gate], gate)
    return result


def stabilizer_group_equal(first: StabilizerTableau, second: StabilizerTableau) -> bool:
    """Whether two tableaux stabilize the same state, signs included."""
    if first.n_qubits != second.n_qubits:
        return False
    return all(first.expectation(row) == 1.0 for row in second.generators())
