"""Target graphs: the logical graph, its physical encoding and file format.

Vertices are integers. Each vertex is carried by one physical qubit or,
for a redundantly encoded vertex, by two. Physical qubits are register
indices and must cover 0..n-1 exactly once.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from src import settings
from src.errors import ConfigError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class GraphSpec:
    """Graph state description.

    Attributes:
        vertices: Vertex ids in display order.
        edges: Unordered vertex pairs, stored as (low, high).
        encoding: Physical qubits of each vertex. A redundant vertex lists
            two qubits; its logical Z is Z on the first one.
        leaf_hadamard: Physical qubits whose Hadamard is absorbed into the
            measurement basis instead of being applied to the state.
        name: Free-form label used in reports.
    """

    vertices: Tuple[int, ...]
    edges: FrozenSet[Edge]
    encoding: Mapping[int, Tuple[int, ...]]
    leaf_hadamard: FrozenSet[int] = frozenset()
    name: str = ""
    _neighbours: Dict[int, Tuple[int, ...]] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        vertex_set = set(self.vertices)
        if len(vertex_set) != len(self.vertices):
            raise ValueError("Vertex ids must be unique")
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"Self-loop on vertex {u}")
            if u not in vertex_set or v not in vertex_set:
                raise ValueError(f"Edge ({u}, {v}) uses an unknown vertex")
        if set(self.encoding) != vertex_set:
            raise ValueError("Every vertex needs an encoding and only vertices have one")
        qubits = [q for v in self.vertices for q in self.encoding[v]]
        for vertex in self.vertices:
            if len(self.encoding[vertex]) not in (1, 2):
                raise ValueError(f"Vertex {vertex} must be carried by one or two qubits")
        if sorted(qubits) != list(range(len(qubits))):
            raise ValueError("Physical qubits must be 0..n-1, each in exactly one vertex")
        if not self.leaf_hadamard <= set(qubits):
            raise ValueError("Leaf Hadamards must name physical qubits")
        neighbours: Dict[int, List[int]] = {v: [] for v in self.vertices}
        for u, v in sorted(self.edges):
            neighbours[u].append(v)
            neighbours[v].append(u)
        self._neighbours.update({v: tuple(sorted(n)) for v, n in neighbours.items()})

    @classmethod
    def from_edges(
        cls,
        n_vertices: int,
        edges: Iterable[Sequence[int]],
        encoding: Optional[Mapping[int, Sequence[int]]] = None,
        leaf_hadamard: Iterable[int] = (),
        name: str = "",
    ) -> "GraphSpec":
        """Graph on vertices 0..n-1; one qubit per vertex unless told otherwise."""
        if encoding is None:
            encoding = {v: (v,) for v in range(n_vertices)}
        return cls(
            tuple(range(n_vertices)),
            frozenset(_edge(int(u), int(v)) for u, v in edges),
            {int(v): tuple(int(q) for q in qubits) for v, qubits in encoding.items()},
            frozenset(int(q) for q in leaf_hadamard),
            name,
        )

    @property
    def n_qubits(self) -> int:
        """Number of physical qubits."""
        return sum(len(qubits) for qubits in self.encoding.values())

    @property
    def redundant_vertices(self) -> Tuple[int, ...]:
        """Vertices carried by two physical qubits."""
        return tuple(v for v in self.vertices if len(self.encoding[v]) == 2)

    def neighbours(self, vertex: int) -> Tuple[int, ...]:
        """Adjacent vertices, sorted."""
        return self._neighbours[vertex]

    def anchor(self, vertex: int) -> int:
        """Physical qubit carrying the vertex's logical Z."""
        return self.encoding[vertex][0]

    def vertex_of(self, qubit: int) -> int:
        """Vertex a physical qubit belongs to."""
        for vertex, qubits in self.encoding.items():
            if qubit in qubits:
                return vertex
        raise ValueError(f"Qubit {qubit} is not part of the graph")

    def to_networkx(self) -> nx.Graph:
        """Logical graph as a networkx graph."""
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.edges)
        return graph

    def same_graph(self, other: "GraphSpec") -> bool:
        """Equal vertex labels, edges and encoding (no relabelling)."""
        return (
            set(self.vertices) == set(other.vertices)
            and self.edges == other.edges
            and dict(self.encoding) == dict(other.encoding)
            and self.leaf_hadamard == other.leaf_hadamard
        )

    def isomorphic(self, other: "GraphSpec") -> bool:
        """Whether the logical graphs are isomorphic."""
        return nx.is_isomorphic(self.to_networkx(), other.to_networkx())


def ring_graph(n: int) -> GraphSpec:
    """Cycle 0-1-...-(n-1)-0."""
    if n < 3:
        raise ValueError(f"A ring needs at least 3 vertices, got {n}")
    return GraphSpec.from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"ring{n}")


def tree_graph(branching: Sequence[int]) -> GraphSpec:
    """Rooted tree numbered breadth first, children left to right.

    ``branching[d]`` is the number of children of every vertex at depth d.
    """
    if not branching or any(b < 1 for b in branching):
        raise ValueError("Branching factors must be a non-empty list of positive integers")
    edges: List[Edge] = []
    layer = [0]
    next_vertex = 1
    for children in branching:
        new_layer = []
        for parent in layer:
            for _ in range(children):
                edges.append((parent, next_vertex))
                new_layer.append(next_vertex)
                next_vertex += 1
        layer = new_layer
    return GraphSpec.from_edges(next_vertex, edges, name="tree" + "".join(map(str, branching)))


def path_graph(n: int) -> GraphSpec:
    """Linear cluster 0-1-...-(n-1)."""
    if n < 1:
        raise ValueError("A path needs at least one vertex")
    return GraphSpec.from_edges(n, [(i, i + 1) for i in range(n - 1)], name=f"path{n}")


# --- Graphs produced by the built-in protocols (register indices) ---


def atom_photon(atom: int, cycle: int) -> int:
    """Register index of the photon emitted by ``atom`` in ``cycle`` (both from 1)."""
    return 2 * cycle + atom - 1


def ring_protocol_graph(n_cycles: int, odd: bool) -> GraphSpec:
    """Ring produced by the two-atom ring protocol.

    The atoms form a redundant vertex closing the ring. Atom 1's photons run
    from the last cycle back to the second, atom 2's from the second to the
    last. For even rings the first-cycle photons form a second redundant
    vertex; for odd rings they are two separate vertices.
    """
    if n_cycles < 1:
        raise ValueError("Ring protocols need at least one emission cycle")
    atom1 = [atom_photon(1, k) for k in range(n_cycles, 1, -1)]
    atom2 = [atom_photon(2, k) for k in range(2, n_cycles + 1)]
    middle: List[Tuple[int, ...]]
    if odd:
        middle = [(atom_photon(1, 1),), (atom_photon(2, 1),)]
    else:
        middle = [(atom_photon(1, 1), atom_photon(2, 1))]
    carriers = [(0, 1)] + [(q,) for q in atom1] + middle + [(q,) for q in atom2]
    size = len(carriers)
    names = {2: "pair", 3: "triangle", 4: "box", 5: "pentagon", 6: "hexagon"}
    name = names.get(size, f"ring{size}")
    # two vertices are joined twice around the ring and the edges cancel
    edges = [] if size == 2 else [(i, (i + 1) % size) for i in range(size)]
    return GraphSpec.from_edges(
        size,
        edges,
        dict(enumerate(carriers)),
        name=name,
    )


def tree_protocol_graph(absorb_photon_hadamards: bool = False) -> GraphSpec:
    """Depth-two tree with the atoms as redundant root.

    Atom 1's first photon is the left child, atom 2's the right child; each
    child carries the later photons of its atom as leaves.
    """
    cycles = settings.TREE_EMISSION_CYCLES
    carriers: List[Tuple[int, ...]] = [(0, 1), (atom_photon(1, 1),), (atom_photon(2, 1),)]
    edges = [(0, 1), (0, 2)]
    leaves = []
    for child, atom in ((1, 1), (2, 2)):
        for cycle in range(2, cycles + 1):
            carriers.append((atom_photon(atom, cycle),))
            edges.append((child, len(carriers) - 1))
            leaves.append(atom_photon(atom, cycle))
    return GraphSpec.from_edges(
        len(carriers),
        edges,
        dict(enumerate(carriers)),
        leaf_hadamard=leaves if absorb_photon_hadamards else (),
        name="tree",
    )


def remove_redundancy(graph: GraphSpec, vertex: int) -> GraphSpec:
    """Reduce a redundant vertex to its first qubit.

    The second qubit, measured in X and reset to |+>, becomes a new
    isolated vertex.
    """
    if len(graph.encoding[vertex]) != 2:
        raise ValueError(f"Vertex {vertex} is not redundantly encoded")
    keep, drop = graph.encoding[vertex]
    new_vertex = max(graph.vertices) + 1
    encoding = dict(graph.encoding)
    encoding[vertex] = (keep,)
    encoding[new_vertex] = (drop,)
    return GraphSpec(
        graph.vertices + (new_vertex,),
        graph.edges,
        encoding,
        graph.leaf_hadamard,
        graph.name,
    )


# --- File format ---


def graph_to_dict(graph: GraphSpec) -> Dict:
    """JSON-ready dictionary of a graph."""
    return {
        "format_version": settings.FORMAT_VERSION,
        "kind": "graph",
        "name": graph.name,
        "vertices": list(graph.vertices),
        "edges": [list(edge) for edge in sorted(graph.edges)],
        "encoding": {str(v): list(graph.encoding[v]) for v in graph.vertices},
        "leaf_hadamard": sorted(graph.leaf_hadamard),
    }


def graph_from_dict(data: Mapping) -> GraphSpec:
    """Inverse of :func:`graph_to_dict`.

    Raises:
        ConfigError: on missing fields or an invalid graph.
    """
    try:
        if data.get("kind", "graph") != "graph":
            raise ConfigError(f"Expected a graph document, got kind {data.get('kind')!r}")
        vertices = tuple(int(v) for v in data["vertices"])
        raw_encoding = data.get("encoding") or {str(v): [i] for i, v in enumerate(vertices)}
        return GraphSpec(
            vertices,
            frozenset(_edge(int(u), int(v)) for u, v in data.get("edges", [])),
            {int(v): tuple(int(q) for q in qubits) for v, qubits in raw_encoding.items()},
            frozenset(int(q) for q in data.get("leaf_hadamard", [])),
            str(data.get("name", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid graph description: {exc}") from exc


def save_graph(graph: GraphSpec, path: Union[str, Path]) -> None:
    """Write a graph as an indented JSON document."""
    with open(path, "w", encoding="utf-8") as file:
        json.dump(graph_to_dict(graph), file, indent=2, sort_keys=True)
        file.write("\n")


def load_graph(path: Union[str, Path]) -> GraphSpec:
    """Read a graph written by :func:`save_graph`.

    Raises:
        ConfigError: if the file is missing or malformed.
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            data = json.load(file)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read graph file {path}: {exc}") from exc
    graph = graph_from_dict(data)
    logger.debug("Loaded graph %s with %d vertices", graph.name or path, len(graph.vertices))
    return graph
