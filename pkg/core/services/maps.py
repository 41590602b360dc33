"""
Arc-and-node maps for Ground War.

A map is a connected undirected graph: nodes sit in the unit square and every
arc carries an integer length (ticks to traverse at speed 1.0). Random maps
follow the experiment protocol: 8-10 nodes, each joined to its 2-3 nearest
neighbours, then augmented until connected.
"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

from .exceptions import MapError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeSpec:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class ArcSpec:
    a: int
    b: int
    length: int


class MapGraph:
    """
    Immutable map shared by every state, clone and planner of a game.

    Arcs out of a node are ordered by neighbour id; that order is what the
    genome's arc digit indexes into.
    """

    def __init__(self, nodes, arcs):
        self.nodes = tuple(nodes)
        self.arcs = tuple(arcs)
        self._validate()

        self.node_count = len(self.nodes)
        self._lengths = {}
        adjacency = [[] for _ in range(self.node_count)]
        for arc in self.arcs:
            self._lengths[(arc.a, arc.b)] = arc.length
            self._lengths[(arc.b, arc.a)] = arc.length
            adjacency[arc.a].append((arc.b, arc.length))
            adjacency[arc.b].append((arc.a, arc.length))
        self.neighbours = tuple(tuple(sorted(adj)) for adj in adjacency)
        self.neighbour_ids = tuple(tuple(n for n, _ in adj) for adj in self.neighbours)
        self.max_degree = max(len(adj) for adj in self.neighbours)
        # genome field widths
        self.source_digits = len(str(self.node_count - 1))
        self.arc_digits = 2 if self.max_degree > 10 else 1

    def _validate(self):
        if len(self.nodes) < 2:
            raise MapError("a map needs at least two nodes")
        ids = [node.id for node in self.nodes]
        if ids != list(range(len(ids))):
            raise MapError(f"node ids must be 0..{len(ids) - 1} in order, got {ids}")

        seen = set()
        for arc in self.arcs:
            if arc.a == arc.b:
                raise MapError(f"self-loop at node {arc.a}")
            if not (0 <= arc.a < len(ids) and 0 <= arc.b < len(ids)):
                raise MapError(f"arc ({arc.a}, {arc.b}) references an unknown node")
            pair = (min(arc.a, arc.b), max(arc.a, arc.b))
            if pair in seen:
                raise MapError(f"duplicate arc between {pair[0]} and {pair[1]}")
            if int(arc.length) != arc.length or arc.length < 1:
                raise MapError(f"arc {pair} has non-positive or fractional length {arc.length}")
            seen.add(pair)

        if not nx.is_connected(self.to_networkx()):
            raise MapError("map graph is not connected")

    def arc_length(self, a, b):
        """Length of the arc a-b, or None when the nodes are not adjacent."""
        return self._lengths.get((a, b))

    def is_adjacent(self, a, b):
        return (a, b) in self._lengths

    def to_networkx(self):
        graph = nx.Graph()
        for node in self.nodes:
            graph.add_node(node.id, pos=(node.x, node.y))
        for arc in self.arcs:
            graph.add_edge(arc.a, arc.b, length=arc.length)
        return graph

    def to_json(self):
        return {
            'nodes': [{'id': n.id, 'x': n.x, 'y': n.y} for n in self.nodes],
            'arcs': [{'a': a.a, 'b': a.b, 'length': a.length} for a in self.arcs],
        }

    @classmethod
    def from_json(cls, doc):
        """Build a map from the JSON document {nodes:[{id,x,y}], arcs:[{a,b,length}]}."""
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        try:
            nodes = [NodeSpec(int(n['id']), float(n['x']), float(n['y'])) for n in doc['nodes']]
            arcs = [ArcSpec(int(a['a']), int(a['b']), int(a['length'])) for a in doc['arcs']]
        except (KeyError, TypeError, ValueError) as e:
            raise MapError(f"malformed map document: {e}") from e
        nodes.sort(key=lambda n: n.id)
        return cls(nodes, arcs)

    @classmethod
    def load(cls, path):
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_json(json.load(f))

    def save(self, path):
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), indent=2) + '\n', encoding='utf-8')
        return path

    def __eq__(self, other):
        return isinstance(other, MapGraph) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash((self.nodes, self.arcs))

    def __repr__(self):
        return f"MapGraph(nodes={self.node_count}, arcs={len(self.arcs)})"


def line_map(lengths, spacing=0.1):
    """Nodes 0..n in a row; handy for tests and scripted scenarios."""
    nodes = [NodeSpec(i, min(1.0, i * spacing), 0.5) for i in range(len(lengths) + 1)]
    arcs = [ArcSpec(i, i + 1, length) for i, length in enumerate(lengths)]
    return MapGraph(nodes, arcs)


class MapGenerator:
    """
    Random proximity-graph maps.

    Every node is joined to its 2 or 3 nearest neighbours (degree capped at 6),
    closest cross-component pairs are added until the graph is connected, and
    arc length is ceil(10 x Euclidean distance), at least 2.
    """

    MIN_NODES = 8
    MAX_NODES = 10
    MIN_DEGREE = 2
    MAX_DEGREE = 6
    LENGTH_SCALE = 10
    MIN_LENGTH = 2

    def __init__(self, rng):
        self.rng = rng

    def generate(self, node_count=None):
        if node_count is None:
            node_count = int(self.rng.integers(self.MIN_NODES, self.MAX_NODES + 1))
        if not self.MIN_NODES <= node_count <= self.MAX_NODES:
            raise MapError(f"node count must be in [{self.MIN_NODES}, {self.MAX_NODES}], got {node_count}")

        positions = self.rng.random((node_count, 2))
        distances = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=-1)
        wanted = self.rng.integers(self.MIN_DEGREE, self.MIN_DEGREE + 2, size=node_count)

        graph = nx.Graph()
        graph.add_nodes_from(range(node_count))

        # 1. Nearest-neighbour arcs
        for i in range(node_count):
            for j in np.argsort(distances[i], kind='stable'):
                j = int(j)
                if graph.degree[i] >= wanted[i]:
                    break
                if j == i or graph.has_edge(i, j) or graph.degree[j] >= self.MAX_DEGREE:
                    continue
                graph.add_edge(i, j)

        # 2. Augment with the closest cross-component pair until connected
        while not nx.is_connected(graph):
            components = list(nx.connected_components(graph))
            label = {n: c for c, members in enumerate(components) for n in members}
            best = None
            for i in range(node_count):
                for j in range(i + 1, node_count):
                    if label[i] == label[j]:
                        continue
                    if graph.degree[i] >= self.MAX_DEGREE or graph.degree[j] >= self.MAX_DEGREE:
                        continue
                    if best is None or distances[i, j] < distances[best]:
                        best = (i, j)
            if best is None:
                raise MapError("could not connect map components within the degree cap")
            graph.add_edge(*best)

        nodes = [NodeSpec(i, float(positions[i, 0]), float(positions[i, 1])) for i in range(node_count)]
        arcs = [
            ArcSpec(min(i, j), max(i, j), self._arc_length(distances[i, j]))
            for i, j in sorted((min(e), max(e)) for e in graph.edges)
        ]
        logger.debug("Generated map with %d nodes and %d arcs", node_count, len(arcs))
        return MapGraph(nodes, arcs)

    def _arc_length(self, distance):
        length = math.ceil(self.LENGTH_SCALE * float(distance))
        return max(self.MIN_LENGTH, length)


def generate_map(rng, node_count=None):
    """Shortcut used by the experiment runners."""
    return MapGenerator(rng).generate(node_count)
