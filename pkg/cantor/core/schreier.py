"""
Pointed, generator-labelled Schreier graphs.

Graphs are stored as ``networkx.MultiDiGraph`` objects whose edge keys are
generator names. Every vertex has at most one out-edge and one in-edge per
label, so a breadth-first walk from the basepoint in fixed generator order
numbers the vertices canonically; the canonical edge list decides pointed
labelled isomorphism and is hashed for classing.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import deque
from pathlib import Path
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import networkx as nx

from cantor.utils.helpers import format_digits

logger = logging.getLogger(__name__)


class SchreierGraph:
    """A pointed labelled graph; ``radius`` is None for a complete orbit graph."""

    def __init__(
        self,
        graph: nx.MultiDiGraph,
        basepoint: Hashable,
        generators: Sequence[str],
        radius: Optional[int] = None,
        depth: Optional[int] = None,
    ):
        if basepoint not in graph:
            raise ValueError("basepoint is not a vertex of the graph")
        self.graph = graph
        self.basepoint = basepoint
        self.generators = tuple(generators)
        self.radius = radius
        self.depth = depth
        self._canonical: Optional[dict] = None

    @classmethod
    def from_edges(
        cls,
        vertices: Sequence[Hashable],
        edges: Sequence[Tuple[Hashable, str, Hashable]],
        basepoint: Hashable,
        generators: Sequence[str],
        radius: Optional[int] = None,
        depth: Optional[int] = None,
    ) -> "SchreierGraph":
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(vertices)
        for u, label, v in edges:
            graph.add_edge(u, v, key=label, label=label)
        return cls(graph, basepoint, generators, radius=radius, depth=depth)

    @property
    def vertices(self) -> List[Hashable]:
        return list(self.graph.nodes)

    def edges(self) -> List[Tuple[Hashable, str, Hashable]]:
        return [(u, key, v) for u, v, key in self.graph.edges(keys=True)]

    def target(self, vertex: Hashable, label: str) -> Optional[Hashable]:
        for _, v, key in self.graph.out_edges(vertex, keys=True):
            if key == label:
                return v
        return None

    def source(self, vertex: Hashable, label: str) -> Optional[Hashable]:
        for u, _, key in self.graph.in_edges(vertex, keys=True):
            if key == label:
                return u
        return None

    def distances(self, cutoff: Optional[int] = None) -> Dict[Hashable, int]:
        undirected = self.graph.to_undirected(as_view=True)
        return nx.single_source_shortest_path_length(undirected, self.basepoint, cutoff=cutoff)

    def ball(self, r: int) -> "SchreierGraph":
        """Vertices within distance r, and the edges touching a vertex closer than r."""
        if self.radius is not None and r > self.radius:
            raise ValueError(f"graph only holds a ball of radius {self.radius}")
        dist = self.distances(cutoff=r)
        edges = [
            (u, key, v)
            for u, v, key in self.graph.edges(keys=True)
            if u in dist and v in dist and min(dist[u], dist[v]) < r
        ]
        ordered = sorted(dist, key=lambda n: (dist[n], repr(n)))
        return SchreierGraph.from_edges(ordered, edges, self.basepoint, self.generators, radius=r, depth=self.depth)

    def rebased(self, vertex: Hashable) -> "SchreierGraph":
        """Same graph pointed at ``vertex``; a stored ball shrinks by the distance moved."""
        radius = self.radius
        if radius is not None:
            radius -= self.distances()[vertex]
            if radius < 0:
                raise ValueError("new basepoint lies outside the stored ball")
        return SchreierGraph(self.graph, vertex, self.generators, radius=radius, depth=self.depth)

    def canonical_numbering(self) -> Dict[Hashable, int]:
        number = {self.basepoint: 0}
        queue = deque([self.basepoint])
        while queue:
            u = queue.popleft()
            for label in self.generators:
                for w in (self.target(u, label), self.source(u, label)):
                    if w is not None and w not in number:
                        number[w] = len(number)
                        queue.append(w)
        return number

    def canonical_form(self) -> dict:
        if self._canonical is None:
            number = self.canonical_numbering()
            edges = sorted(
                (number[u], key, number[v])
                for u, v, key in self.graph.edges(keys=True)
                if u in number and v in number
            )
            self._canonical = {
                "generators": list(self.generators),
                "vertices": len(number),
                "edges": [list(e) for e in edges],
            }
        return self._canonical

    def canonical_hash(self) -> str:
        payload = json.dumps(self.canonical_form(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def is_isomorphic_pointed(self, other: "SchreierGraph") -> bool:
        return self.canonical_form() == other.canonical_form()

    def to_json_dict(self) -> dict:
        number = self.canonical_numbering()
        form = dict(self.canonical_form())
        form["labels"] = [format_digits(v) for v, _ in sorted(number.items(), key=lambda item: item[1])]
        form["hash"] = self.canonical_hash()
        form["radius"] = self.radius
        form["depth"] = self.depth
        return form

    def to_dot(self, name: str = "schreier") -> str:
        number = self.canonical_numbering()
        lines = [f"digraph {name} {{"]
        for vertex, i in sorted(number.items(), key=lambda item: item[1]):
            shape = "doublecircle" if i == 0 else "circle"
            lines.append(f'  v{i} [label="{format_digits(vertex)}", shape={shape}];')
        for u, label, v in self.canonical_form()["edges"]:
            lines.append(f'  v{u} -> v{v} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __len__(self) -> int:
        return self.graph.number_of_nodes()


def export_dot(graph: SchreierGraph, path: str, name: str = "schreier") -> str:
    """Write the DOT rendering of ``graph`` to ``path`` and return the path."""
    Path(path).write_text(graph.to_dot(name), encoding="utf-8")
    return path
