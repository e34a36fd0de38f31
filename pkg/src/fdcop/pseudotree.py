"""DFS pseudo-tree construction over the constraint graph."""
from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from .errors import StructureError


@dataclass(frozen=True)
class PseudoTree:
    root: str
    parent: dict[str, str]
    pseudo_parents: dict[str, frozenset[str]]
    children: dict[str, tuple[str, ...]]
    pseudo_children: dict[str, frozenset[str]]
    separator: dict[str, frozenset[str]]
    induced_width: int

    def post_order(self) -> list[str]:
        """Children before parents; children visited in ascending id order."""
        out = []
        stack = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
            else:
                stack.append((node, True))
                for child in reversed(self.children[node]):
                    stack.append((child, False))
        return out

    def pre_order(self) -> list[str]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            for child in reversed(self.children[node]):
                stack.append(child)
        return out

    def ancestors(self, node: str) -> list[str]:
        out = []
        while node != self.root:
            node = self.parent[node]
            out.append(node)
        return out

    def is_tree(self) -> bool:
        return all(not pp for pp in self.pseudo_parents.values())


def build(graph: nx.Graph, root_choice: str | None = None) -> PseudoTree:
    """Deterministic DFS pseudo-tree.

    The root defaults to a max-degree node (ties to the smallest id) and
    neighbors are visited in ascending id order, so the same graph always
    yields the same arrangement.
    """
    if graph.number_of_nodes() == 0:
        raise StructureError("graph has no nodes")
    if not nx.is_connected(graph):
        raise StructureError("pseudo-tree requires a connected constraint graph")

    if root_choice is None:
        root = min(graph.nodes, key=lambda v: (-graph.degree(v), v))
    else:
        if root_choice not in graph:
            raise StructureError(f"root {root_choice!r} is not a graph node")
        root = root_choice

    parent: dict[str, str] = {}
    children: dict[str, list[str]] = {v: [] for v in graph.nodes}
    visited: dict[str, int] = {}  # node -> DFS depth
    pseudo_parents: dict[str, set[str]] = {v: set() for v in graph.nodes}
    pseudo_children: dict[str, set[str]] = {v: set() for v in graph.nodes}

    # iterative DFS with explicit neighbor iterators for deterministic order
    visited[root] = 0
    stack = [(root, iter(sorted(graph.neighbors(root))))]
    while stack:
        node, neighbors = stack[-1]
        advanced = False
        for nb in neighbors:
            if nb not in visited:
                visited[nb] = visited[node] + 1
                parent[nb] = node
                children[node].append(nb)
                stack.append((nb, iter(sorted(graph.neighbors(nb)))))
                advanced = True
                break
            if nb != parent.get(node) and nb != node:
                # backedge: connects node with an ancestor or a descendant
                if visited[nb] < visited[node] and nb not in _path_to_root_cache(parent, node, root):
                    # non-branch edge would violate the pseudo-tree property;
                    # DFS trees never produce cross edges on undirected graphs
                    raise StructureError(f"cross edge {node}-{nb} in DFS tree")
                if visited[nb] < visited[node]:
                    pseudo_parents[node].add(nb)
                    pseudo_children[nb].add(node)
        if not advanced:
            stack.pop()

    separator: dict[str, frozenset[str]] = {}
    for node in _post_order(children, root):
        sep = set(pseudo_parents[node])
        if node != root:
            sep.add(parent[node])
        for child in children[node]:
            sep |= separator[child]
        sep.discard(node)
        separator[node] = frozenset(sep)

    width = max((len(separator[v]) for v in graph.nodes if v != root), default=0)
    return PseudoTree(
        root=root,
        parent=dict(parent),
        pseudo_parents={v: frozenset(s) for v, s in pseudo_parents.items()},
        children={v: tuple(c) for v, c in children.items()},
        pseudo_children={v: frozenset(s) for v, s in pseudo_children.items()},
        separator=separator,
        induced_width=width,
    )


def _post_order(children: dict[str, list[str]], root: str) -> list[str]:
    out = []
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
        else:
            stack.append((node, True))
            for child in reversed(children[node]):
                stack.append((child, False))
    return out


def _path_to_root_cache(parent: dict[str, str], node: str, root: str) -> set[str]:
    out = set()
    while node != root:
        node = parent[node]
        out.add(node)
    return out
