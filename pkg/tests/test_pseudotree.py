"""Pseudo-tree construction over constraint graphs."""
import networkx as nx
import pytest

from fdcop import generators, model, pseudotree
from fdcop.errors import StructureError


def path3():
    g = nx.Graph()
    g.add_edges_from([("x1", "x2"), ("x2", "x3")])
    return g


class TestBuild:
    def test_path_rooted_at_max_degree(self):
        tree = pseudotree.build(path3())
        assert tree.root == "x2"
        assert sorted(tree.children["x2"]) == ["x1", "x3"]
        assert tree.separator["x1"] == frozenset({"x2"})
        assert tree.separator["x3"] == frozenset({"x2"})
        assert tree.induced_width == 1
        assert tree.is_tree()

    def test_triangle(self):
        g = nx.Graph()
        g.add_edges_from([("x1", "x2"), ("x2", "x3"), ("x1", "x3")])
        tree = pseudotree.build(g)
        n_tree_edges = len(tree.parent)
        n_backedges = sum(len(pp) for pp in tree.pseudo_parents.values())
        assert n_tree_edges == 2
        assert n_backedges == 1
        assert tree.induced_width == 2
        assert not tree.is_tree()

    def test_same_branch_property(self):
        p = generators.gen_graph(20, 0.2, 4)
        g = model.build_constraint_graph(p)
        tree = pseudotree.build(g)
        for u, v in g.edges():
            anc_u = set(tree.ancestors(u))
            anc_v = set(tree.ancestors(v))
            assert u in anc_v or v in anc_u, f"edge {u}-{v} spans branches"

    def test_separator_recurrence(self):
        p = generators.gen_graph(15, 0.25, 2)
        tree = pseudotree.build(model.build_constraint_graph(p))
        for node in tree.parent:
            expected = set(tree.pseudo_parents[node])
            expected.add(tree.parent[node])
            for child in tree.children[node]:
                expected |= set(tree.separator[child])
            expected.discard(node)
            assert tree.separator[node] == frozenset(expected)

    def test_determinism(self):
        p = generators.gen_graph(12, 0.3, 9)
        g = model.build_constraint_graph(p)
        assert pseudotree.build(g) == pseudotree.build(g)

    def test_acyclic_width_one(self):
        p = generators.gen_tree(15, 3)
        tree = pseudotree.build(model.build_constraint_graph(p))
        assert tree.is_tree()
        assert tree.induced_width == 1
        for node in tree.parent:
            assert tree.separator[node] == frozenset({tree.parent[node]})

    def test_explicit_root(self):
        tree = pseudotree.build(path3(), root_choice="x1")
        assert tree.root == "x1"
        with pytest.raises(StructureError):
            pseudotree.build(path3(), root_choice="nope")

    def test_disconnected_rejected(self):
        g = nx.Graph()
        g.add_edge("a", "b")
        g.add_edge("c", "d")
        with pytest.raises(StructureError):
            pseudotree.build(g)

    def test_empty_rejected(self):
        with pytest.raises(StructureError):
            pseudotree.build(nx.Graph())


class TestTraversals:
    def test_orders_cover_all_nodes(self):
        p = generators.gen_graph(10, 0.3, 1)
        tree = pseudotree.build(model.build_constraint_graph(p))
        post = tree.post_order()
        pre = tree.pre_order()
        assert sorted(post) == sorted(p.variables)
        assert sorted(pre) == sorted(p.variables)
        assert post[-1] == tree.root
        assert pre[0] == tree.root
        # children precede parents in post-order
        pos = {v: i for i, v in enumerate(post)}
        for child, parent in tree.parent.items():
            assert pos[child] < pos[parent]
