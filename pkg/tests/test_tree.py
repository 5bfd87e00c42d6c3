"""Tail attachment, operator assembly, restriction, and exports."""

import csv
import io
import itertools

import numpy as np
import pytest

from nandtree.formula import generate_balanced, normalize_even_depth, parse_formula, tree_stats
from nandtree.tree import (
    SizeCapError,
    TailLengthWarning,
    attach_tail,
    build_hamiltonian,
    hamiltonian_to_csv,
    hamiltonian_to_json_dict,
    restrict_to_subtree,
    vertex_table,
)

MIXED = "N(N(x1,x2),N(N(N(x3,x4),N(x5,x6)),x7))"  # 7 leaves, depths 2 and 4


def _balanced_at(k, mode="balanced"):
    return attach_tail(normalize_even_depth(generate_balanced(k)), mode)


def test_tail_length_balanced_n4():
    at = _balanced_at(2)
    assert at.tail == 4
    assert at.dim == 7 + 4


def test_tail_length_general_example():
    tree = normalize_even_depth(parse_formula("N(N(x1,x2),x3)"))
    at = attach_tail(tree, "general")
    assert at.num_leaves == 4 and at.depth == 3
    assert at.tail == 8  # 2 * ceil(sqrt(12))


def test_tail_length_n1():
    at = _balanced_at(0)
    assert at.tail == 2 and at.dim == 3


def test_attach_tail_requires_normalized():
    with pytest.raises(ValueError, match="normalize"):
        attach_tail(generate_balanced(1), "balanced")


def test_balanced_mode_requires_complete_tree():
    tree = normalize_even_depth(parse_formula(MIXED))
    with pytest.raises(ValueError, match="complete"):
        attach_tail(tree, "balanced")


def test_tail_override_validation():
    tree = normalize_even_depth(generate_balanced(2))
    with pytest.raises(ValueError, match="even"):
        attach_tail(tree, "balanced", override_t=5)
    with pytest.warns(TailLengthWarning):
        attach_tail(tree, "balanced", override_t=2)
    at = attach_tail(tree, "balanced", override_t=10)
    assert at.tail == 10


def test_dimension_cap():
    tree = normalize_even_depth(generate_balanced(3))
    with pytest.raises(SizeCapError):
        attach_tail(tree, "balanced", dimension_cap=10)


def test_balanced_weights_are_one():
    at = _balanced_at(2)
    h = build_hamiltonian(at)
    weights = h[np.nonzero(h)]
    assert np.all(weights == 1.0)


def test_unbalanced_weights():
    tree = normalize_even_depth(parse_formula(MIXED))
    at = attach_tail(tree, "general")
    h = build_hamiltonian(at)
    m, _ = tree_stats(tree)
    root = tree.root
    # root children have leaf counts 2 and 5
    kids = sorted(tree.nodes[root].children, key=lambda c: m[c])
    assert [int(m[c]) for c in kids] == [2, 5]
    w_small = h[at.pos[root], at.pos[kids[0]]]
    w_big = h[at.pos[root], at.pos[kids[1]]]
    # even-level parent: (m_parent / (2 m_child)) ** 0.25
    assert w_small == pytest.approx((7 / 4) ** 0.25, abs=1e-15)
    assert w_big == pytest.approx((7 / 10) ** 0.25, abs=1e-15)
    # odd-level parent: (2 m_child / m_parent) ** 0.25
    big = kids[1]
    sub = sorted(tree.nodes[big].children, key=lambda c: m[c])
    assert [int(m[c]) for c in sub] == [1, 4]
    assert h[at.pos[big], at.pos[sub[1]]] == pytest.approx((8 / 5) ** 0.25, abs=1e-15)


def test_hamiltonian_exact_symmetry_and_sparsity():
    tree = normalize_even_depth(parse_formula(MIXED))
    at = attach_tail(tree, "general")
    h = build_hamiltonian(at)
    assert np.array_equal(h, h.T)
    # sparsity pattern equals adjacency: tail path plus tree edges
    expected = np.zeros_like(h, dtype=bool)
    for i in range(at.tail):
        expected[i, i + 1] = expected[i + 1, i] = True
    for u, node in enumerate(tree.nodes):
        for c in node.children:
            expected[at.pos[u], at.pos[c]] = expected[at.pos[c], at.pos[u]] = True
    assert np.array_equal(h != 0, expected)
    # tail edges carry exactly weight 1
    for i in range(at.tail):
        assert h[i, i + 1] == 1.0


def test_restrict_to_subtree():
    at = _balanced_at(2)
    h = build_hamiltonian(at)
    tree = at.tree
    full = restrict_to_subtree(h, at, tree.root)
    assert full.shape == (7, 7)
    leaf = next(iter(tree.leaves()))
    assert np.array_equal(restrict_to_subtree(h, at, leaf), np.zeros((1, 1)))
    mid = tree.nodes[tree.root].children[0]
    sub = restrict_to_subtree(h, at, mid)
    assert sub.shape == (3, 3)
    assert np.count_nonzero(sub) == 4 and set(np.unique(sub)) == {0.0, 1.0}
    with pytest.raises(ValueError):
        restrict_to_subtree(h, at, len(tree.nodes) + 1)


def test_csv_export_roundtrip():
    at = _balanced_at(1)
    h = build_hamiltonian(at)
    text = hamiltonian_to_csv(h)
    rows = list(csv.DictReader(io.StringIO(text)))
    rebuilt = np.zeros_like(h)
    for row in rows:
        u, v, w = int(row["u"]), int(row["v"]), float(row["weight"])
        rebuilt[u, v] = rebuilt[v, u] = w
    assert np.array_equal(rebuilt, h)


def test_json_export():
    at = _balanced_at(0)
    h = build_hamiltonian(at)
    d = hamiltonian_to_json_dict(h)
    assert d["dim"] == 3
    assert sorted(tuple(e[:2]) for e in d["entries"]) == [(0, 1), (1, 2)]


def test_vertex_table():
    at = _balanced_at(1)
    table = vertex_table(at)
    assert len(table) == at.dim
    roles = [r["role"] for r in table]
    assert roles.count("tail") == at.tail
    assert roles.count("root") == 1
    leaf_rows = [r for r in table if r["role"] == "leaf"]
    assert {r["var_index"] for r in leaf_rows} == {1, 2}
    assert all(r["negated"] for r in leaf_rows)  # height-1 tree normalizes to negated pairs
    assert all(r["level"] % 2 == 0 for r in leaf_rows)


def test_levels_and_leaf_values():
    tree = normalize_even_depth(parse_formula("N(N(x1,x2),x3)"))
    at = attach_tail(tree, "general")
    for bits in itertools.product((0, 1), repeat=3):
        vals = at.leaf_values(bits)
        for coord, var, neg in zip(at.leaf_coords, at.leaf_vars, at.leaf_negated):
            assert vals[list(at.leaf_coords).index(coord)] == bits[var - 1] ^ neg
