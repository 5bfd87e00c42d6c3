"""Tail attachment, vertex indexing, and the weighted adjacency operator.

The evaluation graph is the normalized formula tree with an even-length path
("tail") grafted onto the root. Matrix coordinates are laid out as: 0 = root,
1..t = tail vertices in order, then the remaining tree vertices in BFS order.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .formula import FormulaTree, is_complete_balanced, node_depths, tree_stats

__all__ = [
    "AugmentedTree",
    "SizeCapError",
    "TailLengthWarning",
    "attach_tail",
    "tail_length",
    "build_hamiltonian",
    "restrict_to_subtree",
    "hamiltonian_to_csv",
    "hamiltonian_to_json_dict",
    "vertex_table",
]

DEFAULT_DIMENSION_CAP = 2048


class SizeCapError(ValueError):
    """Instance dimension exceeds the configured cap."""


class TailLengthWarning(UserWarning):
    """Tail override is shorter than the start-state overlap bound requires."""


@dataclass(frozen=True)
class AugmentedTree:
    """Normalized tree plus tail, with the coordinate maps every later stage uses.

    ``pos[node_id]`` is the matrix coordinate of a tree vertex; ``level[c]``
    is the root distance of coordinate ``c`` (tail vertex i has level i), whose
    parity drives both the edge weights and the odd-level support checks.
    """

    tree: FormulaTree
    mode: str  # "balanced" | "general"
    tail: int
    num_leaves: int  # leaf count N of the normalized tree
    depth: int  # level count d of the normalized tree (a bare leaf has depth 1)
    pos: np.ndarray  # node id -> coordinate
    level: np.ndarray  # coordinate -> distance from root
    leaf_coords: np.ndarray  # coordinates of leaf vertices
    leaf_vars: np.ndarray  # var_index per entry of leaf_coords
    leaf_negated: np.ndarray  # negation flag per entry of leaf_coords

    @property
    def dim(self) -> int:
        return len(self.tree.nodes) + self.tail

    def leaf_values(self, assignment) -> np.ndarray:
        """Effective 0/1 value carried by each leaf coordinate."""
        bits = np.asarray(assignment, dtype=np.int64)
        return bits[self.leaf_vars - 1] ^ self.leaf_negated

    def subtree_coords(self, v: int) -> np.ndarray:
        """Sorted coordinates of the subtree rooted at tree node ``v``."""
        if not (0 <= v < len(self.tree.nodes)):
            raise ValueError(f"node {v} out of range (tail vertices have no subtree)")
        out = []
        stack = [v]
        while stack:
            u = stack.pop()
            out.append(int(self.pos[u]))
            stack.extend(self.tree.nodes[u].children)
        return np.array(sorted(out), dtype=np.int64)


def tail_length(num_leaves: int, depth: int, mode: str) -> int:
    """Default tail length: ``2*ceil(sqrt(N))`` balanced, ``2*ceil(sqrt(N*d))`` general."""
    if mode == "balanced":
        return 2 * math.ceil(math.sqrt(num_leaves))
    if mode == "general":
        return 2 * math.ceil(math.sqrt(num_leaves * depth))
    raise ValueError(f"mode must be 'balanced' or 'general', got {mode!r}")


def attach_tail(
    tree: FormulaTree,
    mode: str = "general",
    override_t: int | None = None,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
) -> AugmentedTree:
    """Attach the tail and freeze coordinates.

    The tree must already be normalized (all leaves at even depth). An
    explicit ``override_t`` must be even; one below ``sqrt(N)`` (balanced) or
    ``sqrt(N*d)`` (general) voids the start-state overlap guarantee and only
    warns (:class:`TailLengthWarning`).
    """
    depth_arr = node_depths(tree)
    for i in tree.leaves():
        if depth_arr[i] % 2 != 0:
            raise ValueError(f"leaf node {i} at odd depth {depth_arr[i]}: normalize first")
    m, d = tree_stats(tree)
    num_leaves = int(m[tree.root])
    depth = int(d[tree.root])
    if mode == "balanced" and not is_complete_balanced(tree):
        raise ValueError("balanced mode requires a complete binary tree")
    t = tail_length(num_leaves, depth, mode)
    if override_t is not None:
        if override_t <= 0 or override_t % 2 != 0:
            raise ValueError(f"tail override must be a positive even integer, got {override_t}")
        floor = math.sqrt(num_leaves) if mode == "balanced" else math.sqrt(num_leaves * depth)
        if override_t <= floor:
            warnings.warn(
                f"tail override {override_t} is not greater than {floor:.3f}; "
                "the start-state overlap bound no longer applies",
                TailLengthWarning,
                stacklevel=2,
            )
        t = override_t

    n_nodes = len(tree.nodes)
    if n_nodes + t > dimension_cap:
        raise SizeCapError(f"dimension {n_nodes + t} exceeds cap {dimension_cap}")

    pos = np.full(n_nodes, -1, dtype=np.int64)
    level = np.zeros(n_nodes + t, dtype=np.int64)
    pos[tree.root] = 0
    level[1 : t + 1] = np.arange(1, t + 1)  # tail vertex i sits at level i
    nxt = t + 1
    queue = [tree.root]
    while queue:
        u = queue.pop(0)
        for c in tree.nodes[u].children:
            pos[c] = nxt
            level[nxt] = depth_arr[c]
            nxt += 1
            queue.append(c)

    leaf_ids = [i for i in tree.leaves()]
    leaf_coords = np.array([pos[i] for i in leaf_ids], dtype=np.int64)
    leaf_vars = np.array([tree.nodes[i].var_index for i in leaf_ids], dtype=np.int64)
    leaf_negated = np.array([tree.nodes[i].negated for i in leaf_ids], dtype=np.int64)

    return AugmentedTree(
        tree=tree,
        mode=mode,
        tail=t,
        num_leaves=num_leaves,
        depth=depth,
        pos=pos,
        level=level,
        leaf_coords=leaf_coords,
        leaf_vars=leaf_vars,
        leaf_negated=leaf_negated,
    )


def build_hamiltonian(at: AugmentedTree) -> np.ndarray:
    """Dense symmetric weighted adjacency matrix of the augmented tree.

    Edge weights: a tree edge from a parent at even level to child c carries
    ``(m_p / (2 m_c)) ** 0.25``; from an odd-level parent, ``(2 m_c / m_p) ** 0.25``.
    This parity split is the one under which every certificate state built in
    :mod:`nandtree.certificates` lies exactly in the kernel; on a complete
    balanced tree (``m_p = 2 m_c``) both expressions collapse to weight 1.
    Tail edges carry weight 1 and non-edges are exactly 0.
    """
    tree = at.tree
    m, _ = tree_stats(tree)
    depth = node_depths(tree)
    h = np.zeros((at.dim, at.dim))
    for u, node in enumerate(tree.nodes):
        pu = at.pos[u]
        for c in node.children:
            pc = at.pos[c]
            if depth[u] % 2 == 0:
                w = (m[u] / (2.0 * m[c])) ** 0.25
            else:
                w = (2.0 * m[c] / m[u]) ** 0.25
            h[pu, pc] = h[pc, pu] = w
    for i in range(at.tail):
        h[i, i + 1] = h[i + 1, i] = 1.0
    return h


def restrict_to_subtree(h: np.ndarray, at: AugmentedTree, v: int) -> np.ndarray:
    """Principal submatrix of ``h`` on the subtree rooted at tree node ``v``."""
    coords = at.subtree_coords(v)
    return h[np.ix_(coords, coords)]


def hamiltonian_to_csv(h: np.ndarray) -> str:
    """Sparse triplet CSV ``u,v,weight`` over the upper triangle."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["u", "v", "weight"])
    rows, cols = np.nonzero(np.triu(h))
    for u, v in zip(rows, cols):
        writer.writerow([int(u), int(v), repr(float(h[u, v]))])
    return buf.getvalue()


def hamiltonian_to_json_dict(h: np.ndarray) -> dict:
    """Debug export: ``{"dim": n, "entries": [(u, v, w), ...]}`` upper triangle."""
    rows, cols = np.nonzero(np.triu(h))
    return {
        "dim": int(h.shape[0]),
        "entries": [[int(u), int(v), float(h[u, v])] for u, v in zip(rows, cols)],
    }


def vertex_table(at: AugmentedTree) -> list[dict]:
    """Human-readable labeling of every matrix coordinate."""
    m, d = tree_stats(at.tree)
    inverse = {int(at.pos[i]): i for i in range(len(at.tree.nodes))}
    rows = []
    for coord in range(at.dim):
        if 1 <= coord <= at.tail:
            rows.append(
                {"coord": coord, "role": "tail", "tail_index": coord, "level": int(at.level[coord])}
            )
            continue
        node_id = inverse[coord]
        node = at.tree.nodes[node_id]
        row = {
            "coord": coord,
            "role": "leaf" if node.is_leaf else ("root" if node_id == at.tree.root else "internal"),
            "node": node_id,
            "level": int(at.level[coord]),
            "leaf_count": int(m[node_id]),
            "depth": int(d[node_id]),
        }
        if node.is_leaf:
            row["var_index"] = node.var_index
            row["negated"] = bool(node.negated)
        rows.append(row)
    return rows
