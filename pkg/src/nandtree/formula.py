"""Read-once binary NAND formulas: parsing, validation, normalization, evaluation.

The concrete syntax is ``F := "x" DIGITS | "N(" F "," F ")"`` with whitespace
ignored; variable indices are 1-based and must be contiguous. Trees are stored
as immutable node lists in postorder (children always precede their parent),
which lets every bottom-up computation run as a single forward scan without
recursion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

__all__ = [
    "Node",
    "FormulaTree",
    "FormulaSyntaxError",
    "FormulaValidationError",
    "parse_formula",
    "format_formula",
    "parse_assignment",
    "evaluate_classical",
    "evaluate_and_or",
    "normalize_even_depth",
    "generate_balanced",
    "tree_stats",
    "node_depths",
    "subtree_values",
    "is_complete_balanced",
]

MAX_LEAVES = 1024


class FormulaSyntaxError(ValueError):
    """Malformed formula text; ``position`` is the offending character index."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class FormulaValidationError(ValueError):
    """Structurally invalid tree (read-once violation, index gaps, ...)."""


@dataclass(frozen=True)
class Node:
    """A single vertex: either a leaf carrying a variable or a NAND gate."""

    kind: str  # "leaf" | "internal"
    children: tuple[int, ...] = ()
    var_index: int | None = None
    negated: bool = False

    @property
    def is_leaf(self) -> bool:
        return self.kind == "leaf"


@dataclass(frozen=True)
class FormulaTree:
    """Immutable read-once NAND formula.

    ``nodes`` is in postorder: children precede parents and ``root`` is the
    last index. ``num_vars`` is the count of distinct variables, which differs
    from the leaf count only after even-depth normalization.
    """

    nodes: tuple[Node, ...]
    root: int = field(default=-1)

    def __post_init__(self):
        if self.root < 0:
            object.__setattr__(self, "root", len(self.nodes) - 1)

    @property
    def num_leaves(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    @property
    def num_vars(self) -> int:
        return len({n.var_index for n in self.nodes if n.is_leaf})

    def leaves(self) -> Iterator[int]:
        return (i for i, n in enumerate(self.nodes) if n.is_leaf)

    def validate(self) -> None:
        """Check arity, acyclicity/postorder, and the read-once rule.

        Duplicate variable indices are tolerated only in the normalized form:
        exactly two leaves sharing an index, both negated (the split of one
        original odd-depth leaf).
        """
        if not self.nodes:
            raise FormulaValidationError("empty tree")
        if self.root != len(self.nodes) - 1:
            raise FormulaValidationError("root must be the last node in postorder")
        seen_as_child = set()
        for i, n in enumerate(self.nodes):
            if n.is_leaf:
                if n.children:
                    raise FormulaValidationError(f"leaf {i} has children")
                if n.var_index is None or n.var_index < 1:
                    raise FormulaValidationError(f"leaf {i} lacks a positive var_index")
            else:
                if len(n.children) != 2:
                    raise FormulaValidationError(f"internal node {i} must have exactly 2 children")
                for c in n.children:
                    if not (0 <= c < i):
                        raise FormulaValidationError(f"node {i} references child {c} out of postorder")
                    if c in seen_as_child:
                        raise FormulaValidationError(f"node {c} has two parents")
                    seen_as_child.add(c)
        if len(seen_as_child) != len(self.nodes) - 1:
            raise FormulaValidationError("tree is not connected to a single root")
        parent: dict[int, int] = {}
        for i, n in enumerate(self.nodes):
            for c in n.children:
                parent[c] = i
        by_var: dict[int, list[int]] = {}
        for i, n in enumerate(self.nodes):
            if n.is_leaf:
                by_var.setdefault(n.var_index, []).append(i)
        indices = sorted(by_var)
        if indices != list(range(1, len(indices) + 1)):
            raise FormulaValidationError(f"variable indices {indices} are not contiguous from 1")
        for v, group in by_var.items():
            if len(group) == 1:
                continue
            # a duplicated variable must be the sibling pair a normalization
            # split produced: both negated, under the same gate
            if (
                len(group) == 2
                and all(self.nodes[i].negated for i in group)
                and parent.get(group[0]) == parent.get(group[1])
            ):
                continue
            raise FormulaValidationError(f"variable x{v} appears on {len(group)} leaves: read-once violation")


def parse_formula(text: str) -> FormulaTree:
    """Parse formula text into a validated :class:`FormulaTree`.

    Iterative descent (no recursion limit on nesting depth). Raises
    :class:`FormulaSyntaxError` with the character position on bad input and
    :class:`FormulaValidationError` on read-once or index-contiguity
    violations.
    """
    nodes: list[Node] = []
    # Each stack frame is the list of completed child node ids of an open "N(".
    stack: list[list[int]] = []
    pos = 0
    n = len(text)

    def skip_ws(p: int) -> int:
        while p < n and text[p].isspace():
            p += 1
        return p

    completed: int | None = None
    while True:
        pos = skip_ws(pos)
        if completed is None:
            # expect the start of a formula
            if pos >= n:
                raise FormulaSyntaxError("unexpected end of input, expected formula", pos)
            ch = text[pos]
            if ch == "x":
                start = pos
                pos += 1
                d0 = pos
                while pos < n and text[pos].isdigit():
                    pos += 1
                if pos == d0:
                    raise FormulaSyntaxError("expected digits after 'x'", pos)
                var = int(text[d0:pos])
                if var < 1:
                    raise FormulaSyntaxError("variable indices start at 1", start)
                nodes.append(Node("leaf", var_index=var))
                completed = len(nodes) - 1
            elif ch == "N":
                pos += 1
                pos = skip_ws(pos)
                if pos >= n or text[pos] != "(":
                    raise FormulaSyntaxError("expected '(' after 'N'", pos)
                pos += 1
                stack.append([])
            else:
                raise FormulaSyntaxError(f"unexpected character {ch!r}", pos)
        else:
            # a subformula just completed; attach it
            if not stack:
                if pos != n:
                    raise FormulaSyntaxError("trailing input after formula", pos)
                tree = FormulaTree(tuple(nodes))
                tree.validate()
                return tree
            frame = stack[-1]
            frame.append(completed)
            completed = None
            pos = skip_ws(pos)
            if len(frame) == 1:
                if pos >= n or text[pos] != ",":
                    raise FormulaSyntaxError("expected ','", pos)
                pos += 1
            else:
                if pos >= n or text[pos] != ")":
                    raise FormulaSyntaxError("expected ')'", pos)
                pos += 1
                stack.pop()
                nodes.append(Node("internal", children=tuple(frame)))
                completed = len(nodes) - 1


def format_formula(tree: FormulaTree) -> str:
    """Render canonical text; ``parse_formula(format_formula(t))`` round-trips.

    A gate whose children are two negated leaves of the same variable is the
    normalized split of one original leaf and prints back as that leaf (the
    gate computes exactly the original variable).
    """
    out: dict[int, str] = {}
    for i, node in enumerate(tree.nodes):
        if node.is_leaf:
            out[i] = None if node.negated else f"x{node.var_index}"
        else:
            a, b = node.children
            na, nb = tree.nodes[a], tree.nodes[b]
            if (
                na.is_leaf
                and nb.is_leaf
                and na.negated
                and nb.negated
                and na.var_index == nb.var_index
            ):
                out[i] = f"x{na.var_index}"
                continue
            if out[a] is None or out[b] is None:
                raise FormulaValidationError("negated leaf outside a normalized pair has no text form")
            out[i] = f"N({out[a]},{out[b]})"
    text = out[tree.root]
    if text is None:
        raise FormulaValidationError("negated leaf outside a normalized pair has no text form")
    return text


def parse_assignment(bits: str, num_vars: int) -> tuple[int, ...]:
    """Parse a bitstring like ``"0110"`` (most significant bit is x1)."""
    bits = bits.strip()
    if len(bits) != num_vars or any(c not in "01" for c in bits):
        raise FormulaValidationError(
            f"assignment must be a {num_vars}-character bitstring of 0/1, got {bits!r}"
        )
    return tuple(int(c) for c in bits)


def _check_assignment(tree: FormulaTree, assignment) -> tuple[int, ...]:
    a = tuple(int(b) for b in assignment)
    if len(a) != tree.num_vars:
        raise FormulaValidationError(
            f"assignment length {len(a)} does not match variable count {tree.num_vars}"
        )
    if any(b not in (0, 1) for b in a):
        raise FormulaValidationError("assignment entries must be 0 or 1")
    return a


def subtree_values(tree: FormulaTree, assignment) -> np.ndarray:
    """NAND value of every subtree, one forward postorder scan."""
    a = _check_assignment(tree, assignment)
    vals = np.zeros(len(tree.nodes), dtype=np.int8)
    for i, n in enumerate(tree.nodes):
        if n.is_leaf:
            vals[i] = a[n.var_index - 1] ^ int(n.negated)
        else:
            l, r = n.children
            vals[i] = 1 - (vals[l] & vals[r])
    return vals


def evaluate_classical(tree: FormulaTree, assignment) -> int:
    """Ground-truth recursive NAND evaluation (leaf value = bit XOR negated)."""
    return int(subtree_values(tree, assignment)[tree.root])


def evaluate_and_or(tree: FormulaTree, assignment) -> int:
    """Independent oracle: the same function via De Morgan's AND-OR game tree.

    Even-depth gates become OR, odd-depth gates AND, and a leaf contributes
    its value negated iff it sits at odd depth. Used by tests to cross-check
    ``evaluate_classical`` through an unrelated code path.
    """
    a = _check_assignment(tree, assignment)
    depth = node_depths(tree)
    vals = np.zeros(len(tree.nodes), dtype=np.int8)
    for i, n in enumerate(tree.nodes):
        if n.is_leaf:
            v = a[n.var_index - 1] ^ int(n.negated)
            vals[i] = v ^ (depth[i] & 1)
        else:
            l, r = n.children
            vals[i] = (vals[l] | vals[r]) if depth[i] % 2 == 0 else (vals[l] & vals[r])
    return int(vals[tree.root])


def node_depths(tree: FormulaTree) -> np.ndarray:
    """Distance from the root for every node (root has depth 0)."""
    depth = np.zeros(len(tree.nodes), dtype=np.int64)
    for i in range(len(tree.nodes) - 1, -1, -1):
        for c in tree.nodes[i].children:
            depth[c] = depth[i] + 1
    return depth


def normalize_even_depth(tree: FormulaTree) -> FormulaTree:
    """Return an equivalent tree with every leaf at even distance from the root.

    Each odd-depth leaf carrying ``x_i`` becomes a gate over two new leaves
    that both read ``x_i`` with the negation flipped; NAND of the two equals
    the original leaf value, so the classical value is preserved on every
    assignment while the variable set (and the oracle) is unchanged.
    """
    depth = node_depths(tree)
    nodes: list[Node] = []
    new_id: dict[int, int] = {}
    for i, n in enumerate(tree.nodes):
        if n.is_leaf and depth[i] % 2 == 1:
            nodes.append(Node("leaf", var_index=n.var_index, negated=not n.negated))
            nodes.append(Node("leaf", var_index=n.var_index, negated=not n.negated))
            nodes.append(Node("internal", children=(len(nodes) - 2, len(nodes) - 1)))
        elif n.is_leaf:
            nodes.append(n)
        else:
            nodes.append(Node("internal", children=tuple(new_id[c] for c in n.children)))
        new_id[i] = len(nodes) - 1
    out = FormulaTree(tuple(nodes))
    out.validate()
    return out


def generate_balanced(depth_levels: int, max_leaves: int = MAX_LEAVES) -> FormulaTree:
    """Complete binary NAND tree with ``2**depth_levels`` leaves, indexed left to right."""
    if depth_levels < 0:
        raise ValueError("depth_levels must be >= 0")
    if 2**depth_levels > max_leaves:
        raise ValueError(f"2**{depth_levels} leaves exceeds the size cap {max_leaves}")
    nodes: list[Node] = []
    next_var = 1

    def build(levels: int) -> int:
        nonlocal next_var
        if levels == 0:
            nodes.append(Node("leaf", var_index=next_var))
            next_var += 1
        else:
            a = build(levels - 1)
            b = build(levels - 1)
            nodes.append(Node("internal", children=(a, b)))
        return len(nodes) - 1

    # depth_levels <= 10 under the cap, recursion depth is harmless here
    build(depth_levels)
    return FormulaTree(tuple(nodes))


def tree_stats(tree: FormulaTree) -> tuple[np.ndarray, np.ndarray]:
    """Per-node ``(leaf_count, level_depth)``.

    ``level_depth`` counts the vertices on the longest path from the node down
    to a leaf, so a leaf has depth 1.
    """
    m = np.zeros(len(tree.nodes), dtype=np.int64)
    d = np.zeros(len(tree.nodes), dtype=np.int64)
    for i, n in enumerate(tree.nodes):
        if n.is_leaf:
            m[i], d[i] = 1, 1
        else:
            l, r = n.children
            m[i] = m[l] + m[r]
            d[i] = 1 + max(d[l], d[r])
    return m, d


def is_complete_balanced(tree: FormulaTree) -> bool:
    """True iff every leaf is at the same depth and the tree is complete."""
    depth = node_depths(tree)
    leaf_depths = {int(depth[i]) for i in tree.leaves()}
    if len(leaf_depths) != 1:
        return False
    (k,) = leaf_depths
    return tree.num_leaves == 2**k
