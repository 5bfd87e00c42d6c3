"""Instance corpora for the verification suites.

The balanced grid enumerates every assignment of every complete tree up to a
given height. The general corpus is a fixed set of unbalanced formulas (plus
two deterministically generated random shapes) chosen to cover mixed leaf
depths, both tail-length parities, and sizes up to 24 leaves; assignments are
exhaustive for small variable counts and seeded samples otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .formula import (
    FormulaTree,
    generate_balanced,
    normalize_even_depth,
    parse_formula,
)
from .tree import AugmentedTree, attach_tail

__all__ = [
    "Instance",
    "balanced_instances",
    "GENERAL_FORMULAS",
    "general_trees",
    "general_instances",
    "random_even_depth_formula",
]


@dataclass(frozen=True)
class Instance:
    """One (augmented tree, assignment) pair ready for the pipeline."""

    label: str
    at: AugmentedTree
    assignment: tuple[int, ...]

    @property
    def mode(self) -> str:
        return self.at.mode


def _bits_label(assignment) -> str:
    return "".join(str(b) for b in assignment)


def balanced_instances(k_max: int = 3, k_min: int = 0) -> list[Instance]:
    """Every assignment of every complete tree with ``k_min <= k <= k_max`` levels."""
    out = []
    for k in range(k_min, k_max + 1):
        tree = normalize_even_depth(generate_balanced(k))
        at = attach_tail(tree, "balanced")
        for bits in itertools.product((0, 1), repeat=tree.num_vars):
            out.append(Instance(label=f"balanced-k{k}-{_bits_label(bits)}", at=at, assignment=bits))
    return out


# Fixed unbalanced shapes. Tail lengths 8..18 cover both parities of t/2,
# normalized leaf counts run 4..16 with depths 3..7.
GENERAL_FORMULAS: tuple[str, ...] = (
    "N(N(x1,x2),x3)",
    "N(N(N(x1,x2),x3),x4)",
    "N(N(x1,x2),N(N(N(x3,x4),N(x5,x6)),x7))",
    "N(N(x1,N(x2,x3)),N(x4,N(x5,N(x6,x7))))",
    "N(N(x1,N(N(x2,x3),N(x4,x5))),N(N(N(x6,x7),N(x8,x9)),N(N(x10,x11),N(x12,x13))))",
    "N(N(N(N(N(N(x1,x2),x3),x4),x5),x6),x7)",
)


def random_even_depth_formula(rng: np.random.Generator, max_leaves: int = 20) -> str:
    """Random read-once formula whose shape keeps every leaf at even depth.

    Even-depth positions flip a coin between leaf and gate within a leaf
    allowance passed down the tree; odd-depth positions are always gates (an
    even-leaf tree cannot have odd-depth leaves), so no normalization split is
    ever needed and leaf depths stay mixed. Uses at most ``max_leaves`` leaves.
    """
    next_var = [1]

    def grow_even(allow: int, depth: int) -> str:
        # a gate here spawns two odd-level gates needing >= 2 leaves each
        if allow < 4 or (depth > 0 and rng.random() < 0.45):
            var = next_var[0]
            next_var[0] += 1
            return f"x{var}"
        a1 = 2 + int(rng.integers(0, allow - 3))  # in [2, allow - 2]
        return f"N({grow_odd(a1, depth + 1)},{grow_odd(allow - a1, depth + 1)})"

    def grow_odd(allow: int, depth: int) -> str:
        b1 = 1 + int(rng.integers(0, allow - 1))  # in [1, allow - 1]
        return f"N({grow_even(b1, depth + 1)},{grow_even(allow - b1, depth + 1)})"

    return grow_even(max_leaves, 0)


CORPUS_TREE_SEED = 7  # the two generated shapes are part of the fixed corpus


def general_trees(tree_seed: int = CORPUS_TREE_SEED) -> list[tuple[str, FormulaTree]]:
    """Normalized corpus trees with stable labels."""
    texts = list(GENERAL_FORMULAS)
    rng = np.random.default_rng(tree_seed)
    texts.append(random_even_depth_formula(rng, max_leaves=14))
    texts.append(random_even_depth_formula(rng, max_leaves=24))
    out = []
    for i, text in enumerate(texts):
        tree = normalize_even_depth(parse_formula(text))
        out.append((f"general-{i}", tree))
    return out


def general_instances(
    max_assignments: int = 64, seed: int = 7, exhaustive_vars: int = 7
) -> list[Instance]:
    """Corpus instances over the fixed trees: exhaustive assignments when
    feasible, seeded samples otherwise (``seed`` varies the samples only)."""
    rng = np.random.default_rng(seed)
    out = []
    for label, tree in general_trees():
        at = attach_tail(tree, "general")
        nv = tree.num_vars
        if nv <= exhaustive_vars:
            assignments = list(itertools.product((0, 1), repeat=nv))
        else:
            picks = {tuple(int(b) for b in rng.integers(0, 2, size=nv)) for _ in range(max_assignments)}
            picks.add((0,) * nv)
            picks.add((1,) * nv)
            assignments = sorted(picks)
        for bits in assignments:
            out.append(Instance(label=f"{label}-{_bits_label(bits)}", at=at, assignment=bits))
    return out
