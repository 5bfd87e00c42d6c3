"""Zero-certificates and the kernel witness states built on them.

A certificate for "this subtree evaluates to 0" is the subtree root together
with, for each of its two odd-level children, a certificate for one 0-valued
grandchild; the base case is a 0-valued leaf. Certificates therefore occupy
even levels only. Each certificate carries an amplitude vector that lies
exactly in the kernel of the adjacency operator restricted to its subtree,
and two-certificate combinations at odd vertices span the part of the kernel
that the query reflection also fixes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formula import node_depths, subtree_values, tree_stats
from .tree import AugmentedTree

__all__ = [
    "Certificate",
    "CertificateState",
    "CertificateError",
    "EnumerationCapError",
    "DEFAULT_CERTIFICATE_CAP",
    "count_certificates",
    "enumerate_certificates",
    "first_certificate",
    "build_psi_c",
    "build_psi_0",
    "build_psi_c1c2",
    "sprime_basis",
    "certificate_to_json_dict",
]

DEFAULT_CERTIFICATE_CAP = 10_000


class CertificateError(ValueError):
    """No certificate exists (the subtree evaluates to 1) or bad arguments."""


class EnumerationCapError(RuntimeError):
    """Certificate enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class Certificate:
    """Recursive decomposition: chosen grandchild certificate on each side."""

    v: int
    left: "Certificate | None" = None  # certificate under a child of the first child
    right: "Certificate | None" = None  # certificate under a child of the second child

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def vertices(self) -> frozenset[int]:
        out = set()
        stack = [self]
        while stack:
            c = stack.pop()
            out.add(c.v)
            if c.left is not None:
                stack.extend((c.left, c.right))
        return frozenset(out)


def _grandchild_options(tree, values, v) -> tuple[list[int], list[int]]:
    """0-valued grandchildren of ``v`` grouped by which child they hang from."""
    z1, z2 = tree.nodes[v].children
    opts = []
    for z in (z1, z2):
        node = tree.nodes[z]
        if node.is_leaf:
            # odd-level leaves cannot exist in a normalized tree
            raise CertificateError(f"vertex {z} at odd level is a leaf; normalize the tree first")
        opts.append([y for y in node.children if values[y] == 0])
    return opts[0], opts[1]


def count_certificates(at: AugmentedTree, assignment, v: int | None = None) -> int:
    """Number of certificates for the subtree at ``v`` without materializing them."""
    tree = at.tree
    if v is None:
        v = tree.root
    depth = node_depths(tree)
    if depth[v] % 2 != 0:
        raise CertificateError(f"vertex {v} is at odd level: certificates live on even levels")
    values = subtree_values(tree, assignment)
    if values[v] != 0:
        return 0
    counts: dict[int, int] = {}
    # postorder ids: children precede parents, one forward scan suffices
    for u in range(v + 1):
        if values[u] != 0 or depth[u] % 2 != 0:
            continue
        node = tree.nodes[u]
        if node.is_leaf:
            counts[u] = 1
        else:
            left_opts, right_opts = _grandchild_options(tree, values, u)
            counts[u] = sum(counts.get(y, 0) for y in left_opts) * sum(
                counts.get(y, 0) for y in right_opts
            )
    return counts.get(v, 0)


def enumerate_certificates(
    at: AugmentedTree,
    assignment,
    v: int | None = None,
    cap: int = DEFAULT_CERTIFICATE_CAP,
) -> list[Certificate]:
    """All certificates for the 0-valued subtree at ``v``, left-to-right.

    Raises :class:`CertificateError` when the subtree evaluates to 1 and
    :class:`EnumerationCapError` when the certificate count exceeds ``cap``
    (counted beforehand, nothing is materialized in that case).
    """
    tree = at.tree
    if v is None:
        v = tree.root
    depth = node_depths(tree)
    if depth[v] % 2 != 0:
        raise CertificateError(f"vertex {v} is at odd level: certificates live on even levels")
    values = subtree_values(tree, assignment)
    if values[v] != 0:
        raise CertificateError(f"subtree at {v} evaluates to 1: no 0-certificate exists")
    total = count_certificates(at, assignment, v)
    if total > cap:
        raise EnumerationCapError(f"{total} certificates at vertex {v} exceed cap {cap}")

    # build the table bottom-up over even-level 0-valued vertices
    memo: dict[int, list[Certificate]] = {}
    for u in range(v + 1):
        if values[u] != 0 or depth[u] % 2 != 0:
            continue
        node = tree.nodes[u]
        if node.is_leaf:
            memo[u] = [Certificate(u)]
        else:
            left_opts, right_opts = _grandchild_options(tree, values, u)
            left = [c for y in left_opts for c in memo.get(y, ())]
            right = [c for y in right_opts for c in memo.get(y, ())]
            memo[u] = [Certificate(u, cl, cr) for cl in left for cr in right]
    return memo[v]


def first_certificate(at: AugmentedTree, assignment, v: int | None = None) -> Certificate:
    """Lexicographically first certificate (the one algorithmic paths use)."""
    tree = at.tree
    if v is None:
        v = tree.root
    depth = node_depths(tree)
    if depth[v] % 2 != 0:
        raise CertificateError(f"vertex {v} is at odd level: certificates live on even levels")
    values = subtree_values(tree, assignment)
    if values[v] != 0:
        raise CertificateError(f"subtree at {v} evaluates to 1: no 0-certificate exists")
    first: dict[int, Certificate] = {}
    for u in range(v + 1):
        if values[u] != 0 or depth[u] % 2 != 0:
            continue
        node = tree.nodes[u]
        if node.is_leaf:
            first[u] = Certificate(u)
        else:
            left_opts, right_opts = _grandchild_options(tree, values, u)
            cl = next(first[y] for y in left_opts if y in first)
            cr = next(first[y] for y in right_opts if y in first)
            first[u] = Certificate(u, cl, cr)
    return first[v]


@dataclass(frozen=True)
class CertificateState:
    """Amplitude vector over all matrix coordinates."""

    amplitudes: np.ndarray
    kind: str  # "certificate" | "witness" | "pair"

    @property
    def norm2(self) -> float:
        return float(self.amplitudes @ self.amplitudes)


def build_psi_c(cert: Certificate, at: AugmentedTree) -> CertificateState:
    """Certificate amplitude vector; the certificate root carries amplitude 1.

    Each chosen grandchild certificate enters with coefficient
    ``-(m_v / (4 m_y)) ** 0.25`` relative to its parent's amplitude, which is
    exactly the ratio that cancels both edge contributions at the odd vertex
    between them, so the vector lies in the kernel of the subtree-restricted
    adjacency operator.
    """
    m, _ = tree_stats(at.tree)
    amp = np.zeros(at.dim)
    stack = [(cert, 1.0)]
    while stack:
        c, a = stack.pop()
        amp[at.pos[c.v]] += a
        if c.left is not None:
            for sub in (c.left, c.right):
                coeff = (m[c.v] / (4.0 * m[sub.v])) ** 0.25
                stack.append((sub, -coeff * a))
    return CertificateState(amplitudes=amp, kind="certificate")


def build_psi_0(cert: Certificate, at: AugmentedTree) -> CertificateState:
    """Whole-graph kernel witness: certificate vector plus alternating tail.

    Tail position ``2i`` receives ``(-1) ** i`` (the root is the ``i = 0``
    term with amplitude 1 from the certificate), odd positions stay 0; the
    alternation is what the tail rows of the kernel equations force.
    """
    if cert.v != at.tree.root:
        raise CertificateError("witness state requires a certificate rooted at the tree root")
    state = build_psi_c(cert, at).amplitudes.copy()
    for i in range(1, at.tail // 2 + 1):
        state[2 * i] += -1.0 if i % 2 else 1.0
    return CertificateState(amplitudes=state, kind="witness")


def build_psi_c1c2(
    at: AugmentedTree,
    assignment,
    v: int,
    c1: Certificate,
    c2: Certificate,
) -> CertificateState:
    """Fixed state attached to an odd vertex whose children both evaluate to 0.

    The two child certificate vectors are combined with cross weights (the
    fourth root of the *sibling's* leaf count) so the two edge terms at ``v``
    cancel; the result is killed by the adjacency operator and, having
    support only on 0-valued leaves and internal vertices, is also fixed by
    the query reflection. The root and tail coordinates are untouched.
    """
    tree = at.tree
    depth = node_depths(tree)
    if depth[v] % 2 != 1:
        raise CertificateError(f"vertex {v} is at even level {depth[v]}, expected odd")
    values = subtree_values(tree, assignment)
    v1, v2 = tree.nodes[v].children
    if values[v1] != 0 or values[v2] != 0:
        raise CertificateError(f"children of {v} must both evaluate to 0")
    if c1.v != v1 or c2.v != v2:
        raise CertificateError("certificates must be rooted at the two children")
    m, _ = tree_stats(tree)
    p1 = build_psi_c(c1, at).amplitudes
    p2 = build_psi_c(c2, at).amplitudes
    state = (m[v2] ** 0.25) * p1 - (m[v1] ** 0.25) * p2
    return CertificateState(amplitudes=state, kind="pair")


def pair_states(
    at: AugmentedTree, assignment, cap: int = DEFAULT_CERTIFICATE_CAP
) -> list[CertificateState]:
    """All two-certificate fixed states over all eligible odd vertices."""
    tree = at.tree
    depth = node_depths(tree)
    values = subtree_values(tree, assignment)
    out: list[CertificateState] = []
    for v, node in enumerate(tree.nodes):
        if node.is_leaf or depth[v] % 2 != 1:
            continue
        v1, v2 = node.children
        if values[v1] != 0 or values[v2] != 0:
            continue
        n_pairs = count_certificates(at, assignment, v1) * count_certificates(at, assignment, v2)
        if len(out) + n_pairs > cap:
            raise EnumerationCapError(f"pair states exceed cap {cap}")
        for c1 in enumerate_certificates(at, assignment, v1, cap=cap):
            for c2 in enumerate_certificates(at, assignment, v2, cap=cap):
                out.append(build_psi_c1c2(at, assignment, v, c1, c2))
    return out


def sprime_basis(
    at: AugmentedTree, assignment, cap: int = DEFAULT_CERTIFICATE_CAP
) -> np.ndarray:
    """Orthonormal basis (columns) of the span of all two-certificate states.

    May be empty (shape ``(dim, 0)``) when no odd vertex has two 0-valued
    children. The span sits inside the adjacency kernel and is orthogonal to
    the start state, which has support only on the root and the tail.
    """
    states = pair_states(at, assignment, cap=cap)
    if not states:
        return np.zeros((at.dim, 0))
    mat = np.column_stack([s.amplitudes for s in states])
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return u[:, :rank]


def certificate_to_json_dict(cert: Certificate, at: AugmentedTree) -> dict:
    """Export ``{vertices, amplitudes}`` with amplitudes indexed by coordinate."""
    state = build_psi_c(cert, at)
    nz = np.nonzero(np.abs(state.amplitudes) > 0)[0]
    return {
        "root": int(cert.v),
        "vertices": sorted(int(v) for v in cert.vertices()),
        "amplitudes": {str(int(c)): float(state.amplitudes[c]) for c in nz},
        "norm2": state.norm2,
    }
