"""Eigenstructure of the weighted adjacency operator and the two reflections.

The evaluation unitary is a product of two reflections: one about the kernel
of the adjacency operator, one about the span of the basis states whose leaf
variable reads 1 (the query). Its eigenphase structure is what separates the
two truth values: value-0 instances keep an order-constant overlap with the
phase-0 eigenspace, value-1 instances push all relevant eigenphases above a
floor that scales like the inverse square root of the instance size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .tree import AugmentedTree

__all__ = [
    "EigenDecomposition",
    "EigensolverError",
    "ReflectionPair",
    "SpectrumEntry",
    "ProductSpectrum",
    "eigendecompose",
    "build_reflections",
    "product_spectrum",
    "min_relevant_phase",
    "projection_gap",
    "two_reflection_angle_check",
    "unitary_phases",
    "spectrum_to_rows",
    "spectrum_to_csv",
]

ZERO_TOLERANCE = 1e-9  # |eigenvalue| <= tol * spectral_norm counts as kernel
OVERLAP_FLOOR = 1e-12  # overlap^2 above this counts as "not orthogonal"
RESIDUAL_TOLERANCE = 1e-10


class EigensolverError(RuntimeError):
    """Eigendecomposition failed to meet the residual contract."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Full symmetric eigendecomposition with a thresholded kernel."""

    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns, matching order
    zero_tolerance: float
    spectral_norm: float

    def zero_space(self) -> np.ndarray:
        """Orthonormal basis (columns) of the numerical 0-eigenspace."""
        cut = self.zero_tolerance * max(self.spectral_norm, 1e-300)
        return self.eigenvectors[:, np.abs(self.eigenvalues) <= cut]

    def zero_projector(self) -> np.ndarray:
        k = self.zero_space()
        return k @ k.T


def eigendecompose(h: np.ndarray, zero_tolerance: float = ZERO_TOLERANCE) -> EigenDecomposition:
    """Eigendecompose a symmetric matrix, enforcing the residual contract.

    Raises :class:`EigensolverError` if any pair violates
    ``|H v - lambda v| <= 1e-10 * |H|`` or columns are not orthonormal to
    1e-12.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.array_equal(h, h.T):
        raise ValueError("matrix is not exactly symmetric")
    w, v = np.linalg.eigh(h)
    norm = float(np.max(np.abs(w))) if len(w) else 0.0
    residual = np.linalg.norm(h @ v - v * w, axis=0)
    if np.any(residual > RESIDUAL_TOLERANCE * max(norm, 1.0)):
        raise EigensolverError(
            f"eigenpair residual {residual.max():.3e} exceeds contract for dim {h.shape[0]}"
        )
    gram_defect = np.abs(v.T @ v - np.eye(h.shape[0])).max() if h.shape[0] else 0.0
    if gram_defect > 1e-12 * max(h.shape[0], 1):
        raise EigensolverError(f"eigenvector orthonormality defect {gram_defect:.3e}")
    return EigenDecomposition(
        eigenvalues=w, eigenvectors=v, zero_tolerance=zero_tolerance, spectral_norm=norm
    )


@dataclass(frozen=True)
class ReflectionPair:
    """The two reflections and the prepared start states.

    ``u1`` reflects about the adjacency kernel (+1 there, -1 on the rest);
    ``u2_signs`` is the diagonal of the query reflection (-1 exactly on leaf
    coordinates whose effective variable value is 1).
    """

    u1: np.ndarray
    u2_signs: np.ndarray
    start_state: np.ndarray
    start_projected: np.ndarray
    start_normalized: np.ndarray
    one_leaf_coords: np.ndarray  # coordinates spanning the flipped subspace

    @property
    def u2(self) -> np.ndarray:
        return np.diag(self.u2_signs)

    def product(self) -> np.ndarray:
        """The evaluation unitary: query reflection after kernel reflection."""
        return self.u2_signs[:, None] * self.u1


def start_state(at: AugmentedTree) -> np.ndarray:
    """Alternating-sign comb over the even tail positions.

    Kernel vectors of the adjacency operator are forced to alternate sign
    along the even tail positions (the odd ones vanish), so the comb carries
    the matching signs: amplitude ``(-1)**i`` on tail position ``2i``. A
    same-sign comb would be *orthogonal* to the kernel whenever ``t/2`` is
    odd, leaving nothing to project; with matching signs the projection is
    identical in direction for even ``t/2`` and stays well-defined otherwise.
    """
    s = np.zeros(len(at.tree.nodes) + at.tail)
    for i in range(at.tail // 2 + 1):
        s[2 * i] = -1.0 if i % 2 else 1.0
    return s


def build_reflections(
    ed: EigenDecomposition, at: AugmentedTree, assignment
) -> ReflectionPair:
    """Assemble both reflections and the projected/normalized start states."""
    if ed.eigenvectors.shape[0] != at.dim:
        raise ValueError("eigendecomposition dimension does not match the instance")
    p0 = ed.zero_projector()
    u1 = 2.0 * p0 - np.eye(at.dim)
    values = at.leaf_values(assignment)
    signs = np.ones(at.dim)
    one_coords = at.leaf_coords[values == 1]
    signs[one_coords] = -1.0
    s = start_state(at)
    projected = p0 @ s
    norm = float(np.linalg.norm(projected))
    if norm < 1e-12:
        # cannot happen for a well-formed instance: the kernel always contains
        # a vector with nonzero root amplitude (the all-zeros witness state)
        raise ValueError("start state has (near) zero kernel projection")
    return ReflectionPair(
        u1=u1,
        u2_signs=signs,
        start_state=s,
        start_projected=projected,
        start_normalized=projected / norm,
        one_leaf_coords=np.sort(one_coords),
    )


@dataclass(frozen=True)
class SpectrumEntry:
    theta: float  # eigenphase in (-pi, pi]
    eigenvector: np.ndarray  # complex, unit norm
    overlap2: float  # |<eigenvector, start_normalized>|^2


@dataclass(frozen=True)
class ProductSpectrum:
    """Unitary eigendecomposition of the evaluation operator."""

    entries: tuple[SpectrumEntry, ...] = field(default_factory=tuple)

    def phases(self) -> np.ndarray:
        return np.array([e.theta for e in self.entries])

    def overlaps(self) -> np.ndarray:
        return np.array([e.overlap2 for e in self.entries])

    def total_overlap(self, theta: float = 0.0, tol: float = 1e-9) -> float:
        """Subspace-wise overlap with the full eigenspace of phase ``theta``."""
        return float(sum(e.overlap2 for e in self.entries if abs(e.theta - theta) <= tol))


def unitary_phases(w: np.ndarray, reference: np.ndarray | None = None) -> list[tuple[float, np.ndarray]]:
    """Eigenphases and eigenvectors of a real orthogonal matrix via real Schur.

    The Schur form of an orthogonal matrix is block diagonal with 1x1 blocks
    (phases 0 or pi) and 2x2 rotation blocks (conjugate phase pairs); this
    keeps eigenvectors orthonormal even inside degenerate phase clusters,
    which plain nonsymmetric eigensolvers do not guarantee.
    """
    n = w.shape[0]
    t, q = scipy.linalg.schur(w, output="real")
    out: list[tuple[float, np.ndarray]] = []
    i = 0
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-12:
            block = t[i : i + 2, i : i + 2]
            lam, vecs = np.linalg.eig(block)
            for j in range(2):
                phase = math.atan2(lam[j].imag, lam[j].real)
                vec = q[:, i : i + 2].astype(complex) @ vecs[:, j]
                vec /= np.linalg.norm(vec)
                out.append((phase, vec))
            i += 2
        else:
            phase = 0.0 if t[i, i] > 0 else math.pi
            out.append((phase, q[:, i].astype(complex)))
            i += 1
    return out


def product_spectrum(rp: ReflectionPair) -> ProductSpectrum:
    """Full eigenphase/eigenvector/overlap table of the evaluation unitary."""
    w = rp.product()
    psi = rp.start_normalized.astype(complex)
    entries = []
    for phase, vec in unitary_phases(w):
        overlap2 = float(abs(np.vdot(vec, psi)) ** 2)
        entries.append(SpectrumEntry(theta=phase, eigenvector=vec, overlap2=overlap2))
    entries.sort(key=lambda e: (abs(e.theta), e.theta))
    return ProductSpectrum(entries=tuple(entries))


def min_relevant_phase(ps: ProductSpectrum, overlap_floor: float = OVERLAP_FLOOR) -> float:
    """Smallest ``|theta|`` among eigenvectors visible from the start state."""
    relevant = [abs(e.theta) for e in ps.entries if e.overlap2 > overlap_floor]
    if not relevant:
        raise ValueError(f"no eigenvector has overlap^2 above {overlap_floor}")
    return min(relevant)


def projection_gap(
    ed: EigenDecomposition, rp: ReflectionPair, sprime_basis: np.ndarray | None
) -> float:
    """Worst-case mass on the flipped-leaf coordinates over the reduced kernel.

    Minimizes ``|P_flipped psi|^2`` over unit vectors in the adjacency kernel
    orthogonal to the given span; computed as the squared smallest singular
    value of the flipped-leaf coordinate block of an orthonormal basis of that
    intersection. Returns ``inf`` when the intersection is trivial and 0 when
    no leaf reads 1.
    """
    if rp.one_leaf_coords.size == 0:
        return 0.0
    kernel = ed.zero_space()
    if sprime_basis is not None and sprime_basis.size:
        coords = kernel.T @ sprime_basis  # span coordinates inside the kernel
        u, s, _ = np.linalg.svd(coords, full_matrices=True)
        rank = int(np.sum(s > 1e-10))
        basis = kernel @ u[:, rank:]
    else:
        basis = kernel
    k = basis.shape[1]
    if k == 0:
        return math.inf
    block = basis[rp.one_leaf_coords, :]
    if block.shape[0] < k:
        return 0.0  # fewer flipped rows than directions: a null direction exists
    smallest = np.linalg.svd(block, compute_uv=False)[-1]
    return float(smallest**2)


def two_reflection_angle_check(s1_basis: np.ndarray, s2_basis: np.ndarray) -> dict:
    """Angle bound for a product of two subspace reflections.

    Both arguments are orthonormal column sets spanning the -1 eigenspaces of
    the two reflections. Returns ``epsilon`` (the minimum leakage of the first
    subspace outside the second) and ``min_phase`` (smallest nonzero |phase|
    of the product), and checks ``min_phase >= sqrt(epsilon)``; raises on a
    nontrivial intersection or a bound violation.
    """
    s1 = np.atleast_2d(np.asarray(s1_basis, dtype=float))
    s2 = np.atleast_2d(np.asarray(s2_basis, dtype=float))
    if s1.shape[0] != s2.shape[0]:
        raise ValueError("subspace bases must share the ambient dimension")
    n = s1.shape[0]
    for name, b in (("s1", s1), ("s2", s2)):
        defect = np.abs(b.T @ b - np.eye(b.shape[1])).max()
        if defect > 1e-10:
            raise ValueError(f"{name} columns are not orthonormal (defect {defect:.2e})")
    cosines = np.linalg.svd(s1.T @ s2, compute_uv=False) if s1.size and s2.size else np.array([])
    largest = float(cosines[0]) if cosines.size else 0.0
    if math.acos(min(largest, 1.0)) <= 1e-8:
        raise ValueError("subspaces intersect: smallest principal angle is not positive")
    epsilon = 1.0 - largest**2

    u1 = np.eye(n) - 2.0 * s1 @ s1.T
    u2 = np.eye(n) - 2.0 * s2 @ s2.T
    phases = np.array([abs(p) for p, _ in unitary_phases(u2 @ u1)])
    nonzero = phases[phases > 1e-10]
    min_phase = float(nonzero.min()) if nonzero.size else math.pi
    if min_phase < math.sqrt(epsilon) - 1e-8:
        raise AssertionError(
            f"two-reflection bound violated: min phase {min_phase:.6e} < sqrt(eps) {math.sqrt(epsilon):.6e}"
        )
    return {"epsilon": float(epsilon), "min_phase": min_phase}


def spectrum_to_rows(ps: ProductSpectrum) -> list[dict]:
    """JSON-friendly ``{theta, overlap2}`` rows sorted by |theta|."""
    return [{"theta": float(e.theta), "overlap2": float(e.overlap2)} for e in ps.entries]


def spectrum_to_csv(ps: ProductSpectrum) -> str:
    lines = ["theta,overlap2"]
    lines += [f"{e.theta!r},{e.overlap2!r}" for e in ps.entries]
    return "\n".join(lines) + "\n"
