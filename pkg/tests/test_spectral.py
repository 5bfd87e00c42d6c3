"""Eigendecomposition contract, reflections, product spectrum, subspace checks."""

import math

import numpy as np
import pytest

from nandtree.formula import generate_balanced, normalize_even_depth, parse_formula
from nandtree.spectral import (
    ReflectionPair,
    build_reflections,
    eigendecompose,
    min_relevant_phase,
    product_spectrum,
    projection_gap,
    spectrum_to_rows,
    two_reflection_angle_check,
)
from nandtree.certificates import sprime_basis
from nandtree.tree import attach_tail, build_hamiltonian


def _instance(text, bits, mode=None):
    tree = normalize_even_depth(parse_formula(text))
    if mode is None:
        from nandtree.formula import is_complete_balanced

        mode = "balanced" if is_complete_balanced(tree) else "general"
    at = attach_tail(tree, mode)
    ed = eigendecompose(build_hamiltonian(at))
    rp = build_reflections(ed, at, bits)
    return at, ed, rp


def test_eigendecompose_2x2():
    ed = eigendecompose(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(ed.eigenvalues, [-1.0, 1.0])
    assert ed.zero_space().shape == (2, 0)


def test_eigendecompose_path3():
    h = np.zeros((3, 3))
    h[0, 1] = h[1, 0] = h[1, 2] = h[2, 1] = 1.0
    ed = eigendecompose(h)
    assert np.allclose(ed.eigenvalues, [-math.sqrt(2), 0.0, math.sqrt(2)], atol=1e-12)
    kernel = ed.zero_space()
    assert kernel.shape == (3, 1)
    vec = kernel[:, 0] / kernel[0, 0]
    assert np.allclose(vec, [1.0, 0.0, -1.0], atol=1e-12)


def test_eigendecompose_rejects_asymmetric():
    with pytest.raises(ValueError):
        eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_kernel_vanishes_on_odd_levels():
    at, ed, _ = _instance("N(x1,x2)", (0, 0))
    kernel = ed.zero_space()
    odd = at.level % 2 == 1
    assert np.abs(kernel[odd, :]).max() <= 1e-9


def test_reflections_are_involutions():
    at, ed, rp = _instance("N(N(x1,x2),x3)", (1, 0, 1))
    eye = np.eye(at.dim)
    assert np.abs(rp.u1 @ rp.u1 - eye).max() <= 1e-10
    assert np.abs(rp.u2 @ rp.u2 - eye).max() <= 1e-10


def test_u2_identity_on_all_zeros():
    at, ed, rp = _instance("N(N(x1,x2),N(x3,x4))", (0, 0, 0, 0))
    assert np.all(rp.u2_signs == 1.0)
    assert rp.one_leaf_coords.size == 0


def test_u2_flips_exactly_effective_one_leaves():
    # height-1 tree normalizes to two negated copies per variable, so
    # assignment (1, 0) flips the two copies reading NOT x2
    at, ed, rp = _instance("N(x1,x2)", (1, 0))
    assert (rp.u2_signs == -1.0).sum() == 2
    flipped_vars = {int(v) for v, c in zip(at.leaf_vars, at.leaf_coords) if rp.u2_signs[c] == -1.0}
    assert flipped_vars == {2}
    # a bare leaf keeps a single flipped coordinate
    at1, ed1, rp1 = _instance("x1", (1,))
    assert (rp1.u2_signs == -1.0).sum() == 1


def test_start_state_structure():
    at, ed, rp = _instance("N(N(x1,x2),N(x3,x4))", (0, 0, 0, 0))
    s = rp.start_state
    # alternating comb on even tail positions, nothing else
    expected = np.zeros(at.dim)
    for i in range(at.tail // 2 + 1):
        expected[2 * i] = (-1.0) ** i
    assert np.array_equal(s, expected)
    assert abs(np.linalg.norm(rp.start_normalized) - 1.0) <= 1e-12
    # normalized start state leaks nothing onto odd levels
    odd = at.level % 2 == 1
    assert np.abs(rp.start_normalized[odd]).max() <= 1e-9


def test_start_state_well_defined_for_single_leaf():
    # smallest instance has t/2 odd; the projection must still be nonzero
    at, ed, rp = _instance("x1", (0,))
    assert np.linalg.norm(rp.start_projected) > 0.9


def test_alternating_comb_matches_plain_comb_direction():
    # with an even number of comb teeth pairs, the projection of the
    # same-sign comb is parallel to the alternating one (and vanishes
    # entirely when t/2 is odd, which is why the alternation is used)
    at, ed, rp = _instance("N(N(x1,x2),N(x3,x4))", (0, 1, 1, 0))
    assert at.tail // 2 % 2 == 0
    plain = np.zeros(at.dim)
    for i in range(at.tail // 2 + 1):
        plain[2 * i] = 1.0
    projected = ed.zero_projector() @ plain
    cosine = projected @ rp.start_normalized / np.linalg.norm(projected)
    assert abs(abs(cosine) - 1.0) <= 1e-10


def test_product_is_orthogonal_and_conjugation_closed():
    at, ed, rp = _instance("N(N(x1,x2),x3)", (1, 1, 0))
    w = rp.product()
    assert np.abs(w @ w.T - np.eye(at.dim)).max() <= 1e-10
    spectrum = product_spectrum(rp)
    # complex phases come in conjugate pairs (0 and pi are their own mirror)
    paired = sorted(
        round(e.theta, 9)
        for e in spectrum.entries
        if abs(e.theta) > 1e-12 and abs(abs(e.theta) - math.pi) > 1e-12
    )
    assert paired == sorted(-p for p in paired)


def test_spectrum_residuals():
    at, ed, rp = _instance("N(N(x1,x2),x3)", (0, 1, 1))
    w = rp.product().astype(complex)
    for entry in product_spectrum(rp).entries:
        lam = np.exp(1j * entry.theta)
        resid = np.linalg.norm(w @ entry.eigenvector - lam * entry.eigenvector)
        assert resid <= 1e-9
        assert abs(np.linalg.norm(entry.eigenvector) - 1.0) <= 1e-12


def test_identity_product_single_phase_zero():
    rp = ReflectionPair(
        u1=np.eye(1),
        u2_signs=np.ones(1),
        start_state=np.ones(1),
        start_projected=np.ones(1),
        start_normalized=np.ones(1),
        one_leaf_coords=np.array([], dtype=np.int64),
    )
    spectrum = product_spectrum(rp)
    assert len(spectrum.entries) == 1
    assert spectrum.entries[0].theta == 0.0
    assert spectrum.entries[0].overlap2 == pytest.approx(1.0)


def test_value0_instance_has_phase_zero_overlap():
    at, ed, rp = _instance("N(x1,x2)", (1, 1))
    spectrum = product_spectrum(rp)
    assert spectrum.total_overlap(0.0, tol=1e-9) >= 0.2


def test_value1_phases_above_floor():
    at, ed, rp = _instance("N(x1,x2)", (0, 0))
    spectrum = product_spectrum(rp)
    floor = 1.0 / math.sqrt(20.0 * at.num_leaves)
    for entry in spectrum.entries:
        if entry.overlap2 > 1e-16:
            assert abs(entry.theta) >= floor


def test_min_relevant_phase():
    at, ed, rp = _instance("N(x1,x2)", (1, 1))
    assert min_relevant_phase(product_spectrum(rp)) <= 1e-9
    at, ed, rp = _instance("N(x1,x2)", (0, 0))
    assert min_relevant_phase(product_spectrum(rp)) >= 1.0 / math.sqrt(80)
    with pytest.raises(ValueError):
        min_relevant_phase(product_spectrum(rp), overlap_floor=2.0)


def test_spectrum_invariant_under_sibling_relabeling():
    tree = normalize_even_depth(generate_balanced(2))
    at = attach_tail(tree, "balanced")
    ed = eigendecompose(build_hamiltonian(at))
    bits = (1, 0, 1, 1)
    swapped = (0, 1, 1, 1)  # exchange the two leaves under the first gate
    p1 = sorted(e.theta for e in product_spectrum(build_reflections(ed, at, bits)).entries)
    p2 = sorted(e.theta for e in product_spectrum(build_reflections(ed, at, swapped)).entries)
    assert np.allclose(p1, p2, atol=1e-10)
    # exchanging whole sibling subtrees conjugates by a permutation too
    swapped_subtrees = (1, 1, 1, 0)
    p3 = sorted(e.theta for e in product_spectrum(build_reflections(ed, at, swapped_subtrees)).entries)
    assert np.allclose(p1, p3, atol=1e-10)


def test_projection_gap_zero_when_no_flipped_leaf():
    at, ed, rp = _instance("N(N(x1,x2),N(x3,x4))", (0, 0, 0, 0))
    assert projection_gap(ed, rp, None) == 0.0


def test_projection_gap_balanced_threshold():
    at, ed, rp = _instance("N(N(x1,x2),N(x3,x4))", (1, 1, 1, 1))
    basis = sprime_basis(at, (1, 1, 1, 1))
    gap = projection_gap(ed, rp, basis)
    assert gap >= 1.0 / (20.0 * at.num_leaves)
    # smaller span can only shrink the gap, never below the floor
    gap_full = projection_gap(ed, rp, None)
    assert gap_full <= gap + 1e-12


def test_two_reflection_analytic_cases():
    e1 = np.array([[1.0], [0.0]])
    diag = np.array([[1.0], [1.0]]) / math.sqrt(2)
    res = two_reflection_angle_check(e1, diag)
    assert res["epsilon"] == pytest.approx(0.5, abs=1e-12)
    assert res["min_phase"] == pytest.approx(math.pi / 2, abs=1e-9)

    e2 = np.array([[0.0], [1.0]])
    res = two_reflection_angle_check(e1, e2)
    assert res["epsilon"] == pytest.approx(1.0, abs=1e-12)
    assert res["min_phase"] == pytest.approx(math.pi, abs=1e-9)


def test_two_reflection_rejects_intersection():
    e1 = np.array([[1.0], [0.0]])
    with pytest.raises(ValueError, match="intersect"):
        two_reflection_angle_check(e1, e1.copy())


def test_two_reflection_random_pairs_small():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 13))
        d1 = int(rng.integers(1, n))
        d2 = int(rng.integers(1, n - d1 + 1))
        q1 = np.linalg.qr(rng.standard_normal((n, d1)))[0]
        q2 = np.linalg.qr(rng.standard_normal((n, d2)))[0]
        res = two_reflection_angle_check(q1, q2)
        assert res["min_phase"] >= math.sqrt(res["epsilon"]) - 1e-8


def test_spectrum_rows_sorted_by_magnitude():
    at, ed, rp = _instance("N(N(x1,x2),x3)", (0, 0, 1))
    rows = spectrum_to_rows(product_spectrum(rp))
    mags = [abs(r["theta"]) for r in rows]
    assert mags == sorted(mags)
