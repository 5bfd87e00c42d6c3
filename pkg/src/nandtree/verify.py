"""Numeric certification suite: kernel identities, norm bounds, gaps, thresholds.

Every mathematical property the engine relies on is recast here as a measured
quantity compared against an explicit threshold. Failures are data, collected
into a machine-readable report; a handful of constant-level claims that are
provably loose at small sizes are *flagged* rather than failed (the flags mark
instances satisfying the scaling claim but not the specific constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certificates import (
    DEFAULT_CERTIFICATE_CAP,
    build_psi_0,
    build_psi_c,
    enumerate_certificates,
    first_certificate,
    pair_states,
    sprime_basis,
)
from .corpus import Instance
from .formula import node_depths, subtree_values, tree_stats
from .spectral import (
    build_reflections,
    eigendecompose,
    min_relevant_phase,
    product_spectrum,
    projection_gap,
)
from .qpe import theta_min_for
from .tree import build_hamiltonian, restrict_to_subtree

__all__ = [
    "RecursionBounds",
    "BoundsError",
    "bounds_table",
    "tail_threshold_check",
    "CheckResult",
    "SuiteReport",
    "CHECK_NAMES",
    "run_suite",
]

KERNEL_RESIDUAL_TOL = 1e-10
ODD_LEAK_TOL = 1e-9
FIXED_STATE_TOL = 1e-9
OVERLAP_SLACK = 1e-9
ORTHOGONALITY_TOL = 1e-10
COMPOSED_SLACK = 1e-8
GAP_HARD_FACTOR = 0.5  # below this fraction of the constant the gap check fails


class BoundsError(ValueError):
    """A recursion-bound claim failed, indicating a misconfigured constant K."""


@dataclass(frozen=True)
class RecursionBounds:
    """Per-vertex induction constants and their sanity claims."""

    mode: str
    K: float
    rows: tuple[dict, ...]
    violations: tuple[str, ...]

    def row_for(self, node: int) -> dict:
        for row in self.rows:
            if row["node"] == node:
                return row
        raise KeyError(node)


def bounds_table(at, mode: str | None = None, K: float | None = None, strict: bool = True) -> RecursionBounds:
    """Induction constants for every even-level vertex.

    Balanced (``K`` defaults to ``20 N``): for a vertex whose subtree has
    ``m`` leaves, ``a = (1 + 2 m / K)(2 sqrt(m) - 1)`` and
    ``b = (1 - 2 m / K) K / sqrt(m)``; the sanity claims are
    ``a <= 1.1 * 2 sqrt(m)``, ``b >= 0.9 K / sqrt(m)`` and ``a <= 0.13 b``.

    General (``K`` defaults to ``30 N d``): ``delta = 5 m sqrt(d_v)/K + d_v/sqrt(K)``,
    ``a = 2 (1 + delta) sqrt(d_v m)``, ``b = (1 - delta) K / sqrt(m)``; the
    claim is ``delta <= 1/5``, which holds asymptotically but is violated by
    legitimately small deep instances — ``strict=False`` records violations
    instead of raising.
    """
    mode = at.mode if mode is None else mode
    tree = at.tree
    m, d = tree_stats(tree)
    depth = node_depths(tree)
    if K is None:
        K = 20.0 * at.num_leaves if mode == "balanced" else 30.0 * at.num_leaves * at.depth
    rows = []
    violations = []
    for v in range(len(tree.nodes)):
        if depth[v] % 2 != 0:
            continue
        mv, dv = float(m[v]), float(d[v])
        if mode == "balanced":
            a = (1.0 + 2.0 * mv / K) * (2.0 * math.sqrt(mv) - 1.0)
            b = (1.0 - 2.0 * mv / K) * K / math.sqrt(mv)
            row = {"node": int(v), "m": mv, "d": dv, "a": a, "b": b}
            if mv <= K / 20.0:
                if a > 1.1 * 2.0 * math.sqrt(mv) + 1e-12:
                    violations.append(f"node {v}: a={a:.4f} > 1.1 * 2 sqrt(m)")
                if b < 0.9 * K / math.sqrt(mv) - 1e-12:
                    violations.append(f"node {v}: b={b:.4f} < 0.9 K / sqrt(m)")
                if a > 0.13 * b + 1e-12:
                    violations.append(f"node {v}: a={a:.4f} > 0.13 b={0.13 * b:.4f}")
        else:
            delta = 5.0 * mv * math.sqrt(dv) / K + dv / math.sqrt(K)
            a = 2.0 * (1.0 + delta) * math.sqrt(dv * mv)
            b = (1.0 - delta) * K / math.sqrt(mv)
            row = {"node": int(v), "m": mv, "d": dv, "delta": delta, "a": a, "b": b}
            if delta > 0.2 + 1e-12:
                violations.append(f"node {v}: delta={delta:.4f} > 1/5")
        rows.append(row)
    bounds = RecursionBounds(mode=mode, K=float(K), rows=tuple(rows), violations=tuple(violations))
    if strict and violations:
        raise BoundsError("; ".join(violations))
    return bounds


def tail_threshold_check(at, bounds: RecursionBounds | None = None) -> dict:
    """Check ``b_root >= t/2``, the condition that lets the tail mass be absorbed."""
    if bounds is None:
        bounds = bounds_table(at, strict=False)
    b_root = bounds.row_for(at.tree.root)["b"]
    return {"passed": bool(b_root >= at.tail / 2.0), "b_root": float(b_root), "half_tail": at.tail / 2.0}


@dataclass(frozen=True)
class CheckResult:
    check: str
    instance: str
    passed: bool
    measured: float | None = None
    threshold: float | None = None
    flagged: bool = False
    detail: str = ""

    def to_json_dict(self) -> dict:
        return {
            "check": self.check,
            "instance": self.instance,
            "passed": bool(self.passed),
            "flagged": bool(self.flagged),
            "measured": None if self.measured is None else float(self.measured),
            "threshold": None if self.threshold is None else float(self.threshold),
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    selectors: tuple[str, ...]
    seed: int
    results: list[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def flags(self) -> list[CheckResult]:
        return [r for r in self.results if r.flagged]

    def summary(self) -> dict:
        return {
            "checks_run": len(self.results),
            "failed": len(self.failures()),
            "flagged": len(self.flags()),
            "all_passed": self.all_passed,
        }

    def to_json_dict(self) -> dict:
        return {
            "selectors": list(self.selectors),
            "seed": self.seed,
            "summary": self.summary(),
            "results": [r.to_json_dict() for r in self.results],
        }

    def to_table(self, verbose: bool = False) -> str:
        rows = self.results if verbose else [r for r in self.results if not r.passed or r.flagged]
        lines = [f"{'check':<16} {'instance':<40} {'status':<8} {'measured':>12} {'threshold':>12}"]
        for r in rows:
            status = "PASS" if r.passed else "FAIL"
            if r.flagged:
                status += "*"
            meas = "-" if r.measured is None else f"{r.measured:.6g}"
            thr = "-" if r.threshold is None else f"{r.threshold:.6g}"
            lines.append(f"{r.check:<16} {r.instance:<40} {status:<8} {meas:>12} {thr:>12}")
        if not rows:
            lines.append("  (nothing to report)")
        s = self.summary()
        lines.append(
            f"-- {s['checks_run']} checks, {s['failed']} failed, {s['flagged']} flagged "
            f"({'ALL PASS' if s['all_passed'] else 'FAILURES PRESENT'})"
        )
        return "\n".join(lines)


class _InstanceContext:
    """Lazily computed, shareable pieces of one instance's pipeline."""

    def __init__(self, inst: Instance, tree_cache: dict, cap: int):
        self.inst = inst
        self.at = inst.at
        self.cap = cap
        key = id(inst.at)
        if key not in tree_cache:
            h = build_hamiltonian(inst.at)
            tree_cache[key] = {"h": h, "ed": eigendecompose(h), "first": True}
        self._tree = tree_cache[key]
        self.first_for_tree = self._tree.pop("first", False)
        self.h = self._tree["h"]
        self.ed = self._tree["ed"]
        self._rp = None
        self._spectrum = None
        self._sprime = None
        self.values = subtree_values(inst.at.tree, inst.assignment)
        self.value = int(self.values[inst.at.tree.root])

    @property
    def rp(self):
        if self._rp is None:
            self._rp = build_reflections(self.ed, self.at, self.inst.assignment)
        return self._rp

    @property
    def spectrum(self):
        if self._spectrum is None:
            self._spectrum = product_spectrum(self.rp)
        return self._spectrum

    @property
    def sprime(self):
        if self._sprime is None:
            self._sprime = sprime_basis(self.at, self.inst.assignment, cap=self.cap)
        return self._sprime


def _zero_rooted_vertices(ctx) -> list[int]:
    depth = node_depths(ctx.at.tree)
    return [
        v
        for v in range(len(ctx.at.tree.nodes))
        if depth[v] % 2 == 0 and ctx.values[v] == 0
    ]


def _check_odd_levels(ctx) -> list[CheckResult]:
    """Kernel vectors must vanish on odd-level vertices (tree and tail alike)."""
    out = []
    odd = ctx.at.level % 2 == 1
    kernel = ctx.ed.zero_space()
    leak = float(np.abs(kernel[odd, :]).max()) if kernel.size and odd.any() else 0.0
    out.append(
        CheckResult("odd-levels", ctx.inst.label, leak <= ODD_LEAK_TOL, leak, ODD_LEAK_TOL)
    )
    if ctx.first_for_tree:
        # subtree restrictions are assignment-independent: check once per tree
        depth = node_depths(ctx.at.tree)
        worst = 0.0
        for v, node in enumerate(ctx.at.tree.nodes):
            if node.is_leaf or depth[v] % 2 != 0:
                continue
            coords = ctx.at.subtree_coords(v)
            sub = ctx.h[np.ix_(coords, coords)]
            ed = eigendecompose(sub)
            k = ed.zero_space()
            odd_sub = ctx.at.level[coords] % 2 == 1
            if k.size and odd_sub.any():
                worst = max(worst, float(np.abs(k[odd_sub, :]).max()))
        out.append(
            CheckResult(
                "odd-levels", f"{ctx.inst.label}[subtrees]", worst <= ODD_LEAK_TOL, worst, ODD_LEAK_TOL
            )
        )
    return out


def _check_cert_kernel(ctx) -> list[CheckResult]:
    """Every certificate state is killed by the subtree-restricted operator."""
    worst = 0.0
    n_checked = 0
    for v in _zero_rooted_vertices(ctx):
        coords = ctx.at.subtree_coords(v)
        sub = restrict_to_subtree(ctx.h, ctx.at, v)
        for cert in enumerate_certificates(ctx.at, ctx.inst.assignment, v, cap=ctx.cap):
            state = build_psi_c(cert, ctx.at)
            vec = state.amplitudes[coords]
            resid = float(np.linalg.norm(sub @ vec) / np.linalg.norm(vec))
            worst = max(worst, resid)
            n_checked += 1
    return [
        CheckResult(
            "cert-kernel",
            ctx.inst.label,
            worst <= KERNEL_RESIDUAL_TOL,
            worst,
            KERNEL_RESIDUAL_TOL,
            detail=f"{n_checked} certificate states",
        )
    ]


def _check_tail_kernel(ctx) -> list[CheckResult]:
    """Witness states (certificate + alternating tail) lie in the full kernel."""
    if ctx.value != 0:
        return []
    worst_h = 0.0
    worst_fix = 0.0
    for cert in enumerate_certificates(ctx.at, ctx.inst.assignment, cap=ctx.cap):
        psi0 = build_psi_0(cert, ctx.at).amplitudes
        norm = np.linalg.norm(psi0)
        worst_h = max(worst_h, float(np.linalg.norm(ctx.h @ psi0) / norm))
        worst_fix = max(worst_fix, float(np.linalg.norm(ctx.rp.u2_signs * psi0 - psi0) / norm))
        worst_fix = max(worst_fix, float(np.linalg.norm(ctx.rp.u1 @ psi0 - psi0) / norm))
    return [
        CheckResult("tail-kernel", ctx.inst.label, worst_h <= KERNEL_RESIDUAL_TOL, worst_h, KERNEL_RESIDUAL_TOL),
        CheckResult(
            "tail-kernel",
            f"{ctx.inst.label}[fixed]",
            worst_fix <= FIXED_STATE_TOL,
            worst_fix,
            FIXED_STATE_TOL,
            detail="both reflections fix the witness",
        ),
    ]


def _check_pair_fixed(ctx) -> list[CheckResult]:
    """Two-certificate states are fixed by both reflections and avoid root/tail."""
    states = pair_states(ctx.at, ctx.inst.assignment, cap=ctx.cap)
    if not states:
        return [CheckResult("pair-fixed", ctx.inst.label, True, 0.0, FIXED_STATE_TOL, detail="no eligible vertex")]
    worst = 0.0
    worst_support = 0.0
    for s in states:
        vec = s.amplitudes
        norm = np.linalg.norm(vec)
        worst = max(worst, float(np.linalg.norm(ctx.h @ vec) / norm))
        worst = max(worst, float(np.linalg.norm(ctx.rp.u2_signs * vec - vec) / norm))
        worst = max(worst, float(np.linalg.norm(ctx.rp.u1 @ vec - vec) / norm))
        worst_support = max(worst_support, float(np.abs(vec[: ctx.at.tail + 1]).max()))
    return [
        CheckResult("pair-fixed", ctx.inst.label, worst <= FIXED_STATE_TOL, worst, FIXED_STATE_TOL,
                    detail=f"{len(states)} pair states"),
        CheckResult("pair-fixed", f"{ctx.inst.label}[support]", worst_support <= 1e-12, worst_support, 1e-12,
                    detail="zero amplitude on root and tail"),
    ]


def _check_structure(ctx) -> list[CheckResult]:
    """Certificate membership pattern: exactly one grandchild chosen per side."""
    tree = ctx.at.tree
    ok = True
    n_certs = 0
    for v in _zero_rooted_vertices(ctx):
        for cert in enumerate_certificates(ctx.at, ctx.inst.assignment, v, cap=ctx.cap):
            n_certs += 1
            members = cert.vertices()
            for w in members:
                node = tree.nodes[w]
                if node.is_leaf:
                    var_ok = ctx.values[w] == 0
                    ok = ok and bool(var_ok)
                    continue
                z1, z2 = node.children
                for z in (z1, z2):
                    chosen = [y for y in tree.nodes[z].children if y in members]
                    ok = ok and len(chosen) == 1
            ok = ok and bool(ctx.values[cert.v] == 0)
    return [CheckResult("structure", ctx.inst.label, ok, detail=f"{n_certs} certificates")]


def _check_norm_bounds(ctx) -> list[CheckResult]:
    """Certificate norms against the closed-form bounds."""
    m, d = tree_stats(ctx.at.tree)
    out = []
    worst_a = -math.inf
    worst_b = -math.inf
    for v in _zero_rooted_vertices(ctx):
        for cert in enumerate_certificates(ctx.at, ctx.inst.assignment, v, cap=ctx.cap):
            n2 = build_psi_c(cert, ctx.at).norm2
            worst_b = max(worst_b, n2 - 2.0 * math.sqrt(m[v] * d[v]))
            if ctx.at.mode == "balanced":
                worst_a = max(worst_a, n2 - (2.0 * math.sqrt(m[v]) - 1.0))
    slack = 1e-9
    out.append(
        CheckResult("norm-bounds", f"{ctx.inst.label}[general]", worst_b <= slack, worst_b, 0.0,
                    detail="norm^2 - 2 sqrt(m d) <= 0")
    )
    if ctx.at.mode == "balanced":
        out.append(
            CheckResult("norm-bounds", f"{ctx.inst.label}[balanced]", worst_a <= slack, worst_a, 0.0,
                        detail="norm^2 - (2 sqrt(m) - 1) <= 0")
        )
    return out


def _check_overlap(ctx) -> list[CheckResult]:
    """Value-0 witness keeps overlap >= 1/sqrt(5) with the normalized start state."""
    if ctx.value != 0:
        return []
    cert = first_certificate(ctx.at, ctx.inst.assignment)
    psi0 = build_psi_0(cert, ctx.at).amplitudes
    overlap = float(psi0 @ ctx.rp.start_normalized / np.linalg.norm(psi0))
    threshold = 1.0 / math.sqrt(5.0) - OVERLAP_SLACK
    return [CheckResult("overlap", ctx.inst.label, overlap >= threshold, overlap, threshold)]


def _check_span_orth(ctx) -> list[CheckResult]:
    """Pair-state span: inside the kernel, orthogonal to the start state."""
    basis = ctx.sprime
    if basis.shape[1] == 0:
        return [CheckResult("span-orth", ctx.inst.label, True, 0.0, ORTHOGONALITY_TOL, detail="empty span")]
    worst_start = float(np.abs(basis.T @ ctx.rp.start_state).max())
    worst_kernel = float(np.abs(ctx.h @ basis).max())
    passed = worst_start <= ORTHOGONALITY_TOL and worst_kernel <= 1e-9
    return [
        CheckResult("span-orth", ctx.inst.label, passed, worst_start, ORTHOGONALITY_TOL,
                    detail=f"dim {basis.shape[1]}, kernel residual {worst_kernel:.2e}")
    ]


def _check_gap(ctx) -> list[CheckResult]:
    """Value-1 instances: relevant eigenphases stay above the constant floor.

    Instances between half the constant and the constant are flagged, not
    failed; only a drop below half the constant fails the check.
    """
    if ctx.value != 1:
        return []
    theta_min = theta_min_for(ctx.at)
    measured = min_relevant_phase(ctx.spectrum)
    if measured >= theta_min:
        return [CheckResult("gap", ctx.inst.label, True, measured, theta_min)]
    if measured >= GAP_HARD_FACTOR * theta_min:
        return [
            CheckResult("gap", ctx.inst.label, True, measured, theta_min, flagged=True,
                        detail="above half the constant floor only")
        ]
    return [CheckResult("gap", ctx.inst.label, False, measured, theta_min)]


def _check_projection(ctx) -> list[CheckResult]:
    """Value-1 instances: leaf-1 mass of reduced kernel vectors >= 1/K."""
    if ctx.value != 1:
        return []
    k = 20.0 * ctx.at.num_leaves if ctx.at.mode == "balanced" else 30.0 * ctx.at.num_leaves * ctx.at.depth
    gap = projection_gap(ctx.ed, ctx.rp, ctx.sprime)
    threshold = 1.0 / k
    return [CheckResult("projection", ctx.inst.label, gap >= threshold, gap, threshold)]


def _check_angle_comp(ctx) -> list[CheckResult]:
    """Composed angle bound: min relevant phase >= sqrt(projection gap)."""
    if ctx.value != 1:
        return []
    gap = projection_gap(ctx.ed, ctx.rp, ctx.sprime)
    if not math.isfinite(gap):
        return []
    measured = min_relevant_phase(ctx.spectrum)
    threshold = math.sqrt(gap) - COMPOSED_SLACK
    return [CheckResult("angle-comp", ctx.inst.label, measured >= threshold, measured, threshold)]


def _check_ab_bounds(ctx) -> list[CheckResult]:
    if ctx.at.mode != "balanced" or not ctx.first_for_tree:
        return []
    bounds = bounds_table(ctx.at, strict=False)
    return [
        CheckResult("ab-bounds", ctx.inst.label, not bounds.violations,
                    detail="; ".join(bounds.violations) or f"{len(bounds.rows)} vertices")
    ]


def _check_delta_bound(ctx) -> list[CheckResult]:
    """General-mode delta <= 1/5 claim; constant-level misses are flagged."""
    if ctx.at.mode != "general" or not ctx.first_for_tree:
        return []
    bounds = bounds_table(ctx.at, strict=False)
    worst = max((row["delta"] for row in bounds.rows), default=0.0)
    if not bounds.violations:
        return [CheckResult("delta-bound", ctx.inst.label, True, worst, 0.2)]
    return [
        CheckResult("delta-bound", ctx.inst.label, True, worst, 0.2, flagged=True,
                    detail=f"{len(bounds.violations)} vertices exceed 1/5 at this size")
    ]


def _check_tail_threshold(ctx) -> list[CheckResult]:
    if not ctx.first_for_tree:
        return []
    res = tail_threshold_check(ctx.at)
    return [
        CheckResult("tail-threshold", ctx.inst.label, res["passed"], res["b_root"], res["half_tail"])
    ]


CHECKS = {
    "odd-levels": _check_odd_levels,
    "cert-kernel": _check_cert_kernel,
    "tail-kernel": _check_tail_kernel,
    "pair-fixed": _check_pair_fixed,
    "structure": _check_structure,
    "norm-bounds": _check_norm_bounds,
    "overlap": _check_overlap,
    "span-orth": _check_span_orth,
    "gap": _check_gap,
    "projection": _check_projection,
    "angle-comp": _check_angle_comp,
    "ab-bounds": _check_ab_bounds,
    "delta-bound": _check_delta_bound,
    "tail-threshold": _check_tail_threshold,
}

CHECK_NAMES = tuple(CHECKS)


def run_suite(
    instances: list[Instance],
    selector: str = "all",
    seed: int = 0,
    cap: int = DEFAULT_CERTIFICATE_CAP,
) -> SuiteReport:
    """Run the selected checks over the instances and aggregate a report.

    ``selector`` is ``"all"`` or a comma-separated list of check names;
    unknown names raise ``ValueError``. Check failures never raise — they are
    recorded in the report.
    """
    if selector.strip() == "all":
        names = list(CHECK_NAMES)
    else:
        names = [s.strip() for s in selector.split(",") if s.strip()]
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise ValueError(f"unknown check selector(s) {unknown}; available: {list(CHECK_NAMES)}")
    report = SuiteReport(selectors=tuple(names), seed=seed)
    tree_cache: dict = {}
    for inst in instances:
        ctx = _InstanceContext(inst, tree_cache, cap)
        for name in names:
            report.results.extend(CHECKS[name](ctx))
    return report
