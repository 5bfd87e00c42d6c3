"""Simulated phase estimation of the evaluation unitary and the decision rule.

Phase estimation on a superposition input behaves exactly like phase
estimation on a random eigenstate drawn with probability equal to the squared
amplitude, so the simulation samples an eigenphase from the overlap weights
and then samples the register readout from the closed-form measurement
distribution for that phase. No ancilla register is ever materialized, which
keeps memory quadratic in the graph size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .formula import normalize_even_depth, subtree_values
from .spectral import build_reflections, eigendecompose, product_spectrum
from .tree import AugmentedTree, attach_tail, build_hamiltonian

__all__ = [
    "OVERLAP_CONSTANT",
    "QpeConfig",
    "QpeOutcome",
    "PhaseProfile",
    "theta_min_for",
    "estimate_pmf",
    "sample_estimates",
    "run_qpe",
    "phase_profile",
    "decide",
    "Decision",
    "scaling_run",
    "fit_loglog_slope",
]

# Guaranteed lower bound on the squared start-state overlap with the phase-0
# eigenspace for value-0 instances; fixes the decision threshold.
OVERLAP_CONSTANT = 0.2
DEFAULT_EPSILON = 1.0 / 15.0  # OVERLAP_CONSTANT / 3
DEFAULT_REPETITIONS = 25
GUARD_BITS = 2


def theta_min_for(at: AugmentedTree) -> float:
    """Eigenphase floor for value-1 instances: ``1/sqrt(20 N)`` balanced, ``1/sqrt(30 N d)`` general."""
    if at.mode == "balanced":
        return 1.0 / math.sqrt(20.0 * at.num_leaves)
    return 1.0 / math.sqrt(30.0 * at.num_leaves * at.depth)


@dataclass(frozen=True)
class QpeConfig:
    """Phase-estimation parameters; ``delta`` is always half of ``theta_min``."""

    theta_min: float
    delta: float
    epsilon: float = DEFAULT_EPSILON
    register_bits: int = 0
    repetitions: int = DEFAULT_REPETITIONS
    seed: int = 0

    def __post_init__(self):
        if not math.isclose(self.delta, self.theta_min / 2.0, rel_tol=0, abs_tol=1e-15):
            raise ValueError("delta must equal theta_min / 2")
        if not 0 < self.epsilon <= OVERLAP_CONSTANT / 3.0 + 1e-15:
            raise ValueError(f"epsilon must lie in (0, {OVERLAP_CONSTANT / 3.0}]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        min_bits = math.ceil(math.log2(2.0 * math.pi / self.delta))
        if self.register_bits < min_bits:
            raise ValueError(f"register_bits {self.register_bits} below minimum {min_bits}")

    @property
    def tau(self) -> float:
        """Decision threshold: midpoint of the two guaranteed acceptance rates."""
        c = OVERLAP_CONSTANT
        return ((1.0 - self.epsilon) * c + self.epsilon) / 2.0

    @property
    def queries_per_decision(self) -> int:
        """One oracle query per application of the unitary, summed over all powers."""
        return self.repetitions * (2**self.register_bits - 1)

    @classmethod
    def for_instance(
        cls,
        at: AugmentedTree,
        repetitions: int = DEFAULT_REPETITIONS,
        epsilon: float = DEFAULT_EPSILON,
        register_bits: int | None = None,
        guard_bits: int = GUARD_BITS,
        seed: int = 0,
    ) -> "QpeConfig":
        theta_min = theta_min_for(at)
        delta = theta_min / 2.0
        if register_bits is None:
            register_bits = math.ceil(math.log2(2.0 * math.pi / delta)) + guard_bits
        return cls(
            theta_min=theta_min,
            delta=delta,
            epsilon=epsilon,
            register_bits=register_bits,
            repetitions=repetitions,
            seed=seed,
        )


@dataclass(frozen=True)
class QpeOutcome:
    estimates: np.ndarray  # per-run |theta| estimates
    decision: int
    query_count: int
    fraction_below: float


@dataclass(frozen=True)
class PhaseProfile:
    """Eigenphases of the evaluation unitary with start-state overlap weights."""

    thetas: np.ndarray
    weights: np.ndarray  # probabilities, sum to 1

    def __post_init__(self):
        total = float(self.weights.sum())
        if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError(f"overlap weights sum to {total}, expected 1")
        object.__setattr__(self, "weights", self.weights / total)


def estimate_pmf(theta: float, register_bits: int) -> np.ndarray:
    """Exact readout distribution of ``register_bits``-bit phase estimation.

    Outcome ``m`` encodes phase ``2*pi*m / 2**b``; the probability is the
    squared Dirichlet kernel ``sin^2(M*x/2) / (M^2 sin^2(x/2))`` at the offset
    ``x = theta - 2*pi*m/M``, with the removable singularity patched to 1.
    """
    m_size = 2**register_bits
    grid = 2.0 * math.pi * np.arange(m_size) / m_size
    # circular offset in (-pi, pi]; squared sines are invariant under the wrap
    x = np.mod(theta - grid + math.pi, 2.0 * math.pi) - math.pi
    half = 0.5 * x
    sin_half = np.sin(half)
    on_grid = np.abs(x) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        pmf = np.where(on_grid, 1.0, (np.sin(m_size * half) / (m_size * sin_half)) ** 2)
    total = pmf.sum()
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
        raise AssertionError(f"estimator pmf sums to {total}")
    return pmf / total


def sample_estimates(
    profile: PhaseProfile, cfg: QpeConfig, rng: np.random.Generator, runs: int | None = None
) -> np.ndarray:
    """Draw ``runs`` independent |theta| estimates (defaults to cfg.repetitions)."""
    runs = cfg.repetitions if runs is None else runs
    m_size = 2**cfg.register_bits
    which = rng.choice(len(profile.thetas), size=runs, p=profile.weights)
    outcomes = np.zeros(runs, dtype=np.int64)
    for j in np.unique(which):
        mask = which == j
        pmf = estimate_pmf(float(profile.thetas[j]), cfg.register_bits)
        outcomes[mask] = rng.choice(m_size, size=int(mask.sum()), p=pmf)
    folded = np.minimum(outcomes, m_size - outcomes)
    return 2.0 * math.pi * folded / m_size


def phase_profile_from_spectrum(spectrum) -> PhaseProfile:
    return PhaseProfile(
        thetas=np.array([e.theta for e in spectrum.entries]),
        weights=np.array([e.overlap2 for e in spectrum.entries]),
    )


def run_qpe(rp, cfg: QpeConfig, rng: np.random.Generator | None = None) -> QpeOutcome:
    """Run ``cfg.repetitions`` phase estimations of the paired reflections."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    profile = phase_profile_from_spectrum(product_spectrum(rp))
    estimates = sample_estimates(profile, cfg, rng)
    fraction = float(np.mean(estimates < cfg.delta))
    return QpeOutcome(
        estimates=estimates,
        decision=0 if fraction > cfg.tau else 1,
        query_count=cfg.queries_per_decision,
        fraction_below=fraction,
    )


def phase_profile(at: AugmentedTree, assignment) -> PhaseProfile:
    """Full pipeline up to the eigenphase/overlap profile (reusable across runs)."""
    h = build_hamiltonian(at)
    ed = eigendecompose(h)
    rp = build_reflections(ed, at, assignment)
    return phase_profile_from_spectrum(product_spectrum(rp))


@dataclass(frozen=True)
class Decision:
    bit: int
    query_count: int
    fraction_below: float
    config: QpeConfig
    diagnostics: dict = field(default_factory=dict)


def decide(
    at: AugmentedTree,
    assignment,
    cfg: QpeConfig | None = None,
    rng: np.random.Generator | None = None,
    profile: PhaseProfile | None = None,
) -> Decision:
    """Decide the formula value from phase statistics alone.

    Outputs 0 (the formula evaluates to 0) when the fraction of runs whose
    estimate lands below ``theta_min / 2`` exceeds the midpoint threshold
    ``tau``, else 1.
    """
    if cfg is None:
        cfg = QpeConfig.for_instance(at)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if profile is None:
        profile = phase_profile(at, assignment)
    estimates = sample_estimates(profile, cfg, rng)
    fraction = float(np.mean(estimates < cfg.delta))
    bit = 0 if fraction > cfg.tau else 1
    return Decision(
        bit=bit,
        query_count=cfg.queries_per_decision,
        fraction_below=fraction,
        config=cfg,
        diagnostics={
            "theta_min": cfg.theta_min,
            "delta": cfg.delta,
            "epsilon": cfg.epsilon,
            "tau": cfg.tau,
            "register_bits": cfg.register_bits,
            "repetitions": cfg.repetitions,
        },
    )


def scaling_run(
    k_values=(2, 4, 6),
    trials: int = 20,
    seed: int = 0,
    repetitions: int = DEFAULT_REPETITIONS,
) -> list[dict]:
    """Mean query counts of the decision procedure over complete trees.

    For each size, runs ``trials`` seeded random assignments through the full
    pipeline and records the (deterministic) per-decision query count plus the
    agreement rate against classical evaluation.
    """
    from .formula import generate_balanced  # local import keeps module load light

    root_seq = np.random.SeedSequence(seed)
    rows = []
    for k, child_seq in zip(k_values, root_seq.spawn(len(k_values))):
        tree = normalize_even_depth(generate_balanced(int(k)))
        at = attach_tail(tree, "balanced")
        cfg = QpeConfig.for_instance(at, repetitions=repetitions, seed=seed)
        rng = np.random.default_rng(child_seq)
        agree = 0
        queries = []
        for _ in range(trials):
            bits = tuple(int(b) for b in rng.integers(0, 2, size=tree.num_vars))
            profile = phase_profile(at, bits)
            decision = decide(at, bits, cfg=cfg, rng=rng, profile=profile)
            queries.append(decision.query_count)
            agree += int(decision.bit == int(subtree_values(tree, bits)[tree.root]))
        rows.append(
            {
                "k": int(k),
                "N": at.num_leaves,
                "tail": at.tail,
                "register_bits": cfg.register_bits,
                "trials": trials,
                "mean_queries": float(np.mean(queries)),
                "agreement": agree / trials,
            }
        )
    return rows


def fit_loglog_slope(rows: list[dict]) -> float:
    """Least-squares slope of ``log(mean_queries)`` against ``log(N)``."""
    if len(rows) < 2:
        return float("nan")
    x = np.log([r["N"] for r in rows])
    y = np.log([r["mean_queries"] for r in rows])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
