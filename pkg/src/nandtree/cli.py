"""Command-line interface: eval, spectrum, certify, verify, scaling.

JSON is the machine interface (byte-identical for identical inputs and seed);
tables are for eyes. Report-style commands can write their delimited output to
a file and render a matplotlib figure alongside it. Exit codes: 0 success or
all checks passed, 1 check failure, 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .certificates import (
    CertificateError,
    EnumerationCapError,
    build_psi_0,
    build_psi_c,
    certificate_to_json_dict,
    enumerate_certificates,
)
from .corpus import balanced_instances, general_instances
from .formula import (
    FormulaTree,
    evaluate_classical,
    format_formula,
    is_complete_balanced,
    normalize_even_depth,
    parse_assignment,
    parse_formula,
    tree_stats,
)
from .qpe import QpeConfig, decide, fit_loglog_slope, scaling_run, theta_min_for
from .spectral import build_reflections, eigendecompose, product_spectrum, spectrum_to_rows
from .tree import attach_tail, build_hamiltonian, restrict_to_subtree
from .verify import run_suite

USAGE_ERROR = 2
CHECK_FAILURE = 1


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _write_or_print(text: str, output: str | None):
    if output:
        with open(output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _plot_path(plot_arg: str | None, output: str | None, default_stem: str) -> str | None:
    """Resolve the figure path: explicit, or derived from the output stem."""
    if plot_arg is None:
        return None
    if plot_arg:
        return plot_arg
    stem = os.path.splitext(output)[0] if output else default_stem
    return stem + ".png"


def _load_formula(arg: str) -> FormulaTree:
    text = arg
    if arg.startswith("@"):
        with open(arg[1:]) as fh:
            text = fh.read()
    return parse_formula(text)


def _prepare(args) -> tuple:
    """Parse formula and assignment, normalize, attach the tail."""
    tree = _load_formula(args.formula)
    bits = parse_assignment(args.assignment, tree.num_vars)
    normalized = normalize_even_depth(tree)
    mode = args.mode
    if mode == "auto":
        mode = "balanced" if is_complete_balanced(normalized) else "general"
    at = attach_tail(normalized, mode, override_t=args.tail, dimension_cap=args.cap)
    return tree, normalized, bits, at


def _add_instance_args(p: argparse.ArgumentParser):
    p.add_argument("formula", help="formula text like N(N(x1,x2),x3), or @path to read a file")
    p.add_argument("assignment", help="bitstring, most significant bit is x1 (e.g. 0110)")
    p.add_argument("--mode", choices=("auto", "balanced", "general"), default="auto")
    p.add_argument("--tail", type=int, default=None, help="override the tail length (even)")
    p.add_argument("--cap", type=int, default=2048, help="dimension cap")


def cmd_eval(args) -> int:
    tree, normalized, bits, at = _prepare(args)
    cfg = QpeConfig.for_instance(
        at, repetitions=args.reps, register_bits=args.bits, seed=args.seed
    )
    decision = decide(at, bits, cfg=cfg, rng=np.random.default_rng(args.seed))
    classical = evaluate_classical(tree, bits)
    report = {
        "formula": format_formula(tree),
        "assignment": "".join(str(b) for b in bits),
        "mode": at.mode,
        "decision": decision.bit,
        "classical": classical,
        "agree": decision.bit == classical,
        "query_count": decision.query_count,
        "theta_min": cfg.theta_min,
        "fraction_below": decision.fraction_below,
        "tau": cfg.tau,
        "register_bits": cfg.register_bits,
        "repetitions": cfg.repetitions,
        "tail": at.tail,
        "seed": args.seed,
    }
    if args.format == "json":
        _write_or_print(_json_dump(report), args.output)
    else:
        lines = [f"{k}: {report[k]}" for k in report]
        _write_or_print("\n".join(lines), args.output)
    return 0


def cmd_spectrum(args) -> int:
    _, _, bits, at = _prepare(args)
    ed = eigendecompose(build_hamiltonian(at))
    rp = build_reflections(ed, at, bits)
    spectrum = product_spectrum(rp)
    rows = spectrum_to_rows(spectrum)
    theta_min = theta_min_for(at)
    if args.format == "csv":
        text = "theta,overlap2\n" + "\n".join(f"{r['theta']!r},{r['overlap2']!r}" for r in rows)
        _write_or_print(text, args.output)
    elif args.format == "json":
        _write_or_print(
            _json_dump({"mode": at.mode, "theta_min": theta_min, "rows": rows}), args.output
        )
    else:
        lines = [f"phase floor (value-1 instances): {theta_min!r}", f"{'theta':>14} {'overlap2':>14}"]
        lines += [f"{r['theta']:>14.8f} {r['overlap2']:>14.3e}" for r in rows]
        _write_or_print("\n".join(lines), args.output)
    figure = _plot_path(args.plot, args.output, "spectrum")
    if figure:
        from .plots import plot_spectrum

        plot_spectrum(rows, theta_min, figure, title=f"{args.formula} / {args.assignment}")
    return 0


def cmd_certify(args) -> int:
    tree, normalized, bits, at = _prepare(args)
    m, d = tree_stats(normalized)
    try:
        certs = enumerate_certificates(at, bits, cap=args.cert_cap)
    except CertificateError:
        print("formula evaluates to 1: only value-0 instances have certificates", file=sys.stderr)
        return CHECK_FAILURE
    h = build_hamiltonian(at)
    ed = eigendecompose(h)
    rp = build_reflections(ed, at, bits)
    root = normalized.root
    if at.mode == "balanced":
        norm_bound = 2.0 * math.sqrt(m[root]) - 1.0
    else:
        norm_bound = 2.0 * math.sqrt(m[root] * d[root])
    entries = []
    worst_resid = 0.0
    coords = at.subtree_coords(root)
    sub = restrict_to_subtree(h, at, root)
    for cert in certs:
        state = build_psi_c(cert, at)
        resid = float(
            np.linalg.norm(sub @ state.amplitudes[coords]) / np.linalg.norm(state.amplitudes)
        )
        worst_resid = max(worst_resid, resid)
        entry = certificate_to_json_dict(cert, at)
        entry["kernel_residual"] = resid
        entries.append(entry)
    psi0 = build_psi_0(certs[0], at).amplitudes
    overlap = float(psi0 @ rp.start_normalized / np.linalg.norm(psi0))
    report = {
        "formula": format_formula(tree),
        "assignment": "".join(str(b) for b in bits),
        "mode": at.mode,
        "certificate_count": len(certs),
        "norm_bound": norm_bound,
        "max_norm2": max(e["norm2"] for e in entries),
        "max_kernel_residual": worst_resid,
        "witness_overlap": overlap,
        "overlap_bound": 1.0 / math.sqrt(5.0),
        "certificates": entries,
    }
    if args.format == "json":
        _write_or_print(_json_dump(report), args.output)
    else:
        lines = [
            f"certificates: {report['certificate_count']}",
            f"norm^2 max {report['max_norm2']!r} vs bound {norm_bound!r}",
            f"kernel residual max {worst_resid:.3e}",
            f"witness overlap {overlap!r} (bound {report['overlap_bound']!r})",
        ]
        lines += [f"  {e['vertices']}" for e in entries]
        _write_or_print("\n".join(lines), args.output)
    ok = report["max_norm2"] <= norm_bound + 1e-9 and worst_resid <= 1e-10 and overlap >= 1 / math.sqrt(5) - 1e-9
    return 0 if ok else CHECK_FAILURE


def cmd_verify(args) -> int:
    instances = []
    if args.corpus in ("balanced", "all"):
        instances += balanced_instances(k_max=args.k_max)
    if args.corpus in ("general", "all"):
        instances += general_instances(max_assignments=args.max_assignments, seed=args.seed)
    report = run_suite(instances, selector=args.selector, seed=args.seed, cap=args.cert_cap)
    if args.format == "json":
        _write_or_print(_json_dump(report.to_json_dict()), args.output)
    else:
        _write_or_print(report.to_table(verbose=args.verbose), args.output)
    figure = _plot_path(args.plot, args.output, "verify")
    if figure:
        from .plots import plot_suite

        plot_suite(report, figure)
    return 0 if report.all_passed else CHECK_FAILURE


def cmd_scaling(args) -> int:
    k_values = tuple(int(s) for s in args.k_list.split(","))
    rows = scaling_run(k_values=k_values, trials=args.trials, seed=args.seed, repetitions=args.reps)
    slope = fit_loglog_slope(rows)
    if args.format == "csv":
        header = "k,N,tail,register_bits,trials,mean_queries,agreement"
        lines = [header] + [
            f"{r['k']},{r['N']},{r['tail']},{r['register_bits']},{r['trials']},{r['mean_queries']!r},{r['agreement']!r}"
            for r in rows
        ]
        _write_or_print("\n".join(lines), args.output)
    elif args.format == "json":
        _write_or_print(_json_dump({"slope": slope, "rows": rows}), args.output)
    else:
        lines = [f"{'N':>6} {'queries':>12} {'bits':>6} {'agreement':>10}"]
        lines += [
            f"{r['N']:>6} {r['mean_queries']:>12.1f} {r['register_bits']:>6} {r['agreement']:>10.2f}"
            for r in rows
        ]
        lines.append(f"log-log slope: {slope!r}")
        _write_or_print("\n".join(lines), args.output)
    figure = _plot_path(args.plot, args.output, "scaling")
    if figure:
        from .plots import plot_scaling

        plot_scaling(rows, slope, figure)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nandtree",
        description="Evaluate read-once NAND formulas by simulated two-reflection phase estimation",
    )
    parser.add_argument("--version", action="version", version=f"nandtree {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="decide a formula value quantumly and compare with classical")
    _add_instance_args(p)
    p.add_argument("--reps", type=int, default=25, help="phase estimations per decision")
    p.add_argument("--bits", type=int, default=None, help="phase register bits (default: derived)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spectrum", help="eigenphases and start-state overlaps of the walk unitary")
    _add_instance_args(p)
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")
    p.add_argument("--output", default=None)
    p.add_argument("--plot", nargs="?", const="", default=None, help="render a figure (optional path)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("certify", help="enumerate value-0 certificates and their invariants")
    _add_instance_args(p)
    p.add_argument("--cert-cap", type=int, default=10_000)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="run the numeric certification suite over a corpus")
    p.add_argument("--corpus", choices=("balanced", "general", "all"), default="all")
    p.add_argument("--k-max", type=int, default=3, help="largest complete-tree height in the balanced grid")
    p.add_argument("--selector", default="all", help="comma-separated check names (default all)")
    p.add_argument("--max-assignments", type=int, default=64)
    p.add_argument("--cert-cap", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.add_argument("--verbose", action="store_true", help="table format: list every check, not just failures")
    p.add_argument("--output", default=None)
    p.add_argument("--plot", nargs="?", const="", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scaling", help="query-count scaling over complete trees")
    p.add_argument("--k-list", default="2,4,6", help="comma-separated tree heights")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--reps", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")
    p.add_argument("--output", default=None)
    p.add_argument("--plot", nargs="?", const="", default=None)
    p.set_defaults(func=cmd_scaling)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, EnumerationCapError) as exc:
        # parse errors, bad bitstrings, bad selectors, size caps
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
