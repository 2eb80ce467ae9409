"""Command-line front end.

Exit status: 0 when every case passes, 1 when some case fails, 2 on an
unreadable input file, 3 when an input violates a state or strategy invariant.
"""
from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import __version__, campaigns, discrimination, fileio, measures, states
from .axioms import CHANNEL_FAMILIES, KINDS, axiom_suite
from .errors import ParseError, ValidationError
from .report import CaseRecord, ScenarioReport, worker_count

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3

MEASURE_NAMES = sorted(measures.MEASURES) + ["relative_robustness"]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None,
                   help="pass tolerance on residuals (default: per-check module values)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--figure", default=None, help="also save a PNG/PDF summary figure here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resq", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"resq {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="evaluate a measure on states")
    p.add_argument("--measure", choices=MEASURE_NAMES, default="robustness")
    p.add_argument("--state", action="append", default=[], help="state JSON file (repeatable)")
    p.add_argument("--sigma", help="reference state for relative_robustness")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--d", type=int, default=2, help="dimension of generated states")
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--trials", type=int, default=1, help="number of generated states")
    _common(p)

    p = sub.add_parser("discriminate", help="success probabilities of a strategy, or the optimal ratio")
    p.add_argument("--state", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--strategy", help="strategy JSON; default builds the ratio-optimal strategy")
    p.add_argument("--write-strategy", help="save the strategy that was evaluated")
    _common(p)

    p = sub.add_parser("verify-theorem2", help="closed form of the alpha measure against its definition")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--alpha", type=float, action="append", default=None)
    p.add_argument("--trials", type=int, default=100)
    _common(p)

    p = sub.add_parser("verify-lemma3", help="optimal discrimination ratio and its bound")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--trials", type=int, default=50, help="number of state pairs")
    p.add_argument("--samples", type=int, default=500, help="random strategies per pair")
    p.add_argument("--alpha", type=float, action="append", default=None,
                   help="also check the min-max ratio over the alpha set (repeatable)")
    _common(p)

    p = sub.add_parser("verify-theorem7", help="max-min success probability against 1 - D_g")
    p.add_argument("--theory", choices=("coherence", "entanglement"), default="coherence")
    p.add_argument("--d", type=int, default=2, help="dimension (local dimension for entanglement)")
    p.add_argument("--trials", type=int, default=50)
    _common(p)

    p = sub.add_parser("axioms", help="randomized checks of the measure conditions")
    p.add_argument("--measure", choices=sorted(KINDS), default="coherence_deficiency")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--channels", choices=CHANNEL_FAMILIES, default=None)
    _common(p)
    return ap


# -- commands ------------------------------------------------------------------------


def _load_states(args):
    if args.state:
        return [(path, *fileio.read_state(path)) for path in args.state]
    n = args.d
    out = []
    for k in range(args.trials):
        rng = np.random.default_rng([args.seed, k])
        rank = args.rank if args.rank is not None else int(rng.integers(1, n + 1))
        out.append((f"random[{k}]", states.random_density(n, rank, rng), None))
    return out


def _reference(name, rho, dims, alpha):
    """Closed-form value when one exists, else ``None``."""
    if name == "alpha_superiority_direct":
        return measures.alpha_superiority(rho, alpha).value
    if name == "coherence_deficiency" and states.is_pure(rho):
        return 1.0 - float(np.sum(np.abs(rho))) / rho.shape[0]
    if name == "entanglement_deficiency" and states.is_pure(rho):
        d = int(round(math.sqrt(rho.shape[0]))) if dims is None else dims[0]
        q = states.schmidt(states.dominant_vector(rho), (d, d)).coefficients
        return 1.0 - float(np.sum(q)) ** 2 / d
    return None


def cmd_measure(args) -> ScenarioReport:
    rep = ScenarioReport("measure", {"measure": args.measure, "alpha": args.alpha}, args.seed)
    sigma = None
    if args.measure == "relative_robustness":
        if not args.sigma:
            raise ValidationError("relative_robustness needs --sigma")
        sigma, _ = fileio.read_state(args.sigma)
    for k, (src, rho, dims) in enumerate(_load_states(args)):
        extra = {"source": src}
        if args.measure == "relative_robustness":
            res = measures.relative_robustness(rho, sigma)
        elif args.measure in ("alpha_superiority", "alpha_superiority_direct"):
            res = measures.MEASURES[args.measure](rho, args.alpha)
        elif args.measure == "entanglement_deficiency":
            res = measures.entanglement_deficiency(rho, dims)
        else:
            res = measures.MEASURES[args.measure](rho)
        value = res.value
        if hasattr(res, "certified"):
            extra["certified"] = res.certified
        if getattr(res, "duality_gap", None) is not None:
            extra["duality_gap"] = res.duality_gap
        ref = _reference(args.measure, rho, dims, args.alpha)
        residual = 0.0 if ref is None else abs(ref - value)
        tol = 1e-4 if args.measure == "alpha_superiority_direct" else 1e-8
        rep.add(CaseRecord(k, rho.shape[0], value if ref is None else ref, value, residual,
                           residual <= tol,
                           alpha=args.alpha if "alpha" in args.measure else None, extra=extra))
    return rep


def cmd_discriminate(args) -> ScenarioReport:
    rho, _ = fileio.read_state(args.state)
    sigma, _ = fileio.read_state(args.sigma)
    rep = ScenarioReport("discriminate", {"state": args.state, "sigma": args.sigma,
                                          "strategy": args.strategy}, args.seed)
    rr = measures.relative_robustness(rho, sigma).value
    if args.strategy:
        strat = fileio.read_strategy(args.strategy)
    elif math.isinf(rr):
        strat = discrimination.infinite_ratio_strategy(rho, sigma)
    else:
        strat = discrimination.lemma3_strategy(rho, sigma)
    p_rho = discrimination.succ_probability(strat, rho)
    p_sig = discrimination.succ_probability(strat, sigma)
    ratio = p_rho.p_succ / p_sig.p_succ if p_sig.p_succ > 0 else math.inf
    if math.isinf(rr):
        passed = bool(args.strategy) or p_sig.p_succ <= discrimination.ZERO_SUCCESS_TOL
        residual = 0.0
    elif args.strategy:
        residual = max(ratio - (1.0 + rr), 0.0)
        passed = residual <= discrimination.BOUND_SLACK
    else:
        residual = abs(ratio - (1.0 + rr))
        passed = residual <= discrimination.RATIO_TOL
    rep.add(CaseRecord(0, rho.shape[0], 1.0 + rr, ratio, residual, passed, extra={
        "check": "ratio", "p_succ_rho": p_rho.p_succ, "p_succ_sigma": p_sig.p_succ,
        "per_branch_rho": list(p_rho.per_branch), "per_branch_sigma": list(p_sig.per_branch)}))
    if args.write_strategy:
        fileio.write_strategy(args.write_strategy, strat)
    return rep


def cmd_alpha(args) -> ScenarioReport:
    alphas = args.alpha or [0.0, 0.2, 0.8]
    return campaigns.verify_alpha_closed_form(args.d, alphas, args.trials, args.seed, workers=worker_count())


def cmd_ratio(args) -> ScenarioReport:
    return campaigns.verify_ratio(args.d, args.trials, args.samples, args.seed,
                                   alphas=args.alpha or (), workers=worker_count())


def cmd_maxmin(args) -> ScenarioReport:
    return campaigns.verify_maxmin(args.theory, args.d, args.trials, args.seed, workers=worker_count())


def cmd_axioms(args) -> ScenarioReport:
    return axiom_suite(args.measure, trials=args.trials, seed=args.seed, d=args.d, alpha=args.alpha,
                       channels=args.channels, workers=worker_count())


COMMANDS = {
    "measure": cmd_measure,
    "discriminate": cmd_discriminate,
    "verify-theorem2": cmd_alpha,
    "verify-lemma3": cmd_ratio,
    "verify-theorem7": cmd_maxmin,
    "axioms": cmd_axioms,
}


def apply_tolerance(report: ScenarioReport, tol: float) -> None:
    for c in report.cases:
        c.passed = bool(c.residual <= tol)
    report.params["tol"] = tol


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        report = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.tol is not None:
        apply_tolerance(report, args.tol)
    if report.wall_time is None:
        report.wall_time = time.perf_counter() - start
    data = report.emit(args.format)
    if args.out:
        report.write(args.out, args.format)
    else:
        sys.stdout.write(data.decode())
    if args.figure:
        from .plotting import report_figure

        report_figure(report, args.figure)
    print(report.summary_line(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
