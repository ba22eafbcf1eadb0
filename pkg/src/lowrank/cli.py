"""Command-line interface.

Subcommands: recover, phase, bounds, golf, stabdemo, coherence,
basis-check.  Exit codes: 0 success, 1 experiment failure under
--assert, 2 usage errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bases, golfing, harness, solver, stabilizer
from .errors import InvalidInput, OutOfWindow
from .sampling import stream_rng


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lowrank",
                                     description="low-rank matrix recovery toolbox")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="solve one problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--out", default=None, help="write the estimate as .npy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, default=20000)
    p.add_argument("--eps", type=float, default=1e-9)

    p = sub.add_parser("phase", help="recovery phase diagram")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--assert", dest="check", action="store_true",
                   help="exit 1 unless success rate is non-decreasing in m")

    p = sub.add_parser("bounds", help="tail-bound validation sweep")
    p.add_argument("--config", default=None,
                   help="config file; trials/seed/out keys apply")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--assert", dest="check", action="store_true",
                   help="exit 1 on any violated verdict")

    p = sub.add_parser("golf", help="dual-certificate trace")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--variant", default="simple",
                   choices=("simple", "general", "refined"))
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--scale", type=float, default=1.0,
                   help="multiplier on every kappa_i")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the trace CSV here")
    p.add_argument("--assert", dest="check", action="store_true",
                   help="exit 1 unless the run succeeded and verifies")

    p = sub.add_parser("stabdemo", help="ambiguous-pair and lower-bound demo")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--omega-size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--epsilon", type=float, default=1.0)

    p = sub.add_parser("coherence", help="coherence report for a random test matrix")
    p.add_argument("--basis", default="pauli", choices=("pauli", "hermitian-standard"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("basis-check", help="orthonormality and completeness check")
    p.add_argument("--kind", default="pauli",
                   choices=("pauli", "hermitian-standard", "custom"))
    p.add_argument("--k", type=int, default=None, help="qubit count for pauli")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--file", default=None, help="opbasis v1 file for kind=custom")
    p.add_argument("--exhaustive", action="store_true")
    return parser


def _cmd_recover(args) -> int:
    problem = solver.load_problem(args.problem)
    cfg = solver.SolverConfig(max_iterations=args.max_iterations,
                              eps_primal=args.eps, eps_dual=args.eps)
    res = solver.recover(problem, cfg)
    nuc = float(np.abs(np.linalg.eigvalsh(res.sigma)).sum())
    print(f"converged={res.converged} iterations={res.iterations} "
          f"primal={res.primal_residual:.3e} dual={res.dual_residual:.3e} "
          f"nuclear_norm={nuc:.6g}")
    if args.out:
        np.save(args.out, res.sigma)
        print(f"estimate written to {args.out}")
    return 0


def _cmd_phase(args) -> int:
    cfg = harness.load_config(args.config) if args.config else harness.ExperimentConfig()
    if args.seed is not None:
        cfg = harness.replace_field(cfg, master_seed=args.seed)
    if args.trials is not None:
        cfg = harness.replace_field(cfg, trials=args.trials)
    if args.workers is not None:
        cfg = harness.replace_field(cfg, workers=args.workers)
    if args.out is not None:
        cfg = harness.replace_field(cfg, out=args.out)
    rows, cells = harness.run_phase_diagram(cfg)
    for cell in cells:
        print(f"n={cell.n} r={cell.r} basis={cell.basis} mode={cell.mode} "
              f"m={cell.m}: {cell.successes}/{cell.trials} "
              f"mean_rel_err={cell.mean_relative_error:.3e}")
    if args.check:
        ok = harness.success_monotone_in_m(cells)
        print(f"monotone-in-m: {'ok' if ok else 'FAILED'}")
        return 0 if ok else 1
    return 0


def _cmd_bounds(args) -> int:
    trials, seed, out = 500, 0, args.out
    if args.config:
        cfg = harness.load_config(args.config)
        trials, seed = cfg.trials, cfg.master_seed
        out = out or cfg.out
    if args.trials is not None:
        trials = args.trials
    if args.seed is not None:
        seed = args.seed
    reports = harness.run_bound_validation(trials=trials, master_seed=seed, out=out)
    violated = 0
    for _, _, rep in reports:
        print(f"{rep.kind:22s} t={rep.t:<8g} analytic={rep.analytic:<12.4g} "
              f"empirical={rep.empirical:<8.4g} verdict={rep.verdict}")
        violated += rep.verdict == "violated"
    print(f"{violated} violated of {len(reports)} points")
    if args.check and violated:
        return 1
    return 0


def _cmd_golf(args) -> int:
    cfg = golfing.schedule_params(args.variant, args.n, args.r,
                                  beta=args.beta, constant_scale=args.scale)
    B = harness.make_basis("pauli", args.n)
    rho = harness.random_rho(args.n, args.r, stream_rng(args.seed, harness._RHO_STREAM))
    cert = golfing.run_golfing(rho, B, cfg, seed=args.seed)
    report = golfing.verify_certificate(rho, cert.Y, B, cert.sampled_labels())
    print(f"variant={cfg.variant} l={cfg.l} batches={len(cert.rows)} "
          f"samples={cert.samples_consumed} success={cert.success}")
    print(f"pt_residual={report.pt_residual:.3e} (thr {report.pt_threshold:.3e}) "
          f"ptperp_norm={report.ptperp_norm:.3e} (thr {report.ptperp_threshold}) "
          f"range_residual={report.range_residual:.3e} passed={report.passed}")
    if args.out:
        golfing.export_trace(cert, args.out, comment=f"schema: golf v1 seed={args.seed}")
        print(f"trace written to {args.out}")
    if args.check and not (cert.success and report.passed):
        return 1
    return 0


def _cmd_stabdemo(args) -> int:
    n = 2**args.k
    rng = stream_rng(args.seed, 0x57AB)
    omega = rng.permutation(n * n)[:args.omega_size] + 1
    pair = stabilizer.find_ambiguous_pair(args.k, omega.tolist())
    if pair is None:
        print("no ambiguous pair found (omega too large?)")
        return 1
    B = bases.pauli_basis(args.k)
    coeffs1 = B.coefficients(pair.P1, omega)
    coeffs2 = B.coefficients(pair.P2, omega)
    resid = float(np.abs(coeffs1 - coeffs2).max())
    ortho = abs(float(np.vdot(pair.P1, pair.P2).real))
    print(f"group x={pair.x} elements_in_omega={pair.group_elements_in_omega} "
          f"span_dim={pair.span_dim} characters={pair.characters}")
    print(f"coefficient residual={resid:.3e} overlap tr(P1 P2)={ortho:.3e}")
    rep = stabilizer.lower_bound_trial(args.k, m=int(n * args.k / (1 + args.epsilon)),
                                       epsilon=args.epsilon, trials=args.trials,
                                       seed=args.seed)
    print(f"ambiguity frequency={rep.frequency:.4f} printed p_f={rep.p_f:.4f} "
          f"(trials={rep.trials}, m={rep.m})")
    return 0 if resid <= 1e-10 else 1


def _cmd_coherence(args) -> int:
    B = harness.make_basis(args.basis, args.n)
    rho = harness.random_rho(args.n, args.r, stream_rng(args.seed, harness._RHO_STREAM))
    rep = bases.coherence(rho, B)
    print(f"nu={rep.nu:.6g} route={rep.route} rank={rep.rank}")
    for key, val in sorted(rep.detail.items()):
        print(f"  {key}: {val:.6g}")
    return 0


def _cmd_basis_check(args) -> int:
    if args.kind == "custom":
        if not args.file:
            print("basis-check: --file is required for kind=custom", file=sys.stderr)
            return 2
        B = bases.load_basis(args.file, validate=False)
    elif args.kind == "pauli":
        if args.k is None:
            print("basis-check: --k is required for kind=pauli", file=sys.stderr)
            return 2
        B = bases.pauli_basis(args.k)
    else:
        if args.n is None:
            print("basis-check: --n is required for kind=hermitian-standard",
                  file=sys.stderr)
            return 2
        B = bases.hermitian_standard_basis(args.n)
    rep = bases.verify_basis(B, exhaustive=args.exhaustive)
    print(f"kind={B.kind} n={B.dim} elements={B.size}")
    print(f"orthonormality deviation={rep.orthonormality_deviation:.3e} "
          f"({'exhaustive' if rep.exhaustive else f'{rep.pairs_checked} random pairs'})")
    print(f"completeness deviation={rep.completeness_deviation:.3e}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    handlers = {
        "recover": _cmd_recover,
        "phase": _cmd_phase,
        "bounds": _cmd_bounds,
        "golf": _cmd_golf,
        "stabdemo": _cmd_stabdemo,
        "coherence": _cmd_coherence,
        "basis-check": _cmd_basis_check,
    }
    try:
        return handlers[args.command](args)
    except (InvalidInput, OutOfWindow, OSError) as exc:
        print(f"lowrank {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
