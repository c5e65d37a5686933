"""Command-line entry point.

Exit status: 0 on success, 1 on a domain error, 2 on a resource error,
64 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .bench import (
    EuropeanPipeline,
    fig1_paths,
    fig2_experiment,
    fig3_experiment,
    price_asian_quantum,
    write_fig1_csv,
    write_fig2_csv,
    write_fig3_csv,
    write_trace,
)
from .bsm import bsm_call_price
from .classical import mc_price_european
from .config import ExperimentConfig, load_config
from .errors import DomainError, ResourceError
from .estimation import phase_bits_for, amplitude_error_bound
from .seeding import stream

EX_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="INI experiment configuration")
    common.add_argument("--seed", type=_u64, help="override the configured seed")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: results)")
    common.add_argument("--format", choices=["csv"], default="csv")

    parser = _Parser(prog="qmc-pricing", description="Quantum and classical Monte Carlo option pricing.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("price-euro", parents=[common], help="European call via amplitude estimation")
    sub.add_parser("price-asian", parents=[common], help="Asian call via amplitude estimation")
    mc = sub.add_parser("mc", parents=[common], help="classical Monte Carlo European call")
    mc.add_argument("--samples", type=int, default=100_000)
    qae = sub.add_parser("qae", parents=[common], help="amplitude estimation of the payoff mean")
    qae.add_argument("--t", type=int, default=None, help="oracle uses (default: 2**phase_bits)")
    sub.add_parser("fig1", parents=[common], help="sample GBM paths (CSV + PNG)")
    sub.add_parser("fig2", parents=[common], help="error scaling experiment (CSV + PNG)")
    sub.add_parser("fig3", parents=[common], help="exponent ratio across strikes (CSV + PNG)")
    sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return cfg.with_seed(args.seed) if args.seed is not None else cfg


def _outdir(args) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _cmd_price_euro(args) -> int:
    cfg = _config(args)
    pipe = EuropeanPipeline(cfg)
    rows = pipe.runs(cfg.runs, cfg.seed)
    for r in rows:
        print(
            f"run {r.run_id}: pi_hat={r.pi_hat:.6f} pi_analytic={r.pi_analytic:.6f} "
            f"eps_bound={r.eps_bound:.6f} nu_est={r.nu_est:.6f} k_q={r.k_q}"
        )
    write_trace(_outdir(args) / "trace.csv", rows)
    return 0


def _cmd_price_asian(args) -> int:
    cfg = _config(args)
    spec, rows = price_asian_quantum(cfg)
    for r in rows:
        print(f"run {r.run_id}: pi_hat={r.pi_hat:.6f} pi_enumerated={r.pi_analytic:.6f} eps_bound={r.eps_bound:.6f} k_q={r.k_q}")
    extra = {"L": spec.periods, "m_per_period": spec.period_qubits, "kind": spec.kind}
    write_trace(_outdir(args) / "trace_asian.csv", rows, extra)
    return 0


def _cmd_mc(args) -> int:
    cfg = _config(args)
    est = mc_price_european(cfg.market, args.samples, stream(cfg.seed, 0))
    print(f"mc_price={est.mean:.6f} std_error={est.std_error:.6f} samples={est.samples}")
    print(f"analytic={bsm_call_price(cfg.market).price:.6f}")
    return 0


def _cmd_qae(args) -> int:
    cfg = _config(args)
    t = args.t if args.t is not None else 1 << cfg.qae.phase_bits
    pipe = EuropeanPipeline(replace(cfg, qae=replace(cfg.qae, phase_bits=phase_bits_for(t))))
    a_hat = float(pipe.estimator.sample(stream(cfg.seed, 0)))
    print(f"mu_hat={a_hat:.8f} mu_exact={pipe.mu_exact:.8f} bound={amplitude_error_bound(pipe.mu_exact, t):.8f}")
    return 0


def _cmd_fig1(args) -> int:
    from .plotting import plot_fig1

    cfg = _config(args)
    out = _outdir(args)
    t, paths = fig1_paths(cfg)
    write_fig1_csv(out / "fig1.csv", t, paths)
    plot_fig1(out / "fig1.png", t, paths, cfg.market.strike)
    print(f"wrote {out / 'fig1.csv'} and {out / 'fig1.png'}")
    return 0


def _cmd_fig2(args) -> int:
    from .plotting import plot_fig2

    cfg = _config(args)
    out = _outdir(args)
    res = fig2_experiment(cfg)
    write_fig2_csv(out / "fig2.csv", res)
    plot_fig2(out / "fig2.png", res)
    print(f"zeta_c={res.classical.exponent:.4f} zeta_q={res.quantum.exponent:.4f}")
    return 0


def _cmd_fig3(args) -> int:
    from .plotting import plot_fig3

    cfg = _config(args)
    out = _outdir(args)
    rows = fig3_experiment(cfg)
    write_fig3_csv(out / "fig3.csv", rows)
    plot_fig3(out / "fig3.png", rows)
    for r in rows:
        print(f"strike={r.strike:g} zeta_q={r.zeta_q:.4f} ratio={r.ratio:.4f}")
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return 0 if all(ok for _, ok in results) else 1


COMMANDS = {
    "price-euro": _cmd_price_euro,
    "price-asian": _cmd_price_asian,
    "mc": _cmd_mc,
    "qae": _cmd_qae,
    "fig1": _cmd_fig1,
    "fig2": _cmd_fig2,
    "fig3": _cmd_fig3,
    "selftest": _cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
