"""Batch front-end: single evaluations, sweeps, rate optimization, and
the analytical-vs-oracle validation report.

Every verb accepts `--config <file>` plus per-field override flags that
mirror the link-config field names. Exit code is 0 on success and 2 on
any failure, with a machine-readable `error: <Type>: <message>` line on
stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from irsec.channel import LinkConfig, load_link_config
from irsec.eccore import (
    SCENARIOS,
    ec_miso_csi,
    ec_miso_nocsi,
    ec_siso_csi,
    ec_siso_nocsi,
)
from irsec.mcoracle import empirical_ec, simulate_service
from irsec.rateopt import (
    DescentSettings,
    grid_argmax_rate,
    optimize_rate_miso_closed,
    optimize_rate_siso,
    solve_rate_miso_exact,
)
from irsec.sweeps import (
    SWEEP_VARS,
    SweepSpec,
    auto_rate,
    emit_csv,
    emit_plot,
    run_sweep,
    write_csv,
)

DEFAULT_SEED = 12345
SEED_ENV_VAR = "IRS_EC_SEED"

# Table-style default when a MISO scenario is requested without an
# explicit antenna count from flag or config file.
MISO_DEFAULT_N_TX = 10

_FLOAT_FLAGS = ("d1", "d2", "x_irs", "y_irs", "phi_inc", "g_t", "g_r",
                "g_t_db", "g_r_db", "p_t", "sigma2", "bandwidth", "slot")
_INT_FLAGS = ("n_elems", "n_tx")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, metavar="FILE",
                   help="link config file; flags below override its fields")
    for name in _FLOAT_FLAGS:
        p.add_argument("--" + name.replace("_", "-"), type=float,
                       default=None, dest=name)
    for name in _INT_FLAGS:
        p.add_argument("--" + name.replace("_", "-"), type=int,
                       default=None, dest=name)
    p.add_argument("--precoder", default=None,
                   help="comma-separated complex weights")


def _build_config(args, scenario: str | None = None) -> LinkConfig:
    cfg = load_link_config(args.config) if args.config else LinkConfig()
    overrides = {}
    for name in _FLOAT_FLAGS + _INT_FLAGS:
        value = getattr(args, name)
        if value is None:
            continue
        if name.endswith("_db"):
            overrides[name[:-3]] = 10.0 ** (value / 10.0)
        else:
            overrides[name] = value
    if args.precoder is not None:
        overrides["precoder"] = tuple(
            complex(tok.strip()) for tok in args.precoder.split(","))
    if (scenario is not None and scenario.startswith("miso")
            and "n_tx" not in overrides and args.config is None):
        overrides["n_tx"] = MISO_DEFAULT_N_TX
    if "n_tx" in overrides and "precoder" not in overrides:
        # re-derive the equal-power default at the new antenna count
        overrides["precoder"] = None
    return replace(cfg, **overrides) if overrides else cfg


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else DEFAULT_SEED


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _print_diag(diag: dict) -> None:
    for key in sorted(diag):
        value = diag[key]
        if isinstance(value, dict):
            for sub in sorted(value):
                print(f"diag.{key}.{sub} = {value[sub]!r}")
        else:
            print(f"diag.{key} = {value!r}")


def _cmd_ec(args) -> int:
    cfg = _build_config(args, args.scenario)
    rate = args.rate
    if args.scenario.endswith("_nocsi") and rate is None:
        rate = auto_rate(cfg, args.scenario, args.alpha)
    if args.scenario == "siso_csi":
        res = ec_siso_csi(cfg, args.alpha, method=args.method)
    elif args.scenario == "miso_csi":
        res = ec_miso_csi(cfg, args.alpha, kappa_mode=args.kappa_mode)
    elif args.scenario == "siso_nocsi":
        res = ec_siso_nocsi(cfg, args.alpha, rate)
    else:
        res = ec_miso_nocsi(cfg, args.alpha, rate, kappa_mode=args.kappa_mode)
    print(f"scenario = {args.scenario}")
    print(f"alpha = {args.alpha!r}")
    if rate is not None:
        print(f"rate = {rate!r}")
    print(f"ec_bits_per_slot = {res.ec_bits_per_slot!r}")
    _print_diag(res.diagnostics)
    return 0


def _cmd_sweep(args) -> int:
    spec = SweepSpec(
        scenario=args.scenario,
        sweep_var=args.sweep_var,
        values=_parse_floats(args.values),
        fixed=_build_config(args, args.scenario),
        alpha_list=_parse_floats(args.alphas),
        seed=_resolve_seed(args),
        mc_slots=args.mc_slots,
    )
    table = run_sweep(spec)
    failed = sum(1 for row in table if row.error is not None)
    if args.csv:
        emit_csv(table, args.csv)
        print(f"csv = {args.csv}")
    if args.svg:
        emit_plot(table, args.svg)
        print(f"svg = {args.svg}")
    if not args.csv and not args.svg:
        write_csv(table, sys.stdout)
    print(f"rows = {len(table)}")
    print(f"row_errors = {failed}")
    return 0


def _cmd_optimize_rate(args) -> int:
    cfg = _build_config(args, args.scenario)
    method = args.method
    if method == "auto":
        method = "descent" if args.scenario == "siso_nocsi" else "root"
    if method == "descent":
        if args.scenario != "siso_nocsi":
            raise ValueError("descent applies to the siso_nocsi scenario")
        settings = DescentSettings(r0=args.r0, step=args.step,
                                   conv_tol=args.conv_tol,
                                   max_iters=args.max_iters)
        sol = optimize_rate_siso(cfg, args.alpha, settings)
    elif method == "closed":
        if args.scenario != "miso_nocsi":
            raise ValueError("the closed form applies to the miso_nocsi scenario")
        sol = optimize_rate_miso_closed(cfg, args.alpha, kappa_mode=args.kappa_mode)
    elif method == "root":
        if args.scenario != "miso_nocsi":
            raise ValueError("root finding applies to the miso_nocsi scenario")
        sol = solve_rate_miso_exact(cfg, args.alpha, kappa_mode=args.kappa_mode)
    else:
        r_max = args.r_max
        if r_max is None:
            r_max = 2.0 * auto_rate(cfg, args.scenario, args.alpha) + cfg.bandwidth
        sol = grid_argmax_rate(cfg, args.alpha, args.scenario,
                               r_max=r_max, points=args.points)
    print(f"scenario = {args.scenario}")
    print(f"alpha = {args.alpha!r}")
    print(f"method = {sol.method}")
    print(f"r_star = {sol.r_star!r}")
    print(f"ec_at_r_star = {sol.ec_at_r_star!r}")
    print(f"iterations = {sol.iterations}")
    if sol.method == "closed_form":
        print(f"closed_form_valid = {sol.closed_form_valid}")
    return 0


def _cmd_validate(args) -> int:
    seed = _resolve_seed(args)
    alpha = args.alpha
    print(f"alpha = {alpha!r}")
    print(f"mc_slots = {args.mc_slots}")
    for offset, scenario in enumerate(SCENARIOS):
        cfg = _build_config(args, scenario)
        rate = None
        if scenario.endswith("_nocsi"):
            rate = auto_rate(cfg, scenario, alpha)
        if scenario == "siso_csi":
            ec = ec_siso_csi(cfg, alpha).ec_bits_per_slot
        elif scenario == "miso_csi":
            ec = ec_miso_csi(cfg, alpha).ec_bits_per_slot
        elif scenario == "siso_nocsi":
            ec = ec_siso_nocsi(cfg, alpha, rate).ec_bits_per_slot
        else:
            ec = ec_miso_nocsi(cfg, alpha, rate).ec_bits_per_slot
        service = simulate_service(cfg, scenario, rate, seed + offset, args.mc_slots)
        est = empirical_ec(service, alpha)
        rel = abs(ec - est.value) / max(abs(est.value), 1e-300)
        line = (f"{scenario}: analytic = {ec:.6f}, oracle = {est.value:.6f}, "
                f"stderr = {est.stderr:.2g}, rel_err = {rel:.3%}")
        if rate is not None:
            line += f", r_star = {rate:.6f}"
        print(line)
    cfg = _build_config(args, "siso_csi")
    res = ec_siso_csi(cfg, alpha)
    relaxed = res.diagnostics.get("ec_relaxed")
    exact = res.ec_bits_per_slot
    if relaxed is not None and relaxed == relaxed:
        bias = (relaxed - exact) / exact
        print(f"siso_csi high-SNR closed form: relaxed = {relaxed:.6f}, "
              f"exact = {exact:.6f}, systematic_bias = {bias:.2%}, "
              f"low_snr_prob = {res.diagnostics['low_snr_prob']:.3f}")
    else:
        print("siso_csi high-SNR closed form: divergent at this alpha "
              "(alpha*bandwidth*slot/ln2 >= 1/2)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsec",
        description="Effective capacity of a reflecting-surface downlink: "
                    "closed forms, rate optimization, Monte Carlo checks.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_ec = sub.add_parser("ec", help="evaluate EC for one scenario")
    p_ec.add_argument("--scenario", required=True, choices=SCENARIOS)
    p_ec.add_argument("--alpha", required=True, type=float)
    p_ec.add_argument("--rate", type=float, default=None,
                      help="fixed rate; optimized automatically if omitted")
    p_ec.add_argument("--method", choices=("exact", "relaxed"), default="exact",
                      help="siso_csi evaluation route")
    p_ec.add_argument("--kappa-mode", choices=("oracle", "closed"),
                      default="oracle")
    _add_config_flags(p_ec)
    p_ec.set_defaults(func=_cmd_ec)

    p_sw = sub.add_parser("sweep", help="sweep one variable, write CSV/SVG")
    p_sw.add_argument("--scenario", required=True, choices=SCENARIOS)
    p_sw.add_argument("--sweep-var", required=True, choices=SWEEP_VARS)
    p_sw.add_argument("--values", required=True,
                      help="comma-separated, strictly increasing")
    p_sw.add_argument("--alphas", default="0.1",
                      help="comma-separated QoS exponents")
    p_sw.add_argument("--mc-slots", type=int, default=0,
                      help="Monte Carlo slots per row (0 = analytic only)")
    p_sw.add_argument("--seed", type=int, default=None)
    p_sw.add_argument("--csv", default=None, metavar="FILE")
    p_sw.add_argument("--svg", default=None, metavar="FILE")
    _add_config_flags(p_sw)
    p_sw.set_defaults(func=_cmd_sweep)

    p_or = sub.add_parser("optimize-rate", help="find the optimal fixed rate")
    p_or.add_argument("--scenario", required=True,
                      choices=("siso_nocsi", "miso_nocsi"))
    p_or.add_argument("--alpha", required=True, type=float)
    p_or.add_argument("--method", default="auto",
                      choices=("auto", "descent", "closed", "root", "grid"))
    p_or.add_argument("--r0", type=float, default=None)
    p_or.add_argument("--step", type=float, default=None)
    p_or.add_argument("--conv-tol", type=float, default=None)
    p_or.add_argument("--max-iters", type=int, default=100_000)
    p_or.add_argument("--r-max", type=float, default=None)
    p_or.add_argument("--points", type=int, default=1000)
    p_or.add_argument("--kappa-mode", choices=("oracle", "closed"),
                      default="oracle")
    _add_config_flags(p_or)
    p_or.set_defaults(func=_cmd_optimize_rate)

    p_va = sub.add_parser("validate",
                          help="analytic-vs-oracle report over all scenarios")
    p_va.add_argument("--alpha", type=float, default=0.1)
    p_va.add_argument("--mc-slots", type=int, default=200_000)
    p_va.add_argument("--seed", type=int, default=None)
    _add_config_flags(p_va)
    p_va.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
