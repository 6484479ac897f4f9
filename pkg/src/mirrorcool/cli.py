"""Command-line front end.

Subcommands: steady, sweep, figure, simulate, optimize.  Configuration comes
from an optional flat key=value file plus per-parameter flag overrides.
Exit codes: 0 success, 1 validation error, 2 numerical non-convergence,
3 consistency-check failure.
"""

from __future__ import annotations

import argparse
import math
import sys as _sys
import warnings

from .params import ParameterDomainError, SolverError
from .sweep import (ConfigError, RunConfig, build_config, load_config,
                    row_for, run_sweep, write_rows)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NONCONVERGENCE = 2
EXIT_INCONSISTENT = 3

_PARAM_FLAGS = ("theta", "eta", "quality", "cutoff_ratio", "gamma_c", "zeta",
                "gain", "scheme", "sweep_variable", "sweep_scale",
                "sweep_start", "sweep_stop", "sweep_points", "n_traj",
                "n_steps")


def _add_common(parser):
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--out", help="output path (CSV or directory)")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    parser.add_argument("--method",
                        choices=["analytic", "spectral", "lyapunov",
                                 "ensemble", "all"],
                        help="computation method(s) to run")
    parser.add_argument("--log-correction", action="store_true",
                        help="include the momentum-variance cutoff term")
    for key in _PARAM_FLAGS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key)


def _config_from_args(args):
    overrides = {}
    for key in _PARAM_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "method", None) is not None:
        overrides["method"] = args.method
    if getattr(args, "log_correction", False):
        overrides["log_correction"] = True
    if getattr(args, "out", None) is not None:
        overrides["out"] = args.out
    if args.config:
        return load_config(args.config, overrides)
    return build_config(overrides)


def cmd_steady(args):
    cfg = _config_from_args(args)
    from .steady import steady_state
    sys_p = cfg.system()
    scheme = cfg.feedback()
    st = steady_state(sys_p, scheme, log_correction=cfg.log_correction)
    print(f"scheme={cfg.scheme} gain={cfg.gain:g} zeta={cfg.zeta:g} "
          f"theta={cfg.theta:g} eta={cfg.eta:g} quality={cfg.quality:g}")
    print(f"analytic  q2={st.q2:.10g}  p2={st.p2:.10g}  "
          f"qp_sym={st.qp_sym:.10g}  energy_units={st.energy_units:.10g}")
    worst = 0.0
    if args.verify:
        from .langevin import build_sde, stationary_covariance_lyapunov
        from .spectral import spectral_state
        q2s, p2s, qps = spectral_state(scheme, sys_p)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cov = stationary_covariance_lyapunov(
                build_sde(sys_p, scheme, "adiabatic_2var"))
        for tag, (q2, p2, qp) in (("spectral", (q2s, p2s, qps)),
                                  ("lyapunov", (cov[0, 0], cov[1, 1],
                                                cov[0, 1]))):
            dq = abs(q2 - st.q2) / st.q2
            dp = abs(p2 - st.p2) / st.p2
            print(f"{tag:9s} q2={q2:.10g}  p2={p2:.10g}  qp_sym={qp:.10g}  "
                  f"rel_dev=({dq:.2e}, {dp:.2e})")
            worst = max(worst, dq, dp)
        # the bath-model difference (quantum vs flat spectrum) bounds
        # the expected spread; anything beyond it means an implementation bug
        if worst > 5e-3:
            print(f"CONSISTENCY FAILURE: worst relative deviation {worst:.2e}")
            return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config_from_args(args)
    rows = run_sweep(cfg)
    out = cfg.out or "sweep.csv"
    write_rows(out, rows)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_figure(args):
    from .figures import FIGURES, emit_figure
    if args.name not in FIGURES:
        print(f"unknown figure name '{args.name}'; choose from {FIGURES}",
              file=_sys.stderr)
        return EXIT_VALIDATION
    kwargs = {}
    if args.theta is not None:
        kwargs["theta"] = float(args.theta)
    if args.eta is not None:
        kwargs["eta"] = float(args.eta)
    paths = emit_figure(args.name, args.out or ".", **kwargs)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_simulate(args):
    cfg = _config_from_args(args)
    from .langevin import (build_sde, simulate_ensemble,
                           stationary_covariance_lyapunov)
    from .steady import steady_state
    sys_p = cfg.system()
    scheme = cfg.feedback()
    form = args.form
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sde = build_sde(sys_p, scheme, form)
        dt = 0.05 / sde.fast_rate
        stats = simulate_ensemble(sde, dt, cfg.n_steps, cfg.n_traj, cfg.seed,
                                  dump_dir=args.dump_dir)
        cov = stationary_covariance_lyapunov(sde)
    st = steady_state(sys_p, scheme, log_correction=False)
    print(f"form={form} dt={dt:g} n_steps={cfg.n_steps} n_traj={cfg.n_traj} "
          f"seed={cfg.seed} burn_in={stats.burn_in_steps}")
    print(f"ensemble  q2={stats.q2_mean:.8g} ({stats.q2_stderr:.2g})  "
          f"p2={stats.p2_mean:.8g} ({stats.p2_stderr:.2g})  "
          f"qp={stats.qp_mean:.8g} ({stats.qp_stderr:.2g})")
    print(f"lyapunov  q2={cov[0, 0]:.8g}  p2={cov[1, 1]:.8g}  "
          f"qp={cov[0, 1]:.8g}")
    print(f"analytic  q2={st.q2:.8g}  p2={st.p2:.8g}  qp={st.qp_sym:.8g}")
    if not stats.within_stderr(cov[0, 0], cov[1, 1], cov[0, 1]):
        print("CONSISTENCY FAILURE: ensemble moments beyond 3 standard "
              "errors of the Lyapunov prediction")
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_optimize(args):
    cfg = _config_from_args(args)
    from .steady import cold_damping_optimum, momentum_feedback_optimum
    if cfg.gain <= 0:
        print("optimize requires gain > 0", file=_sys.stderr)
        return EXIT_VALIDATION
    if cfg.scheme == "cold_damping":
        opt = cold_damping_optimum(cfg.gain, cfg.eta, cfg.theta)
        rel = abs(opt.zeta_opt_numeric - opt.zeta_opt) / opt.zeta_opt
        print(f"zeta_opt analytic={opt.zeta_opt:.10g} "
              f"numeric={opt.zeta_opt_numeric:.10g} rel_diff={rel:.2e}")
        print(f"energy_units analytic={opt.energy_units:.10g} "
              f"numeric={opt.energy_units_numeric:.10g}")
        if rel > 1e-6:
            print("CONSISTENCY FAILURE: numeric optimum disagrees with the "
                  "exact g/sqrt(eta) law")
            return EXIT_INCONSISTENT
    else:
        opt = momentum_feedback_optimum(cfg.gain, cfg.eta, cfg.theta,
                                        cfg.quality)
        print(f"zeta_opt asymptotic={opt.zeta_opt:.10g} "
              f"numeric={opt.zeta_opt_numeric:.10g}")
        print(f"energy_units asymptotic={opt.energy_units:.10g} "
              f"numeric={opt.energy_units_numeric:.10g}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mirrorcool",
        description="Steady states of a feedback-cooled mirror: cooling, "
                    "squeezing, contractive states, entanglement.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", help="single steady-state report")
    _add_common(p)
    p.add_argument("--verify", action="store_true",
                   help="cross-check against the spectral and Lyapunov oracles")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="emit a canned figure (CSV+script+PNG)")
    p.add_argument("name", help="fig3|fig4|fig5|fig6_qp|fig6_squeeze|fig7")
    p.add_argument("--out", help="output directory")
    p.add_argument("--theta", help="bath temperature ratio override")
    p.add_argument("--eta", help="detection efficiency override")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("simulate", help="ensemble simulation consistency run")
    _add_common(p)
    p.add_argument("--form", choices=["adiabatic_2var", "full_4var"],
                   default="adiabatic_2var")
    p.add_argument("--dump-dir", help="write per-trajectory CSVs here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="input power minimizing the energy")
    _add_common(p)
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterDomainError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    raise SystemExit(main())
