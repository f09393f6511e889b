"""Command-line front-end: ``mimo-gt <command>``.

Commands
--------
analyze    closed-form quantities for one parameter set (table or CSV)
optimize   solve the antenna-scaling minimization and report the budget
simulate   Monte Carlo error rates at the designed antenna count vs. target
sweep      closed-form quantities along one parameter axis (CSV)
verify     run the built-in invariant checks

Exit codes: 0 success, 1 check failure, 2 usage or configuration error.
All randomness is governed by ``--seed``; output CSV is byte-identical for a
fixed seed regardless of ``--workers``.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import replace

from . import analysis, montecarlo
from .params import SystemParams, config_text, db_to_linear, load_config, validate


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _emit_csv(path, meta: dict, header, rows) -> None:
    lines = [f"# {key}={_fmt(val)}" for key, val in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _print_table(title: str, entries) -> None:
    print(title)
    width = max(len(name) for name, _ in entries)
    for name, value in entries:
        print(f"  {name:<{width}}  {_fmt(value)}")


def _load_params(args) -> SystemParams:
    params = SystemParams()
    if args.config is not None:
        params = load_config(args.config)
    if getattr(args, "snr_db", None) is not None:
        params = replace(params, noise=params.power / db_to_linear(args.snr_db))
    if args.seed is not None:
        params = replace(params, seed=args.seed)
    return validate(params)


def _params_meta(params: SystemParams) -> dict:
    return {
        "params_hash": hashlib.md5(config_text(params).encode()).hexdigest()[:12],
        "n_users": params.n_users,
        "msgs_per_user": params.msgs_per_user,
        "k_active": params.k_active,
        "m_rx": params.m_rx,
        "rho": params.snr,
        "bernoulli_p": params.bernoulli_p,
        "threshold_gamma": params.threshold_gamma,
        "relax_delta": params.relax_delta,
        "margin_delta": params.margin_delta,
        "seed": params.seed,
    }


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _operating_point(params: SystemParams) -> dict:
    """Closed-form quantities at the configured (p, gamma, delta)."""
    k, p, rho, gamma = params.k_active, params.bernoulli_p, params.snr, params.threshold_gamma
    probs = analysis.crossover_probs(k, p, rho, gamma)
    pair = analysis.beta_pair(k, p, probs.q10, probs.p0, params.relax_delta)
    out = {
        "q01": probs.q01,
        "q10": probs.q10,
        "p0": probs.p0,
        "p1": probs.p1,
        "delta_upper": probs.p0 / probs.q10 - 1.0 if probs.q10 > 0 else math.inf,
        "beta1": pair.beta1,
        "beta2": pair.beta2,
        "pmd_bound": _clamp01(
            analysis.pmd_upper_bound(k, p, params.m_rx, probs.q10, params.relax_delta)
        ),
    }
    try:
        out["pfa_bound"] = _clamp01(
            analysis.pfa_upper_bound(
                params.n_codewords, k, p, params.m_rx, probs.p0, probs.q10,
                params.relax_delta,
            )
        )
    except ValueError:
        out["pfa_bound"] = math.nan
    out["delta_star"] = (
        analysis.delta_star(probs.p0, probs.q10) if probs.q10 > 0 else math.nan
    )
    return out


def _optimizer_block(params: SystemParams) -> dict:
    """Optimizer solution plus the quantities implied by the antenna budget."""
    n, m, k = params.n_users, params.msgs_per_user, params.k_active
    rho, margin = params.snr, params.margin_delta
    res = analysis.optimize_beta_star(k, rho)
    m_r = analysis.required_antennas(n, m, k, margin, res.beta_star)
    probs = analysis.crossover_probs(k, res.p_star, rho, res.gamma_star)
    pmd_bound = analysis.pmd_upper_bound(k, res.p_star, m_r, probs.q10, res.delta_star)
    pfa_bound = analysis.pfa_upper_bound(
        n * m, k, res.p_star, m_r, probs.p0, probs.q10, res.delta_star
    )
    c_bac = analysis.bac_capacity(probs.q01, probs.q10)
    rate = analysis.rates(k, n, m, m_r, margin, res.beta_star, rho)
    return {
        "p_star": res.p_star,
        "gamma_star": res.gamma_star,
        "alpha_star": res.alpha_star,
        "delta_star": res.delta_star,
        "beta_star": res.beta_star,
        "m_r_required": m_r,
        "q01_opt": probs.q01,
        "q10_opt": probs.q10,
        "p0_opt": probs.p0,
        "pmd_bound_opt": _clamp01(pmd_bound),
        "pfa_bound_opt": _clamp01(pfa_bound),
        "max_bound_opt": _clamp01(max(pmd_bound, pfa_bound)),
        "target_error": (n * m) ** (-margin),
        "c_bac": c_bac,
        "converse_antennas": analysis.converse_min_antennas(
            n, m, k, 0.0, probs.q01, probs.q10
        ),
        "tightness_ratio": analysis.converse_tightness_ratio(
            n, m, k, margin, res.beta_star, c_bac
        ),
        "sum_rate": rate.sum_rate,
        "spectral_efficiency": rate.spectral_efficiency,
        "ratio_full_csi": rate.ratio_full_csi,
        "ratio_round_robin": rate.ratio_round_robin,
        "_result": res,
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    params = _load_params(args)
    op = _operating_point(params)
    opt = _optimizer_block(params)
    opt.pop("_result")
    if args.json:
        print(json.dumps({"operating_point": op, "optimum": opt}, indent=2))
    else:
        _print_table("operating point", list(op.items()))
        _print_table("optimum", list(opt.items()))
        print(f"  (full-CSI ratio omits + {analysis.FULL_CSI_RATIO_REMAINDER})")
    if args.output:
        rows = [("operating_point." + k, v) for k, v in op.items()]
        rows += [("optimum." + k, v) for k, v in opt.items()]
        _emit_csv(args.output, {"command": "analyze", **_params_meta(params)},
                  ["quantity", "value"], rows)
    return 0


def cmd_optimize(args) -> int:
    params = _load_params(args)
    opt = _optimizer_block(params)
    res = opt.pop("_result")
    payload = {
        "p_star": res.p_star,
        "gamma_star": res.gamma_star,
        "alpha_star": res.alpha_star,
        "delta_star": res.delta_star,
        "beta_star": res.beta_star,
        "m_r_required": opt["m_r_required"],
        "iterations": res.iterations,
        "residual_fprime": res.residuals["fprime"],
        "residual_fsecond": res.residuals["fsecond"],
        "residual_beta_equalizer_rel": res.residuals["beta_equalizer_rel"],
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        _print_table("antenna-scaling optimum", list(payload.items()))
    if args.output:
        _emit_csv(args.output, {"command": "optimize", **_params_meta(params)},
                  ["quantity", "value"], list(payload.items()))
    return 0


def cmd_simulate(args) -> int:
    params = _load_params(args)
    if args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return 2
    opt = _optimizer_block(params)
    res = opt.pop("_result")
    operating = validate(replace(
        params,
        bernoulli_p=res.p_star,
        threshold_gamma=res.gamma_star,
        relax_delta=res.delta_star,
    ))
    m_r = opt["m_r_required"]
    est = montecarlo.estimate_error_rates(
        operating, m_r, args.trials,
        q10=opt["q10_opt"], workers=args.workers,
        fresh_codebook=not args.fixed_codebook, dump_path=args.dump,
    )
    target = opt["target_error"]
    worst = max(est.pmd.ci_high, est.pfa.ci_high)
    verdict = "PASS" if worst <= target else "FAIL"
    header = [
        "m_r", "trials",
        "pmd", "pmd_ci_low", "pmd_ci_high",
        "pfa", "pfa_ci_low", "pfa_ci_high",
        "p_e", "pmd_bound", "pfa_bound", "target_error", "verdict",
    ]
    row = (
        m_r, args.trials,
        est.pmd.point, est.pmd.ci_low, est.pmd.ci_high,
        est.pfa.point, est.pfa.ci_low, est.pfa.ci_high,
        est.p_e.point, opt["pmd_bound_opt"], opt["pfa_bound_opt"], target, verdict,
    )
    meta = {
        "command": "simulate", **_params_meta(params),
        "p_star": res.p_star, "gamma_star": res.gamma_star,
        "delta_star": res.delta_star, "beta_star": res.beta_star,
    }
    if args.json:
        print(json.dumps(dict(zip(header, row))))
    else:
        print(
            f"{verdict}: max(pmd, pfa) CI upper edge = {_fmt(worst)} "
            f"vs target (N*M)^-delta = {_fmt(target)} at m_r={m_r}"
        )
    if args.output:
        _emit_csv(args.output, meta, header, [row])
    return 0 if verdict == "PASS" else 1


SWEEP_AXES = ("rho", "k", "n", "gamma", "delta")


def _apply_axis(params: SystemParams, axis: str, value: float, epsilon) -> SystemParams:
    if axis == "rho":
        return validate(replace(params, noise=params.power / value))
    if axis == "k":
        k = int(round(value))
        n = params.n_users
        if epsilon is not None:
            n = max(k, math.ceil(k ** (1.0 / epsilon)))
        return validate(replace(params, k_active=k, n_users=n))
    if axis == "n":
        return validate(replace(params, n_users=int(round(value))))
    if axis == "gamma":
        return validate(replace(params, threshold_gamma=value))
    if axis == "delta":
        return validate(replace(params, relax_delta=value))
    raise ValueError(f"unknown sweep axis {axis!r}")


def cmd_sweep(args) -> int:
    params = _load_params(args)
    grid = [float(v) for v in args.grid.split(",") if v.strip()]
    if len(grid) < 1:
        print("error: empty --grid", file=sys.stderr)
        return 2
    if any(b <= a for a, b in zip(grid, grid[1:])):
        print("error: --grid must be strictly increasing", file=sys.stderr)
        return 2
    op_keys = ["q01", "q10", "p0", "beta1", "beta2", "pmd_bound", "pfa_bound"]
    opt_keys = [
        "p_star", "gamma_star", "delta_star", "beta_star", "m_r_required",
        "pmd_bound_opt", "pfa_bound_opt", "max_bound_opt", "target_error",
        "c_bac", "converse_antennas", "tightness_ratio",
        "sum_rate", "spectral_efficiency", "ratio_full_csi", "ratio_round_robin",
    ]
    rows = []
    for value in grid:
        point = _apply_axis(params, args.axis, value, args.epsilon)
        op = _operating_point(point)
        opt = _optimizer_block(point)
        rows.append(
            (args.axis, value)
            + tuple(op[k] for k in op_keys)
            + tuple(opt[k] for k in opt_keys)
        )
    meta = {"command": "sweep", "axis": args.axis, **_params_meta(params)}
    if args.epsilon is not None:
        meta["epsilon"] = args.epsilon
    header = ["axis", "value"] + op_keys + opt_keys
    _emit_csv(args.output, meta, header, rows)
    if args.series_dir:
        os.makedirs(args.series_dir, exist_ok=True)
        for col, name in enumerate(header[2:], start=2):
            path = os.path.join(args.series_dir, f"{args.axis}_vs_{name}.csv")
            _emit_csv(path, meta, [args.axis, name],
                      [(row[1], row[col]) for row in rows])
    return 0


def _run_checks(args):
    from . import verify as verify_mod

    return verify_mod.run_checks(_load_params(args), only=args.only,
                                 workers=args.workers)


def cmd_verify(args) -> int:
    checks = _run_checks(args)
    if not checks:
        print(f"error: no check named {args.only!r}", file=sys.stderr)
        return 2
    failed = 0
    for chk in checks:
        status = "PASS" if chk.passed else ("INFO" if chk.passed is None else "FAIL")
        if chk.passed is False:
            failed += 1
        print(f"{status:4} {chk.name}: {chk.detail}")
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-gt",
        description="Group-testing massive MU-MIMO: analysis and link-level simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_default=None):
        p.add_argument("--config", help="key=value parameter file")
        p.add_argument("--seed", type=int, help="master PRNG seed (overrides config)")
        p.add_argument("--snr-db", type=float, dest="snr_db",
                       help="set rho in dB by adjusting the noise power")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--output", help="write CSV here")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel trial workers (results are worker-independent)")
        if trials_default is not None:
            p.add_argument("--trials", type=int, default=trials_default)

    common(sub.add_parser("analyze", help="closed-form quantities for one parameter set"))
    common(sub.add_parser("optimize", help="minimize the antenna-scaling constant"))

    sim = sub.add_parser("simulate", help="Monte Carlo error rates at the designed antenna count")
    common(sim, trials_default=20000)
    sim.add_argument("--fixed-codebook", action="store_true",
                     help="hold one codebook fixed across rounds (default: redraw per round)")
    sim.add_argument("--dump", help="write one round record per line here (forces serial run)")

    sw = sub.add_parser("sweep", help="closed-form quantities along one axis")
    common(sw)
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--grid", required=True, help="comma-separated, strictly increasing")
    sw.add_argument("--epsilon", type=float,
                    help="for --axis k: couple the population as N = ceil(K^(1/epsilon))")
    sw.add_argument("--series-dir",
                    help="also write plot-ready two-column CSVs, one per quantity")

    ver = sub.add_parser("verify", help="run the built-in invariant checks")
    common(ver)
    ver.add_argument("--only", help="run a single named check")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "analyze": cmd_analyze,
        "optimize": cmd_optimize,
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
