"""
Command line front end.

    optocoherence point --preset fig1
    optocoherence sweep --preset fig1 --out fig1.csv
    optocoherence stability --config point.json
    optocoherence detect --preset fig1 --samples 1000000 --seed 7
    optocoherence presets list

Exit codes: 0 success, 1 unstable or marginal working point, 2 bad
configuration, 3 numerical failure.
"""

import argparse
import sys
import warnings

import numpy as np

from .config import PARAM_PRESETS, SWEEP_PRESETS, SweepSpec, load_config, preset
from .detect import (
    DetectionParams,
    estimate_covariance,
    output_covariance,
    reconstruct_estimate,
    reconstruct_mechanical,
    records_to_csv,
    sample_output_records,
)
from .errors import ConfigError, OptoCoherenceError, StabilityError
from .gaussian import GaussianState, symplectic_eigenvalues
from .model import build_drift, stability_spectral
from .sweep import evaluate_point, rows_to_csv, run_sweep
from .steady import steady_covariance

EXIT_OK, EXIT_UNSTABLE, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
UNITS = "# rates in units of omega_m; entropies and coherences in nats (natural log)"


def _fmt(x):
    return format(float(x), ".12g")


def _matrix(m, indent="  "):
    return "\n".join(indent + "  ".join(f"{x:>18.12g}" for x in row) for row in np.asarray(m))


def _params_text(p):
    text = (
        f"params: gamma_m={_fmt(p.gamma_m)} kappa={_fmt(p.kappa)} delta0={_fmt(p.delta0)} "
        f"g0={_fmt(p.g0)} drive_e={_fmt(p.drive_e)} n_th={_fmt(p.n_th)}"
    )
    return text + (" (detuning locked)" if p.lock_detuning else "")


def _steady_text(s):
    lines = [
        f"working point: q_s={_fmt(s.q_s)} p_s={_fmt(s.p_s)} alpha_s={_fmt(s.alpha_s)} "
        f"n_c={_fmt(s.n_c)} delta_eff={_fmt(s.delta_eff)} G={_fmt(s.g_eff)}"
    ]
    if s.multistable:
        others = ", ".join(f"n_c={_fmt(n)}" for n, _ in s.branches[1:])
        lines.append(f"  multistable: {len(s.branches)} branches, lowest taken (others: {others})")
    return lines


def _stability_text(rh):
    return f"routh-hurwitz: margin1={_fmt(rh.margin1)} margin2={_fmt(rh.margin2)} -> {rh.verdict}"


def run_point(params):
    """Report text, CSV text and exit code for one operating point."""
    res = evaluate_point(params)
    lines = [UNITS, _params_text(params)]
    if res.steady is not None:
        lines += _steady_text(res.steady)
    if res.stability is not None:
        lines.append(_stability_text(res.stability))
    if res.verdict == "stable":
        v = res.solution.v
        nu = res.report
        lines += [
            f"lyapunov residual: {res.solution.residual:.3e}",
            "covariance V (dq, dp, dX, dY):",
            _matrix(v),
            f"symplectic eigenvalues: nu1={_fmt(nu.nu1)} nu2={_fmt(nu.nu2)} "
            f"(local a={_fmt(nu.a)} b={_fmt(nu.b)})",
            f"C_mec       = {_fmt(nu.c_mec)}",
            f"C_opt       = {_fmt(nu.c_opt)}",
            f"C_tot       = {_fmt(nu.c_tot)}",
            f"delta_C     = {_fmt(nu.delta_c)}",
            f"mutual_info = {_fmt(nu.mutual_info)}",
        ]
        code = EXIT_OK
    elif res.verdict in ("unstable", "marginal"):
        lines.append(f"{res.verdict} working point: no steady state, coherences not computed")
        code = EXIT_UNSTABLE
    else:
        lines.append(res.error)
        code = EXIT_NUMERICAL
    return "\n".join(lines) + "\n", rows_to_csv([res.row()]), code


def run_stability(params):
    res = evaluate_point(params)
    lines = [UNITS, _params_text(params)]
    if res.steady is None:
        return "\n".join(lines + [res.error]) + "\n", EXIT_NUMERICAL
    lines += _steady_text(res.steady)
    lines.append(_stability_text(res.stability))
    spec = stability_spectral(build_drift(params, res.steady))
    lines.append(f"spectral abscissa: {spec.abscissa:.12g} -> {'stable' if spec.stable else 'not stable'}")
    return "\n".join(lines) + "\n", EXIT_OK if res.stability.verdict == "stable" else EXIT_UNSTABLE


def run_detect(params, det, m, seed):
    """Readout simulation report and exit code.

    Prints the true mechanical block, its exact reconstruction, and a
    statistical reconstruction from ``m`` sampled records with standard
    errors, and whether every entry lies within five standard errors.
    Returns ``(text, code, records)``.
    """
    _, sol = steady_covariance(params)
    v_mec = sol.v_mec
    out = output_covariance(v_mec, det)
    exact = reconstruct_mechanical(out, det)
    exact_err = float(np.max(np.abs(exact - v_mec)))
    records = sample_output_records(out.v_out, m, seed)
    est = estimate_covariance(records)
    v_hat, err = reconstruct_estimate(est, det)
    within = bool(np.all(np.abs(v_hat - v_mec) <= 5 * err))
    nu_exact = symplectic_eigenvalues(GaussianState(exact))[0]
    lines = [
        UNITS,
        _params_text(params),
        f"readout: kappa2={_fmt(det.kappa2)} G2={_fmt(det.g2)} gain g={_fmt(det.gain)}",
        "true V_mec:",
        _matrix(v_mec),
        "output covariance V_out:",
        _matrix(out.v_out),
        f"exact reconstruction (max |error| = {exact_err:.3e}, nu = {_fmt(nu_exact)}):",
        _matrix(exact),
        f"statistical reconstruction from m={m} records, seed={seed}:",
        _matrix(v_hat),
        "standard errors:",
        _matrix(err),
        f"5-sigma check: {'PASS' if within else 'FAIL'}",
    ]
    if est.degenerate:
        lines.append("warning: sample covariance is degenerate")
    return "\n".join(lines) + "\n", EXIT_OK, records


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _resolve(args, kind):
    if args.config is not None and args.preset is not None:
        raise ConfigError("give either --config or --preset, not both", "preset")
    if args.config is not None:
        obj = load_config(args.config)
    elif args.preset is not None:
        obj = preset(args.preset, kind)
    else:
        raise ConfigError("one of --config or --preset is required", "config")
    if kind == "params" and isinstance(obj, SweepSpec):
        raise ConfigError("expected a single operating point, got a sweep (axis1)", "axis1")
    if kind == "sweep" and not isinstance(obj, SweepSpec):
        raise ConfigError("a sweep needs axis1", "axis1")
    return obj


def _cmd_point(args):
    text, row, code = run_point(_resolve(args, "params"))
    sys.stdout.write(text)
    if args.out is not None:
        _write(row, args.out)
    return code


def _cmd_stability(args):
    text, code = run_stability(_resolve(args, "params"))
    sys.stdout.write(text)
    return code


def _cmd_sweep(args):
    spec = _resolve(args, "sweep")
    result = run_sweep(spec, jobs=args.jobs)
    _write(result.to_csv(), args.out)
    counts = ", ".join(f"{k}={v}" for k, v in sorted(result.counts().items()))
    print(f"{len(result.points)} points ({counts})", file=sys.stderr)
    return EXIT_OK


def _cmd_detect(args):
    params = _resolve(args, "params")
    det = DetectionParams(kappa2=args.kappa2, g2=args.g2)
    text, code, records = run_detect(params, det, args.samples, args.seed)
    sys.stdout.write(text)
    if args.out is not None:
        _write(records_to_csv(records), args.out)
    return code


def _cmd_presets(args):
    lines = ["operating points (point, stability, detect):"]
    lines += [f"  {name:<18} {desc}" for name, (desc, _) in PARAM_PRESETS.items()]
    lines.append("sweeps (sweep):")
    lines += [f"  {name:<18} {desc}" for name, (desc, _) in SWEEP_PRESETS.items()]
    print("\n".join(lines))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="optocoherence",
        description="Steady-state coherence of a driven optomechanical cavity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--preset", help="named preset (see 'presets list')")

    p = sub.add_parser("point", help="evaluate one operating point")
    source(p)
    p.add_argument("--out", help="also write the CSV row here")
    p.set_defaults(func=_cmd_point)

    p = sub.add_parser("stability", help="Routh-Hurwitz and spectral stability of one point")
    source(p)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("sweep", help="evaluate a parameter grid and write CSV")
    source(p)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("detect", help="simulate the optical readout of the mechanics")
    source(p)
    p.add_argument("--samples", type=int, default=1_000_000, help="number of records m")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kappa2", type=float, default=0.1)
    p.add_argument("--g2", type=float, default=0.01)
    p.add_argument("--out", help="write the sampled records as CSV")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("presets", help="list presets")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = args.func(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except ConfigError as exc:
        print(f"config error [{exc.key}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityError as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (OptoCoherenceError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
