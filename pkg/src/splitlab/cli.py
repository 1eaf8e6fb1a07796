"""Command line interface.

Subcommands:
  singularities  locate rho_-, rho_+, strip width, delta constants
  melnikov       evaluate the periodic Melnikov function (three methods)
  melnikov-qp    quasiperiodic harmonics / supremum / leading harmonic
  split-direct   direct-integration splitting profile at a section
  sweep          run a SweepConfig (file, preset, or flags)
  fit            rate/prefactor regression on a sweep CSV
  validate       run the acceptance battery

Output: csv or json to --out (default stdout); gnuplot-ready two-column
files via --plot-out where applicable.
"""

from __future__ import annotations

import argparse
import json
import sys

import mpmath
from mpmath import mp, mpf

from .lab import (
    PRESETS,
    SweepConfig,
    eval_scaling,
    fit_rate_prefactor,
    rows_to_csv,
    run_sweep,
    scaling_exponents,
    validate_suite,
)
from .melnikov_p import classify_regime, melnikov_asymptotic, melnikov_quadrature, melnikov_residue
from .melnikov_qp import leading_harmonic, melnikov_qp_coefficients, sup_melnikov_qp
from .model import ModelSpec, qp_forcing, sin_forcing
from .mpnum import DEFAULT_PREC
from .oracle import splitting_profile_periodic, splitting_profile_qp
from .singular import solve_singularities


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spec_from_args(args) -> ModelSpec:
    alpha = eval_scaling(args.alpha, args.eps)
    forcing = sin_forcing() if args.forcing == "sin" else qp_forcing(args.r1, args.r2, args.kmax)
    return ModelSpec(epsilon=args.eps, mu=args.mu, eta=args.eta, alpha=alpha,
                     variant="standard" if args.variant == "standard" else "alternative",
                     forcing=forcing)


def _add_model_flags(p, need_eps=True):
    if need_eps:
        p.add_argument("--eps", type=float, required=True)
    p.add_argument("--alpha", default="0.4", help="value or scaling law in eps, e.g. '1 - 1.0*eps^2'")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--variant", choices=("standard", "alt"), default="standard")
    p.add_argument("--forcing", choices=("sin", "qp"), default="sin")
    p.add_argument("--r1", type=float, default=1.0)
    p.add_argument("--r2", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--precision-bits", type=int, default=DEFAULT_PREC)
    p.add_argument("--out", default=None)
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="json")


def cmd_singularities(args):
    prec = args.precision_bits
    alpha = eval_scaling(args.alpha, args.eps)
    variant = "standard" if args.variant == "standard" else "alternative"
    sing = solve_singularities(alpha, variant, prec=prec)
    digits = int(prec * 0.3)
    doc = {
        "alpha": mpmath.nstr(mpf(alpha), 17),
        "variant": variant,
        "rho_minus": mpmath.nstr(sing.rho_minus.value, digits),
        "rho_plus": mpmath.nstr(sing.rho_plus.value, digits),
        "strip_width": mpmath.nstr(sing.strip_width.value, digits),
    }
    if sing.delta1 is not None:
        doc["delta1"] = mpmath.nstr(sing.delta1.value, digits)
        doc["delta2"] = mpmath.nstr(sing.delta2.value, digits)
    _emit(json.dumps(doc, indent=1) + "\n", args.out)


def cmd_melnikov(args):
    spec = _spec_from_args(args)
    prec = args.precision_bits
    regime = classify_regime(args.eps, spec.alpha, scaling=scaling_exponents(args.alpha))
    rows = []
    for method, fn in (("residue", melnikov_residue),
                       ("quadrature", melnikov_quadrature),
                       ("asymptotic", lambda u, t, s, prec=prec: melnikov_asymptotic(u, t, s, regime=regime, prec=prec))):
        try:
            r = fn(0, 0, spec, prec=prec)
            rows.append({
                "method": method,
                "amplitude": mpmath.nstr(r.amplitude, int(prec * 0.3)),
                "phase": mpmath.nstr(r.phase, 17),
                "rate": mpmath.nstr(r.rate, 17),
                "error_estimate": mpmath.nstr(r.error_estimate, 5),
            })
        except Exception as exc:
            rows.append({"method": method, "error": str(exc)})
    doc = {"regime": regime.tag, "results": rows}
    if args.fmt == "csv":
        _emit(rows_to_csv(rows), args.out)
    else:
        _emit(json.dumps(doc, indent=1) + "\n", args.out)


def cmd_melnikov_qp(args):
    spec = _spec_from_args(args)
    if spec.forcing.kind != "qp":
        raise SystemExit("melnikov-qp needs --forcing qp")
    prec = args.precision_bits
    harmonics, mean, tail = melnikov_qp_coefficients(spec, kmax=args.kmax, prec=prec)
    sup, _, _ = sup_melnikov_qp(spec, kmax=args.kmax, prec=prec)
    lead = leading_harmonic(spec, kmax=args.kmax, prec=prec)
    doc = {
        "mean": mpmath.nstr(mean, 17),
        "sup_oscillatory": mpmath.nstr(sup, 17),
        "truncation_tail": mpmath.nstr(tail, 5),
        "leading_harmonic": {
            "k": list(lead.k),
            "small_divisor": mpmath.nstr(lead.small_divisor, 17),
            "amplitude": mpmath.nstr(lead.amplitude, 17),
            "phase": mpmath.nstr(lead.phase, 17),
        },
        "n_harmonics": len(harmonics),
    }
    if args.fmt == "csv":
        rows = [
            {"k1": h.k[0], "k2": h.k[1], "small_divisor": mpmath.nstr(h.small_divisor, 17),
             "amplitude": mpmath.nstr(h.amplitude, 17), "phase": mpmath.nstr(h.phase, 17)}
            for h in harmonics
        ]
        _emit(rows_to_csv(rows), args.out)
    else:
        _emit(json.dumps(doc, indent=1) + "\n", args.out)
    if args.plot_out:
        # c(delta) envelope over one period, gnuplot two-column
        from .melnikov_qp import c_of_delta, envelope_data

        env = envelope_data(args.r1, args.r2, prec)
        lines = ["# delta c(delta)"]
        for k in range(129):
            d = env.delta0 + env.period * (mpf(k) / 128 - mpf("0.5"))
            lines.append(f"{mpmath.nstr(d, 17)} {mpmath.nstr(c_of_delta(d, env), 17)}")
        with open(args.plot_out, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def cmd_split_direct(args):
    spec = _spec_from_args(args)
    if spec.forcing.kind == "sin":
        prof = splitting_profile_periodic(spec, section=args.section, n_phases=args.n_phases)
    else:
        prof = splitting_profile_qp(spec, section=args.section, grid_n=args.grid_n)
    if args.fmt == "csv":
        _emit(prof.to_csv(), args.out)
    else:
        doc = {
            "section": prof.section,
            "fitted_amplitude": mpmath.nstr(prof.fitted_amplitude, 25),
            "fitted_phase": mpmath.nstr(prof.fitted_phase, 17),
            "mean": mpmath.nstr(prof.mean, 17),
            "sup_abs": mpmath.nstr(prof.sup_abs, 25),
            "residual": mpmath.nstr(prof.residual, 5),
            "noise_floor": mpmath.nstr(prof.noise_floor, 5),
            "resolved": prof.resolved,
            "dominant_harmonic": list(prof.dominant_harmonic) if prof.dominant_harmonic else None,
            "meta": {k: str(v) for k, v in prof.meta.items()},
        }
        _emit(json.dumps(doc, indent=1) + "\n", args.out)
    if args.plot_out:
        lines = ["# phase d"]
        for ph, d, _ in prof.samples:
            lines.append(" ".join(mpmath.nstr(x, 20) for x in (*ph, d)))
        with open(args.plot_out, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def cmd_sweep(args):
    if args.preset:
        text = PRESETS[args.preset]
    elif args.config:
        with open(args.config) as fh:
            text = fh.read()
    else:
        raise SystemExit("sweep needs --config FILE or --preset NAME")
    config = SweepConfig.from_text(text)
    if args.out:
        config.out = args.out
    rows = run_sweep(config)
    text_out = rows_to_csv(rows) if (config.fmt or "csv") == "csv" else json.dumps(rows, indent=1)
    _emit(text_out, config.out)
    if args.plot_out:
        # gnuplot-ready: 1/eps against ln(amplitude) for rate plots
        key = next((k for k in ("amp_residue", "amp_quadrature", "amp_oracle", "amp_asymptotic")
                    if any(k in r for r in rows)), None)
        lines = ["# 1/eps ln_amplitude"]
        for r in rows:
            if r.get("status") == "ok" and key in r:
                with mp.workprec(60):
                    lines.append(f"{1.0 / float(r['eps'])!r} {mpmath.nstr(mpmath.log(mpf(r[key])), 17)}")
        with open(args.plot_out, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def cmd_fit(args):
    import csv as _csv

    with open(args.table) as fh:
        rows = list(_csv.DictReader(fh))
    rep = fit_rate_prefactor(rows, model=args.model, amp_key=args.amp_key)
    _emit(rep.to_json() + "\n", args.out)


def cmd_validate(args):
    report = validate_suite(level=args.level, out=args.out)
    raise SystemExit(0 if report["failed"] == 0 else 1)


def build_parser():
    p = argparse.ArgumentParser(prog="splitlab",
                                description="separatrix-splitting laboratory for the fast-forced meromorphic pendulum")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("singularities", help="integrand singularities and residue constants")
    _add_model_flags(q)
    q.set_defaults(fn=cmd_singularities)

    q = sub.add_parser("melnikov", help="periodic Melnikov function, three methods")
    _add_model_flags(q)
    q.set_defaults(fn=cmd_melnikov)

    q = sub.add_parser("melnikov-qp", help="quasiperiodic Melnikov harmonics and supremum")
    _add_model_flags(q)
    q.add_argument("--plot-out", default=None, help="write the c(delta) envelope, gnuplot two-column")
    q.set_defaults(fn=cmd_melnikov_qp, forcing="qp")

    q = sub.add_parser("split-direct", help="direct-integration splitting profile")
    _add_model_flags(q)
    q.add_argument("--section", choices=("pi", "3pi2"), default="pi")
    q.add_argument("--n-phases", type=int, default=16)
    q.add_argument("--grid-n", type=int, default=16)
    q.add_argument("--plot-out", default=None)
    q.set_defaults(fn=cmd_split_direct)

    q = sub.add_parser("sweep", help="run a parameter sweep from a config file or preset")
    q.add_argument("--config", default=None)
    q.add_argument("--preset", choices=sorted(PRESETS), default=None)
    q.add_argument("--out", default=None)
    q.add_argument("--plot-out", default=None, help="write 1/eps vs ln(amplitude), gnuplot two-column")
    q.set_defaults(fn=cmd_sweep)

    q = sub.add_parser("fit", help="rate/prefactor regression on a sweep CSV")
    q.add_argument("table")
    q.add_argument("--model", choices=("exp_plus_power", "power_only"), default="exp_plus_power")
    q.add_argument("--amp-key", default="amp_residue")
    q.add_argument("--out", default=None)
    q.set_defaults(fn=cmd_fit)

    q = sub.add_parser("validate", help="run the acceptance battery")
    q.add_argument("--level", choices=("fast", "full", "heavy"), default="fast")
    q.add_argument("--out", default=None)
    q.set_defaults(fn=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.fn(args)


if __name__ == "__main__":
    main()
