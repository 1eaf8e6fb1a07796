"""Experiment driver: sweeps, rate/prefactor regression, predictions, reports.

A sweep walks a grid of (eps, alpha) pairs (alpha possibly tied to eps by a
scaling-law string like ``alpha = 1 - 1.0*eps^2``), evaluates the Melnikov
amplitude by the configured methods (optionally the direct oracle too) and
emits a deterministic CSV table.  The regression fits

    ln A = ln c + q*ln(eps) - a/eps

to recover the exponential rate a and prefactor power q of
d ~ mu * eps^q * e^{-a/eps}.
"""

from __future__ import annotations

import ast
import json
import os
import operator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np
from mpmath import mp, mpf

from .melnikov_p import classify_regime, melnikov_asymptotic, melnikov_quadrature, melnikov_residue
from .model import ModelSpec, qp_forcing, sin_forcing, separatrix
from .mpnum import DEFAULT_PREC, as_mpf
from .oracle import section_u, splitting_profile_periodic

_ALLOWED_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def eval_scaling(expr: str, eps: float) -> float:
    """Evaluate a scaling-law expression in the single variable eps.

    Accepts arithmetic with + - * / ^ (or **) and parentheses, e.g.
    ``1 - 1.0*eps^2`` or ``0.3``.  Anything else is rejected.
    """
    tree = ast.parse(expr.replace("^", "**"), mode="eval")

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_OPS:
            return _ALLOWED_OPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _ALLOWED_OPS:
            return _ALLOWED_OPS[type(node.op)](walk(node.operand))
        if isinstance(node, ast.Name) and node.id == "eps":
            return float(eps)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        raise ValueError(f"disallowed token in scaling law: {ast.dump(node)}")

    return walk(tree)


def scaling_exponents(expr: str):
    """Infer {'C','r'} or {'C','nu'} from a scaling-law string, if it has the
    canonical shape ``1 - C*eps^r`` or ``C*eps^nu``; otherwise None."""
    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval").body
    except SyntaxError:
        return None

    def const_times_power(node):
        # C*eps**p | eps**p | eps | C
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
            if isinstance(node.left, ast.Constant):
                base = const_times_power(node.right)
                if base:
                    return (node.left.value * base[0], base[1])
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            if isinstance(node.left, ast.Name) and node.left.id == "eps" and isinstance(node.right, ast.Constant):
                return (1.0, float(node.right.value))
        if isinstance(node, ast.Name) and node.id == "eps":
            return (1.0, 1.0)
        return None

    if isinstance(tree, ast.BinOp) and isinstance(tree.op, ast.Sub) and isinstance(tree.left, ast.Constant) \
            and tree.left.value == 1:
        cp = const_times_power(tree.right)
        if cp:
            return {"C": cp[0], "r": cp[1]}
    cp = const_times_power(tree)
    if cp:
        return {"C": cp[0], "nu": cp[1]}
    return None


@dataclass
class SweepConfig:
    eps_list: list
    alpha: str  # value or scaling law in eps
    mu: float = 0.0
    eta: float = 0.0
    variant: str = "standard"
    forcing: str = "sin"  # "sin" | "qp"
    r1: float = 1.0
    r2: float = 1.0
    kmax: int = None
    section: str = "pi"
    precision_bits: int = DEFAULT_PREC
    methods: tuple = ("residue", "quadrature", "asymptotic")
    oracle: bool = False
    n_phases: int = 16
    out: str = None
    fmt: str = "csv"

    @classmethod
    def from_text(cls, text: str) -> "SweepConfig":
        """Parse the flat key = value config format (one pair per line)."""
        raw = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            if not _:
                raise ValueError(f"bad config line: {line!r}")
            raw[key.strip()] = val.strip()
        eps_spec = raw.pop("eps", None)
        if eps_spec is None:
            raise ValueError("config needs an eps list")
        eps_list = parse_eps_list(eps_spec)
        kwargs = {"eps_list": eps_list, "alpha": raw.pop("alpha", "0.4")}
        for key, conv in (
            ("mu", float), ("eta", float), ("variant", str), ("forcing", str),
            ("r1", float), ("r2", float), ("kmax", int), ("section", str),
            ("precision_bits", int), ("oracle", lambda s: s.lower() in ("1", "on", "true", "yes")),
            ("n_phases", int), ("out", str), ("fmt", str),
        ):
            if key in raw:
                kwargs[key] = conv(raw.pop(key))
        if "methods" in raw:
            kwargs["methods"] = tuple(m.strip() for m in raw.pop("methods").split(",") if m.strip())
        if raw:
            raise ValueError(f"unknown config keys: {sorted(raw)}")
        return cls(**kwargs)


def parse_eps_list(spec: str) -> list:
    """Either a comma list '0.1,0.2' or 'geom:start:stop:n'."""
    spec = spec.strip()
    if spec.startswith("geom:"):
        _, a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
        if n < 2:
            return [a]
        ratio = (b / a) ** (1.0 / (n - 1))
        return [a * ratio ** k for k in range(n)]
    return [float(tok) for tok in spec.split(",") if tok.strip()]


@dataclass
class RegressionReport:
    model: str
    rate: float  # a in e^{-a/eps}; 0 for power_only
    power: float  # q in eps^q
    log_prefactor: float
    covariance: list
    residuals: list
    n_points: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "rate": self.rate,
                "power": self.power,
                "log_prefactor": self.log_prefactor,
                "covariance": self.covariance,
                "residuals": self.residuals,
                "n_points": self.n_points,
            },
            indent=1,
        )


def build_spec(eps: float, config: SweepConfig) -> ModelSpec:
    alpha = eval_scaling(config.alpha, eps)
    forcing = sin_forcing() if config.forcing == "sin" else qp_forcing(config.r1, config.r2, config.kmax)
    return ModelSpec(epsilon=eps, mu=config.mu, eta=config.eta, alpha=alpha,
                     variant=config.variant, forcing=forcing)


def assemble_d0(spec: ModelSpec, section: str = "pi", n_phases: int = 64, prec: int = None):
    """Melnikov prediction of the splitting profile at the section.

    Periodic case: d0(tau) = mu*eps^eta * M(u_section, tau)/2 with u_section
    in {0, ln(1+sqrt2)}; returns (profile rows, amplitude, result).  The
    physical y-difference at the x = 3*pi/2 section is M*mu*eps^eta/y0(u*)
    = /sqrt(2); see ydiff_first_order.
    """
    if prec is None:
        prec = DEFAULT_PREC
    with mp.workprec(prec):
        if spec.mu == 0:
            zero = [(2 * mp.pi * j / n_phases, mpf(0)) for j in range(n_phases)]
            return zero, mpf(0), None
        u_sec = section_u(section, prec)
        res = melnikov_residue(0, 0, spec, prec=prec)
        scale = spec.mu_eff(prec) / 2
        rows = []
        for j in range(n_phases):
            tau = 2 * mp.pi * j / n_phases
            rows.append((+tau, +(scale * res.evaluate(u_sec, tau))))
        return rows, +(abs(scale) * res.amplitude), res


def ydiff_first_order(spec: ModelSpec, section: str = "pi", prec: int = None):
    """First-order amplitude of y^s - y^u at the section: mu*eps^eta*|M|/y0."""
    if prec is None:
        prec = DEFAULT_PREC
    with mp.workprec(prec):
        res = melnikov_residue(0, 0, spec, prec=prec)
        y0 = separatrix(section_u(section, prec), prec).y0
        return +(abs(spec.mu_eff(prec)) * res.amplitude / y0), res


def _sweep_row(eps: float, config: SweepConfig) -> dict:
    prec = config.precision_bits
    row = {"eps": repr(eps), "alpha": "", "regime": "", "prec": prec}
    scaling = scaling_exponents(config.alpha)
    try:
        spec = build_spec(eps, config)
        row["alpha"] = mpmath.nstr(as_mpf(spec.alpha), 17)
        row["regime"] = classify_regime(eps, spec.alpha, scaling=scaling).tag
        for method in config.methods:
            if method == "residue":
                r = melnikov_residue(0, 0, spec, prec=prec)
            elif method == "quadrature":
                r = melnikov_quadrature(0, 0, spec, prec=prec)
            elif method == "asymptotic":
                regime = classify_regime(eps, spec.alpha, scaling=scaling)
                r = melnikov_asymptotic(0, 0, spec, regime=regime, prec=prec)
            else:
                raise ValueError(f"unknown method {method}")
            row[f"amp_{method}"] = mpmath.nstr(r.amplitude, int(prec * 0.3))
            row[f"phase_{method}"] = mpmath.nstr(r.phase, 17)
            row[f"err_{method}"] = mpmath.nstr(r.error_estimate, 5)
        if config.oracle:
            prof = splitting_profile_periodic(spec, section=config.section,
                                              n_phases=config.n_phases)
            row["amp_oracle"] = mpmath.nstr(prof.fitted_amplitude, 25)
            row["err_oracle"] = mpmath.nstr(prof.noise_floor, 5)
        row["status"] = "ok"
    except Exception as exc:  # per-row failures recorded, sweep continues
        row["status"] = f"error: {exc}"
    return row


def _sweep_row_worker(args):
    eps, config_dict = args
    config = SweepConfig(**config_dict)
    return _sweep_row(eps, config)


def run_sweep(config: SweepConfig, workers: int = None) -> list:
    """Evaluate every grid point; deterministic row order; failures per-row."""
    if workers is None:
        workers = int(os.environ.get("SPLITLAB_WORKERS", "1"))
    if workers > 1:
        cfg = {k: getattr(config, k) for k in config.__dataclass_fields__}
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_row_worker, [(eps, cfg) for eps in config.eps_list]))
    else:
        rows = [_sweep_row(eps, config) for eps in config.eps_list]
    return rows


def rows_to_csv(rows: list) -> str:
    if not rows:
        return ""
    cols = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row.get(c, "")) for c in cols))
    return "\n".join(lines) + "\n"


def fit_rate_prefactor(table, model: str = "exp_plus_power", amp_key: str = "amp_residue") -> RegressionReport:
    """Least squares for ln A = ln c + q ln eps - a/eps (or without the a term).

    ``table`` is either sweep rows (dicts with 'eps' and amp_key) or a list
    of (eps, amplitude) pairs.
    """
    pts = []
    for row in table:
        if isinstance(row, dict):
            if row.get("status", "ok") != "ok" or amp_key not in row:
                continue
            pts.append((float(row["eps"]), float(mpf(row[amp_key]))))
        else:
            pts.append((float(row[0]), float(row[1])))
    if len(pts) < 6:
        raise ValueError("need at least 6 usable points")
    if any(a <= 0 for _, a in pts):
        raise ValueError("amplitudes must be positive")
    eps = np.array([p[0] for p in pts])
    ln_amp = np.log(np.array([p[1] for p in pts]))
    if model == "exp_plus_power":
        X = np.column_stack([np.ones_like(eps), np.log(eps), -1.0 / eps])
    elif model == "power_only":
        X = np.column_stack([np.ones_like(eps), np.log(eps)])
    else:
        raise ValueError("model must be 'exp_plus_power' or 'power_only'")
    coef, _, rank, _ = np.linalg.lstsq(X, ln_amp, rcond=None)
    if rank < X.shape[1]:
        raise ValueError("singular design matrix")
    fitted = X @ coef
    resid = ln_amp - fitted
    dof = max(1, len(pts) - X.shape[1])
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return RegressionReport(
        model=model,
        rate=float(coef[2]) if model == "exp_plus_power" else 0.0,
        power=float(coef[1]),
        log_prefactor=float(coef[0]),
        covariance=cov.tolist(),
        residuals=resid.tolist(),
        n_points=len(pts),
    )


PRESETS = {
    # wide analyticity strip: alpha far below eps^2, entire-case rate pi/2
    "wide-strip": "eps = geom:0.05:0.2:6\nalpha = eps^3\nmethods = residue,quadrature,asymptotic\n",
    # strip independent of eps: rate Im rho_-(alpha)
    "intermediate": "eps = geom:0.08:0.3:10\nalpha = 0.4\nmethods = residue,quadrature,asymptotic\n",
    # narrow strip, polynomial splitting
    "narrow-r2": "eps = geom:0.05:0.15:6\nalpha = 1 - 1.0*eps^2\nmethods = residue,asymptotic\n",
    # first-order validity against the direct oracle
    "validity-check": "eps = 0.25\nalpha = 0.4\nmu = 0.001\neta = 2\noracle = on\nmethods = residue\n",
    # quasiperiodic envelope sweep
    "qp-envelope": "eps = geom:0.3:0.0046875:7\nalpha = 0.3\nforcing = qp\nmethods = residue\n",
}


def validate_suite(level: str = "fast", out=None) -> dict:
    """Run the acceptance checks; failures are report entries, not raises."""
    from . import acceptance

    report = acceptance.run_all(level=level)
    if out:
        with open(out, "w") as fh:
            json.dump(report, fh, indent=1, default=str)
    return report
