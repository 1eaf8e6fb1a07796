"""Direct ground truth: perturbed invariant manifolds by multiprecision integration.

The hyperbolic fixed point of the forced pendulum stays exactly at the
origin (the perturbation vanishes with sin x), so local manifolds are seeded
from the Floquet eigendirections of the one-period variational flow and
marched to a section with the Taylor integrator.  The splitting distance
d = y^s - y^u is measured at matched forcing phase by fitting the crossing
records of each side with a trigonometric polynomial and subtracting the
fits; Richardson extrapolation in the seed offset removes the leading
offset^2 local-manifold error.

Sections: x = pi (u = 0) in general, x = 3*pi/2 (u = ln(1+sqrt2)) when the
strip is narrow (alpha close to 1), where the perturbed manifolds hug the
separatrix longest.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .melnikov_p import melnikov_residue
from .melnikov_qp import golden_convergents, melnikov_qp_coefficients, small_divisor
from .model import ModelSpec, golden_mean, separatrix
from .mpnum import DEFAULT_PREC, as_mpf, bits_for_magnitude
from .taylor import QpProductSeries, SinPhaseSeries, TaylorPendulum, TaylorVariational

SECTIONS = {"pi": "pi", "3pi2": "3pi2"}
U_STAR = "ln(1+sqrt(2))"


def section_value(section: str, prec: int = DEFAULT_PREC) -> mpf:
    with mp.workprec(prec):
        if section == "pi":
            return +mp.pi
        if section == "3pi2":
            return +(3 * mp.pi / 2)
    raise ValueError("section must be 'pi' or '3pi2'")


def section_u(section: str, prec: int = DEFAULT_PREC) -> mpf:
    with mp.workprec(prec):
        if section == "pi":
            return mpf(0)
        if section == "3pi2":
            return +mpmath.log(1 + mpmath.sqrt(2))
    raise ValueError("section must be 'pi' or '3pi2'")


@dataclass
class ManifoldSeed:
    side: str  # "unstable" | "stable"
    base_phase: tuple  # forcing phase(s) at seed time
    offset: mpf
    direction: tuple  # unit 2-vector in (x, y)


@dataclass
class SectionCrossing:
    section: str
    y_at_crossing: mpf
    phase_at_crossing: tuple
    integration_error: mpf


@dataclass
class SplittingProfile:
    section: str
    samples: list  # (phase tuple, d, error)
    fitted_amplitude: mpf
    fitted_phase: mpf
    mean: mpf
    sup_abs: mpf
    residual: mpf
    noise_floor: mpf
    resolved: bool
    dominant_harmonic: tuple | None = None
    coefficients: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["phase,d,error"] if len(self.samples[0][0]) == 1 else ["theta1,theta2,d,error"]
        for ph, d, e in self.samples:
            cols = [mpmath.nstr(p, 25) for p in ph] + [mpmath.nstr(d, 25), mpmath.nstr(e, 8)]
            lines.append(",".join(cols))
        return "\n".join(lines) + "\n"


def _forcing_series(spec: ModelSpec, phases, prec: int):
    with mp.workprec(prec):
        eps = as_mpf(spec.epsilon)
        if spec.mu == 0:
            return None
        if spec.forcing.kind == "sin":
            return SinPhaseSeries(1 / eps, tau0=as_mpf(phases[0]), prec=prec)
        g = golden_mean(prec)
        sp = spec.forcing.spectrum
        return QpProductSeries(1 / eps, g / eps, sp.r1, sp.r2,
                               theta10=as_mpf(phases[0]), theta20=as_mpf(phases[1]), prec=prec)


def monodromy_floquet(spec: ModelSpec, base_phase=(0.0,), prec: int = DEFAULT_PREC):
    """Eigen-decomposition of the variational flow over one forcing period.

    Returns (eigenvalues, eigenvectors, matrix): the linearization at the
    persisting fixed point integrated over 2*pi*eps from the given phase.
    The product of the eigenvalues is 1 (area preservation); complex
    eigenvalues would signal loss of hyperbolicity and raise.
    """
    if isinstance(base_phase, (int, float, mpf)):
        base_phase = (base_phase,)
    with mp.workprec(prec):
        eps = as_mpf(spec.epsilon)
        series = _forcing_series(spec, base_phase, prec)
        var = TaylorVariational(spec.alpha, spec.mu_eff(prec), spec.variant,
                                forcing_series=series, prec=prec, eps=float(eps))
        A = var.monodromy(mpf(0), 2 * mp.pi * eps)
        (a11, a12), (a21, a22) = A
        tr = a11 + a22
        det = a11 * a22 - a12 * a21
        disc = tr ** 2 - 4 * det
        if disc <= 0:
            raise ArithmeticError("complex Floquet multipliers: fixed point no longer hyperbolic")
        root = mpmath.sqrt(disc)
        lam_u = (tr + root) / 2
        lam_s = (tr - root) / 2

        def eigvec(lam):
            # rows of (A - lam I) are parallel; pick the better-conditioned kernel vector
            v1 = (a12, lam - a11)
            v2 = (lam - a22, a21)
            v = v1 if abs(v1[0]) + abs(v1[1]) >= abs(v2[0]) + abs(v2[1]) else v2
            norm = mpmath.hypot(v[0], v[1])
            v = (v[0] / norm, v[1] / norm)
            if v[1] < 0:  # orient toward the upper branch (y > 0)
                v = (-v[0], -v[1])
            return v

        return (lam_u, lam_s), (eigvec(lam_u), eigvec(lam_s)), A


def make_seed(spec: ModelSpec, side: str, phases, offset, prec: int = DEFAULT_PREC) -> ManifoldSeed:
    if side not in ("unstable", "stable"):
        raise ValueError("side must be 'unstable' or 'stable'")
    if isinstance(phases, (int, float, mpf)):
        phases = (phases,)
    (lam_u, lam_s), (v_u, v_s), _ = monodromy_floquet(spec, phases, prec=prec)
    v = v_u if side == "unstable" else v_s
    return ManifoldSeed(side=side, base_phase=tuple(as_mpf(p) for p in phases),
                        offset=as_mpf(offset), direction=v)


def shoot_to_section(seed: ManifoldSeed, spec: ModelSpec, section: str = "pi",
                     prec: int = DEFAULT_PREC) -> SectionCrossing:
    """Integrate one seeded trajectory to the section and record the crossing.

    Unstable seeds start at the origin and run forward; stable seeds start at
    the conjugate fixed point (2*pi, 0) and run backward, meeting the section
    from the other side of the homoclinic loop.
    """
    spec.check_guard()
    with mp.workprec(prec):
        eps = as_mpf(spec.epsilon)
        series = _forcing_series(spec, seed.base_phase, prec)
        integ = TaylorPendulum(spec.alpha, spec.mu_eff(prec), spec.variant,
                               forcing_series=series, prec=prec, eps=float(eps))
        off = as_mpf(seed.offset)
        # both eigenvectors are oriented toward y > 0, which puts the
        # unstable seed on the right-going branch at the origin and the
        # stable one just left of the conjugate fixed point (2*pi, 0)
        base_x = mpf(0) if seed.side == "unstable" else 2 * mp.pi
        x0 = base_x + off * seed.direction[0]
        y0 = off * seed.direction[1]
        direction = 1 if seed.side == "unstable" else -1
        t_cap = float(1.5 * abs(mpmath.log(off)) + 30)
        t_star, x_star, y_star = integ.integrate_to_section(
            mpf(0), x0, y0, section_value(section, prec), direction=direction, t_cap=t_cap
        )
        tau = [(p + om * t_star / eps) % (2 * mp.pi)
               for p, om in zip(seed.base_phase, (1, golden_mean(prec))[: len(seed.base_phase)])]
        return SectionCrossing(
            section=section,
            y_at_crossing=+y_star,
            phase_at_crossing=tuple(+p for p in tau),
            integration_error=+integ.err_accum * 10,
        )


def _trig_fit(phases, values, n_harm, prec):
    """Least-squares fit value ~ c0 + sum_j a_j cos(j p) + b_j sin(j p).

    Returns coefficient dict {0: c0, (j, "c"): a_j, (j, "s"): b_j}.
    """
    with mp.workprec(prec):
        m = len(phases)
        cols = 1 + 2 * n_harm
        A = mp.matrix(m, cols)
        b = mp.matrix(m, 1)
        for i, (p, v) in enumerate(zip(phases, values)):
            A[i, 0] = 1
            for j in range(1, n_harm + 1):
                A[i, 2 * j - 1] = mpmath.cos(j * p)
                A[i, 2 * j] = mpmath.sin(j * p)
            b[i] = v
        sol, _ = mp.qr_solve(A, b)
        coeffs = {0: sol[0]}
        for j in range(1, n_harm + 1):
            coeffs[(j, "c")] = sol[2 * j - 1]
            coeffs[(j, "s")] = sol[2 * j]
        resid = mpf(0)
        for i, (p, v) in enumerate(zip(phases, values)):
            resid = max(resid, abs(_trig_eval(coeffs, p) - v))
        return coeffs, resid


def _trig_eval(coeffs, p):
    total = coeffs[0]
    j = 1
    while (j, "c") in coeffs:
        total += coeffs[(j, "c")] * mpmath.cos(j * p) + coeffs[(j, "s")] * mpmath.sin(j * p)
        j += 1
    return total


def _combine_richardson(coarse, fine):
    """Offset-squared extrapolation of two coefficient dicts (ratio-2 offsets)."""
    out = {}
    delta = mpf(0)
    for key in fine:
        out[key] = (4 * fine[key] - coarse[key]) / 3
        delta = max(delta, abs(fine[key] - coarse[key]) / 3)
    return out, delta


def predicted_splitting(spec: ModelSpec, section: str = "pi", prec: int = DEFAULT_PREC):
    """First-order prediction of the y-difference amplitude at the section."""
    with mp.workprec(prec):
        if spec.mu == 0:
            return mpf(0)
        u_sec = section_u(section, prec)
        y0 = separatrix(u_sec, prec).y0
        if spec.forcing.kind == "sin":
            amp = melnikov_residue(0, 0, spec, prec=prec).amplitude
        else:
            harmonics, mean, _ = melnikov_qp_coefficients(spec, prec=prec)
            amp = abs(mpf(mean)) + 2 * sum(h.amplitude for h in harmonics)
        return +(abs(spec.mu_eff(prec)) * amp / y0)


def _resolve_workers(workers):
    if workers is None:
        workers = int(os.environ.get("SPLITLAB_WORKERS", "1"))
    return max(1, workers)


def _shot_worker(payload):
    """Top-level worker so shots can run in separate processes."""
    from .model import qp_forcing, sin_forcing

    if payload["forcing"] == "sin":
        forcing = sin_forcing()
    else:
        forcing = qp_forcing(*payload["forcing_args"])
    spec = ModelSpec(
        epsilon=payload["epsilon"], mu=payload["mu"], eta=payload["eta"],
        alpha=payload["alpha"], variant=payload["variant"], forcing=forcing,
    )
    prec = payload["prec"]
    seed = make_seed(spec, payload["side"], tuple(mpf(p) for p in payload["phases"]),
                     mpf(payload["offset"]), prec=prec)
    cr = shoot_to_section(seed, spec, payload["section"], prec=prec)
    return (
        [mpmath.nstr(p, 40) for p in cr.phase_at_crossing],
        mpmath.nstr(cr.y_at_crossing, int(prec * 0.3) + 5),
        mpmath.nstr(cr.integration_error, 8),
    )


def _run_shots(spec: ModelSpec, jobs, section, prec, workers):
    """jobs: list of (side, phases, offset); returns crossings in job order."""
    workers = _resolve_workers(workers)
    if workers == 1:
        out = []
        for side, phases, offset in jobs:
            seed = make_seed(spec, side, phases, offset, prec=prec)
            cr = shoot_to_section(seed, spec, section, prec=prec)
            out.append((cr.phase_at_crossing, cr.y_at_crossing, cr.integration_error))
        return out
    payload_base = {
        "epsilon": spec.epsilon, "mu": spec.mu, "eta": spec.eta, "alpha": spec.alpha,
        "variant": spec.variant, "section": section, "prec": prec,
        "forcing": spec.forcing.kind,
    }
    if spec.forcing.kind == "qp":
        sp = spec.forcing.spectrum
        payload_base["forcing_args"] = (sp.r1, sp.r2, sp.kmax)
    payloads = []
    for side, phases, offset in jobs:
        p = dict(payload_base)
        p.update(side=side, phases=[mpmath.nstr(as_mpf(x), 40) for x in phases],
                 offset=mpmath.nstr(as_mpf(offset), 40))
        payloads.append(p)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        raw = list(ex.map(_shot_worker, payloads))
    return [
        (tuple(mpf(p) for p in phases), mpf(y), mpf(e))
        for phases, y, e in raw
    ]


def splitting_profile_periodic(spec: ModelSpec, section: str = "pi", n_phases: int = 16,
                               prec: int = None, offset=None, richardson: bool = True,
                               workers=None) -> SplittingProfile:
    """d(tau) = y^s - y^u at the section, over a full forcing period.

    Per side: n_phases seeds, each shot to the section; the crossing records
    (tau*, y) are fitted with a trigonometric polynomial so both sides can be
    compared at equal phase.  Two seed offsets (ratio 2) are Richardson
    combined unless richardson=False.
    """
    if n_phases < 16:
        raise ValueError("n_phases >= 16")
    spec.check_guard()
    d_pred = predicted_splitting(spec, section, prec=DEFAULT_PREC)
    if prec is None:
        prec = bits_for_magnitude(d_pred if d_pred > 0 else 1) + 16
    with mp.workprec(prec):
        if offset is None:
            if d_pred > 0:
                offset = mpmath.sqrt(mpf("0.01") * d_pred)
                offset = min(max(offset, mpf("1e-12")), mpf("1e-4"))
            else:
                offset = mpf("1e-6")
        offset = as_mpf(offset)
        offsets = [offset, offset / 2] if richardson else [offset]
        n_harm = max(3, min(5, (n_phases - 2) // 2))
        grid = [2 * mp.pi * j / n_phases for j in range(n_phases)]
        jobs = []
        for side in ("unstable", "stable"):
            for off in offsets:
                for tau0 in grid:
                    jobs.append((side, (tau0,), off))
        results = _run_shots(spec, jobs, section, prec, workers)
        fits = {}
        resid = mpf(0)
        ierr = mpf(0)
        idx = 0
        for side in ("unstable", "stable"):
            per_offset = []
            for off in offsets:
                ph, ys = [], []
                for _ in grid:
                    phases, y, e = results[idx]
                    idx += 1
                    ph.append(phases[0])
                    ys.append(y)
                    ierr = max(ierr, e)
                coeffs, r = _trig_fit(ph, ys, n_harm, prec)
                per_offset.append(coeffs)
                resid = max(resid, r)
            if richardson:
                fits[side], delta = _combine_richardson(per_offset[0], per_offset[1])
                resid = max(resid, delta)
            else:
                fits[side] = per_offset[0]
                # seed curvature error bound ~ offset^2
                resid = max(resid, offset ** 2)
        d_coeffs = {k: fits["stable"][k] - fits["unstable"][k] for k in fits["stable"]}
        samples = []
        sup = mpf(0)
        for tau in grid:
            d = _trig_eval(d_coeffs, tau)
            sup = max(sup, abs(d))
            samples.append(((+tau,), +d, +resid))
        a1, b1 = d_coeffs[(1, "c")], d_coeffs[(1, "s")]
        amp = mpmath.hypot(a1, b1)
        # d ~ A sin(tau + theta): a1 = A sin(theta), b1 = A cos(theta)
        theta = mpmath.atan2(a1, b1) % (2 * mp.pi) if amp > 0 else mpf(0)
        noise = ierr + resid
        return SplittingProfile(
            section=section,
            samples=samples,
            fitted_amplitude=+amp,
            fitted_phase=+theta,
            mean=+d_coeffs[0],
            sup_abs=+sup,
            residual=+resid,
            noise_floor=+noise,
            resolved=bool(amp > 3 * noise),
            coefficients=d_coeffs,
            meta={"prec": prec, "offset": str(offset), "n_phases": n_phases,
                  "richardson": richardson, "d_pred": str(d_pred)},
        )


def _qp_fit_basis(spec: ModelSpec, kmax_block: int = 4, conv_limit: int = 21):
    """Half-lattice harmonic set for fitting QP crossing records: the full
    low-order block plus golden convergent pairs with k1-sidebands."""
    basis = set()
    for k1 in range(-kmax_block, kmax_block + 1):
        for k2 in range(-kmax_block, kmax_block + 1):
            if (k1, k2) == (0, 0):
                continue
            if small_divisor((k1, k2), 64) > 0:
                basis.add((k1, k2))
    for p, q in golden_convergents(12):
        if q > conv_limit:
            break
        for dk in (-1, 0, 1):
            for k in ((p + dk, -q), (-(p + dk), q)):
                if small_divisor(k, 64) > 0:
                    basis.add(k)
    return sorted(basis, key=lambda k: (abs(k[1]), abs(k[0]), k[0]))


def _trig_fit2(thetas, values, basis, prec):
    """2-d analogue of _trig_fit over the harmonic basis (half lattice)."""
    with mp.workprec(prec):
        m = len(thetas)
        cols = 1 + 2 * len(basis)
        A = mp.matrix(m, cols)
        b = mp.matrix(m, 1)
        for i, ((t1, t2), v) in enumerate(zip(thetas, values)):
            A[i, 0] = 1
            for j, (k1, k2) in enumerate(basis):
                ang = k1 * t1 + k2 * t2
                A[i, 2 * j + 1] = mpmath.cos(ang)
                A[i, 2 * j + 2] = mpmath.sin(ang)
            b[i] = v
        sol, _ = mp.qr_solve(A, b)
        coeffs = {(0, 0): sol[0]}
        for j, k in enumerate(basis):
            coeffs[k] = (sol[2 * j + 1], sol[2 * j + 2])
        resid = mpf(0)
        for (t1, t2), v in zip(thetas, values):
            resid = max(resid, abs(_trig_eval2(coeffs, t1, t2) - v))
        return coeffs, resid


def _trig_eval2(coeffs, t1, t2):
    total = coeffs[(0, 0)]
    for k, c in coeffs.items():
        if k == (0, 0):
            continue
        ang = k[0] * t1 + k[1] * t2
        total += c[0] * mpmath.cos(ang) + c[1] * mpmath.sin(ang)
    return total


def splitting_profile_qp(spec: ModelSpec, section: str = "pi", grid_n: int = 16,
                         prec: int = None, offset=None, richardson: bool = False,
                         workers=None) -> SplittingProfile:
    """Torus analogue of the periodic profile on a grid_n x grid_n phase grid.

    Reports sup over the grid of |d| and the dominant nonzero 2-d harmonic.
    Seed curvature is controlled by a single small offset by default
    (offset^2 well under the predicted splitting); richardson=True doubles
    the shot count for offset extrapolation.
    """
    if spec.forcing.kind != "qp":
        raise ValueError("needs a quasiperiodic forcing")
    spec.check_guard()
    d_pred = predicted_splitting(spec, section, prec=DEFAULT_PREC)
    if prec is None:
        prec = bits_for_magnitude(d_pred if d_pred > 0 else 1) + 16
    with mp.workprec(prec):
        if offset is None:
            if d_pred > 0:
                offset = mpmath.sqrt(mpf("0.003") * d_pred)
                offset = min(max(offset, mpf("1e-12")), mpf("1e-4"))
            else:
                offset = mpf("1e-6")
        offset = as_mpf(offset)
        offsets = [offset, offset / 2] if richardson else [offset]
        grid = [
            (2 * mp.pi * i / grid_n, 2 * mp.pi * j / grid_n)
            for i in range(grid_n)
            for j in range(grid_n)
        ]
        basis = _qp_fit_basis(spec)
        jobs = []
        for side in ("unstable", "stable"):
            for off in offsets:
                for th in grid:
                    jobs.append((side, th, off))
        results = _run_shots(spec, jobs, section, prec, workers)
        fits = {}
        resid = mpf(0)
        ierr = mpf(0)
        idx = 0
        for side in ("unstable", "stable"):
            per_offset = []
            for off in offsets:
                ths, ys = [], []
                for _ in grid:
                    phases, y, e = results[idx]
                    idx += 1
                    ths.append(phases)
                    ys.append(y)
                    ierr = max(ierr, e)
                coeffs, r = _trig_fit2(ths, ys, basis, prec)
                per_offset.append(coeffs)
                resid = max(resid, r)
            if richardson:
                combined = {}
                delta = mpf(0)
                for k in per_offset[1]:
                    if k == (0, 0):
                        combined[k] = (4 * per_offset[1][k] - per_offset[0][k]) / 3
                        delta = max(delta, abs(per_offset[1][k] - per_offset[0][k]) / 3)
                    else:
                        combined[k] = tuple(
                            (4 * f - c) / 3 for f, c in zip(per_offset[1][k], per_offset[0][k])
                        )
                        delta = max(
                            delta,
                            max(abs(f - c) / 3 for f, c in zip(per_offset[1][k], per_offset[0][k])),
                        )
                fits[side] = combined
                resid = max(resid, delta)
            else:
                fits[side] = per_offset[0]
                resid = max(resid, offset ** 2)
        d_coeffs = {}
        for k in fits["stable"]:
            if k == (0, 0):
                d_coeffs[k] = fits["stable"][k] - fits["unstable"][k]
            else:
                d_coeffs[k] = tuple(s - u for s, u in zip(fits["stable"][k], fits["unstable"][k]))
        samples = []
        sup = mpf(0)
        for t1, t2 in grid:
            d = _trig_eval2(d_coeffs, t1, t2)
            sup = max(sup, abs(d))
            samples.append(((+t1, +t2), +d, +resid))
        dom, dom_amp = None, mpf(0)
        for k, c in d_coeffs.items():
            if k == (0, 0):
                continue
            a = mpmath.hypot(c[0], c[1])
            if a > dom_amp:
                dom, dom_amp = k, a
        noise = ierr + resid
        return SplittingProfile(
            section=section,
            samples=samples,
            fitted_amplitude=+dom_amp,
            fitted_phase=mpf(0),
            mean=+d_coeffs[(0, 0)],
            sup_abs=+sup,
            residual=+resid,
            noise_floor=+noise,
            resolved=bool(sup > 3 * noise),
            dominant_harmonic=dom,
            coefficients=d_coeffs,
            meta={"prec": prec, "offset": str(offset), "grid_n": grid_n, "d_pred": str(d_pred)},
        )


def hj_residual(spec: ModelSpec, u_grid=None, phase0=0.5, dphase=0.02, side: str = "unstable",
                offset=None, prec: int = None):
    """Consistency residual of the manifold graph against the
    generating-function PDE

        eps^{-1} dT/dtau + (cosh^2 u/8)(dT/du)^2 - 2/cosh^2 u
            + mu eps^eta Psi(u) f(tau) = 0,       dT/du = w = y*y0(u),

    checked in its u-gradient form (the potential T itself is only defined
    up to an additive constant, which drops out here):

        eps^{-1} dw/dtau + (cosh u sinh u/4) w^2 + (cosh^2 u/4) w dw/du
            + 4 sinh u/cosh^3 u + mu eps^eta Psi'(u) f(tau) = 0.

    w is sampled on a u-grid from >= 3 nearby trajectories of one manifold;
    dw/dtau comes from a quadratic fit across the trajectories at fixed u,
    dw/du from the along-trajectory difference corrected by the phase drift
    (d/du along a trajectory = d/du at fixed tau + (1/(eps u')) d/dtau).
    The maximum over interior rows is returned; it sits at integrator noise
    for mu = 0 (T0 solves the PDE) and at second order in the u/phase steps
    otherwise.
    """
    if spec.forcing.kind != "sin":
        raise ValueError("hj_residual covers the periodic case")
    if u_grid is None:
        u_grid = [mpf(-1) + mpf("0.25") * k for k in range(5)]
    u_grid = [as_mpf(u) for u in u_grid]
    if len(u_grid) < 3:
        raise ValueError("need at least 3 u rows")
    if prec is None:
        prec = DEFAULT_PREC
    with mp.workprec(prec):
        eps = as_mpf(spec.epsilon)
        if offset is None:
            offset = mpf("1e-8")
        offset = as_mpf(offset)
        phases0 = [as_mpf(phase0) + j * as_mpf(dphase) for j in (-1, 0, 1)]
        rows_tau = [[] for _ in u_grid]
        rows_w = [[] for _ in u_grid]
        for tau0 in phases0:
            seed = make_seed(spec, side, (tau0,), offset, prec=prec)
            series = _forcing_series(spec, (tau0,), prec)
            integ = TaylorPendulum(spec.alpha, spec.mu_eff(prec), spec.variant,
                                   forcing_series=series, prec=prec, eps=float(eps))
            x = offset * seed.direction[0]
            y = offset * seed.direction[1]
            t = mpf(0)
            t_cap = float(1.5 * abs(mpmath.log(offset)) + 30)
            for i, u in enumerate(u_grid):
                xsec = separatrix(u, prec).x0
                t, x, y = integ.integrate_to_section(t, x, y, xsec, direction=1, t_cap=t_cap)
                y0 = separatrix(u, prec).y0
                rows_tau[i].append(tau0 + t / eps)
                rows_w[i].append(y * y0)

        def quad_fit(taus, vals):
            # exact quadratic through three points: value/derivative at mid
            t0, t1, t2 = taus
            v0, v1, v2 = vals
            d = (
                v0 * (t1 - t2) / ((t0 - t1) * (t0 - t2))
                + v1 * (2 * t1 - t0 - t2) / ((t1 - t0) * (t1 - t2))
                + v2 * (t1 - t0) / ((t2 - t0) * (t2 - t1))
            )
            return v1, d

        from .model import psi_derivative

        mu_eff = spec.mu_eff(prec)
        w_mid, dw_dtau = [], []
        for i in range(len(u_grid)):
            v, d = quad_fit(rows_tau[i], rows_w[i])
            w_mid.append(v)
            dw_dtau.append(d)
        residuals = []
        for i in range(1, len(u_grid) - 1):
            u = u_grid[i]
            ch, sh = mpmath.cosh(u), mpmath.sinh(u)
            y0 = separatrix(u, prec).y0
            w = w_mid[i]
            # along-trajectory derivative, then remove the phase-drift part:
            # along the middle trajectory dtau/du = 1/(eps*u') = y0^2/(eps*w)
            dw_du_traj = (rows_w[i + 1][1] - rows_w[i - 1][1]) / (u_grid[i + 1] - u_grid[i - 1])
            dw_du = dw_du_traj - dw_dtau[i] * y0 ** 2 / (eps * w)
            x0 = separatrix(u, prec).x0
            dpsi = psi_derivative(x0, spec.alpha, spec.variant, prec=prec) * y0
            f = mpmath.sin(rows_tau[i][1])
            res = (
                dw_dtau[i] / eps
                + ch * sh / 4 * w ** 2
                + ch ** 2 / 4 * w * dw_du
                + 4 * sh / ch ** 3
                + mu_eff * dpsi * f
            )
            residuals.append(abs(res))
        return max(residuals), {"rows": len(u_grid), "residuals": residuals}
