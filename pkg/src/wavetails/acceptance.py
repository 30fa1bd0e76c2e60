"""Acceptance suite: rate reproduction and property checks at desk scale.

Each criterion is a function returning a :class:`CriterionResult`; the CLI
``accept`` subcommand and the test suite both call :func:`run_all`.  Slope
fits exclude samples at the numerical floor implied by the run tolerance
(ten times the integrator tolerance, relative to the field scale): below
that level the residual measures integrator noise, not the approximant.

Criterion 6 monitors the raw divergence, whose coefficients grow like
e^{2 tau}; at tau = 12 they amplify any double-precision state error by
~1.6e10, so the stated 1e-6 bound would require state error below 4e-18,
under machine resolution at the stated tolerance.  The criterion is
implemented as stated and reports both the raw monitor and the conformally
rescaled one, which shows the gauge itself is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from wavetails import fourier, kasner, modeode, silentpde, spectral

__all__ = ["CriterionResult", "run_all", "CRITERIA"]

SEED = 20240810


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: str
    values: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# shared contexts


class _ExampleContext:
    """Example system with u(0) = sin theta, u_t(0) = 0 at tol 1e-10."""

    def __init__(self):
        self.tol = 1e-10
        self.sys = silentpde.example_s1()
        u0 = fourier.ModeField.zeros(1, 1, 16)
        amp = np.sqrt(2.0 * np.pi) / 2j
        u0.set((1,), [amp])
        u0.set((-1,), [-amp])
        u1 = fourier.ModeField.zeros(1, 1, 16)
        self.u0, self.u1 = u0, u1
        self.traj = silentpde.solve(self.sys, u0, u1,
                                    np.linspace(0.0, 30.0, 61), self.tol)
        # extraction internals run tighter than the trajectory so the data
        # error stays subdominant to the integrator noise being fitted
        self.data = silentpde.extract_field_data(
            self.sys, traj=self.traj, n_max_orders=2, tol=1e-12)

    def slope(self, order, window=(8.0, 18.0)):
        approximant = self.data.approximant(order)
        ts = np.linspace(window[0], window[1], 60)
        norms, _ = silentpde.field_residual_norms(self.traj, approximant,
                                                  0.0, ts)
        scale = max(fourier.sobolev_norm(self.traj.state(window[0]), 0.0), 1.0)
        mask = norms > 10.0 * self.tol * scale
        return float(np.polyfit(ts[mask], np.log(norms[mask]), 1)[0]), int(mask.sum())


class _KasnerContext:
    """u = 2 Maxwell run: smooth seeded constrained data, tau in [0, 12]."""

    def __init__(self):
        self.tol = 1e-10
        self.p = kasner.kasner_from_u(2.0)
        self.sys = kasner.build_maxwell_system(self.p)
        rng = np.random.default_rng(SEED)
        omega = kasner.hermitian_random_field(rng, 4, 2, decay=3.0)
        domega = kasner.hermitian_random_field(rng, 4, 2, decay=3.0)
        # Bias the slow branch of the first rescaled component so the
        # leading blow-up coefficient sits well inside the generic regime
        # (the blow-up rate degenerates exactly where that coefficient
        # vanishes); without the bias a random draw can leave the leading
        # term comparable to the finite-window subleading contamination.
        bias = 3.0
        zero = (0, 0, 0)
        ov = omega.get(zero)
        dv = domega.get(zero)
        ov[1] += bias
        dv[1] += bias * (-1.0 - self.p.p1)
        omega.set(zero, ov)
        domega.set(zero, dv)
        raw = kasner.PotentialState(tau=0.0, omega=omega, domega=domega,
                                    p=self.p)
        self.state0 = kasner.apply_constraints(raw)
        self.traj = silentpde.solve(self.sys, self.state0.omega,
                                    self.state0.domega,
                                    np.linspace(0.0, 12.0, 25), self.tol)
        self.initial_norm = float(np.sqrt(
            fourier.sobolev_norm(self.state0.omega, 0.0) ** 2
            + fourier.sobolev_norm(self.state0.domega, 0.0) ** 2))
        self.geo_rng = np.random.default_rng(SEED + 1)
        self._lead = None

    @property
    def lead(self):
        if self._lead is None:
            self._lead = kasner.leading_data(self.traj, self.p)
        return self._lead


_example_ctx = None
_kasner_ctx = None


def example_context():
    global _example_ctx
    if _example_ctx is None:
        _example_ctx = _ExampleContext()
    return _example_ctx


def kasner_context():
    global _kasner_ctx
    if _kasner_ctx is None:
        _kasner_ctx = _KasnerContext()
    return _kasner_ctx


# ---------------------------------------------------------------------------
# criteria


def criterion_1():
    """First-order residual rate of the example run on t in [8, 18]."""
    ctx = example_context()
    slope, n_used = ctx.slope(1)
    ok = -1.05 <= slope <= -0.85
    return CriterionResult(
        1, "example first-order rate", ok,
        f"slope {slope:.4f} in [-1.05, -0.85]? ({n_used} samples)",
        {"slope": slope})


def criterion_2():
    """Second-order rate plus term-by-term match of the closed expansion."""
    ctx = example_context()
    slope, n_used = ctx.slope(2)
    rate_ok = -2.2 <= slope <= -1.7

    # Closed-form coefficients from the extracted data, per active mode.
    # The least-squares oracle window balances contamination from the
    # O(e^{-2t}) remainder (early times) against integrator noise on the
    # O(e^{-t}) ansatz columns (late times).
    worst = 0.0
    for iota in ctx.traj.modes:
        n = iota[0]
        data = ctx.data.per_mode[iota]
        dec = data.decomp
        u_hat = data.orders[0][0]
        tilde_v = dec.project(2, data.orders[1])[0]
        want = np.array([u_hat, tilde_v + n * n * u_hat, 1j * n * u_hat])

        ts = np.linspace(14.0, 21.0, 120)
        vs = ctx.traj.trajectories[iota].eval(ts)
        b1 = np.stack([np.ones_like(ts), np.zeros_like(ts)], axis=1)
        b2 = np.exp(-ts)[:, None] * np.array([1.0, -1.0])
        b3 = np.exp(-ts)[:, None] * np.stack([ts + 1.0, -ts], axis=1)
        amat = np.stack([b1, b2, b3], axis=2).reshape(-1, 3)
        coef, *_ = np.linalg.lstsq(amat, vs.reshape(-1), rcond=None)
        worst = max(worst, float(np.max(np.abs(coef - want) / np.abs(want))))
    coef_ok = worst <= 1e-4
    return CriterionResult(
        2, "example second-order rate and expansion", rate_ok and coef_ok,
        f"slope {slope:.4f} in [-2.2, -1.7]?; "
        f"worst coefficient mismatch {worst:.3e} <= 1e-4?",
        {"slope": slope, "coef_mismatch": worst})


def criterion_3():
    """Data -> initial -> solve -> data round trip plus linearity."""
    sys_ = silentpde.example_s1()
    rng = np.random.default_rng(SEED)
    band = 8
    target = fourier.ModeField.zeros(1, 2, band)
    for n in range(-band, band + 1):
        target.set((n,), rng.standard_normal(2) + 1j * rng.standard_normal(2))
    u0, u1, rep = silentpde.phi_infty(sys_, target, tol=1e-10)
    data = silentpde.extract_field_data(sys_, initial=(u0, u1),
                                        n_max_orders=2, tol=1e-10)
    agg = data.aggregate_field()
    worst = max(
        float(np.linalg.norm(agg.get(n) - target.get(n))
              / np.linalg.norm(target.get(n)))
        for n in target.modes())
    rt_ok = worst <= 1e-5

    # linearity at a tightened tolerance so integrator step choices do not
    # masquerade as nonlinearity
    iota = (2,)
    ms, _ = modeode.build_mode_system(sys_, iota)
    x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    a, b = 0.7 - 0.3j, -1.2 + 0.8j
    h = modeode.default_horizon(ms, 2, 1e-12)
    ex = modeode.extract_data(ms, a * x + b * y, 2, h, 1e-12).aggregate
    exa = modeode.extract_data(ms, x, 2, h, 1e-12).aggregate
    exb = modeode.extract_data(ms, y, 2, h, 1e-12).aggregate
    lin_extract = float(np.linalg.norm(ex - a * exa - b * exb))

    t1 = fourier.ModeField.zeros(1, 2, 2)
    t2 = fourier.ModeField.zeros(1, 2, 2)
    for n in range(-2, 3):
        t1.set((n,), rng.standard_normal(2) + 1j * rng.standard_normal(2))
        t2.set((n,), rng.standard_normal(2) + 1j * rng.standard_normal(2))
    p0a, p1a, _ = silentpde.phi_infty(sys_, t1, tol=1e-12)
    p0b, p1b, _ = silentpde.phi_infty(sys_, t2, tol=1e-12)
    p0c, p1c, _ = silentpde.phi_infty(sys_, a * t1 + b * t2, tol=1e-12)
    lin_phi = 0.0
    for n in (a * t1 + b * t2).modes():
        lin_phi = max(lin_phi, float(np.linalg.norm(
            p0c.get(n) - a * p0a.get(n) - b * p0b.get(n))))
        lin_phi = max(lin_phi, float(np.linalg.norm(
            p1c.get(n) - a * p1a.get(n) - b * p1b.get(n))))
    lin_ok = lin_extract <= 1e-10 and lin_phi <= 1e-10
    return CriterionResult(
        3, "isomorphism round trip and linearity", rt_ok and lin_ok,
        f"worst per-mode round trip {worst:.3e} <= 1e-5?; "
        f"extraction linearity {lin_extract:.3e}, phi linearity {lin_phi:.3e} <= 1e-10?",
        {"roundtrip": worst, "lin_extract": lin_extract, "lin_phi": lin_phi})


def criterion_4():
    """Remainder-free solver exactness and exact graded projections."""
    tol = 1e-10
    a_inf = np.array([[0.0, 1.0], [0.0, -1.0]])
    ms = modeode.make_mode_system(a_inf, 1.0)
    rng = np.random.default_rng(SEED)
    v0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    traj = modeode.integrate_mode(ms, v0, 0.0, 20.0, tol)
    dec = ms.decomp
    ts = np.linspace(0.0, 20.0, 81)
    worst = max(float(np.linalg.norm(traj.eval(t) - dec.expm_apply(t, v0)))
                for t in ts)
    solve_ok = worst <= 10.0 * tol * max(1.0, float(np.max(np.abs(v0))))

    data = modeode.extract_data(ms, v0, n_max=2, tol=tol)
    errs = [
        float(np.linalg.norm(data.orders[0] - dec.project(1, v0))),
        float(np.linalg.norm(dec.project(2, data.orders[1]) - dec.project(2, v0))),
        float(np.linalg.norm(data.aggregate - v0)),
    ]
    proj_ok = max(errs) <= 1e-10
    return CriterionResult(
        4, "remainder-free exactness", solve_ok and proj_ok,
        f"max |v - e^(At) v0| = {worst:.3e} <= {10 * tol:.1e}?; "
        f"projection errors {max(errs):.3e} <= 1e-10?",
        {"flow_error": worst, "projection_error": max(errs)})


def criterion_5():
    """Kasner limit-matrix spectrum and eigenvector displays."""
    p = kasner.kasner_from_u(2.0)
    sys_ = kasner.build_maxwell_system(p)
    a_inf = np.block([[np.zeros((4, 4)), np.eye(4)],
                      [-sys_.zeta_inf, -sys_.alpha_inf]]).astype(complex)
    eig = np.sort(np.linalg.eigvals(a_inf).real)
    expected = np.sort([0.0, -2.0, -1 + p.p1, -1 - p.p1, -1 + p.p2,
                        -1 - p.p2, -1 + p.p3, -1 - p.p3])
    eig_err = float(np.max(np.abs(eig - expected)))
    imag_err = float(np.max(np.abs(np.linalg.eigvals(a_inf).imag)))

    def vec(mu, q):
        v = np.zeros(8)
        if mu == 0:
            v[0] = 1.0
            v[4] = q
        else:
            v[mu] = 1.0
            v[4 + mu] = q
        return v

    displays = [(vec(0, 0.0), 0.0), (vec(0, -2.0), -2.0)]
    for i, pi in enumerate(p.as_array, start=1):
        displays.append((vec(i, -1 + pi), -1 + pi))
        displays.append((vec(i, -1 - pi), -1 - pi))
    span_err = 0.0
    for v, lam in displays:
        resid = np.linalg.norm(a_inf @ v - lam * v) / np.linalg.norm(v)
        span_err = max(span_err, float(resid))
    ok = eig_err <= 1e-12 and imag_err <= 1e-12 and span_err <= 1e-10
    return CriterionResult(
        5, "Kasner spectral structure", ok,
        f"eigenvalue error {eig_err:.2e} <= 1e-12?; "
        f"eigenvector residual {span_err:.2e} <= 1e-10?",
        {"eig_err": eig_err, "span_err": span_err})


def criterion_6():
    """Gauge preservation bound on the literal divergence monitor.

    The raw divergence carries e^{2 tau} coefficients; the stated bound
    sits below the double-precision noise they amplify (the measured monitor
    scales linearly with the integrator tolerance), so this criterion fails
    at the stated tolerance.  The conformal-frame monitor is reported
    alongside as evidence the gauge itself is preserved.
    """
    ctx = kasner_context()
    taus = np.linspace(0.0, 12.0, 25)
    worst_raw = 0.0
    worst_conformal = 0.0
    for tau in taus:
        st = kasner.state_at(ctx.traj, ctx.p, tau)
        dv = kasner.div_omega(st)
        mx = max((abs(c[0]) for c in dv.coeffs.values()), default=0.0)
        worst_raw = max(worst_raw, mx)
        worst_conformal = max(worst_conformal, mx * np.exp(-2.0 * tau))
    bound = 1e-6 * ctx.initial_norm
    ok = worst_raw <= bound
    return CriterionResult(
        6, "gauge preservation", ok,
        f"max-mode |div| {worst_raw:.3e} <= {bound:.3e}? "
        f"(conformal monitor {worst_conformal:.3e}; the raw bound sits below "
        "the e^(2 tau)-amplified double-precision noise)",
        {"raw": worst_raw, "conformal": worst_conformal, "bound": bound})


def criterion_7():
    """Generic energy blow-up exponent and leading amplitude."""
    ctx = kasner_context()
    p = ctx.p
    geos = kasner.sample_geodesics(ctx.geo_rng, 20)
    t_samples = np.exp(-np.linspace(6.0, 12.0, 49))
    table = ctx.traj.state_table(-np.log(t_samples))
    target = -(2.0 * p.p2 + 4.0 * p.p3)
    wrong = -(8.0 * p.p3 - 2.0)
    slopes = []
    slope_hits = amp_hits = 0
    for geo in geos:
        fit = kasner.energy_along_geodesic(ctx.traj, p, geo, t_samples,
                                           state_table=table)
        amp = kasner.energy_amplitude(fit, p)
        x_end = kasner.geodesic_endpoint(geo, p)
        coeff = kasner.leading_energy_coefficient(ctx.lead, x_end, geo.c, p)
        slopes.append(fit.slope)
        slope_hits += abs(fit.slope - target) <= 0.03 * abs(target)
        amp_hits += coeff > 0 and abs(amp - coeff) <= 0.10 * coeff
    med = float(np.median(slopes))
    cancel_ok = abs(med - target) < abs(med - wrong) \
        and abs(med - wrong) > 0.03 * abs(wrong)
    slope_frac = slope_hits / len(geos)
    amp_frac = amp_hits / len(geos)
    ok = slope_frac >= 0.9 and amp_frac >= 0.9 and cancel_ok
    return CriterionResult(
        7, "energy blow-up rate and amplitude", ok,
        f"median slope {med:.4f} (target {target:.4f}, excluded {wrong:.4f}); "
        f"slope within 3%: {100 * slope_frac:.0f}%, "
        f"amplitude within 10%: {100 * amp_frac:.0f}%",
        {"median_slope": med, "slope_frac": slope_frac, "amp_frac": amp_frac})


def criterion_8():
    """Faraday leading coefficient and transverse decay rates."""
    ctx = kasner_context()
    p = ctx.p
    pts = 8
    tau = 12.0
    st = kasner.state_at(ctx.traj, p, tau)
    f_grid = kasner.faraday(st, pts)
    target_grid = fourier.synthesize(ctx.lead.u1, pts)[..., 0].real * (-2.0 * p.p1)
    lhs = f_grid[..., 0] * np.exp(2.0 * p.p1 * tau)
    rel = float(np.max(np.abs(lhs - target_grid)) / np.max(np.abs(target_grid)))
    coeff_ok = rel <= 0.02

    taus = np.linspace(6.0, 12.0, 25)
    norms = {1: [], 2: []}
    for s in taus:
        stt = kasner.state_at(ctx.traj, p, s)
        g = fourier.synthesize(kasner.faraday_modes(stt), pts).real
        norms[1].append(np.max(np.abs(g[..., 1])))
        norms[2].append(np.max(np.abs(g[..., 2])))
    bound = -2.0 * (1.0 - p.p3) + 0.15
    s2 = float(np.polyfit(taus, np.log(norms[1]), 1)[0])
    s3 = float(np.polyfit(taus, np.log(norms[2]), 1)[0])
    rate_ok = s2 <= bound and s3 <= bound
    return CriterionResult(
        8, "Faraday expansion rates", coeff_ok and rate_ok,
        f"F_tau1 coefficient error {100 * rel:.2f}% <= 2%?; "
        f"slopes F_tau2 {s2:.3f}, F_tau3 {s3:.3f} <= {bound:.3f}?",
        {"coeff_rel": rel, "slope2": s2, "slope3": s3})


def criterion_9():
    """Cross-check against a finite-difference method-of-lines oracle."""
    ctx = example_context()
    n_pts = 512
    theta = np.linspace(0.0, 2.0 * np.pi, n_pts, endpoint=False)
    h = theta[1] - theta[0]
    u_init = np.sin(theta)
    v_init = np.zeros(n_pts)

    def rhs(t, y):
        u, v = y[:n_pts], y[n_pts:]
        upp = (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / h ** 2
        up = (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * h)
        return np.concatenate([v, np.exp(-2.0 * t) * upp - v - np.exp(-t) * up])

    sol = scipy.integrate.solve_ivp(
        rhs, (0.0, 5.0), np.concatenate([u_init, v_init]), method="DOP853",
        rtol=ctx.tol, atol=ctx.tol)
    fd_u = sol.y[:n_pts, -1]

    state = ctx.traj.state(5.0)
    spec_u = fourier.synthesize(state.component(0), n_pts)[:, 0].real
    err = float(np.max(np.abs(spec_u - fd_u)))
    ok = err <= 1e-4
    return CriterionResult(
        9, "finite-difference oracle cross-check", ok,
        f"max-norm difference at t=5: {err:.3e} <= 1e-4?",
        {"max_diff": err})


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_all(numbers=None):
    """Run the requested criteria (all by default), in order."""
    results = []
    for num in sorted(CRITERIA):
        if numbers is not None and num not in numbers:
            continue
        results.append(CRITERIA[num]())
    return results
