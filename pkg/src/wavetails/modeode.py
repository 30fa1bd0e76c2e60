"""Per-mode first-order systems and their late-time asymptotics.

Each Fourier mode of a silent wave system satisfies

    v'(t) = A v(t) + A_rem(t) v(t) + F(t),

where ``A`` is the constant limit matrix, ``||A_rem(t)|| <= C e^{-beta tbar}``
for ``t >= T_ode`` (``tbar = t - T_ode``), and the forcing satisfies
``int_0^inf e^{-kappa_1 s} |F(s)| ds < inf``.  Solutions admit asymptotic
expansions of all orders: for each n there is a unique ``v_n`` in the direct
sum of the first n graded subspaces of ``A`` such that the approximant

    F_n(t) = e^{A t} v_n
             + int_{T_ode}^t e^{A(t-s)} A_rem(s) F_{n-1}(s) ds
             + int_{T_ode}^t e^{A(t-s)} F(s) ds,        F_0 = 0,

satisfies ``|v - F_n| = O(<tbar>^N e^{(kappa_1 - n beta) tbar})``.

Extraction works in the rotated frame ``w(t) = e^{-kappa_1 tbar} R(tbar)
T^{-1} v(t)`` where ``R(tbar) = exp(-i Im(lam) tbar)`` and ``T`` is the graded
transform, in which the data appears as the absolutely convergent integral

    w_inf|_blocks 1..n = w(T_ode)
        + int_{T_ode}^inf e^{-J s_bar} [A_rest (w - W_{n-1})](s) ds,

with ``W_{n-1}`` the (n-1)-th approximant in the same frame.  The integral is
evaluated by composite Gauss-Legendre quadrature on the integrator mesh,
truncated at the horizon; the difference between the truncations at the
horizon and at its midpoint is reported as a per-order convergence estimate.
Mapping back, ``u_n = T w_inf`` and ``v_n = e^{-A T_ode} u_n``.

Approximants are realized by integrating their defining linear ODE
``F_n' = A F_n + A_rem F_{n-1} + F`` with dense output, which keeps the
evaluation cost flat in the order n.

The aggregated asymptotic datum of a homogeneous solution is
``v_1 + pi_2(v_2) + ... + pi_N(v_N)``; it determines the solution uniquely,
and :func:`data_to_initial` inverts the (small, dense) map from initial data
at ``T_ode`` to aggregated data by direct matrix inversion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.optimize

from wavetails import spectral
from wavetails.errors import NumericalError

__all__ = [
    "ModeSystem",
    "GaugeFunction",
    "ModeTrajectory",
    "ModeAsymptoticData",
    "DecayFit",
    "FNorm",
    "make_mode_system",
    "build_mode_system",
    "integrate_mode",
    "extract_data",
    "build_F_infty",
    "residual_decay_fit",
    "data_to_initial",
    "f_norm_A",
    "default_horizon",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


@dataclass
class ModeSystem:
    """First-order mode system v' = A v + A_rem(t) v + F(t)."""

    a_inf: np.ndarray
    beta_rem: float
    decomp: spectral.SpectralDecomposition
    a_rem: object = None          # callable t -> (k, k) or None for zero
    forcing: object = None        # callable t -> (k,) or None for zero
    t_ode: float = 0.0
    c_rem: float = 0.0

    @property
    def k(self):
        return self.a_inf.shape[0]

    def rhs(self, t, v):
        out = self.a_inf @ v
        if self.a_rem is not None:
            out = out + self.a_rem(t) @ v
        if self.forcing is not None:
            out = out + self.forcing(t)
        return out


def make_mode_system(a_inf, beta_rem, a_rem=None, forcing=None, t_ode=0.0,
                     c_rem=None, eps=None, jordan=None, validate=True):
    """Build a :class:`ModeSystem`, decomposing A and vetting the remainder.

    When ``c_rem`` is None it is estimated as the observed supremum of
    ``||A_rem(t)|| e^{beta tbar}`` on a log-spaced sample; when given, the
    bound is verified on the same sample.
    """
    a_inf = np.asarray(a_inf, dtype=complex)
    dec = spectral.decompose(a_inf, beta_rem, eps=eps, jordan=jordan)
    est = 0.0
    if a_rem is not None and validate:
        tbars = np.concatenate([[0.0], np.logspace(-2, np.log10(40.0 / beta_rem), 40)])
        for tbar in tbars:
            norm = np.linalg.norm(a_rem(t_ode + tbar), 2)
            est = max(est, norm * np.exp(beta_rem * tbar))
        if c_rem is not None and est > c_rem * (1.0 + 1e-9):
            raise NumericalError(
                f"remainder bound violated: observed C={est:.6g} exceeds "
                f"declared C_rem={c_rem:.6g}"
            )
    if c_rem is None:
        c_rem = est
    return ModeSystem(a_inf=a_inf, beta_rem=float(beta_rem), decomp=dec,
                      a_rem=a_rem, forcing=forcing, t_ode=float(t_ode),
                      c_rem=float(c_rem))


@dataclass
class GaugeFunction:
    """The mode's effective frequency g(t) and the silence bookkeeping.

    ``ell = ln g`` must satisfy ``ell'(t) <= -b_s + e(t)`` with e integrable;
    only ``c_e = ||e||_1`` enters the algorithms, through ``T_ode``.  For the
    zero mode ``g`` vanishes identically and sigma/X are undefined (None).
    """

    g: object                     # callable t -> float, or None for the zero mode
    b_s: float
    c_e: float = 0.0
    sigma: object = None          # callable t -> complex, for iota != 0
    x_fn: object = None           # callable t -> (m, m), for iota != 0

    def ell_dot(self, t, h=1e-3):
        # five-point stencil of ln g; g must be positive in a neighbourhood
        ts = t + h * np.array([-2.0, -1.0, 1.0, 2.0])
        vals = np.log([self.g(s) for s in ts])
        return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)

    def check_silence(self, t_grid, allowance=1e-9):
        """Max of ell' + b_s over the grid; silent when <= allowance."""
        if self.g is None:
            return 0.0
        worst = -np.inf
        for t in t_grid:
            if t < 2e-3:
                continue
            worst = max(worst, self.ell_dot(t) + self.b_s)
        return worst


def _find_t_ode(g, c_e, scan_step=0.25, t_max=1000.0):
    """First t >= 0 with g(t) = e^{-c_e}; 0 when already below at t = 0."""
    level = np.exp(-c_e)
    if g(0.0) <= level:
        return 0.0
    t_prev = 0.0
    t = scan_step
    while t <= t_max:
        if g(t) <= level:
            return float(scipy.optimize.brentq(
                lambda s: g(s) - level, t_prev, t, xtol=1e-14, rtol=1e-15))
        t_prev = t
        t += scan_step
    raise NumericalError(
        f"no root of g(t) = e^(-c_e) found below t = {t_max}; "
        "the system may not be silent"
    )


def build_gauge(sys, iota):
    """Gauge bookkeeping of one mode, without locating T_ode.

    Used by the condition checker, which must be able to diagnose systems
    whose frequency never drops below the silence threshold.
    """
    n = np.asarray(iota, dtype=float)
    if n.shape != (sys.d,):
        raise ValueError(f"mode index must have length {sys.d}")
    if not np.any(n):
        return GaugeFunction(g=None, b_s=sys.b_s, c_e=sys.c_e)

    def g_of_t(t):
        val = float(n @ sys.gjl(t) @ n)
        return np.sqrt(max(val, 0.0))

    return GaugeFunction(
        g=g_of_t, b_s=sys.b_s, c_e=sys.c_e,
        sigma=lambda t: float(n @ sys.g0l(t)) / g_of_t(t),
        x_fn=lambda t: np.tensordot(n, sys.xj(t), axes=([0], [0])) / g_of_t(t),
    )


def build_mode_system(sys, iota):
    """Mode system and gauge data of a silent PDE system at mode ``iota``.

    ``sys`` carries the coefficient bundle (see silentpde.SilentSystem):
    d, m, callables gjl(t), g0l(t), xj(t), alpha(t), zeta(t), limits
    alpha_inf/zeta_inf, rates b_s/eta_mn, c_e, optional per-mode forcing.
    """
    n = np.asarray(iota, dtype=float)
    if n.shape != (sys.d,):
        raise ValueError(f"mode index must have length {sys.d}")
    m = sys.m
    eye = np.eye(m)

    alpha_inf = np.asarray(sys.alpha_inf, dtype=complex)
    zeta_inf = np.asarray(sys.zeta_inf, dtype=complex)
    a_inf = np.block([[np.zeros((m, m)), eye],
                      [-zeta_inf, -alpha_inf]])

    def a_rem(t):
        gj = sys.gjl(t)
        g2 = float(n @ gj @ n)
        n_x = np.tensordot(n, sys.xj(t), axes=([0], [0]))
        bl = -g2 * eye - 1j * n_x + zeta_inf - sys.zeta(t)
        br = 2j * float(n @ sys.g0l(t)) * eye + alpha_inf - sys.alpha(t)
        return np.block([[np.zeros((m, m)), np.zeros((m, m))], [bl, br]])

    forcing = None
    if sys.forcing is not None:
        iota_t = tuple(int(v) for v in iota)

        def forcing(t, _iota=iota_t):
            out = np.zeros(2 * m, dtype=complex)
            out[m:] = sys.forcing(t, _iota)
            return out

    gauge = build_gauge(sys, iota)
    t_ode = 0.0 if gauge.g is None else _find_t_ode(gauge.g, sys.c_e)
    ms = make_mode_system(a_inf, sys.beta_rem, a_rem=a_rem, forcing=forcing,
                          t_ode=t_ode, jordan=getattr(sys, "jordan", None))
    return ms, gauge


@dataclass
class ModeTrajectory:
    """Numerically integrated mode trajectory with dense output."""

    ts: np.ndarray
    vs: np.ndarray            # (len(ts), k) complex samples at ts
    dense: object             # callable t -> (k,) complex
    tol: float
    t0: float
    t1: float

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = min(self.t0, self.t1), max(self.t0, self.t1)
        if np.any(t < lo - 1e-9) or np.any(t > hi + 1e-9):
            raise ValueError(f"time {t} outside trajectory range [{lo}, {hi}]")
        if t.ndim == 0:
            return self.dense(float(t))
        return self.dense(t).T


def integrate_mode(ms, v0, t0, t1, tol, t_eval=None):
    """Adaptive eighth-order Runge-Kutta integration with dense output."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if t1 == t0:
        raise ValueError("empty integration interval")
    v0 = np.asarray(v0, dtype=complex)
    scale = float(np.max(np.abs(v0))) if np.any(v0) else 1.0
    sol = scipy.integrate.solve_ivp(
        ms.rhs, (t0, t1), v0, method="DOP853", rtol=tol, atol=tol * scale,
        dense_output=True, t_eval=t_eval,
    )
    if not sol.success:
        raise NumericalError(f"mode integration failed: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise NumericalError("non-finite state during mode integration")
    return ModeTrajectory(ts=sol.t, vs=sol.y.T.copy(), dense=sol.sol, tol=tol,
                          t0=float(t0), t1=float(t1))


def default_horizon(ms, n_max, tol):
    """Horizon making the order-n_max truncation error subdominant to tol."""
    dec = ms.decomp
    spread = dec.kappa_max - dec.kappa_min
    rate = max(ms.beta_rem * n_max - spread, ms.beta_rem)
    h = np.log(1.0 / tol) / rate
    return ms.t_ode + float(np.clip(h, 10.0, 200.0))


@dataclass
class ModeAsymptoticData:
    """Per-order data vectors and the aggregated datum of one mode."""

    orders: list                  # v_n for n = 1..n_max
    aggregate: np.ndarray         # v_1 + pi_2(v_2) + ... + pi_min(n_max,N)(v_...)
    converged: list
    conv_estimates: list
    t_ode: float
    horizon: float
    tol: float
    decomp: spectral.SpectralDecomposition
    v_start: np.ndarray = None    # value at t_ode the extraction started from
    _approximants: list = field(default_factory=list, repr=False)

    @property
    def n_orders(self):
        return len(self.orders)

    def order_projection(self, n):
        """pi_n(v_n), the genuinely new datum at order n (n <= N)."""
        return self.decomp.project(n, self.orders[n - 1])


def _quadrature_mesh(ts, rate_scale):
    """Refine integrator steps so each quadrature interval has rate*h <= 1."""
    h_max = 1.0 / max(rate_scale, 1.0)
    mesh = [ts[0]]
    for right in ts[1:]:
        left = mesh[-1]
        n_sub = max(1, int(np.ceil((right - left) / h_max)))
        mesh.extend(left + (right - left) * (np.arange(1, n_sub + 1) / n_sub))
    return np.asarray(mesh)


class _Approximant:
    """Evaluator for one order-n approximant F_n on [t_ode, horizon]."""

    def __init__(self, ms, u_n, prev, tol, horizon):
        self.ms = ms
        self.u_n = np.asarray(u_n, dtype=complex)
        self.t_ode = ms.t_ode
        self.horizon = horizon
        # the driving term A_rem F_{n-1} + F vanishes when F_{n-1} = 0 (prev
        # is None at order 1) or A_rem = 0, and there is no forcing
        has_drive = (ms.a_rem is not None and prev is not None) \
            or ms.forcing is not None
        if not has_drive:
            self._sol = None
            return

        def rhs(t, y):
            out = ms.a_inf @ y
            if ms.a_rem is not None and prev is not None:
                out = out + ms.a_rem(t) @ prev(t)
            if ms.forcing is not None:
                out = out + ms.forcing(t)
            return out

        sol = scipy.integrate.solve_ivp(
            rhs, (self.t_ode, horizon), self.u_n, method="DOP853",
            rtol=tol, atol=tol * max(1.0, float(np.max(np.abs(self.u_n)))),
            dense_output=True,
        )
        if not sol.success:
            raise NumericalError(f"approximant integration failed: {sol.message}")
        self._sol = sol.sol

    def __call__(self, t):
        if self._sol is None:
            # no remainder coupling and no forcing: exact exponential flow
            return self.ms.decomp.expm_apply(t - self.t_ode, self.u_n)
        return self._sol(t)

    def eval_many(self, ts):
        if self._sol is None:
            return np.array([self(t) for t in ts])
        return self._sol(ts).T


def extract_data(ms, v0=None, n_max=1, horizon=None, tol=1e-10, traj=None):
    """Asymptotic data of orders 1..n_max for the solution through ``v0``.

    ``v0`` is the state at ``t_ode``; alternatively a precomputed trajectory
    covering [t_ode, horizon] may be passed.  Orders whose truncated data
    integral is not Cauchy between the horizon midpoint and the horizon are
    flagged as unconverged but still returned.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    dec = ms.decomp
    if horizon is None:
        horizon = default_horizon(ms, n_max, tol)
    if traj is None:
        if v0 is None:
            raise ValueError("either v0 or traj is required")
        traj = integrate_mode(ms, v0, ms.t_ode, horizon, tol)
    else:
        lo, hi = min(traj.t0, traj.t1), max(traj.t0, traj.t1)
        if lo > ms.t_ode + 1e-9 or hi < horizon - 1e-9:
            raise ValueError("trajectory does not cover [t_ode, horizon]")

    k = ms.k
    t_ode = ms.t_ode
    kappa1 = dec.kappa_max
    inv_t = dec.inverse_transform
    v_start = traj.eval(t_ode)
    w_start = inv_t @ v_start

    # quadrature mesh and cached node data
    ts = traj.ts[(traj.ts >= t_ode - 1e-12) & (traj.ts <= horizon + 1e-12)]
    if ts[0] > t_ode:
        ts = np.concatenate([[t_ode], ts])
    if ts[-1] < horizon:
        ts = np.concatenate([ts, [horizon]])
    rate_scale = (dec.kappa_max - dec.kappa_min) + abs(kappa1) + ms.beta_rem
    mesh = _quadrature_mesh(ts, rate_scale)
    mids = 0.5 * (mesh[:-1] + mesh[1:])
    halfs = 0.5 * (mesh[1:] - mesh[:-1])
    nodes = (mids[:, None] + halfs[:, None] * _GL_NODES[None, :]).ravel()
    wgts = (halfs[:, None] * _GL_WEIGHTS[None, :]).ravel()

    have_rem = ms.a_rem is not None
    if have_rem:
        v_nodes = traj.eval(nodes)
        arem_nodes = np.array([ms.a_rem(s) for s in nodes])
        sbar = nodes - t_ode
        rot = np.exp(-1j * dec.imag_diag[None, :] * sbar[:, None])
        jdiag = np.diag(dec.j_real)
        diagonal_j = all(dec._j_block_diagonal)
        # exp(-(J + kappa_1 I) sbar) applied entrywise when J is diagonal
        if diagonal_j:
            decay = np.exp(-(jdiag[None, :] + kappa1) * sbar[:, None])
    mid_time = t_ode + 0.5 * (horizon - t_ode)

    orders = []
    converged = []
    conv_estimates = []
    approximants = []
    prev = None

    scale0 = max(1.0, float(np.max(np.abs(v_start))))
    for n in range(1, n_max + 1):
        nb = min(n, dec.n_blocks)
        active = dec.block_slices[nb - 1].stop
        w_inf = np.zeros(k, dtype=complex)
        w_inf[:active] = w_start[:active]
        conv_est = 0.0
        if have_rem:
            if prev is None:
                diff = v_nodes
            else:
                diff = v_nodes - prev.eval_many(nodes)
            core = np.einsum("sij,sj->si", arem_nodes, diff)
            core = np.einsum("ij,sj->si", inv_t, core) * rot
            if diagonal_j:
                integrand = core * decay
            else:
                integrand = np.empty_like(core)
                for i, sb in enumerate(sbar):
                    integrand[i] = np.exp(-kappa1 * sb) * (dec.exp_j(-sb) @ core[i])
            contrib = wgts[:, None] * integrand[:, :active]
            total = contrib.sum(axis=0)
            upto_mid = contrib[nodes <= mid_time].sum(axis=0)
            conv_est = float(np.linalg.norm(total - upto_mid))
            w_inf[:active] += total
        u_n = dec.transform @ w_inf
        v_n = dec.expm_apply(-t_ode, u_n) if t_ode != 0.0 else u_n
        orders.append(v_n)
        conv_estimates.append(conv_est)
        # the reported estimate is the half-horizon Cauchy gap; the tail
        # beyond the horizon is smaller by the guaranteed remainder decay
        q = np.exp(-ms.beta_rem * 0.5 * (horizon - t_ode))
        remaining = conv_est * q / max(1.0 - q, 0.5)
        converged.append(
            remaining <= 1e2 * tol * max(scale0, float(np.linalg.norm(w_inf))))
        prev = _Approximant(ms, u_n, prev, tol, horizon)
        approximants.append(prev)

    aggregate = orders[0].copy()
    for n in range(2, min(n_max, dec.n_blocks) + 1):
        aggregate += dec.project(n, orders[n - 1])

    return ModeAsymptoticData(
        orders=orders, aggregate=aggregate, converged=converged,
        conv_estimates=conv_estimates, t_ode=t_ode, horizon=float(horizon),
        tol=tol, decomp=dec, v_start=v_start, _approximants=approximants,
    )


def build_F_infty(ms, data, n):
    """Evaluator for the order-n approximant; n = 0 gives the zero function.

    Uses the evaluators cached during extraction when available; otherwise
    rebuilds the recursion from the stored data vectors.
    """
    if n == 0:
        return lambda t: np.zeros(ms.k, dtype=complex)
    if n > len(data.orders):
        raise ValueError(f"data holds {len(data.orders)} orders, requested {n}")
    if len(data._approximants) >= n:
        return data._approximants[n - 1]
    prev = None
    for j in range(1, n + 1):
        u_j = ms.decomp.expm_apply(ms.t_ode, data.orders[j - 1]) \
            if ms.t_ode != 0.0 else data.orders[j - 1]
        prev = _Approximant(ms, u_j, prev, data.tol, data.horizon)
    return prev


@dataclass
class DecayFit:
    """Least-squares slope of ln residual vs t."""

    slope: float
    intercept: float
    r_squared: float
    below_floor: bool
    n_used: int


FLOOR_FACTOR = 1e-13


def residual_decay_fit(traj, approx, window, n_samples=60, floor=None):
    """Fit ln |v(t) - approx(t)| ~ slope * t + b on the window.

    Residuals below the floor (default ``1e-13 * scale`` with scale the max
    of |v| on the window) are numerical noise and excluded from the fit; if
    every sample sits at the floor the result is flagged ``below_floor``
    instead of fitted.  Callers fitting against trajectories integrated at a
    loose tolerance should raise ``floor`` to the integrator noise level.
    """
    ta, tb = window
    ts = np.linspace(ta, tb, n_samples)
    vs = traj.eval(ts)
    res = np.array([np.linalg.norm(v - approx(t)) for t, v in zip(ts, vs)])
    scale = float(np.max(np.abs(vs)))
    if floor is None:
        floor = FLOOR_FACTOR * max(scale, 1e-300)
    mask = res > floor
    if mask.sum() < 3:
        return DecayFit(np.nan, np.nan, np.nan, True, int(mask.sum()))
    x = ts[mask]
    y = np.log(res[mask])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(intercept), r2, False, int(mask.sum()))


@dataclass
class DataToInitialReport:
    condition_number: float
    roundtrip_error: float


COND_LIMIT_DATA_MAP = 1e10


def data_to_initial(ms, target, horizon=None, tol=1e-10, n_max=None):
    """Initial data at ``t_ode`` whose solution has aggregated datum ``target``.

    Homogeneous systems only (see the inhomogeneous correction in the CLI
    ``specify`` command for forced systems).  The k-by-k matrix taking initial
    data to aggregated data is assembled column by column from extractions of
    the basis vectors and inverted directly; the layered block-by-block
    construction from the theory is intentionally not used as the primary
    path (the direct inverse is simpler and verified by a round trip), and an
    ill-conditioned map raises instead of falling back.
    """
    if ms.forcing is not None:
        raise ValueError("data_to_initial requires a homogeneous system (no forcing)")
    dec = ms.decomp
    k = ms.k
    if n_max is None:
        n_max = dec.n_blocks
    if horizon is None:
        horizon = default_horizon(ms, n_max, tol)
    target = np.asarray(target, dtype=complex)
    if not np.any(target):
        return np.zeros(k, dtype=complex), DataToInitialReport(1.0, 0.0)

    m = np.empty((k, k), dtype=complex)
    for i in range(k):
        e = np.zeros(k, dtype=complex)
        e[i] = 1.0
        m[:, i] = extract_data(ms, e, n_max, horizon, tol).aggregate
    cond = float(np.linalg.cond(m))
    if cond > COND_LIMIT_DATA_MAP:
        raise NumericalError(
            f"data map condition number {cond:.3g} exceeds {COND_LIMIT_DATA_MAP:.1g}; "
            "the horizon may be too short or beta_rem misestimated"
        )
    v0 = np.linalg.solve(m, target)
    back = extract_data(ms, v0, n_max, horizon, tol).aggregate
    err = float(np.linalg.norm(back - target))
    limit = 1e2 * tol * float(np.linalg.norm(target))
    if err > limit:
        raise NumericalError(
            f"data round-trip error {err:.3g} exceeds {limit:.3g} "
            f"(condition number {cond:.3g})"
        )
    return v0, DataToInitialReport(cond, err)


@dataclass
class FNorm:
    value: float
    tail_bound: float


def f_norm_A(forcing, kappa1, horizon=200.0, weight=1.0):
    """Weighted norm int_0^inf e^{-kappa_1 s} |F(s)| ds, truncated at horizon.

    The integrand is checked for decay on log-spaced samples before
    quadrature; an apparent divergence raises.  ``weight`` scales the result
    (callers use it for Sobolev-weighted mode aggregation).
    """
    def g(s):
        return float(np.exp(-kappa1 * s) * np.linalg.norm(np.atleast_1d(forcing(s))))

    probes = np.logspace(-2, np.log10(horizon), 30)
    vals = np.array([g(s) for s in probes])
    top = float(vals.max(initial=0.0))
    if top == 0.0:
        return FNorm(0.0, 0.0)
    early = float(vals[probes <= 0.5 * horizon].max(initial=0.0))
    late = float(vals[probes >= 0.75 * horizon].max(initial=0.0))
    if late > 0.5 * early:
        raise NumericalError(
            "forcing norm integrand does not decay by the horizon; "
            "it may diverge (or the horizon is too short)"
        )
    value, _ = scipy.integrate.quad(g, 0.0, horizon, epsrel=1e-8, limit=400)
    gh = g(horizon)
    gm = g(0.9 * horizon)
    if gh <= 0.0:
        tail = 0.0
    elif gm > gh:
        rate = np.log(gm / gh) / (0.1 * horizon)
        tail = gh / rate
    else:
        tail = float("inf")
    return FNorm(float(value * weight), float(tail * weight))
