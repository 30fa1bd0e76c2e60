"""PDE-level assembly of silent wave systems on the torus.

A :class:`SilentSystem` bundles the coefficients of

    u_tt - g^{jl}(t) d_j d_l u + 2 g^{0l}(t) d_t d_l u
         + alpha(t) u_t + X^j(t) d_j u + zeta(t) u = f,

in canonical form (lapse one, so the u_tt coefficient is one), together with
the constant limits of alpha and zeta, the declared silence rate ``b_s``
(each mode frequency satisfies d/dt ln g <= -b_s up to an integrable error
with L1 norm ``c_e``) and the convergence rate ``eta_mn`` of the
time-dependent coefficients.  The remainder decay rate is
``beta_rem = min(b_s, eta_mn)``.

Everything is solved mode by mode: modes decouple exactly, so the field
solver simply iterates :func:`wavetails.modeode.integrate_mode` over the
initial-data support.  Field-level asymptotic data is the collection of
per-mode data, and the global data-to-initial-data map applies the per-mode
inversion followed by backward integration to t = 0.

The declared rates are verified, not inferred; :func:`check_conditions`
reports silence, balance and convergence margins on a sampled grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from wavetails import modeode
from wavetails.errors import ConfigError, NumericalError
from wavetails.fourier import ModeField

__all__ = [
    "SilentSystem",
    "FieldTrajectory",
    "FieldAsymptoticData",
    "FieldApproximant",
    "ConditionReport",
    "PhiReport",
    "example_s1",
    "check_conditions",
    "solve",
    "extract_field_data",
    "phi_infty",
    "field_residual_norms",
]

FIELD_FLOOR = 1e-12


@dataclass
class SilentSystem:
    """Coefficient bundle of a silent linear wave system on T^d."""

    d: int
    m: int
    gjl: object                  # t -> (d, d) real SPD
    alpha: object                # t -> (m, m) complex
    zeta: object                 # t -> (m, m) complex
    alpha_inf: np.ndarray
    zeta_inf: np.ndarray
    b_s: float
    eta_mn: float
    g0l: object = None           # t -> (d,) real; default zero
    xj: object = None            # t -> (d, m, m) complex; default zero
    c_e: float = 0.0
    b_low: float = None          # declared lower silence rate, for phi_infty
    forcing: object = None       # (t, iota) -> (m,) complex
    forcing_modes: tuple = ()    # support of the forcing in mode space
    jordan: object = None        # chains [(lam, [v1, v2, ...])] when the
                                 # limit matrix is numerically defective

    def __post_init__(self):
        if self.g0l is None:
            zero_d = np.zeros(self.d)
            self.g0l = lambda t: zero_d
        if self.xj is None:
            zero_x = np.zeros((self.d, self.m, self.m), dtype=complex)
            self.xj = lambda t: zero_x
        self.alpha_inf = np.asarray(self.alpha_inf, dtype=complex)
        self.zeta_inf = np.asarray(self.zeta_inf, dtype=complex)
        if self.alpha_inf.shape != (self.m, self.m) or \
                self.zeta_inf.shape != (self.m, self.m):
            raise ConfigError("alpha_inf/zeta_inf must be m-by-m")
        if self.b_s <= 0 or self.eta_mn <= 0:
            raise ConfigError("b_s and eta_mn must be positive")
        for t in (0.0, 1.0, 7.5):
            g = np.asarray(self.gjl(t))
            if g.shape != (self.d, self.d):
                raise ConfigError("gjl(t) must return a d-by-d matrix")
            if np.linalg.norm(g - g.T) > 1e-12 * max(1.0, np.linalg.norm(g)):
                raise ConfigError(f"gjl({t}) is not symmetric")
            if np.min(np.linalg.eigvalsh(g)) <= 0:
                raise ConfigError(f"gjl({t}) is not positive definite")

    @property
    def beta_rem(self):
        return min(self.b_s, self.eta_mn)

    @property
    def k(self):
        return 2 * self.m


def example_s1():
    """The running scalar example: u_tt - e^{-2t} u_qq + u_t + e^{-t} u_q = 0.

    Scalar (m = 1) on the circle, with g^{11} = e^{-2t}, alpha = 1, zeta = 0
    and X^1 = e^{-t}.  Silence rate 1 with matching lower rate; the constant
    alpha and zeta make any positive convergence rate valid, so eta_mn = 1
    and beta_rem = 1.
    """
    one = np.array([[1.0 + 0j]])
    zero = np.array([[0.0 + 0j]])
    return SilentSystem(
        d=1, m=1,
        gjl=lambda t: np.array([[np.exp(-2.0 * t)]]),
        alpha=lambda t: one,
        zeta=lambda t: zero,
        alpha_inf=one,
        zeta_inf=zero,
        b_s=1.0,
        eta_mn=1.0,
        xj=lambda t: np.array([[[np.exp(-t) + 0j]]]),
        b_low=1.0,
    )


def _default_check_modes(d):
    modes = []
    for j in range(d):
        e = [0] * d
        e[j] = 1
        modes.append(tuple(e))
        modes.append(tuple(-v for v in e))
        e3 = [0] * d
        e3[j] = 3
        modes.append(tuple(e3))
    modes.append(tuple([1] * d))
    seen = []
    for mm in modes:
        if mm not in seen and any(mm):
            seen.append(mm)
    return seen


@dataclass
class ConditionReport:
    silence_ok: bool
    silence_excess: float        # max over samples of ell' + b_s
    balance_ok: bool
    c_coeff: float
    convergence_ok: bool
    c_mn: float
    lower_ok: bool               # True when not requested
    lower_excess: float
    modes: list
    allowance: float

    @property
    def ok(self):
        return self.silence_ok and self.balance_ok and self.convergence_ok \
            and self.lower_ok


def check_conditions(sys, modes=None, t_grid=None, allowance=1e-9):
    """Verify silence, balance and convergence margins on sampled data.

    Silence tests d/dt ln g <= -b_s + allowance for every sample mode;
    balance reports the coefficient bound and fails when it grows along the
    grid; convergence fits the constant in
    ||alpha - alpha_inf|| + ||zeta - zeta_inf|| <= C e^{-eta_mn t} and fails
    when the fitted constant is still growing at the end of the grid.  When
    the system declares ``b_low``, the lower silence bound
    d/dt ln g >= -b_low - allowance is checked as well.
    """
    if modes is None:
        modes = _default_check_modes(sys.d)
    if t_grid is None:
        t_grid = np.linspace(0.05, 30.0, 240)
    t_grid = np.asarray(t_grid, dtype=float)

    silence_excess = -np.inf
    lower_excess = -np.inf
    c_coeff = 0.0
    c_per_t = np.zeros_like(t_grid)
    for iota in modes:
        gauge = modeode.build_gauge(sys, iota)
        if gauge.g is None:
            continue
        for i, t in enumerate(t_grid):
            ld = gauge.ell_dot(t)
            silence_excess = max(silence_excess, ld + sys.b_s)
            if sys.b_low is not None:
                lower_excess = max(lower_excess, -ld - sys.b_low)
            val = abs(gauge.sigma(t)) + np.linalg.norm(gauge.x_fn(t), 2) \
                + np.linalg.norm(sys.alpha(t), 2) + np.linalg.norm(sys.zeta(t), 2)
            c_coeff = max(c_coeff, val)
            c_per_t[i] = max(c_per_t[i], val)

    half = len(t_grid) // 2
    balance_ok = bool(np.isfinite(c_coeff)) and \
        float(c_per_t[half:].max(initial=0.0)) <= 2.0 * float(c_per_t[:half].max(initial=0.0)) + 1.0

    resid = np.array([
        np.linalg.norm(sys.alpha(t) - sys.alpha_inf, 2)
        + np.linalg.norm(sys.zeta(t) - sys.zeta_inf, 2)
        for t in t_grid
    ])
    weighted = resid * np.exp(sys.eta_mn * t_grid)
    c_mn = float(weighted.max(initial=0.0))
    third = 2 * len(t_grid) // 3
    convergence_ok = c_mn == 0.0 or \
        float(weighted[third:].max(initial=0.0)) <= c_mn * (1.0 + 1e-9)

    return ConditionReport(
        silence_ok=bool(silence_excess <= allowance),
        silence_excess=float(silence_excess),
        balance_ok=balance_ok,
        c_coeff=float(c_coeff),
        convergence_ok=bool(convergence_ok),
        c_mn=c_mn,
        lower_ok=bool(sys.b_low is None or lower_excess <= allowance),
        lower_excess=float(lower_excess),
        modes=list(modes),
        allowance=allowance,
    )


@dataclass
class FieldTrajectory:
    """Per-mode trajectories of a solved field on a shared output grid."""

    sys: SilentSystem
    t_grid: np.ndarray
    mode_systems: dict           # iota -> ModeSystem
    trajectories: dict           # iota -> ModeTrajectory
    tol: float

    @property
    def modes(self):
        return sorted(self.trajectories.keys())

    def state(self, t):
        """Field state (u, u_t) at time t as a 2m-component mode field."""
        n_max = max((max(abs(v) for v in iota) for iota in self.modes),
                    default=0)
        out = ModeField.zeros(self.sys.d, 2 * self.sys.m, n_max)
        for iota in self.modes:
            out.coeffs[iota] = self.trajectories[iota].eval(t)
        return out

    def state_table(self, ts):
        """Per-mode state samples, keyed by mode; values (len(ts), 2m)."""
        return {iota: self.trajectories[iota].eval(np.asarray(ts, dtype=float))
                for iota in self.modes}


def _initial_modes(sys, u0, u1):
    modes = set(u0.coeffs) | set(u1.coeffs)
    modes |= set(tuple(mm) for mm in sys.forcing_modes)
    active = []
    for iota in sorted(modes):
        if np.any(u0.get(iota)) or np.any(u1.get(iota)) \
                or tuple(iota) in set(map(tuple, sys.forcing_modes)):
            active.append(iota)
    return active


def solve(sys, u0, u1, t_grid, tol=1e-10):
    """Integrate every active mode independently from t_grid[0].

    The initial fields give (u, u_t) coefficients; modes with identically
    zero data and no forcing stay zero and are skipped.  Mode errors are
    reported with the offending index attached.
    """
    if (u0.d, u0.m_comp) != (sys.d, sys.m) or (u1.d, u1.m_comp) != (sys.d, sys.m):
        raise ConfigError("initial fields do not match system dimensions")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2 or np.any(np.diff(t_grid) <= 0):
        raise ConfigError("t_grid must be strictly increasing with >= 2 points")
    t0, t1 = float(t_grid[0]), float(t_grid[-1])

    mode_systems = {}
    trajectories = {}
    for iota in _initial_modes(sys, u0, u1):
        try:
            ms, _ = modeode.build_mode_system(sys, iota)
            v0 = np.concatenate([u0.get(iota), u1.get(iota)])
            trajectories[iota] = modeode.integrate_mode(ms, v0, t0, t1, tol)
            mode_systems[iota] = ms
        except NumericalError as exc:
            raise NumericalError(f"mode {iota}: {exc}") from exc
    return FieldTrajectory(sys=sys, t_grid=t_grid, mode_systems=mode_systems,
                           trajectories=trajectories, tol=tol)


class FieldApproximant:
    """Field-level order-n approximant, evaluated per mode."""

    def __init__(self, d, m, evaluators):
        self.d = d
        self.m = m
        self._evaluators = evaluators     # iota -> callable t -> (2m,)

    def mode(self, iota, t):
        fn = self._evaluators.get(tuple(iota))
        if fn is None:
            return np.zeros(2 * self.m, dtype=complex)
        return fn(t)

    def field(self, t):
        n_max = max((max(abs(v) for v in iota) for iota in self._evaluators),
                    default=0)
        out = ModeField.zeros(self.d, 2 * self.m, n_max)
        for iota, fn in self._evaluators.items():
            out.coeffs[iota] = fn(t)
        return out


@dataclass
class FieldAsymptoticData:
    """Per-mode asymptotic data aggregated into mode fields."""

    sys: SilentSystem
    per_mode: dict               # iota -> ModeAsymptoticData
    mode_systems: dict           # iota -> ModeSystem
    n_orders: int
    n_max: int                   # band limit used for the assembled fields

    def order_field(self, n):
        """V_n as a 2m-component mode field."""
        out = ModeField.zeros(self.sys.d, 2 * self.sys.m, self.n_max)
        for iota, data in sorted(self.per_mode.items()):
            out.coeffs[iota] = data.orders[n - 1]
        return out

    def aggregate_field(self):
        out = ModeField.zeros(self.sys.d, 2 * self.sys.m, self.n_max)
        for iota, data in sorted(self.per_mode.items()):
            out.coeffs[iota] = data.aggregate
        return out

    def approximant(self, n):
        evaluators = {}
        for iota, data in self.per_mode.items():
            evaluators[iota] = modeode.build_F_infty(
                self.mode_systems[iota], data, n)
        return FieldApproximant(self.sys.d, self.sys.m, evaluators)

    @property
    def unconverged_modes(self):
        bad = {}
        for iota, data in sorted(self.per_mode.items()):
            orders = [n + 1 for n, ok in enumerate(data.converged) if not ok]
            if orders:
                bad[iota] = orders
        return bad


def extract_field_data(sys, initial=None, traj=None, n_max_orders=1,
                       horizon=None, tol=1e-10):
    """Per-mode asymptotic data for a solved or freshly integrated field.

    ``initial`` is a pair (u0, u1) of mode fields at t = 0; alternatively a
    :class:`FieldTrajectory` may be supplied, in which case it must reach the
    horizon.  By uniqueness the result is horizon-independent within the
    reported convergence estimates.
    """
    if traj is None:
        if initial is None:
            raise ValueError("either initial fields or a trajectory is required")
        u0, u1 = initial
        probe_ms, _ = modeode.build_mode_system(
            sys, next(iter(_initial_modes(sys, u0, u1)), tuple([1] * sys.d)))
        h = horizon if horizon is not None else \
            modeode.default_horizon(probe_ms, n_max_orders, tol)
        traj = solve(sys, u0, u1, np.array([0.0, h]), tol)
    per_mode = {}
    for iota in traj.modes:
        ms = traj.mode_systems[iota]
        h = horizon if horizon is not None else \
            modeode.default_horizon(ms, n_max_orders, tol)
        h = min(h, max(traj.trajectories[iota].t0, traj.trajectories[iota].t1))
        per_mode[iota] = modeode.extract_data(
            ms, n_max=n_max_orders, horizon=h, tol=tol,
            traj=traj.trajectories[iota])
    n_max = max((max(abs(v) for v in iota) for iota in traj.modes), default=0)
    return FieldAsymptoticData(sys=sys, per_mode=per_mode,
                               mode_systems=traj.mode_systems,
                               n_orders=n_max_orders, n_max=n_max)


@dataclass
class PhiReport:
    roundtrip_errors: dict       # iota -> relative data round-trip error
    condition_numbers: dict
    xi_fit: float                # fitted Sobolev loss exponent
    max_loss_ratio: float        # max |v0| / (<nu>^xi |V|)

    @property
    def max_roundtrip_error(self):
        return max(self.roundtrip_errors.values(), default=0.0)


def phi_infty(sys, target, horizon=None, tol=1e-10, backward_tol=None):
    """Initial fields (u0, u1) at t = 0 realizing the aggregated data.

    Homogeneous systems only, and the system must declare the lower silence
    rate ``b_low`` (the backward-in-time growth control).  Per mode this
    inverts the data map at T_ode and integrates back to t = 0 at a tighter
    tolerance so the map stays linear to high accuracy.
    """
    if sys.forcing is not None:
        raise ConfigError("phi_infty requires a homogeneous system; "
                          "see the specify command for the forced correction")
    if sys.b_low is None:
        raise ConfigError("phi_infty requires the lower silence rate b_low")
    if target.m_comp != 2 * sys.m:
        raise ConfigError("target data must have 2m components")
    if backward_tol is None:
        backward_tol = min(tol, 1e-12)

    u0 = ModeField.zeros(sys.d, sys.m, target.n_max)
    u1 = ModeField.zeros(sys.d, sys.m, target.n_max)
    rts = {}
    conds = {}
    pairs = []
    for iota in target.modes():
        tvec = target.get(iota)
        if not np.any(tvec):
            continue
        ms, _ = modeode.build_mode_system(sys, iota)
        v_t, rep = modeode.data_to_initial(ms, tvec, horizon=horizon, tol=tol)
        if ms.t_ode > 0.0:
            back = modeode.integrate_mode(ms, v_t, ms.t_ode, 0.0, backward_tol)
            v0 = back.eval(0.0)
        else:
            v0 = v_t
        u0.coeffs[iota] = v0[:sys.m].copy()
        u1.coeffs[iota] = v0[sys.m:].copy()
        tnorm = float(np.linalg.norm(tvec))
        rts[iota] = rep.roundtrip_error / tnorm if tnorm else 0.0
        conds[iota] = rep.condition_number
        if any(iota) and tnorm:
            bracket = np.sqrt(1.0 + float(np.dot(iota, iota)))
            pairs.append((np.log(bracket),
                          np.log(float(np.linalg.norm(v0)) / tnorm)))

    xi = 0.0
    max_ratio = 0.0
    if len(pairs) >= 2 and len({p[0] for p in pairs}) >= 2:
        xs, ys = np.array(pairs).T
        xi = float(np.polyfit(xs, ys, 1)[0])
        max_ratio = float(np.exp(np.max(ys - xi * xs)))
    return u0, u1, PhiReport(rts, conds, xi, max_ratio)


def field_residual_norms(traj, approximant, s, t_samples):
    """Sobolev norms of (u, u_t) - F_n at the sample times.

    Returns (norms, floor_flags); a sample is at the floor when the residual
    norm falls below 1e-12 relative to the field scale.
    """
    t_samples = np.asarray(t_samples, dtype=float)
    d = traj.sys.d
    norms = np.empty(len(t_samples))
    scales = np.empty(len(t_samples))
    for i, t in enumerate(t_samples):
        total = 0.0
        scale = 0.0
        for iota in traj.modes:
            v = traj.trajectories[iota].eval(t)
            r = v - approximant.mode(iota, t)
            bracket = 1.0 + float(np.dot(iota, iota))
            total += bracket ** s * float(np.sum(np.abs(r) ** 2))
            scale += bracket ** s * float(np.sum(np.abs(v) ** 2))
        norms[i] = np.sqrt(total)
        scales[i] = np.sqrt(scale)
    floor_flags = norms < FIELD_FLOOR * np.maximum(scales.max(initial=0.0), 1e-300)
    return norms, floor_flags
