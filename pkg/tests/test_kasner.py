import numpy as np
import pytest
from scipy.integrate import simpson

from wavetails import silentpde
from wavetails.errors import ConfigError
from wavetails.fourier import ModeField, point_eval
from wavetails.kasner import (
    Geodesic,
    KasnerExponents,
    PotentialState,
    apply_constraints,
    build_maxwell_system,
    constraint_residuals,
    div_omega,
    energy_along_geodesic,
    faraday,
    faraday_modes,
    geodesic_endpoint,
    geodesic_position,
    geodesic_tangent,
    hermitian_random_field,
    kasner_from_u,
    leading_energy_coefficient,
    stress_energy,
    stress_trace,
)


@pytest.fixture(scope="module")
def p2():
    return kasner_from_u(2.0)


class TestExponents:
    def test_u2(self, p2):
        assert p2.as_array == pytest.approx([-2 / 7, 3 / 7, 6 / 7])
        assert p2.p1 + p2.p2 + p2.p3 == pytest.approx(1.0, abs=1e-14)
        assert p2.p1 ** 2 + p2.p2 ** 2 + p2.p3 ** 2 == pytest.approx(1.0, abs=1e-14)
        assert not p2.degenerate

    def test_u1_degenerate(self):
        p = kasner_from_u(1.0)
        assert p.as_array == pytest.approx([-1 / 3, 2 / 3, 2 / 3])
        assert p.degenerate

    def test_large_u_stays_nonflat(self):
        p = kasner_from_u(1e6)
        assert p.p3 < 1.0

    def test_invalid_rejected(self):
        with pytest.raises(ConfigError):
            kasner_from_u(0.5)
        with pytest.raises(ConfigError):
            KasnerExponents(0.2, 0.3, 0.5)    # sum of squares wrong
        with pytest.raises(ConfigError):
            KasnerExponents(0.0, 0.0, 1.0)    # flat


class TestMaxwellSystem:
    def test_limit_matrix_spectrum(self, p2):
        sys_ = build_maxwell_system(p2)
        a = np.block([[np.zeros((4, 4)), np.eye(4)],
                      [-sys_.zeta_inf, -sys_.alpha_inf]])
        eig = np.sort(np.linalg.eigvals(a).real)
        want = np.sort([0.0, -2.0] + [v for pi in p2.as_array
                                      for v in (-1 + pi, -1 - pi)])
        assert np.max(np.abs(eig - want)) <= 1e-12

    def test_display_eigenvector(self, p2):
        sys_ = build_maxwell_system(p2)
        a = np.block([[np.zeros((4, 4)), np.eye(4)],
                      [-sys_.zeta_inf, -sys_.alpha_inf]])
        v = np.zeros(8)
        v[1] = 1.0
        v[5] = -1.0 + p2.p1
        assert np.linalg.norm(a @ v - (-1.0 + p2.p1) * v) <= 1e-12

    def test_conditions_pass(self, p2):
        sys_ = build_maxwell_system(p2)
        report = silentpde.check_conditions(sys_)
        assert report.ok
        assert sys_.b_s == pytest.approx(1.0 - p2.p3)
        assert sys_.beta_rem == pytest.approx(1.0 - p2.p3)


def single_mode_state(p, iota, omega_vec, domega_vec, tau=0.0, n_max=2):
    om = ModeField.zeros(3, 4, n_max)
    dom = ModeField.zeros(3, 4, n_max)
    om.set(iota, omega_vec)
    dom.set(iota, domega_vec)
    return PotentialState(tau=tau, omega=om, domega=dom, p=p)


class TestConstraints:
    def test_constant_state_untouched(self, p2):
        state = single_mode_state(p2, (0, 0, 0), [0.3, 1.0, -0.5, 0.2],
                                  [0.0, 0.7, 0.1, -0.4])
        out = apply_constraints(state)
        assert np.allclose(out.omega.get((0, 0, 0)),
                           state.omega.get((0, 0, 0)))
        # only the d_tau omega_tau slot is pinned (to zero) for the zero mode
        assert out.domega.get((0, 0, 0))[0] == 0.0
        assert np.allclose(out.domega.get((0, 0, 0))[1:],
                           state.domega.get((0, 0, 0))[1:])

    def test_first_constraint_single_mode(self, p2):
        # mode (1,0,0) with omega_1 coefficient a at tau0 = 0:
        # d_tau omega_tau = i * a
        a = 0.8 - 0.3j
        state = single_mode_state(p2, (1, 0, 0), [0.0, a, 0.0, 0.0],
                                  [0.0, 0.0, 0.0, 0.0])
        out = apply_constraints(state)
        assert out.domega.get((1, 0, 0))[0] == pytest.approx(1j * a)

    def test_projection_property(self, p2):
        rng = np.random.default_rng(31)
        omega = hermitian_random_field(rng, 4, 2)
        domega = hermitian_random_field(rng, 4, 2)
        state = PotentialState(tau=0.0, omega=omega, domega=domega, p=p2)
        out = apply_constraints(state)
        res = constraint_residuals(out)
        scale = max(np.linalg.norm(v)
                    for v in out.omega.coeffs.values())
        worst = max(max(abs(a), abs(b)) for a, b in res.values())
        assert worst <= 1e-12 * max(scale, 1.0)

    def test_idempotent(self, p2):
        rng = np.random.default_rng(32)
        omega = hermitian_random_field(rng, 4, 1)
        domega = hermitian_random_field(rng, 4, 1)
        once = apply_constraints(PotentialState(tau=0.0, omega=omega,
                                                domega=domega, p=p2))
        twice = apply_constraints(once)
        for iota in once.domega.modes():
            assert np.allclose(twice.domega.get(iota), once.domega.get(iota),
                               atol=1e-13)


class TestDivOmega:
    def test_zero_state(self, p2):
        state = single_mode_state(p2, (1, 0, 0), np.zeros(4), np.zeros(4))
        dv = div_omega(state)
        assert all(abs(c[0]) == 0.0 for c in dv.coeffs.values())

    def test_constrained_state_divergence_free(self, p2):
        rng = np.random.default_rng(33)
        omega = hermitian_random_field(rng, 4, 1)
        domega = hermitian_random_field(rng, 4, 1)
        out = apply_constraints(PotentialState(tau=0.0, omega=omega,
                                               domega=domega, p=p2))
        dv = div_omega(out)
        assert max(abs(c[0]) for c in dv.coeffs.values()) <= 1e-12

    def test_violated_hand_value(self, p2):
        # omega_1 = a at mode (1,0,0), zero derivatives, tau = 0:
        # div = i * a
        a = 0.5 + 0.25j
        state = single_mode_state(p2, (1, 0, 0), [0.0, a, 0.0, 0.0],
                                  np.zeros(4))
        dv = div_omega(state)
        assert dv.get((1, 0, 0))[0] == pytest.approx(1j * a)


class TestFaraday:
    def test_pure_gauge_vanishes(self, p2):
        # omega = du for a static scalar u: F = 0 identically
        rng = np.random.default_rng(34)
        u = hermitian_random_field(rng, 1, 2, decay=2.0)
        tau0 = 0.3
        pa = p2.as_array
        om = ModeField.zeros(3, 4, 2)
        dom = ModeField.zeros(3, 4, 2)
        for n in u.modes():
            nv = np.asarray(n, dtype=float)
            grad = 1j * nv * u.get(n)[0]
            om.set(n, np.concatenate([[0.0], np.exp(-(1 - pa) * tau0) * grad]))
            dom.set(n, np.concatenate([[0.0],
                                       -(1 - pa) * np.exp(-(1 - pa) * tau0) * grad]))
        state = PotentialState(tau=tau0, omega=om, domega=dom, p=p2)
        assert np.max(np.abs(faraday(state, 8))) <= 1e-10

    def test_single_mode_hand_value(self, p2):
        # omega_1 with theta_2 dependence: F_12 = -d_2 omega_1 = -i n_2 omega_1
        a = 1.0 - 2.0j
        state = single_mode_state(p2, (0, 1, 0), [0.0, a, 0.0, 0.0],
                                  np.zeros(4))
        fm = faraday_modes(state)
        assert fm.get((0, 1, 0))[3] == pytest.approx(-1j * a)

    def test_antisymmetry_is_structural(self, p2):
        rng = np.random.default_rng(35)
        omega = hermitian_random_field(rng, 4, 1)
        domega = hermitian_random_field(rng, 4, 1)
        state = PotentialState(tau=0.2, omega=omega, domega=domega, p=p2)
        from wavetails.kasner import _faraday_matrix
        f6 = point_eval(faraday_modes(state), np.array([0.3, 1.0, 2.0])).real
        f = _faraday_matrix(f6)
        assert np.allclose(f, -f.T)


class TestStressEnergy:
    def test_zero_field(self, p2):
        t_ab = stress_energy(np.zeros(6), p2, 1.0)
        assert np.allclose(t_ab, 0.0)

    def test_pure_f23_closed_form(self, p2):
        c = 0.7
        tau = 2.0
        f6 = np.zeros(6)
        f6[5] = c
        t_ab = stress_energy(f6, p2, tau)
        want_tt = c ** 2 / (8 * np.pi) * np.exp((2 * (p2.p2 + p2.p3) - 2) * tau)
        assert t_ab[0, 0] == pytest.approx(want_tt, rel=1e-12)

    def test_against_index_contraction_oracle(self, p2):
        # fully explicit loop with the inverse metric, independent of einsum
        rng = np.random.default_rng(36)
        f6 = rng.standard_normal(6)
        tau = 0.7
        got = stress_energy(f6, p2, tau)

        f = np.zeros((4, 4))
        pairs = [(0, 1, 0), (0, 2, 1), (0, 3, 2), (1, 2, 3), (1, 3, 4), (2, 3, 5)]
        for a, b, i in pairs:
            f[a, b] = f6[i]
            f[b, a] = -f6[i]
        ginv = np.diag(np.concatenate([[-np.exp(2 * tau)],
                                       np.exp(2 * p2.as_array * tau)]))
        g = np.linalg.inv(ginv)
        fsq = 0.0
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        fsq += f[a, c] * ginv[a, b] * ginv[c, d] * f[b, d]
        want = np.zeros((4, 4))
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        want[a, b] += f[a, c] * ginv[c, d] * f[b, d]
                want[a, b] -= 0.25 * g[a, b] * fsq
        want /= 4 * np.pi
        assert np.allclose(got, want, atol=1e-12)

    def test_trace_vanishes(self, p2):
        rng = np.random.default_rng(37)
        for tau in (0.0, 1.5, 6.0):
            f6 = rng.standard_normal(6)
            t_ab = stress_energy(f6, p2, tau)
            scale = np.max(np.abs(t_ab))
            assert abs(stress_trace(t_ab, p2, tau)) <= 1e-10 * max(scale, 1e-30)


class TestGeodesics:
    def test_comoving(self, p2):
        geo = Geodesic(c=(0.0, 0.0, 0.0), x0=(1.0, 2.0, 3.0))
        v = geodesic_tangent(geo, p2, 0.5)
        assert np.allclose(v, [-1.0, 0.0, 0.0, 0.0])
        assert np.allclose(geodesic_position(geo, p2, 0.01), [1.0, 2.0, 3.0])
        assert np.allclose(geodesic_endpoint(geo, p2), [1.0, 2.0, 3.0])

    def test_unit_momentum_at_t1(self, p2):
        geo = Geodesic(c=(0.0, 0.0, 1.0), x0=(0.0, 0.0, 0.0))
        v = geodesic_tangent(geo, p2, 1.0)
        assert np.allclose(v, [-np.sqrt(2.0), 0.0, 0.0, 1.0])

    def test_unit_norm(self, p2):
        geo = Geodesic(c=(0.4, -1.2, 0.9), x0=(0.0, 0.0, 0.0))
        pa = p2.as_array
        for t in (1.0, 0.1, 0.01):
            v = geodesic_tangent(geo, p2, t)
            gdiag = np.concatenate([[-1.0], t ** (2 * pa)])
            assert np.sum(gdiag * v ** 2) == pytest.approx(-1.0, abs=1e-12)

    def test_endpoint_simpson_oracle(self, p2):
        geo = Geodesic(c=(0.0, 0.0, 1.0), x0=(0.0, 0.0, 0.0), t0=1.0)
        end = geodesic_endpoint(geo, p2)
        taus = np.linspace(0.0, 250.0, 1_000_001)
        integ = np.exp((2 * p2.p3 - 1.0) * taus) \
            / np.sqrt(1.0 + np.exp(2 * p2.p3 * taus))
        disp = simpson(integ, x=taus)
        want = np.mod(-disp, 2 * np.pi)
        assert end[2] == pytest.approx(want, abs=1e-8)
        assert end[0] == 0.0 and end[1] == 0.0

    def test_endpoint_convergence_bound(self, p2):
        geo = Geodesic(c=(0.7, -0.8, 1.1), x0=(0.0, 0.0, 0.0))
        pa = p2.as_array
        for t in (0.5, 0.1, 0.02):
            a = geodesic_position(geo, p2, t)
            b = geodesic_position(geo, p2, t / 2.0)
            diff = np.abs(np.angle(np.exp(1j * (a - b))))
            bound = (1.0 / (1.0 - pa)) * t ** (1.0 - pa)
            assert np.all(diff <= bound + 1e-12)


class TestLeadingCoefficient:
    def _lead(self, u1_const, curl_mode_amp=0.0):
        u1 = ModeField.zeros(3, 1, 1)
        u1.set((0, 0, 0), [u1_const * (2 * np.pi) ** 1.5])
        u2 = ModeField.zeros(3, 1, 1)
        u3 = ModeField.zeros(3, 1, 1)
        if curl_mode_amp:
            u3.set((0, 0, 0), [curl_mode_amp])
        from wavetails.kasner import LeadingData
        return LeadingData(u0=ModeField.zeros(3, 1, 1), u1=u1, u2=u2, u3=u3,
                           diagnostics={})

    def test_zero(self, p2):
        lead = self._lead(0.0)
        val = leading_energy_coefficient(lead, np.zeros(3), (0.0, 0.0, 1.0), p2)
        assert val == 0.0

    def test_u1_only(self, p2):
        # u1 = 1, c3 = 1, curl 0, delta 0: (1/4pi) * 4 p1^2 = 4 / (49 pi)
        lead = self._lead(1.0)
        val = leading_energy_coefficient(lead, np.zeros(3), (0.0, 0.0, 1.0), p2)
        assert val == pytest.approx(4.0 / (49.0 * np.pi), rel=1e-12)

    def test_cohomology_shift(self, p2):
        lead = self._lead(0.0)
        c_val = 0.9
        val = leading_energy_coefficient(lead, np.zeros(3), (0.0, 0.0, 1.0),
                                         p2, cohomology_c=c_val)
        assert val == pytest.approx(c_val ** 2 / (4.0 * np.pi), rel=1e-12)

    def test_degenerate_delta(self):
        p = kasner_from_u(1.0)
        lead = self._lead(1.0)
        with_c2 = leading_energy_coefficient(lead, np.zeros(3),
                                             (0.0, 1.0, 0.0), p)
        assert with_c2 == pytest.approx(4.0 * p.p1 ** 2 / (4.0 * np.pi),
                                        rel=1e-12)


class TestEnergyPipeline:
    def test_zero_field_below_floor(self, p2):
        sys_ = build_maxwell_system(p2)
        om = ModeField.zeros(3, 4, 1)
        om.set((0, 0, 0), [1.0, 0.0, 0.0, 0.0])   # constant omega_tau: F = 0
        dom = ModeField.zeros(3, 4, 1)
        traj = silentpde.solve(sys_, om, dom, np.linspace(0.0, 6.0, 7),
                               tol=1e-10)
        geo = Geodesic(c=(0.5, 0.5, 0.5), x0=(0.0, 0.0, 0.0))
        fit = energy_along_geodesic(traj, p2, geo,
                                    np.exp(-np.linspace(2.0, 6.0, 9)))
        assert fit.below_floor or max(abs(s.energy) for s in fit.samples) <= 1e-18

    def test_tau_t_consistency(self, p2):
        # evolving in tau and converting to t agrees with the direct formulas
        for t in (1.0, 0.2, 0.001):
            tau = -np.log(t)
            assert np.exp(-tau) == pytest.approx(t, rel=1e-10)
            assert np.exp(-2.0 * p2.p2 * tau) == pytest.approx(
                t ** (2.0 * p2.p2), rel=1e-10)
