import numpy as np
import pytest

from wavetails import kasner
from wavetails.spectral import (
    DefectiveMatrixError,
    RangeError,
    block_index,
    decompose,
    expm,
)

EXAMPLE = np.array([[0.0, 1.0], [0.0, -1.0]])


class TestDecompose:
    def test_example_matrix(self):
        dec = decompose(EXAMPLE, 1.0)
        assert dec.kappa_max == 0.0
        assert dec.kappa_min == -1.0
        assert dec.n_blocks == 2
        assert dec.block_sizes == (1, 1)
        # E^1 = span (1, 0), E^2 = span (1, -1)
        e1 = dec.transform[:, 0]
        e2 = dec.transform[:, 1]
        assert abs(e1[1]) < 1e-14
        assert abs(e2[0] + e2[1]) < 1e-14

    def test_identity_single_block(self):
        dec = decompose(np.eye(3), 0.5)
        assert dec.n_blocks == 1
        assert dec.block_sizes == (3,)

    def test_kasner_grading(self):
        p = kasner.kasner_from_u(2.0)
        sys_ = kasner.build_maxwell_system(p)
        a = np.block([[np.zeros((4, 4)), np.eye(4)],
                      [-sys_.zeta_inf, -sys_.alpha_inf]])
        dec = decompose(a, 1.0 - p.p3)
        assert dec.kappa_max == pytest.approx(0.0, abs=1e-12)
        assert dec.kappa_min == pytest.approx(-2.0, abs=1e-12)
        assert dec.n_blocks == 15
        assert sum(dec.block_sizes) == 8
        # every eigenvalue sits exactly on a band boundary q/7 -> band q+1
        occupied = [n + 1 for n, size in enumerate(dec.block_sizes) if size]
        assert occupied == [1, 2, 5, 6, 10, 11, 14, 15]

    def test_reconstruction_invariant(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            dec = decompose(a, 0.7)
            recon = dec.transform @ (
                np.diag(1j * dec.imag_diag) + dec.j_real
                + dec.kappa_max * np.eye(4)) @ dec.inverse_transform
            assert np.linalg.norm(recon - a) <= 1e-10 * np.linalg.norm(a)

    def test_band_membership(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((5, 5))
        beta = 0.6
        dec = decompose(a, beta)
        for lam, n in zip(dec.eigenvalues,
                          np.repeat(range(1, dec.n_blocks + 1), dec.block_sizes)):
            lo = dec.kappa_max - n * beta
            hi = dec.kappa_max - (n - 1) * beta
            assert lo - 1e-9 < lam.real <= hi + 1e-9

    def test_defective_requires_jordan(self):
        jordan_block = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(DefectiveMatrixError, match="Jordan structure"):
            decompose(jordan_block, 1.0)

    def test_jordan_override_and_eps_rescaling(self):
        jordan_block = np.array([[-1.0, 1.0], [0.0, -1.0]])
        chains = [(-1.0, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])]
        dec = decompose(jordan_block, 1.0, eps=0.25, jordan=chains)
        # the rescaled block has off-diagonal entries equal to eps
        assert dec.j_real[0, 1] == pytest.approx(0.25)
        assert dec.block_sizes == (2,)
        recon = dec.expm(1.0)
        assert np.allclose(recon, expm(jordan_block, 1.0), atol=1e-12)

    def test_negative_blocks_negative_definite(self):
        # eigenvalue 0 in band 1, a defective eigenvalue -1 in band 2; the
        # shifted lower block must come out negative definite at default eps
        a = np.zeros((3, 3))
        a[1:, 1:] = np.array([[-1.0, 1.0], [0.0, -1.0]])
        chains = [(0.0, [np.array([1.0, 0.0, 0.0])]),
                  (-1.0, [np.array([0.0, 1.0, 0.0]),
                          np.array([0.0, 0.0, 1.0])])]
        dec = decompose(a, 0.6, jordan=chains)
        assert dec.block_sizes == (1, 2)
        blk = dec.j_real[1:, 1:]
        sym = 0.5 * (blk + blk.T)
        assert np.linalg.eigvalsh(sym)[-1] < 0


class TestProject:
    def test_example_projections(self):
        dec = decompose(EXAMPLE, 1.0)
        v = np.array([2.0, 3.0])
        assert np.allclose(dec.project(1, v), [5.0, 0.0], atol=1e-12)
        assert np.allclose(dec.project(2, v), [-3.0, 3.0], atol=1e-12)

    def test_projections_sum_to_identity(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        dec = decompose(a, 0.9)
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        total = sum(dec.project(n, v) for n in range(1, dec.n_blocks + 1))
        assert np.linalg.norm(total - v) <= 1e-12 * np.linalg.norm(v)

    def test_zero_vector(self):
        dec = decompose(EXAMPLE, 1.0)
        for n in (1, 2):
            assert np.allclose(dec.project(n, np.zeros(2)), 0.0)

    def test_eigenvector_containment(self):
        a = np.diag([0.0, -1.0, -2.0])
        dec = decompose(a, 1.0)
        e2 = np.array([0.0, 1.0, 0.0])
        assert np.allclose(dec.project(2, e2), e2, atol=1e-13)
        assert np.allclose(dec.project(1, e2), 0.0, atol=1e-13)

    def test_out_of_range(self):
        dec = decompose(EXAMPLE, 1.0)
        with pytest.raises(IndexError):
            dec.project(3, np.zeros(2))
        with pytest.raises(IndexError):
            dec.project(0, np.zeros(2))


def _series_expm(a, t, terms=60):
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ (a * t) / k
        out = out + term
    return out


class TestExpm:
    def test_zero_matrix(self):
        assert np.allclose(expm(np.zeros((3, 3)), 2.0), np.eye(3))

    def test_example_closed_form(self):
        t = 0.5
        got = expm(EXAMPLE, t)
        want = np.array([[1.0, 1.0 - np.exp(-t)], [0.0, np.exp(-t)]])
        assert np.allclose(got, want, atol=1e-13)
        assert np.allclose(got, _series_expm(EXAMPLE, t), atol=1e-13)

    def test_diagonal(self):
        a = np.diag([0.3, -0.7])
        got = expm(a, 2.0)
        assert np.allclose(np.diag(got), np.exp(np.diag(a) * 2.0), rtol=1e-13)

    def test_overflow_guard(self):
        with pytest.raises(RangeError):
            expm(np.eye(2), 800.0)

    def test_semigroup(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            a = rng.standard_normal((4, 4))
            a *= 2.0 / max(np.linalg.norm(a, 2), 1e-9)
            s, t = rng.uniform(0.0, 5.0, size=2)
            lhs = expm(a, s + t)
            rhs = expm(a, s) @ expm(a, t)
            assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(np.linalg.norm(lhs), 1.0)

    def test_decomposition_formula_matches(self):
        rng = np.random.default_rng(23)
        a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        dec = decompose(a, 1.1)
        for t in (0.0, 0.3, 2.0):
            assert np.allclose(dec.expm(t), expm(a, t), atol=1e-10)

    def test_rotation_commutes_with_j(self):
        # complex defective matrix via a supplied chain: R is scalar per block
        a = np.array([[1j, 1.0], [0.0, 1j]])
        chains = [(1j, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])]
        dec = decompose(a, 1.0, jordan=chains)
        for t in (0.5, 3.0):
            r = np.diag(np.exp(-1j * dec.imag_diag * t))
            comm = r @ dec.j_real - dec.j_real @ r
            assert np.linalg.norm(comm) <= 1e-12

    def test_graded_flow_structure(self):
        # on the example matrix: the E^1 part is stationary, E^2 decays e^-t
        dec = decompose(EXAMPLE, 1.0)
        v = np.array([0.4, -1.3])
        p1 = dec.project(1, v)
        p2 = dec.project(2, v)
        for t in (1.0, 4.0, 9.0):
            flow1 = dec.expm_apply(t, p1)
            assert np.allclose(flow1, p1, atol=1e-12)
            flow2 = dec.expm_apply(t, p2)
            assert np.linalg.norm(flow2) == pytest.approx(
                np.exp(-t) * np.linalg.norm(p2), rel=1e-10)


class TestBlockIndex:
    def test_boundaries_snap_high(self):
        assert block_index(0.0, 0.0, 1.0) == 1
        assert block_index(-1.0, 0.0, 1.0) == 2
        assert block_index(-1.0 + 5e-11, 0.0, 1.0) == 2
        assert block_index(-1.0 - 5e-11, 0.0, 1.0) == 2

    def test_interior(self):
        assert block_index(-0.5, 0.0, 1.0) == 1
        assert block_index(-1.5, 0.0, 1.0) == 2
