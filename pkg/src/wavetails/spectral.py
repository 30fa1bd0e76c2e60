"""Dense linear algebra for the limiting coefficient matrix.

Given a square matrix ``A`` and a decay rate ``beta > 0``, the complex plane
of eigenvalue real parts is cut into half-open bands

    (kappa_1 - n*beta,  kappa_1 - (n-1)*beta],      n = 1, ..., N,

where ``kappa_1`` is the largest real part and ``N`` is the smallest integer
with ``kappa_max - kappa_min < N*beta``.  The direct sum of generalized
eigenspaces whose eigenvalue real parts fall in band ``n`` is the n-th graded
subspace; the whole space is their direct sum.  The decomposition stores a
transform ``T`` whose columns span the subspaces in order, the real part
``J = Re(T^-1 A T) - kappa_1 I`` (block diagonal, generalized Jordan blocks
with off-diagonal ``eps``), and the imaginary diagonal, so that

    exp(A t) = exp(kappa_1 t) * T * diag(exp(i Im(lam) t)) * exp(J t) * T^-1.

Numerical Jordan chains are ill-conditioned, so matrices are decomposed by a
plain eigendecomposition; if the eigenvector matrix condition number exceeds
``COND_LIMIT`` the caller must supply the Jordan structure explicitly
(block sizes plus generalized eigenvector chains).  Supported sizes are
small (k <= 64); everything is dense.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from wavetails.errors import NumericalError

__all__ = [
    "SpectralDecomposition",
    "DefectiveMatrixError",
    "RangeError",
    "decompose",
    "project",
    "expm",
    "block_index",
]

COND_LIMIT = 1e8
SNAP_TOL = 1e-10
RECON_RTOL = 1e-10
EXP_OVERFLOW = 700.0


class DefectiveMatrixError(NumericalError):
    """Raised when a matrix is numerically defective and no Jordan data was given."""


class RangeError(NumericalError):
    """Raised when a matrix exponential would overflow double precision."""


def block_index(re_lambda, kappa1, beta, snap_tol=SNAP_TOL):
    """Band index n >= 1 for an eigenvalue real part.

    Exact band boundaries kappa_1 - q*beta belong to band q+1 (the bands are
    half-open on the left); real parts within ``snap_tol`` of a boundary are
    snapped onto it, which resolves them to the higher index.
    """
    r = (kappa1 - re_lambda) / beta
    q = round(r)
    if abs(re_lambda - (kappa1 - q * beta)) <= snap_tol:
        return int(q) + 1
    return int(np.ceil(r))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Graded eigenstructure of a matrix at a given decay rate."""

    matrix: np.ndarray
    beta: float
    kappa_max: float
    kappa_min: float
    n_blocks: int
    block_sizes: tuple
    eigenvalues: np.ndarray       # ordered to match the columns of transform
    transform: np.ndarray         # T: columns span the graded subspaces in order
    inverse_transform: np.ndarray
    j_real: np.ndarray            # Re(T^-1 A T) - kappa_max I, block diagonal, real
    imag_diag: np.ndarray         # Im(eigenvalues), ordered like the columns
    epsilon: float

    @property
    def k(self):
        return self.matrix.shape[0]

    @cached_property
    def block_slices(self):
        slices = []
        start = 0
        for size in self.block_sizes:
            slices.append(slice(start, start + size))
            start += size
        return tuple(slices)

    @cached_property
    def _j_block_diagonal(self):
        # per block: True when the J block is diagonal (no Jordan chains)
        flags = []
        for sl in self.block_slices:
            blk = self.j_real[sl, sl]
            flags.append(not np.any(blk - np.diag(np.diag(blk))))
        return tuple(flags)

    def project(self, n, v):
        """Projection of ``v`` onto the n-th graded subspace along the others."""
        if not 1 <= n <= self.n_blocks:
            raise IndexError(f"block index {n} out of range 1..{self.n_blocks}")
        v = np.asarray(v, dtype=complex)
        y = self.inverse_transform @ v
        z = np.zeros_like(y)
        sl = self.block_slices[n - 1]
        z[sl] = y[sl]
        return self.transform @ z

    def block_exp(self, n, t):
        """exp(J_n t) for the n-th diagonal block of ``j_real``."""
        sl = self.block_slices[n - 1]
        blk = self.j_real[sl, sl]
        if self._j_block_diagonal[n - 1]:
            return np.diag(np.exp(np.diag(blk) * t))
        return scipy.linalg.expm(blk * t)

    def exp_j(self, t):
        """exp(J t), assembled blockwise."""
        out = np.zeros_like(self.j_real)
        for n, sl in enumerate(self.block_slices, start=1):
            if sl.stop > sl.start:
                out[sl, sl] = self.block_exp(n, t)
        return out

    def rotation_inv(self, t):
        """Diagonal of R(t)^-1 = exp(i Im(lam) t); unit modulus."""
        return np.exp(1j * self.imag_diag * t)

    def expm(self, t):
        """exp(A t) through the decomposition formula."""
        if self.kappa_max * t > EXP_OVERFLOW:
            raise RangeError(f"exp({self.kappa_max * t:.3g}) overflows")
        core = self.rotation_inv(t)[:, None] * self.exp_j(t)
        return np.exp(self.kappa_max * t) * (self.transform @ core @ self.inverse_transform)

    def expm_apply(self, t, v):
        """exp(A t) @ v without forming the full exponential."""
        if self.kappa_max * t > EXP_OVERFLOW:
            raise RangeError(f"exp({self.kappa_max * t:.3g}) overflows")
        y = self.inverse_transform @ np.asarray(v, dtype=complex)
        y = self.exp_j(t) @ y
        y = self.rotation_inv(t) * y
        return np.exp(self.kappa_max * t) * (self.transform @ y)


def _chains_from_eig(a, cond_limit):
    w, v = np.linalg.eig(a)
    cond = np.linalg.cond(v)
    if cond > cond_limit:
        raise DefectiveMatrixError(
            f"eigenvector matrix condition number {cond:.3g} exceeds {cond_limit:.1g}; "
            "the matrix is treated as defective -- supply the Jordan structure "
            "(block sizes and generalized eigenvector chains) explicitly"
        )
    return [(w[i], [v[:, i]]) for i in range(len(w))]


def _validate_chains(a, chains):
    scale = max(np.linalg.norm(a), 1.0)
    for lam, vecs in chains:
        prev = None
        for vec in vecs:
            vec = np.asarray(vec, dtype=complex)
            resid = (a - lam * np.eye(a.shape[0])) @ vec
            target = np.zeros_like(vec) if prev is None else prev
            if np.linalg.norm(resid - target) > 1e-8 * scale * max(np.linalg.norm(vec), 1.0):
                raise NumericalError(
                    f"supplied Jordan chain for eigenvalue {lam} is inconsistent "
                    "with the matrix"
                )
            prev = vec


def decompose(a, beta, eps=None, jordan=None, cond_limit=COND_LIMIT):
    """Build the graded decomposition of ``a`` at rate ``beta``.

    ``jordan``, when given, is a list of ``(eigenvalue, [v1, v2, ...])``
    chains with ``(A - lam) v1 = 0`` and ``(A - lam) v_{j+1} = v_j``; it is
    required for numerically defective matrices.  ``eps`` scales the
    off-diagonal entries of nontrivial Jordan blocks; the default
    ``min(0.5, |most negative shifted eigenvalue| / 2)`` keeps blocks with
    negative eigenvalues negative definite.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if not beta > 0:
        raise ValueError("beta must be positive")
    k = a.shape[0]

    if jordan is None:
        chains = _chains_from_eig(a, cond_limit)
    else:
        chains = [(complex(lam), [np.asarray(v, dtype=complex) for v in vecs])
                  for lam, vecs in jordan]
        _validate_chains(a, chains)
        total = sum(len(vecs) for _, vecs in chains)
        if total != k:
            raise ValueError(f"Jordan chains cover {total} of {k} dimensions")

    kappa_max = max(lam.real for lam, _ in chains)
    kappa_min = min(lam.real for lam, _ in chains)
    n_blocks = block_index(kappa_min, kappa_max, beta)

    if eps is None:
        jmin = kappa_min - kappa_max
        eps = 0.5 if jmin == 0.0 else min(0.5, abs(jmin) / 2.0)
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")

    # stable deterministic ordering: band, then descending Re, then Im
    def sort_key(chain):
        lam, _ = chain
        return (block_index(lam.real, kappa_max, beta), -lam.real, lam.imag)

    chains = sorted(chains, key=sort_key)

    block_sizes = [0] * n_blocks
    cols = []
    eigs = []
    j_real = np.zeros((k, k))
    pos = 0
    for lam, vecs in chains:
        n = block_index(lam.real, kappa_max, beta)
        if n > n_blocks:
            raise NumericalError(
                f"eigenvalue {lam} falls outside the graded bands; "
                "check beta or the snap tolerance"
            )
        block_sizes[n - 1] += len(vecs)
        r = len(vecs)
        for j, vec in enumerate(vecs):
            cols.append((eps ** j) * vec)
            eigs.append(lam)
        j_real[pos:pos + r, pos:pos + r] = (lam.real - kappa_max) * np.eye(r)
        for j in range(r - 1):
            j_real[pos + j, pos + j + 1] = eps
        pos += r

    transform = np.column_stack(cols)
    inverse = np.linalg.inv(transform)
    eigenvalues = np.array(eigs)
    imag_diag = eigenvalues.imag.copy()

    dec = SpectralDecomposition(
        matrix=a,
        beta=float(beta),
        kappa_max=float(kappa_max),
        kappa_min=float(kappa_min),
        n_blocks=n_blocks,
        block_sizes=tuple(block_sizes),
        eigenvalues=eigenvalues,
        transform=transform,
        inverse_transform=inverse,
        j_real=j_real,
        imag_diag=imag_diag,
        epsilon=float(eps),
    )
    try:
        _verify(dec)
    except NumericalError as exc:
        if jordan is None:
            # a reconstruction failure below the condition threshold still
            # signals near-defectiveness
            raise DefectiveMatrixError(
                f"eigendecomposition failed verification ({exc}); the matrix "
                "is near-defective -- supply the Jordan structure (block "
                "sizes and generalized eigenvector chains) explicitly"
            ) from exc
        raise
    return dec


def _verify(dec):
    a = dec.matrix
    recon = dec.transform @ (
        np.diag(1j * dec.imag_diag) + dec.j_real + dec.kappa_max * np.eye(dec.k)
    ) @ dec.inverse_transform
    scale = max(np.linalg.norm(a), 1.0)
    err = np.linalg.norm(recon - a) / scale
    if err > RECON_RTOL:
        raise NumericalError(
            f"decomposition reconstruction error {err:.3g} exceeds {RECON_RTOL:.1g}"
        )
    # blocks whose eigenvalues are all strictly negative (after the kappa_1
    # shift) must be negative definite
    for n, sl in enumerate(dec.block_slices, start=1):
        if sl.stop == sl.start:
            continue
        blk = dec.j_real[sl, sl]
        diag = np.diag(blk)
        if np.all(diag < 0):
            sym = 0.5 * (blk + blk.T)
            top = np.linalg.eigvalsh(sym)[-1]
            if top >= 0:
                raise NumericalError(
                    f"block {n} is not negative definite; decrease eps"
                )


def project(dec, n, v):
    """Module-level alias for :meth:`SpectralDecomposition.project`."""
    return dec.project(n, v)


def expm(a, t=1.0, cond_limit=COND_LIMIT):
    """Matrix exponential exp(A t).

    Uses an eigendecomposition when the matrix is numerically diagonalizable
    and falls back to scaling-and-squaring Pade otherwise.  Raises
    :class:`RangeError` when the dominant growth rate would overflow.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    w = np.linalg.eigvals(a)
    kappa1 = float(np.max(w.real))
    if kappa1 * t > EXP_OVERFLOW:
        raise RangeError(f"exp({kappa1 * t:.3g}) overflows double precision")
    w, v = np.linalg.eig(a)
    if np.linalg.cond(v) <= cond_limit:
        return (v * np.exp(w * t)) @ np.linalg.inv(v)
    return scipy.linalg.expm(a * t)
