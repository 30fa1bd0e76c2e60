"""Torus Fourier layer: mode indexing, transforms, Sobolev norms.

Functions on the d-torus [0, 2pi)^d are expanded in the orthonormal basis
``phi_n(x) = (2pi)^{-d/2} exp(i n.x)`` with ``n`` an integer vector, so a
coefficient is the inner product ``<u, phi_n> = int u conj(phi_n) dx``.  A
:class:`ModeField` stores the coefficients of a vector-valued function up to
a hard band limit ``n_max`` per axis; all PDE statements in this package are
interpreted on the truncated mode set.

The Sobolev norm of order ``s`` is ``(sum <nu>^{2s} |u_hat|^2)^{1/2}`` with
the Japanese bracket ``<nu> = (1 + |nu|^2)^{1/2}``.

Transforms use the FFT; grids must be uniform on [0, 2pi)^d with at least
``2 n_max + 1`` points per axis, otherwise coefficients would alias.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from wavetails.errors import ConfigError, WavetailsError

__all__ = [
    "ModeField",
    "AliasingError",
    "analyze",
    "synthesize",
    "point_eval",
    "sobolev_norm",
    "deriv",
    "mode_indices",
    "grid_points",
    "field_to_csv",
    "field_from_csv",
    "grid_to_csv",
    "grid_from_csv",
]


class AliasingError(WavetailsError):
    """Grid too coarse for the requested band limit."""


def mode_indices(d, n_max):
    """All integer vectors of length d with entries in [-n_max, n_max]."""
    ranges = [range(-n_max, n_max + 1)] * d
    out = []

    def rec(prefix, rest):
        if not rest:
            out.append(tuple(prefix))
            return
        for v in rest[0]:
            rec(prefix + [v], rest[1:])

    rec([], ranges)
    return out


def grid_points(d, points_per_axis):
    """Uniform grid on [0, 2pi)^d, shape (p,)*d + (d,)."""
    axis = np.linspace(0.0, 2.0 * np.pi, points_per_axis, endpoint=False)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack(mesh, axis=-1)


@dataclass
class ModeField:
    """Band-limited mode coefficients of a C^m-valued function on T^d."""

    d: int
    m_comp: int
    n_max: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        for n, c in self.coeffs.items():
            self._check_mode(n)
            c = np.asarray(c, dtype=complex)
            if c.shape != (self.m_comp,):
                raise ValueError(f"coefficient for {n} has shape {c.shape}")
            if not np.all(np.isfinite(c)):
                raise ValueError(f"non-finite coefficient for mode {n}")
            self.coeffs[n] = c

    def _check_mode(self, n):
        if len(n) != self.d:
            raise ValueError(f"mode {n} has wrong dimension (expected {self.d})")
        if any(abs(nj) > self.n_max for nj in n):
            raise ValueError(f"mode {n} outside truncation n_max={self.n_max}")

    @classmethod
    def zeros(cls, d, m_comp, n_max):
        return cls(d=d, m_comp=m_comp, n_max=n_max, coeffs={})

    def get(self, n):
        n = tuple(int(v) for v in n)
        c = self.coeffs.get(n)
        if c is None:
            return np.zeros(self.m_comp, dtype=complex)
        return c

    def set(self, n, value):
        n = tuple(int(v) for v in n)
        self._check_mode(n)
        value = np.asarray(value, dtype=complex)
        if value.shape != (self.m_comp,):
            raise ValueError(f"coefficient must have shape ({self.m_comp},)")
        self.coeffs[n] = value

    def modes(self):
        """Stored mode indices in deterministic (sorted) order."""
        return sorted(self.coeffs.keys())

    def copy(self):
        return ModeField(self.d, self.m_comp, self.n_max,
                         {n: c.copy() for n, c in self.coeffs.items()})

    def map(self, fn):
        """New field with fn applied to every stored coefficient vector."""
        return ModeField(self.d, self.m_comp, self.n_max,
                         {n: np.asarray(fn(n, c), dtype=complex)
                          for n, c in self.coeffs.items()})

    def component(self, j):
        """Scalar field holding component j of every coefficient."""
        return ModeField(self.d, 1, self.n_max,
                         {n: c[j:j + 1].copy() for n, c in self.coeffs.items()})

    def __add__(self, other):
        if (self.d, self.m_comp, self.n_max) != (other.d, other.m_comp, other.n_max):
            raise ValueError("incompatible fields")
        out = self.copy()
        for n, c in other.coeffs.items():
            out.coeffs[n] = out.coeffs.get(n, 0) + c
        return out

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return ModeField(self.d, self.m_comp, self.n_max,
                         {n: scalar * c for n, c in self.coeffs.items()})

    def prune(self, tol=0.0):
        """Drop coefficients with max-norm <= tol."""
        self.coeffs = {n: c for n, c in self.coeffs.items()
                       if np.max(np.abs(c)) > tol}
        return self


def analyze(samples, n_max, d=None):
    """Mode coefficients of grid samples.

    ``samples`` has shape (p1, ..., pd) for scalar data or
    (p1, ..., pd, m) for m components; each axis needs at least
    ``2 n_max + 1`` points.
    """
    samples = np.asarray(samples, dtype=complex)
    if d is None:
        # heuristic: trailing axis is components only when explicitly 2+ dims
        d = samples.ndim if samples.ndim <= 1 else samples.ndim - 1
    if samples.ndim == d:
        samples = samples[..., None]
    if samples.ndim != d + 1:
        raise ValueError("samples shape does not match dimension")
    m = samples.shape[-1]
    sizes = samples.shape[:-1]
    for p in sizes:
        if p < 2 * n_max + 1:
            raise AliasingError(
                f"grid with {p} points per axis cannot resolve n_max={n_max}"
            )
    fhat = np.fft.fftn(samples, axes=tuple(range(d)))
    scale = (2.0 * np.pi) ** (d / 2.0) / np.prod(sizes)
    out = ModeField.zeros(d, m, n_max)
    for n in mode_indices(d, n_max):
        idx = tuple(nj % p for nj, p in zip(n, sizes))
        out.coeffs[n] = scale * fhat[idx]
    return out


def synthesize(f, points_per_axis):
    """Grid samples of a mode field on a uniform grid."""
    if points_per_axis < 2 * f.n_max + 1:
        raise AliasingError(
            f"grid with {points_per_axis} points per axis cannot carry n_max={f.n_max}"
        )
    sizes = (points_per_axis,) * f.d
    spec = np.zeros(sizes + (f.m_comp,), dtype=complex)
    for n, c in f.coeffs.items():
        idx = tuple(nj % points_per_axis for nj in n)
        spec[idx] = c
    grid = np.fft.ifftn(spec, axes=tuple(range(f.d)))
    scale = np.prod(sizes) * (2.0 * np.pi) ** (-f.d / 2.0)
    return grid * scale


def point_eval(f, x):
    """Evaluate the mode expansion at one point or an array of points.

    ``x`` has shape (d,) or (..., d); the result appends an m-component axis.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    modes = f.modes()
    if not modes:
        out = np.zeros(x.shape[:-1] + (f.m_comp,), dtype=complex)
        return out[0] if out.shape[0] == 1 and x.ndim == 2 else out
    nmat = np.array(modes, dtype=float)              # (M, d)
    cmat = np.array([f.coeffs[n] for n in modes])    # (M, m)
    phase = np.exp(1j * (x @ nmat.T))                # (..., M)
    vals = phase @ cmat * (2.0 * np.pi) ** (-f.d / 2.0)
    return vals[0] if vals.shape[0] == 1 and x.ndim == 2 else vals


def sobolev_norm(f, s):
    """(sum <nu>^{2s} |u_hat|^2)^{1/2} over all stored modes and components."""
    total = 0.0
    for n, c in f.coeffs.items():
        bracket = 1.0 + float(np.dot(n, n))
        total += bracket ** s * float(np.sum(np.abs(c) ** 2))
    return float(np.sqrt(total))


def deriv(f, axis):
    """Partial derivative along a torus axis (multiplication by i n_axis)."""
    if not 0 <= axis < f.d:
        raise ValueError(f"axis {axis} out of range for d={f.d}")
    return f.map(lambda n, c: 1j * n[axis] * c)


# ---------------------------------------------------------------------------
# CSV import/export


def field_to_csv(f, path, metadata=""):
    """Mode-coefficient CSV: one row per (mode, component) with re/im parts."""
    with open(path, "w", newline="") as fh:
        if metadata:
            fh.write(f"# {metadata}\n")
        writer = csv.writer(fh)
        writer.writerow([f"n{j}" for j in range(f.d)] + ["component", "re", "im"])
        for n in f.modes():
            c = f.coeffs[n]
            for j in range(f.m_comp):
                writer.writerow(list(n) + [j, repr(float(c[j].real)), repr(float(c[j].imag))])


def field_from_csv(path, d, m_comp, n_max):
    """Inverse of :func:`field_to_csv`."""
    out = ModeField.zeros(d, m_comp, n_max)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    if not rows:
        raise ConfigError(f"empty mode CSV {path}")
    header, rows = rows[0], rows[1:]
    if len(header) != d + 3:
        raise ConfigError(f"mode CSV {path} has {len(header)} columns, expected {d + 3}")
    for row in rows:
        n = tuple(int(v) for v in row[:d])
        j = int(row[d])
        val = complex(float(row[d + 1]), float(row[d + 2]))
        if n not in out.coeffs:
            out.coeffs[n] = np.zeros(m_comp, dtype=complex)
        out.coeffs[n][j] = val
    return out


def grid_to_csv(samples, path, metadata=""):
    """Grid CSV: one row per (grid index, component) with re/im parts."""
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim < 2:
        samples = samples[..., None]
    d = samples.ndim - 1
    with open(path, "w", newline="") as fh:
        if metadata:
            fh.write(f"# {metadata}\n")
        writer = csv.writer(fh)
        writer.writerow([f"i{j}" for j in range(d)] + ["component", "re", "im"])
        for idx in np.ndindex(samples.shape[:-1]):
            for j in range(samples.shape[-1]):
                v = samples[idx + (j,)]
                writer.writerow(list(idx) + [j, repr(float(v.real)), repr(float(v.imag))])


def grid_from_csv(path):
    """Inverse of :func:`grid_to_csv`; returns a complex array."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    if not rows:
        raise ConfigError(f"empty grid CSV {path}")
    header, rows = rows[0], rows[1:]
    d = len(header) - 3
    if d < 1:
        raise ConfigError(f"grid CSV {path} malformed header")
    sizes = [0] * d
    m = 0
    for row in rows:
        for j in range(d):
            sizes[j] = max(sizes[j], int(row[j]) + 1)
        m = max(m, int(row[d]) + 1)
    out = np.zeros(tuple(sizes) + (m,), dtype=complex)
    for row in rows:
        idx = tuple(int(v) for v in row[:d])
        j = int(row[d])
        out[idx + (j,)] = complex(float(row[d + 1]), float(row[d + 2]))
    return out
