"""C1-conforming Hermite cubic discretization of the clamped operator.

Each of the E uniform elements carries four degrees of freedom, the value
and slope at its two end nodes, so the global vector interleaves
(u_0, u'_0, u_1, u'_1, ...).  The clamped constraints u = u' = 0 at both
ends are imposed by eliminating the four boundary dofs.

Stiffness and mass are assembled with a fixed 4-point Gauss rule per
element, which integrates every constant-coefficient entry exactly
(element integrands are at most degree six) and is adequate for smooth
variable coefficients.  Both matrices are stored in symmetric lower-band
form with half-bandwidth 3, so the memory cost is linear in E; dense
copies are materialized only where the eigensolver needs them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import blas as _blas

from .coefficients import CoefficientProfile

MIN_ELEMENTS = 8
HALF_BANDWIDTH = 3
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)
_XI = (_GAUSS_X + 1.0) / 2.0
_WREF = _GAUSS_W / 2.0


def hermite_shapes(xi, h):
    """Value, slope and curvature of the four cubic shape functions.

    ``xi`` is the local coordinate in [0, 1] on an element of width h.
    Rows follow the dof order (value left, slope left, value right,
    slope right); derivative rows carry the 1/h, 1/h^2 mapping factors.
    """
    xi = np.asarray(xi, dtype=float)
    N = np.stack([
        1 - 3 * xi**2 + 2 * xi**3,
        h * (xi - 2 * xi**2 + xi**3),
        3 * xi**2 - 2 * xi**3,
        h * (xi**3 - xi**2),
    ], axis=-1)
    dN = np.stack([
        (-6 * xi + 6 * xi**2) / h,
        1 - 4 * xi + 3 * xi**2,
        (6 * xi - 6 * xi**2) / h,
        3 * xi**2 - 2 * xi,
    ], axis=-1)
    d2N = np.stack([
        (-6 + 12 * xi) / h**2,
        (-4 + 6 * xi) / h,
        (6 - 12 * xi) / h**2,
        (6 * xi - 2) / h,
    ], axis=-1)
    return N, dN, d2N


def band_to_dense(band):
    """Expand symmetric lower-band storage band[i, j] = A[j+i, j] to dense."""
    n = band.shape[1]
    out = np.zeros((n, n))
    for i in range(band.shape[0]):
        idx = np.arange(n - i)
        out[idx + i, idx] = band[i, : n - i]
        if i:
            out[idx, idx + i] = band[i, : n - i]
    return out


def band_submatrix(band, lo, hi):
    """Principal submatrix rows/cols [lo, hi) of a symmetric band matrix."""
    out = band[:, lo:hi].copy()
    n = hi - lo
    for i in range(1, band.shape[0]):
        out[i, max(n - i, 0):] = 0.0
    return out


def band_matvec(band, x):
    """Symmetric banded matrix times vector; complex vectors split in parts."""
    k = band.shape[0] - 1
    x = np.asarray(x)
    if np.iscomplexobj(x):
        re = _blas.dsbmv(k, 1.0, band, np.ascontiguousarray(x.real), lower=1)
        im = _blas.dsbmv(k, 1.0, band, np.ascontiguousarray(x.imag), lower=1)
        return re + 1j * im
    return _blas.dsbmv(k, 1.0, band, np.ascontiguousarray(x, dtype=float), lower=1)


@dataclass(frozen=True)
class DiscreteOperator:
    """Assembled stiffness/mass pencil plus the right-end curvature trace."""

    profile: CoefficientProfile
    n_elements: int
    h: float
    kband: np.ndarray = field(repr=False)   # full dofs, symmetric lower band
    mband: np.ndarray = field(repr=False)

    @property
    def n_dof_full(self):
        return 2 * (self.n_elements + 1)

    @property
    def n_dof(self):
        """Dimension after eliminating the four clamped boundary dofs."""
        return self.n_dof_full - 4

    @property
    def nodes(self):
        return np.linspace(0.0, self.profile.length, self.n_elements + 1)

    def constrained_bands(self):
        lo, hi = 2, self.n_dof_full - 2
        return (band_submatrix(self.kband, lo, hi),
                band_submatrix(self.mband, lo, hi))

    def stiffness_dense(self, constrained=True):
        if constrained:
            return band_to_dense(self.constrained_bands()[0])
        return band_to_dense(self.kband)

    def mass_dense(self, constrained=True):
        if constrained:
            return band_to_dense(self.constrained_bands()[1])
        return band_to_dense(self.mband)

    def expand(self, u):
        """Zero-pad a constrained dof vector to the full dof layout."""
        u = np.asarray(u)
        if u.shape[-1] == self.n_dof_full:
            return u
        if u.shape[-1] != self.n_dof:
            raise ValueError(
                f"dof vector of length {u.shape[-1]}; expected "
                f"{self.n_dof} (constrained) or {self.n_dof_full} (full)"
            )
        full = np.zeros(u.shape[:-1] + (self.n_dof_full,), dtype=u.dtype)
        full[..., 2:-2] = u
        return full

    def constrain(self, u_full):
        return np.asarray(u_full)[..., 2:-2]

    def interpolate(self, f, fprime=None):
        """Full dof vector of the Hermite interpolant of a function.

        Slopes come from ``fprime`` when given, otherwise from a cubic
        spline through a 4-per-element sampling of ``f``.
        """
        xs = self.nodes
        vals = np.asarray(f(xs))
        if fprime is not None:
            slopes = np.asarray(fprime(xs))
        else:
            from scipy.interpolate import CubicSpline
            dense = np.linspace(0.0, self.profile.length, 4 * self.n_elements + 1)
            fd = np.asarray(f(dense))
            if np.iscomplexobj(fd):
                spl_r = CubicSpline(dense, fd.real)
                spl_i = CubicSpline(dense, fd.imag)
                slopes = spl_r(xs, 1) + 1j * spl_i(xs, 1)
            else:
                slopes = CubicSpline(dense, fd)(xs, 1)
        dtype = complex if np.iscomplexobj(vals) or np.iscomplexobj(slopes) else float
        u = np.empty(self.n_dof_full, dtype=dtype)
        u[0::2] = vals
        u[1::2] = slopes
        return u

    def _locate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        e = np.clip((x / self.h).astype(int), 0, self.n_elements - 1)
        xi = x / self.h - e
        return e, xi

    def evaluate(self, u_full, x, derivative=0):
        """Evaluate the piecewise-cubic reconstruction (or a derivative) at x."""
        scalar = np.asarray(x).ndim == 0
        u_full = self.expand(np.asarray(u_full))
        e, xi = self._locate(x)
        N, dN, d2N = hermite_shapes(xi, self.h)
        basis = (N, dN, d2N)[derivative]
        dofs = np.stack([u_full[2 * e + k] for k in range(4)], axis=-1)
        out = np.sum(basis * dofs, axis=-1)
        return out[0] if scalar else out

    @property
    def trace_weights(self):
        """Full-dof linear functional evaluating u''(length)."""
        w = np.zeros(self.n_dof_full)
        h = self.h
        w[-4:] = [6.0 / h**2, 2.0 / h, -6.0 / h**2, 4.0 / h]
        return w

    def apply_stiffness(self, u, constrained=True):
        band = self.constrained_bands()[0] if constrained else self.kband
        return band_matvec(band, u)

    def apply_mass(self, u, constrained=True):
        band = self.constrained_bands()[1] if constrained else self.mband
        return band_matvec(band, u)


def assemble(profile, elements, quadrature_points=4):
    """Assemble the banded stiffness/mass pencil on a uniform mesh.

    The stiffness entry pairs dofs through sigma u'' v'' + q u' v', the
    mass entry through rho u v, both integrated per element with the
    Gauss rule.  Element matrices are computed once as exact-symmetric
    blocks, so K == K.T and M == M.T hold exactly.
    """
    if not isinstance(profile, CoefficientProfile):
        raise TypeError("assemble expects a CoefficientProfile")
    if elements < MIN_ELEMENTS:
        raise ValueError(f"need at least {MIN_ELEMENTS} elements, got {elements}")
    E = int(elements)
    h = profile.length / E
    if quadrature_points == 4:
        xi, wref = _XI, _WREF
    else:
        gx, gw = np.polynomial.legendre.leggauss(quadrature_points)
        xi, wref = (gx + 1) / 2, gw / 2
    N, dN, d2N = hermite_shapes(xi, h)
    left = np.linspace(0.0, profile.length, E + 1)[:-1]
    xq = left[:, None] + xi[None, :] * h
    wq = wref[None, :] * h
    sig = profile.sigma(xq) * wq
    qq = profile.q(xq) * wq
    rho = profile.rho(xq) * wq
    Ke = np.einsum("eg,gi,gj->eij", sig, d2N, d2N) + np.einsum("eg,gi,gj->eij", qq, dN, dN)
    Me = np.einsum("eg,gi,gj->eij", rho, N, N)

    ndof = 2 * (E + 1)
    kband = np.zeros((HALF_BANDWIDTH + 1, ndof))
    mband = np.zeros((HALF_BANDWIDTH + 1, ndof))
    base = 2 * np.arange(E)
    for col in range(4):
        for row in range(col, 4):
            d = row - col
            np.add.at(kband[d], base + col, Ke[:, row, col])
            np.add.at(mband[d], base + col, Me[:, row, col])
    return DiscreteOperator(profile=profile, n_elements=E, h=h, kband=kband, mband=mband)


def boundary_trace(op, u):
    """Second derivative at the right end of the piecewise-cubic reconstruction.

    Accepts constrained or full dof vectors; converges to the true
    u''(length) at O(h^2) for smooth data (O(h^3) when u'''' vanishes at
    the end, as it does for clamped eigenfunctions of the constant
    operator).
    """
    full = op.expand(np.asarray(u))
    return full[-4:] @ op.trace_weights[-4:]
