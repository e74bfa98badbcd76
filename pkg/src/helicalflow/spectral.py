"""Periodic 3D grid, spectral transforms, calculus, projections, and norms.

Fields live on the torus [0,L1) x [0,L2) x [0,L3) sampled on a uniform
N1 x N2 x N3 grid; array axes are ordered (x1, x2, y). Spectral
coefficients use the function-amplitude convention: the (0,0,0)
coefficient equals the mean of the field, so Parseval reads

    ||f||_2^2 = L1*L2*L3 * sum_k |fhat_k|^2

and discrete norms agree with their continuum counterparts on
band-limited data.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    ContractViolation,
    GeometryMismatch,
    PoissonMeanError,
    RepresentationError,
)

PHYSICAL = "physical"
SPECTRAL = "spectral"


@dataclass(frozen=True)
class TorusGeometry:
    """Periodic box and its uniform grid."""

    L1: float
    L2: float
    L3: float
    N1: int
    N2: int
    N3: int

    def __post_init__(self):
        for name in ("L1", "L2", "L3"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"{name} must be positive")
        for name in ("N1", "N2", "N3"):
            n = getattr(self, name)
            if n < 4 or n % 2 != 0:
                raise ContractViolation(f"{name} must be an even integer >= 4")

    @property
    def shape(self):
        return (self.N1, self.N2, self.N3)

    @property
    def volume(self):
        return self.L1 * self.L2 * self.L3

    @property
    def cell_volume(self):
        return self.volume / (self.N1 * self.N2 * self.N3)

    def lengths(self):
        return (self.L1, self.L2, self.L3)

    def modes(self, axis):
        """Integer mode indices along a 0-based axis, FFT ordering."""
        n = self.shape[axis]
        return np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)

    def wavenumbers(self, axis):
        """Physical wavenumbers 2*pi*n/L along a 0-based axis."""
        return 2.0 * np.pi * self.modes(axis) / self.lengths()[axis]

    def axis_points(self, axis):
        n = self.shape[axis]
        return np.arange(n) * (self.lengths()[axis] / n)

    @cached_property
    def ksq(self):
        """|k|^2 on the full grid."""
        k1 = self.wavenumbers(0)
        k2 = self.wavenumbers(1)
        k3 = self.wavenumbers(2)
        return (
            k1[:, None, None] ** 2 + k2[None, :, None] ** 2 + k3[None, None, :] ** 2
        )

    @cached_property
    def dealias_mask(self):
        """Boolean mask keeping |n_a| <= N_a/3 on every axis (2/3 rule)."""
        keep = []
        for axis in range(3):
            n = self.shape[axis]
            keep.append(np.abs(self.modes(axis)) <= n // 3)
        return (
            keep[0][:, None, None] & keep[1][None, :, None] & keep[2][None, None, :]
        )

    def grid(self):
        """Open meshgrid (X1, X2, Y) of physical coordinates."""
        return np.meshgrid(
            self.axis_points(0), self.axis_points(1), self.axis_points(2), indexing="ij", sparse=True
        )


@dataclass
class SpectralField3:
    """Scalar field on a torus, carried in physical or spectral form."""

    geometry: TorusGeometry
    representation: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.representation not in (PHYSICAL, SPECTRAL):
            raise ContractViolation(f"unknown representation {self.representation!r}")
        arr = np.ascontiguousarray(self.data, dtype=np.complex128)
        if arr.shape != self.geometry.shape:
            raise GeometryMismatch(
                f"data shape {arr.shape} does not match grid {self.geometry.shape}"
            )
        self.data = arr

    @classmethod
    def from_physical(cls, geometry, values):
        return cls(geometry, PHYSICAL, np.asarray(values, dtype=np.complex128))

    @classmethod
    def from_spectral(cls, geometry, coeffs):
        return cls(geometry, SPECTRAL, np.asarray(coeffs, dtype=np.complex128))

    @classmethod
    def zeros(cls, geometry, representation=SPECTRAL):
        return cls(geometry, representation, np.zeros(geometry.shape, dtype=np.complex128))

    @property
    def is_spectral(self):
        return self.representation == SPECTRAL

    def copy(self):
        return SpectralField3(self.geometry, self.representation, self.data.copy())

    def to_spectral(self):
        return to_spectral(self) if not self.is_spectral else self

    def to_physical(self):
        return to_physical(self) if self.is_spectral else self

    def _check_peer(self, other):
        if self.geometry != other.geometry:
            raise GeometryMismatch("fields live on different grids")
        if self.representation != other.representation:
            raise RepresentationError("fields carried in different representations")

    def __add__(self, other):
        self._check_peer(other)
        return SpectralField3(self.geometry, self.representation, self.data + other.data)

    def __sub__(self, other):
        self._check_peer(other)
        return SpectralField3(self.geometry, self.representation, self.data - other.data)

    def __mul__(self, scalar):
        return SpectralField3(self.geometry, self.representation, self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


def to_spectral(f):
    """Forward transform; (0,0,0) coefficient equals the physical mean."""
    if f.representation != PHYSICAL:
        raise RepresentationError("to_spectral expects a physical-representation field")
    return SpectralField3(f.geometry, SPECTRAL, np.fft.fftn(f.data, norm="forward"))


def to_physical(f):
    """Inverse transform back to grid samples."""
    if f.representation != SPECTRAL:
        raise RepresentationError("to_physical expects a spectral-representation field")
    return SpectralField3(f.geometry, PHYSICAL, np.fft.ifftn(f.data, norm="forward"))


def _spectral_data(f):
    return f.data if f.is_spectral else np.fft.fftn(f.data, norm="forward")


def _wrap_like(f, coeffs):
    """Return `coeffs` in the same representation as the input field."""
    if f.is_spectral:
        return SpectralField3(f.geometry, SPECTRAL, coeffs)
    return SpectralField3(f.geometry, PHYSICAL, np.fft.ifftn(coeffs, norm="forward"))


def deriv_factor(geometry, axis0, order):
    """Spectral multiplier (i k)^order for a 0-based axis.

    Odd orders zero the Nyquist mode so real fields stay real; even
    orders retain it.
    """
    k = geometry.wavenumbers(axis0)
    fac = (1j * k) ** order
    if order % 2 == 1:
        fac[geometry.shape[axis0] // 2] = 0.0
    shape = [1, 1, 1]
    shape[axis0] = -1
    return fac.reshape(shape)


def deriv(f, axis, order=1):
    """Spectral partial derivative along axis (1-based, per grid ordering)."""
    if axis not in (1, 2, 3):
        raise ContractViolation("axis must be 1, 2 or 3")
    if not (isinstance(order, (int, np.integer)) and order >= 1):
        raise ContractViolation("derivative order must be a positive integer")
    fac = deriv_factor(f.geometry, axis - 1, order)
    return _wrap_like(f, _spectral_data(f) * fac)


def invert_neg_laplacian(f):
    """Solve -lap(c) = f for the unique zero-mean c.

    The source must be mean-free: |fhat(0,0,0)| <= 1e-12 * ||f||_2.
    """
    g = _spectral_data(f)
    geom = f.geometry
    l2 = float(np.sqrt(geom.volume * np.sum(np.abs(g) ** 2)))
    if abs(g[0, 0, 0]) > 1e-12 * l2:
        raise PoissonMeanError("Poisson source not mean-free")
    ksq = geom.ksq.copy()
    ksq[0, 0, 0] = 1.0
    out = g / ksq
    out[0, 0, 0] = 0.0
    return _wrap_like(f, out)


def mean_over_x(f):
    """x1,x2-average of the field: a 1D profile over y (length N3)."""
    if f.is_spectral:
        return np.fft.ifft(f.data[0, 0, :], norm="forward")
    return f.data.mean(axis=(0, 1))


def fluct(f):
    """Complement of the x-average: f minus its (n1,n2)=(0,0) column."""
    if f.is_spectral:
        out = f.data.copy()
        out[0, 0, :] = 0.0
        return SpectralField3(f.geometry, SPECTRAL, out)
    prof = f.data.mean(axis=(0, 1))
    return SpectralField3(f.geometry, PHYSICAL, f.data - prof[None, None, :])


def dealias(f):
    """Zero every coefficient with |n_a| > N_a/3 on any axis (2/3 rule)."""
    if not f.is_spectral:
        raise RepresentationError("dealias expects a spectral-representation field")
    return SpectralField3(f.geometry, SPECTRAL, f.data * f.geometry.dealias_mask)


def norms(f):
    """Discrete {l2, linf, h1dot, h2dot} with continuum-consistent weights."""
    geom = f.geometry
    if f.is_spectral:
        g = f.data
        phys = np.fft.ifftn(g, norm="forward")
        l2 = np.sqrt(geom.volume * np.sum(np.abs(g) ** 2))
    else:
        phys = f.data
        g = np.fft.fftn(phys, norm="forward")
        l2 = np.sqrt(geom.cell_volume * np.sum(np.abs(phys) ** 2))
    ksq = geom.ksq
    absg2 = np.abs(g) ** 2
    return {
        "l2": float(l2),
        "linf": float(np.max(np.abs(phys))),
        "h1dot": float(np.sqrt(geom.volume * np.sum(ksq * absg2))),
        "h2dot": float(np.sqrt(geom.volume * np.sum(ksq**2 * absg2))),
    }


def l2_inner(f, g):
    """Discrete L2 inner product <f, g> (conjugate-linear in f)."""
    if f.geometry != g.geometry:
        raise GeometryMismatch("fields live on different grids")
    fa = _spectral_data(f)
    ga = _spectral_data(g)
    return complex(f.geometry.volume * np.sum(np.conj(fa) * ga))


def hermitian_conjugate_coeffs(g):
    """conj(ghat(-n)) rearranged to the layout of ghat(n)."""
    return np.conj(np.roll(np.flip(g), shift=(1, 1, 1), axis=(0, 1, 2)))


def hermitian_error(f):
    """Relative departure of spectral coefficients from Hermitian symmetry."""
    g = _spectral_data(f)
    scale = np.max(np.abs(g))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(g - hermitian_conjugate_coeffs(g))) / scale)


def enforce_hermitian(g):
    """Project coefficients onto the Hermitian-symmetric (real-field) part."""
    g += hermitian_conjugate_coeffs(g)
    g *= 0.5
    return g


# 1D helpers for profiles over y (same amplitude convention as the 3D case).


def profile_deriv(values, L, order=1):
    """Spectral derivative of a periodic 1D profile sampled on a uniform grid."""
    n = values.shape[0]
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n) / L
    fac = (1j * k) ** order
    if order % 2 == 1:
        fac[n // 2] = 0.0
    return np.fft.ifft(np.fft.fft(values, norm="forward") * fac, norm="forward")


def profile_l2(values, L):
    """Volume-weighted L2 norm of a 1D profile: sqrt(L * mean|v|^2)."""
    n = values.shape[0]
    return float(np.sqrt((L / n) * np.sum(np.abs(values) ** 2)))


__all__ = [
    "PHYSICAL",
    "SPECTRAL",
    "TorusGeometry",
    "SpectralField3",
    "to_spectral",
    "to_physical",
    "deriv",
    "deriv_factor",
    "invert_neg_laplacian",
    "mean_over_x",
    "fluct",
    "dealias",
    "norms",
    "l2_inner",
    "hermitian_error",
    "enforce_hermitian",
    "profile_deriv",
    "profile_l2",
]
