"""Coherent transfer-matrix optics for planar multilayer stacks.

Computes complex reflection/transmission amplitudes, power reflectance,
transmittance and absorbed fraction, and ellipsometric angles (psi, delta)
for a stack of homogeneous layers between two semi-infinite media.

Conventions:
  * lengths in nanometers, angles in degrees at the API boundary
  * passive media only (extinction coefficient k >= 0)
  * the longitudinal wavevector branch satisfies Im(n cos_theta) >= 0,
    so evanescent and absorbed waves decay away from each interface
  * p-polarized amplitudes follow the admittance (Abeles) sign convention;
    as a consequence r_p == r_s at exactly normal incidence
  * characteristic matrices are rescaled per layer so that optically thick
    absorbing layers (e.g. tens of micrometers of silicon) never overflow
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ComplexIndex",
    "LayerStack",
    "PlaneWave",
    "StackResponse",
    "DegenerateGeometryError",
    "fresnel_interface",
    "stack_response",
    "multilayer_response",
    "ellipsometric_angles",
]

_TWO_PI = 2.0 * math.pi


class DegenerateGeometryError(ValueError):
    """Raised when r_s vanishes and the ellipsometric ratio cannot be formed."""


@dataclass(frozen=True)
class ComplexIndex:
    """Complex refractive index n + i*k of a passive medium."""

    n: float
    k: float = 0.0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"extinction coefficient must be >= 0, got {self.k}")

    @property
    def value(self) -> complex:
        return complex(self.n, self.k)

    @property
    def permittivity(self) -> complex:
        return self.value * self.value

    @classmethod
    def from_permittivity(cls, eps: complex) -> "ComplexIndex":
        """Index whose square is ``eps``, on the passive branch (k >= 0)."""
        root = cmath.sqrt(eps)
        if root.imag < 0:
            root = -root
        return cls(root.real, root.imag)


@dataclass(frozen=True)
class PlaneWave:
    """Incident plane wave: wavelength in nm, angle in degrees in the superstrate."""

    wavelength: float
    angle: float = 0.0
    polarization: str = "s"

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be > 0 nm, got {self.wavelength}")
        if not 0.0 <= self.angle < 90.0:
            raise ValueError(f"incidence angle must lie in [0, 90) degrees, got {self.angle}")
        if self.polarization not in ("s", "p"):
            raise ValueError(f"polarization must be 's' or 'p', got {self.polarization!r}")


@dataclass(frozen=True)
class LayerStack:
    """Ordered multilayer in light-incidence order: superstrate -> layers -> substrate.

    ``layers`` is a sequence of (thickness_nm, ComplexIndex) pairs. Zero
    thickness is allowed and is optically inert.
    """

    superstrate: ComplexIndex
    layers: tuple = field(default_factory=tuple)
    substrate: ComplexIndex = ComplexIndex(1.0)

    def __post_init__(self):
        norm = tuple((float(t), idx) for t, idx in self.layers)
        for t, idx in norm:
            if t < 0:
                raise ValueError(f"layer thickness must be >= 0 nm, got {t}")
            if not isinstance(idx, ComplexIndex):
                raise TypeError("layer index must be a ComplexIndex")
        object.__setattr__(self, "layers", norm)


@dataclass(frozen=True)
class StackResponse:
    """Amplitudes and power fractions for one stack/wave combination."""

    r: complex
    t: complex
    R: float
    T: float
    A: float


def _cos_theta(n: complex, kx: complex) -> complex:
    """Complex propagation cosine in a medium of index n.

    ``kx`` is the conserved tangential component n_super*sin(theta0) in
    index units. Branch: Im(n*cos) >= 0, ties broken toward Re(n*cos) >= 0.
    """
    c = cmath.sqrt(1.0 - (kx / n) ** 2)
    nc = n * c
    if nc.imag < 0 or (nc.imag == 0 and nc.real < 0):
        c = -c
    return c


def _admittance(n: complex, cos_t: complex, pol: str) -> complex:
    return n * cos_t if pol == "s" else n / cos_t


def _scalar_response(n0: complex, layers, ns: complex, wavelength: float,
                     angle_deg: float, pol: str):
    """Core single-wavelength response.

    ``layers`` is a sequence of (thickness_nm, complex_index). Returns
    (r, t, R, T, A). Characteristic matrices are rescaled per layer by
    exp(-i*delta); only decaying exponentials are ever formed explicitly.
    """
    kx = n0 * cmath.sin(math.radians(angle_deg))
    c0 = _cos_theta(n0, kx)
    cs = _cos_theta(ns, kx)
    eta0 = _admittance(n0, c0, pol)
    etas = _admittance(ns, cs, pol)

    m00 = m11 = 1.0 + 0.0j
    m01 = m10 = 0.0 + 0.0j
    w = 0.0 + 0.0j  # accumulated phase thickness, Im(w) >= 0
    for t_nm, nj in layers:
        cj = _cos_theta(nj, kx)
        etaj = _admittance(nj, cj, pol)
        delta = _TWO_PI * nj * cj * t_nm / wavelength
        q = cmath.exp(2.0j * delta)  # |q| <= 1 by the branch choice
        a = 0.5 * (1.0 + q)
        b = 0.5 * (1.0 - q)
        l01 = b / etaj
        l10 = b * etaj
        m00, m01, m10, m11 = (
            m00 * a + m01 * l10,
            m00 * l01 + m01 * a,
            m10 * a + m11 * l10,
            m10 * l01 + m11 * a,
        )
        w += delta

    bb = m00 + m01 * etas
    cc = m10 + m11 * etas
    denom = eta0 * bb + cc
    r = (eta0 * bb - cc) / denom
    # true matrix product carries a removed factor exp(-i*w); restoring it in
    # the transmission only ever exponentiates a decaying argument
    t = 2.0 * eta0 / denom * cmath.exp(1.0j * w)
    R = abs(r) ** 2
    T = 4.0 * eta0.real * etas.real / abs(denom) ** 2 * math.exp(-2.0 * w.imag)
    A = 1.0 - R - T
    return r, t, R, T, A


def fresnel_interface(n1: ComplexIndex, n2: ComplexIndex, wave: PlaneWave):
    """Amplitude reflection and transmission of a single interface.

    n1 is the incidence side. Total internal reflection and evanescent
    transmission are handled through complex propagation cosines.
    """
    kx = n1.value * cmath.sin(math.radians(wave.angle))
    c1 = _cos_theta(n1.value, kx)
    c2 = _cos_theta(n2.value, kx)
    e1 = _admittance(n1.value, c1, wave.polarization)
    e2 = _admittance(n2.value, c2, wave.polarization)
    r = (e1 - e2) / (e1 + e2)
    t = 2.0 * e1 / (e1 + e2)
    return r, t


def stack_response(stack: LayerStack, wave: PlaneWave) -> StackResponse:
    """Coherent response of a multilayer stack for one plane wave."""
    r, t, R, T, A = _scalar_response(
        stack.superstrate.value,
        [(t_nm, idx.value) for t_nm, idx in stack.layers],
        stack.substrate.value,
        wave.wavelength,
        wave.angle,
        wave.polarization,
    )
    return StackResponse(r=r, t=t, R=R, T=T, A=A)


def ellipsometric_angles(stack: LayerStack, wavelength: float, angle: float):
    """Ellipsometric (psi, delta) in degrees from the ratio rho = r_p / r_s.

    psi = atan(|rho|) in [0, 90]; delta = arg(rho) in (-180, 180].
    """
    if not 0.0 < angle < 90.0:
        raise ValueError(f"ellipsometry angle must lie in (0, 90) degrees, got {angle}")
    layers = [(t_nm, idx.value) for t_nm, idx in stack.layers]
    r_p = _scalar_response(stack.superstrate.value, layers, stack.substrate.value,
                           wavelength, angle, "p")[0]
    r_s = _scalar_response(stack.superstrate.value, layers, stack.substrate.value,
                           wavelength, angle, "s")[0]
    if abs(r_s) == 0.0:
        raise DegenerateGeometryError("r_s vanishes; psi/delta undefined for this geometry")
    rho = r_p / r_s
    psi = math.degrees(math.atan(abs(rho)))
    delta = math.degrees(cmath.phase(rho))
    return psi, delta


# ---------------------------------------------------------------------------
# vectorized path (used by the objective functions, cross-checked in tests
# against the scalar path above)

def _cos_theta_vec(n, kx):
    c = np.sqrt(1.0 - (kx / n) ** 2 + 0.0j)
    nc = n * c
    flip = (nc.imag < 0) | ((nc.imag == 0) & (nc.real < 0))
    return np.where(flip, -c, c)


def multilayer_response(n_super, thicknesses, layer_indices, n_sub, wavelengths,
                        angle_deg: float = 0.0, polarization: str = "s"):
    """Stack response vectorized over wavelength.

    Parameters
    ----------
    n_super, n_sub : complex scalars or (W,) arrays (dispersive media)
    thicknesses : (L,) array of layer thicknesses in nm
    layer_indices : (L,) or (L, W) complex array; rows broadcast over wavelength
    wavelengths : (W,) array in nm
    angle_deg, polarization : shared by all wavelengths

    Returns a dict with keys ``r``, ``t``, ``R``, ``T``, ``A``, each (W,).
    """
    wl = np.asarray(wavelengths, dtype=float)
    n0 = np.asarray(n_super, dtype=complex) * np.ones_like(wl, dtype=complex)
    ns = np.asarray(n_sub, dtype=complex) * np.ones_like(wl, dtype=complex)
    t_list = np.asarray(thicknesses, dtype=float)
    nl = np.asarray(layer_indices, dtype=complex)
    if nl.ndim == 1:
        nl = nl[:, None] * np.ones_like(wl, dtype=complex)
    if np.any(t_list < 0):
        raise ValueError("layer thicknesses must be >= 0 nm")
    pol = polarization
    if pol not in ("s", "p"):
        raise ValueError(f"polarization must be 's' or 'p', got {pol!r}")
    if not 0.0 <= angle_deg < 90.0:
        raise ValueError(f"incidence angle must lie in [0, 90) degrees, got {angle_deg}")

    kx = n0 * math.sin(math.radians(angle_deg))
    c0 = _cos_theta_vec(n0, kx)
    cs = _cos_theta_vec(ns, kx)

    def adm(n, c):
        return n * c if pol == "s" else n / c

    eta0 = adm(n0, c0)
    etas = adm(ns, cs)

    m00 = np.ones_like(wl, dtype=complex)
    m11 = np.ones_like(wl, dtype=complex)
    m01 = np.zeros_like(wl, dtype=complex)
    m10 = np.zeros_like(wl, dtype=complex)
    w = np.zeros_like(wl, dtype=complex)
    for j in range(t_list.shape[0]):
        nj = nl[j]
        cj = _cos_theta_vec(nj, kx)
        etaj = adm(nj, cj)
        delta = _TWO_PI * nj * cj * t_list[j] / wl
        q = np.exp(2.0j * delta)
        a = 0.5 * (1.0 + q)
        b = 0.5 * (1.0 - q)
        l01 = b / etaj
        l10 = b * etaj
        m00, m01, m10, m11 = (
            m00 * a + m01 * l10,
            m00 * l01 + m01 * a,
            m10 * a + m11 * l10,
            m10 * l01 + m11 * a,
        )
        w = w + delta

    bb = m00 + m01 * etas
    cc = m10 + m11 * etas
    denom = eta0 * bb + cc
    r = (eta0 * bb - cc) / denom
    t = 2.0 * eta0 / denom * np.exp(1.0j * w)
    R = np.abs(r) ** 2
    T = 4.0 * eta0.real * etas.real / np.abs(denom) ** 2 * np.exp(-2.0 * w.imag)
    A = 1.0 - R - T
    return {"r": r, "t": t, "R": R, "T": T, "A": A}


def psi_delta_spectrum(n_super, thicknesses, layer_indices, n_sub, wavelengths,
                       angle_deg: float):
    """(psi, delta) arrays in degrees over a wavelength grid."""
    rp = multilayer_response(n_super, thicknesses, layer_indices, n_sub,
                             wavelengths, angle_deg, "p")["r"]
    rs = multilayer_response(n_super, thicknesses, layer_indices, n_sub,
                             wavelengths, angle_deg, "s")["r"]
    if np.any(np.abs(rs) == 0.0):
        raise DegenerateGeometryError("r_s vanishes; psi/delta undefined for this geometry")
    rho = rp / rs
    psi = np.degrees(np.arctan(np.abs(rho)))
    delta = np.degrees(np.angle(rho))
    return psi, delta
