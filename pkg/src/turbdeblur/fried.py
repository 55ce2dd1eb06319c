"""Analytic short-exposure atmospheric MTF (the Fried kernel).

Long-range imaging through turbulence is blurred by the combination of the
diffraction-limited system response and the short-exposure (tilt-removed)
atmospheric transfer function.  Both admit closed forms:

    M0(w)  = (2/pi) * (arccos(w) - w*sqrt(1 - w^2))      for w < 1, else 0
    MSA(w) = exp(-(2.1*X)^(5/3) * (w^(5/3) - V(Q,X)*w^2))
    MF(w)  = M0(w) * MSA(w)

where w is the spatial frequency modulus normalized to the diffraction
cutoff, X = D/r0 measures aperture-to-coherence ratio and V(Q,X) is the
tilt-correction factor fitted by Tofsted.  The model is isotropic and
depends on four physical inputs only: aperture diameter D, path length L,
wavelength lambda and the refractive index structure parameter Cn2.

References
----------
- Fried, D.L. (1966). Optical resolution through a randomly inhomogeneous
  medium for very long and very short exposures. JOSA 56(10).
- Tofsted, D.H. (2011). Reanalysis of turbulence effects on short-exposure
  passive imaging. Optical Engineering 50(1).

Numerical guards (documented deviations from the raw closed forms):

- ``sigma`` saturates to +/-1 for |q| > 700 where exp(q) overflows.
- ``v_factor`` evaluates the tilt-correction exponential with
  log10(X) floored at -1.  Tofsted's fit is stated for X >= 0.1; below
  that the raw cubic diverges and would destroy the physical X -> 0
  (no turbulence) limit MSA -> 1.
- ``mtf_fried`` clamps MSA at 1 before taking the product.  For strong
  turbulence (V > 1) the raw exponent changes sign near the cutoff and
  grows like exp((2.1X)^(5/3)(V-1)), which overwhelms the polynomial
  decay of M0 and would make the "blur" kernel an enormous high-pass
  amplifier.  Physically the tilt-removed transfer cannot exceed the
  unaberrated system response, so the composite kernel never amplifies.
  ``mtf_short_exposure`` itself is left unclamped (the overshoot is a
  real feature of the closed form) apart from an overflow cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Physically plausible range for the refractive index structure parameter,
# in m^(-2/3): weak (1e-16) to strong (1e-12) turbulence.  Values outside
# are almost always unit mistakes and are rejected.
CN2_MIN = 1e-16
CN2_MAX = 1e-12

# exp() overflows double precision just above this exponent.
_EXP_OVERFLOW = 700.0


@dataclass(frozen=True)
class OpticalParams:
    """Physical inputs of the kernel plus the frequency-mapping metadata.

    Attributes
    ----------
    aperture_diameter_m : float
        Entrance pupil diameter D (m).
    path_length_m : float
        Sensor-to-scene distance L (m).
    wavelength_m : float
        Wavelength lambda (m).
    cn2 : float or None
        Refractive index structure parameter Cn2 (m^(-2/3)), in
        [1e-16, 1e-12].  ``None`` marks an unknown value for the blind
        pipeline; kernel construction then raises until a value is set.
    cutoff_scale : float
        Fraction in (0, 1] mapping the normalized frequency w = 1 to
        ``cutoff_scale * Nyquist`` of the image grid.  1.0 places the
        diffraction cutoff exactly at Nyquist.
    """

    aperture_diameter_m: float
    path_length_m: float
    wavelength_m: float
    cn2: float | None = None
    cutoff_scale: float = 1.0

    def __post_init__(self):
        if not (self.aperture_diameter_m > 0):
            raise ValueError(f"aperture_diameter_m must be > 0, got {self.aperture_diameter_m}")
        if not (self.path_length_m > 0):
            raise ValueError(f"path_length_m must be > 0, got {self.path_length_m}")
        if not (self.wavelength_m > 0):
            raise ValueError(f"wavelength_m must be > 0, got {self.wavelength_m}")
        if self.cn2 is not None and not (CN2_MIN <= self.cn2 <= CN2_MAX):
            raise ValueError(
                f"cn2 must lie in [{CN2_MIN:g}, {CN2_MAX:g}] m^(-2/3), got {self.cn2!r}"
            )
        if not (0 < self.cutoff_scale <= 1):
            raise ValueError(f"cutoff_scale must be in (0, 1], got {self.cutoff_scale}")


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from :class:`OpticalParams`.

    wavenumber k = 2*pi/lambda, coherence length rho0, coherence diameter
    r0 = 2.1*rho0 (the Fried parameter), Fresnel scale P = sqrt(lambda*L),
    and the dimensionless ratios Q = D/P and X = D/r0.
    """

    wavenumber: float
    coherence_length: float
    coherence_diameter: float
    fresnel_scale: float
    q_ratio: float
    x_ratio: float


def sigma(q):
    """Saturating sigmoid (e^q - 1)/(e^q + 1), i.e. tanh(q/2).

    Odd, range (-1, 1); evaluated via tanh so it is stable for any
    magnitude of q (returns +/-1.0 where exp(q) would overflow).
    Accepts scalars or arrays.
    """
    out = np.tanh(np.multiply(q, 0.5))
    return float(out) if np.ndim(q) == 0 else out


def coeff_a(q):
    """Tilt-correction coefficient A(q), q = log2(Q).

    Two sigmoid branches meeting continuously at q = -1.50 with the
    common value 0.840.
    """
    q = np.asarray(q, dtype=float)
    low = 0.840 + 0.116 * np.tanh(1.35 * (q + 1.50) * 0.5)
    high = 0.840 + 0.280 * np.tanh(0.51 * (q + 1.50) * 0.5)
    out = np.where(q < -1.50, low, high)
    return float(out) if out.ndim == 0 else out


def coeff_b(q):
    """Tilt-correction coefficient B(q) = 0.805 + 0.265*sigma(1.45*(q - 0.15))."""
    out = 0.805 + 0.265 * np.tanh(1.45 * (np.asarray(q, dtype=float) - 0.15) * 0.5)
    return float(out) if out.ndim == 0 else out


def v_factor(q_ratio, x_ratio):
    """Tilt-correction factor V(Q, X) = A + (B/10) * exp(-(x+1)^3 / 3.5).

    Parameters
    ----------
    q_ratio : float
        Q = D / sqrt(lambda*L), must be > 0.
    x_ratio : float
        X = D / r0, must be > 0.

    Notes
    -----
    x = log10(X) is floored at -1 inside the exponential (the fit's
    validity boundary); this keeps V bounded as X -> 0 so the
    short-exposure factor correctly tends to 1 with vanishing turbulence.
    """
    if not (q_ratio > 0):
        raise ValueError(f"q_ratio must be > 0, got {q_ratio!r}")
    if not (x_ratio > 0):
        raise ValueError(f"x_ratio must be > 0, got {x_ratio!r}")
    q = math.log2(q_ratio)
    x = max(math.log10(x_ratio), -1.0)
    return coeff_a(q) + coeff_b(q) / 10.0 * math.exp(-((x + 1.0) ** 3) / 3.5)


def derive_params(optics: OpticalParams) -> DerivedParams:
    """Compute the derived optical quantities for a full parameter set.

    Raises
    ------
    ValueError
        If ``optics.cn2`` is None (unknown turbulence strength).
    """
    if optics.cn2 is None:
        raise ValueError("cn2 is unknown; set it (or use the blind pipeline)")
    k = 2.0 * math.pi / optics.wavelength_m
    rho0 = 1.437 * (k * k * optics.path_length_m * optics.cn2) ** (-3.0 / 5.0)
    r0 = 2.1 * rho0
    p = math.sqrt(optics.wavelength_m * optics.path_length_m)
    return DerivedParams(
        wavenumber=k,
        coherence_length=rho0,
        coherence_diameter=r0,
        fresnel_scale=p,
        q_ratio=optics.aperture_diameter_m / p,
        x_ratio=optics.aperture_diameter_m / r0,
    )


def mtf_diffraction(omega):
    """Diffraction-limited system MTF M0 for a circular pupil.

    (2/pi)(arccos w - w sqrt(1 - w^2)) below the cutoff w = 1, zero at and
    beyond it.  Monotone non-increasing on [0, 1].  Accepts scalars or
    arrays; negative frequencies are rejected.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be >= 0")
    wc = np.minimum(w, 1.0)
    out = (2.0 / math.pi) * (np.arccos(wc) - wc * np.sqrt(1.0 - wc * wc))
    out = np.where(w >= 1.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def mtf_short_exposure(omega, q_ratio, x_ratio):
    """Short-exposure (tilt-removed) atmospheric MTF, Tofsted's form.

    exp(-(2.1 X)^(5/3) (w^(5/3) - V(Q,X) w^2)).  Equals 1 at w = 0 and is
    strictly positive.  Can exceed 1 near the cutoff when V > w^(-1/3)
    (tilt-correction overshoot); the exponent is capped at 700 so the
    overshoot saturates instead of overflowing.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be >= 0")
    v = v_factor(q_ratio, x_ratio)
    pre = (2.1 * x_ratio) ** (5.0 / 3.0)
    expo = -pre * (w ** (5.0 / 3.0) - v * w * w)
    out = np.exp(np.minimum(expo, _EXP_OVERFLOW))
    return float(out) if out.ndim == 0 else out


def mtf_fried(omega, optics: OpticalParams):
    """Composite kernel MF = M0 * min(MSA, 1).

    1 at w = 0, exactly 0 for w >= 1.  The short-exposure factor is
    clamped at unity (see module notes): without the clamp the kernel is
    not monotone in Cn2 and can amplify near-cutoff frequencies by
    hundreds of orders of magnitude for large D/r0.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be >= 0")
    d = derive_params(optics)
    v = v_factor(d.q_ratio, d.x_ratio)
    pre = (2.1 * d.x_ratio) ** (5.0 / 3.0)
    expo = -pre * np.maximum(w ** (5.0 / 3.0) - v * w * w, 0.0)
    out = mtf_diffraction(w) * np.exp(expo)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FriedKernel:
    """Frequency-domain blur kernel sampled on a DFT grid.

    ``mtf`` has shape (height, width) in DFT layout: element [0, 0] is the
    DC bin.  The grid is real, non-negative and immutable.  ``params`` is
    the parameter set used to build it (None for hand-made kernels).
    """

    width: int
    height: int
    mtf: np.ndarray
    params: OpticalParams | None = None

    def __post_init__(self):
        m = np.asarray(self.mtf, dtype=float)
        if m.shape != (self.height, self.width):
            raise ValueError(f"mtf shape {m.shape} != (height, width) = ({self.height}, {self.width})")
        if not np.all(np.isfinite(m)):
            raise ValueError("mtf contains non-finite entries")
        if np.any(m < 0):
            raise ValueError("mtf must be non-negative")
        if abs(m[0, 0] - 1.0) > 1e-12:
            raise ValueError(f"DC gain must be 1, got {m[0, 0]!r}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "mtf", m)


def identity_kernel(width: int, height: int) -> FriedKernel:
    """All-pass kernel (mtf == 1); blur with it is the identity."""
    return FriedKernel(width=width, height=height, mtf=np.ones((height, width)))


def build_kernel(optics: OpticalParams, width: int, height: int) -> FriedKernel:
    """Rasterize the isotropic kernel onto a width x height DFT grid.

    For the DFT bin (i, j) with signed normalized per-axis frequencies
    (fi, fj) in [-0.5, 0.5), the stored value is ``mtf_fried(w)`` with
    w = sqrt(fi^2 + fj^2) / (0.5 * cutoff_scale), so w = 1 sits at
    ``cutoff_scale * Nyquist``.  Both axes share the same normalization
    (square pixels, isotropic kernel).

    Raises
    ------
    ValueError
        If width or height < 8, or optics is incomplete.
    """
    if width < 8 or height < 8:
        raise ValueError(f"kernel grid must be at least 8x8, got {width}x{height}")
    fi = np.fft.fftfreq(height)[:, None]
    fj = np.fft.fftfreq(width)[None, :]
    omega = np.hypot(fi, fj) / (0.5 * optics.cutoff_scale)
    return FriedKernel(width=width, height=height, mtf=mtf_fried(omega, optics), params=optics)


def write_kernel_profile_csv(path, optics: OpticalParams, omegas) -> None:
    """Write a 1-D kernel profile as CSV with header ``omega,m0,msa,mf``.

    One row per sample of the caller-specified omega grid.  ``msa`` is the
    raw (unclamped) short-exposure factor; ``mf`` is the composite kernel
    actually used by the pipeline.
    """
    w = np.asarray(omegas, dtype=float)
    d = derive_params(optics)
    m0 = np.atleast_1d(mtf_diffraction(w))
    msa = np.atleast_1d(mtf_short_exposure(w, d.q_ratio, d.x_ratio))
    mf = np.atleast_1d(mtf_fried(w, optics))
    with open(path, "w", newline="") as f:
        f.write("omega,m0,msa,mf\n")
        for row in zip(np.atleast_1d(w), m0, msa, mf):
            f.write(",".join(repr(float(v)) for v in row) + "\n")
