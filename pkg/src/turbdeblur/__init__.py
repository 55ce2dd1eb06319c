"""Atmospheric turbulence deblurring for long-range grayscale imagery.

Analytic short-exposure MTF kernel construction, tight-frame
split-Bregman deconvolution, and blind estimation of the turbulence
strength Cn2 from the blurred image itself.
"""

from .blind import (
    BlindConfig,
    BlindResult,
    Cn2Estimate,
    TvCurve,
    UninformativeImageError,
    blind_deconvolve,
    estimate_cn2,
    fit_polynomial,
    sample_tv_curve,
    total_variation,
    write_tv_curve_csv,
)
from .deconv import SolverConfig, apply_blur, deconvolve, deconvolve_fried, u_update
from .framelet import decompose, reconstruct, shrink
from .fried import (
    CN2_MAX,
    CN2_MIN,
    DerivedParams,
    FriedKernel,
    OpticalParams,
    build_kernel,
    coeff_a,
    coeff_b,
    derive_params,
    identity_kernel,
    mtf_diffraction,
    mtf_fried,
    mtf_short_exposure,
    sigma,
    v_factor,
    write_kernel_profile_csv,
)
from .imaging import (
    ImageFormatError,
    bundled_texture_path,
    load_bundled_texture,
    load_image,
    psnr,
    save_image,
    simulate_blur,
)

__version__ = "0.1.0"
