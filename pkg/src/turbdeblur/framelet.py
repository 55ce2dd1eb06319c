"""Tight-frame image transform and the soft-shrinkage operator.

One decomposition level of the 2-D tensor-product piecewise-linear
B-spline framelet (Ron-Shen), built from the 1-D filters

    h0 = (1, 2, 1)/4          lowpass
    h1 = (sqrt(2)/4)(1, 0, -1)
    h2 = (-1, 2, -1)/4

The nine 2-D bands are all combinations h_i (rows) x h_j (columns),
band 0 being the lowpass h0 x h0.  Filtering is periodic, so the frame
operator D satisfies D^T D = I exactly (sum of squared filter responses
is identically 1) and composes consistently with FFT-domain convolution.

Coefficients are stored as a single (9, H, W) float array; band order is
row-major in (i, j).
"""

from __future__ import annotations

import numpy as np

BAND_COUNT = 9
LOWPASS_BAND = 0

_SQRT2 = np.sqrt(2.0)
# Taps at offsets (-1, 0, +1).
_FILTERS = (
    np.array([0.25, 0.5, 0.25]),
    np.array([_SQRT2 / 4.0, 0.0, -_SQRT2 / 4.0]),
    np.array([-0.25, 0.5, -0.25]),
)


def _filt(a, taps, axis):
    # out[n] = t0*a[n-1] + t1*a[n] + t2*a[n+1], periodic.
    return taps[0] * np.roll(a, 1, axis) + taps[1] * a + taps[2] * np.roll(a, -1, axis)


def _filt_adj(a, taps, axis):
    # Adjoint of _filt: reversed taps.
    return taps[0] * np.roll(a, -1, axis) + taps[1] * a + taps[2] * np.roll(a, 1, axis)


def _check_image(image):
    u = np.asarray(image, dtype=float)
    if u.ndim != 2 or u.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {u.shape}")
    return u


def decompose(image) -> np.ndarray:
    """Frame decomposition D: image (H, W) -> coefficients (9, H, W)."""
    u = _check_image(image)
    rows = [_filt(u, t, axis=0) for t in _FILTERS]
    return np.stack([_filt(r, t, axis=1) for r in rows for t in _FILTERS])


def _check_coeffs(coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 3 or c.shape[0] != BAND_COUNT or c.shape[1] * c.shape[2] == 0:
        raise ValueError(f"expected coefficients of shape (9, H, W), got {c.shape}")
    return c


def reconstruct(coeffs) -> np.ndarray:
    """Frame reconstruction D^T; reconstruct(decompose(u)) == u.

    Applies the adjoint of each band filter and sums.  Exact inverse on
    the range of ``decompose`` by the tight-frame identity D^T D = I.
    """
    c = _check_coeffs(coeffs)
    out = np.zeros(c.shape[1:])
    for band, (ti, tj) in zip(c, ((i, j) for i in _FILTERS for j in _FILTERS)):
        out += _filt_adj(_filt_adj(band, tj, axis=1), ti, axis=0)
    return out


def shrink(coeffs, threshold: float, shrink_lowpass: bool = False) -> np.ndarray:
    """Elementwise soft threshold sign(x) * max(0, |x| - threshold).

    Applied to the eight detail bands; the lowpass band passes through
    unchanged unless ``shrink_lowpass`` is set (penalizing it would bias
    the mean intensity and break shift equivariance of the solver).
    """
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    c = _check_coeffs(coeffs)
    out = np.sign(c) * np.maximum(np.abs(c) - threshold, 0.0)
    if not shrink_lowpass:
        out[LOWPASS_BAND] = c[LOWPASS_BAND]
    return out
