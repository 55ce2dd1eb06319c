"""Blind estimation of the turbulence strength Cn2 from a blurred image.

Rationale: deconvolving with an under-estimated Cn2 leaves the image
blurred (weak gradients), deconvolving with an over-estimated one
over-regularizes and strips detail, so the total variation of the
restored image, seen as a function of the candidate Cn2, peaks near the
true value.  The estimator samples that curve at a small number of
equidistant candidates, fits a low-order polynomial by least squares and
returns the argmax of the fit over a dense grid.

An argmax that lands on a boundary of the search range is reported with
``saturated=True`` rather than rejected: texture-free scenes (where
over-regularization removes nothing) genuinely drive the estimate to the
upper bound.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from numpy.polynomial import Polynomial

from .deconv import SolverConfig, deconvolve_fried
from .fried import CN2_MAX, CN2_MIN, OpticalParams

# A TV sum below this is indistinguishable from FFT roundoff on a constant
# image; no gradient information means no estimate.
UNINFORMATIVE_TV = 1e-6

DEFAULT_GRID_POINTS = 2001


class UninformativeImageError(ValueError):
    """Raised when the TV curve carries no usable gradient signal."""


@dataclass(frozen=True)
class BlindConfig:
    """Search-range, sampling and solver settings for blind estimation."""

    cn2_min: float = 0.5e-14
    cn2_max: float = 2.5e-13
    n_samples: int = 10
    poly_degree: int = 5
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(mu=1e5, eta=10.0, n_iter=3))

    def __post_init__(self):
        if not (CN2_MIN <= self.cn2_min < self.cn2_max <= CN2_MAX):
            raise ValueError(
                f"need {CN2_MIN:g} <= cn2_min < cn2_max <= {CN2_MAX:g}, "
                f"got [{self.cn2_min!r}, {self.cn2_max!r}]"
            )
        if not (self.poly_degree >= 1):
            raise ValueError(f"poly_degree must be >= 1, got {self.poly_degree}")
        if not (self.n_samples >= self.poly_degree + 1):
            raise ValueError(
                f"n_samples must be >= poly_degree + 1 = {self.poly_degree + 1}, "
                f"got {self.n_samples}"
            )


@dataclass
class TvCurve:
    """Sampled (cn2, tv) points over a search range, plus an optional fit.

    ``tv`` is scaled to max 1 when ``normalized`` is set; the scaling does
    not move the argmax, so fitting either form gives the same estimate.
    """

    cn2: np.ndarray
    tv: np.ndarray
    search_range: tuple[float, float]
    normalized: bool = False
    poly: Polynomial | None = None

    def normalize(self) -> "TvCurve":
        """Return a copy with tv scaled to max 1 (no-op if degenerate)."""
        peak = float(self.tv.max())
        if self.normalized or peak <= 0:
            return TvCurve(self.cn2.copy(), self.tv.copy(), self.search_range,
                           self.normalized, self.poly)
        return TvCurve(self.cn2.copy(), self.tv / peak, self.search_range, True, self.poly)


class Cn2Estimate(NamedTuple):
    value: float
    saturated: bool
    poly: Polynomial


class BlindResult(NamedTuple):
    restored: np.ndarray
    estimate: Cn2Estimate
    curve: TvCurve


def total_variation(image) -> float:
    """Discrete isotropic total variation, sum of sqrt(dx^2 + dy^2).

    Forward differences with replicated (zero-difference) last row and
    column, so constants have TV exactly 0; homogeneous of degree 1.
    """
    u = np.asarray(image, dtype=float)
    if u.ndim != 2 or u.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {u.shape}")
    dx = np.diff(u, axis=1, append=u[:, -1:])
    dy = np.diff(u, axis=0, append=u[-1:, :])
    return float(np.hypot(dx, dy).sum())


def sample_tv_curve(blurred, optics: OpticalParams, config: BlindConfig,
                    n_threads: int = 1) -> TvCurve:
    """Deconvolve at ``n_samples`` equidistant Cn2 candidates and record
    the TV of each restoration.

    ``optics.cn2`` is ignored; each sample replaces it with a candidate.
    Samples are independent pure computations and are evaluated by a
    thread pool when ``n_threads`` > 1; results are assembled in ascending
    candidate order, so the curve does not depend on the thread count.
    The curve is normalized to max 1 unless it is degenerate (all ~0).
    """
    candidates = np.linspace(config.cn2_min, config.cn2_max, config.n_samples)

    def one(c):
        try:
            restored = deconvolve_fried(blurred, replace(optics, cn2=float(c)), config.solver)
            return total_variation(restored)
        except Exception as exc:
            raise RuntimeError(f"TV curve sample at cn2={c:.6e} failed: {exc}") from exc

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            tv = np.array(list(pool.map(one, candidates)))
    else:
        tv = np.array([one(c) for c in candidates])

    curve = TvCurve(cn2=candidates, tv=tv,
                    search_range=(config.cn2_min, config.cn2_max))
    if tv.max() > UNINFORMATIVE_TV:
        curve = curve.normalize()
    return curve


def fit_polynomial(x, y, degree: int) -> Polynomial:
    """Least-squares polynomial fit with the abscissa mapped to [-1, 1].

    Returns a numpy ``Polynomial`` holding the coefficients in the scaled
    basis together with the affine domain map (raw Cn2 abscissae around
    1e-14 make an unscaled Vandermonde system numerically singular).

    Raises
    ------
    ValueError
        If the x values are not distinct (rank-deficient system) or there
        are fewer than degree + 1 points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be 1-D of equal length, got {x.shape} and {y.shape}")
    if x.size < degree + 1:
        raise ValueError(f"need at least degree + 1 = {degree + 1} points, got {x.size}")
    if np.unique(x).size != x.size:
        raise ValueError("x values must be distinct (rank-deficient fit otherwise)")
    return Polynomial.fit(x, y, deg=degree)


def estimate_cn2(curve: TvCurve, poly_degree: int = 5,
                 grid_points: int = DEFAULT_GRID_POINTS) -> Cn2Estimate:
    """Fit the curve and return the argmax of the fit over a dense grid.

    The grid spans the curve's search range with ``grid_points`` samples
    (>= 1000 for resolution far below the estimation error).  An argmax on
    either endpoint sets the ``saturated`` flag.  If the curve carries no
    fit yet, one is computed and stored back on it.

    Raises
    ------
    UninformativeImageError
        If the curve's raw TV values are all (numerically) zero.
    ValueError
        If the curve has fewer than poly_degree + 1 samples.
    """
    if not curve.normalized and curve.tv.max() <= UNINFORMATIVE_TV:
        raise UninformativeImageError(
            "uninformative image: TV curve is identically zero, no estimate possible"
        )
    if grid_points < 1000:
        raise ValueError(f"grid_points must be >= 1000, got {grid_points}")
    poly = curve.poly
    if poly is None:
        poly = fit_polynomial(curve.cn2, curve.tv, poly_degree)
        curve.poly = poly
    lo, hi = curve.search_range
    grid = np.linspace(lo, hi, grid_points)
    idx = int(np.argmax(poly(grid)))
    return Cn2Estimate(
        value=float(grid[idx]),
        saturated=(idx == 0 or idx == grid_points - 1),
        poly=poly,
    )


def blind_deconvolve(blurred, optics: OpticalParams, config: BlindConfig,
                     n_threads: int = 1) -> BlindResult:
    """Full blind pipeline: TV curve -> Cn2 estimate -> final deconvolution.

    ``optics.cn2`` is ignored (the whole point is that it is unknown).
    Returns the restored image, the estimate (with saturation flag) and
    the sampled curve carrying its polynomial fit.
    """
    curve = sample_tv_curve(blurred, optics, config, n_threads=n_threads)
    est = estimate_cn2(curve, poly_degree=config.poly_degree)
    restored = deconvolve_fried(blurred, replace(optics, cn2=est.value), config.solver)
    return BlindResult(restored=restored, estimate=est, curve=curve)


def write_tv_curve_csv(path, curve: TvCurve) -> None:
    """Write the curve as CSV with header ``cn2,tv_normalized,poly_fit``.

    ``tv_normalized`` is the curve scaled to max 1; ``poly_fit`` is the
    fitted polynomial evaluated at the sample abscissae on the same scale
    (empty column if the curve has no fit yet).
    """
    norm = curve.normalize()
    scale = 1.0
    if curve.poly is not None and not curve.normalized:
        peak = float(curve.tv.max())
        scale = 1.0 / peak if peak > 0 else 1.0
    with open(path, "w", newline="") as f:
        f.write("cn2,tv_normalized,poly_fit\n")
        for i, c in enumerate(norm.cn2):
            fit = repr(float(curve.poly(c) * scale)) if curve.poly is not None else ""
            f.write(f"{float(c)!r},{float(norm.tv[i])!r},{fit}\n")
