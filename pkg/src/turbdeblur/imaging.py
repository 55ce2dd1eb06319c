"""Grayscale image I/O, synthetic degradation and quality metrics.

Images are 2-D float64 arrays in [0, 1].  Supported containers: binary
PGM (P5, maxval 255) written bit-exact per the Netpbm spec, and PNG
(8- or 16-bit grayscale) via Pillow.  Color inputs are converted to
grayscale by the channel mean, with a warning.
"""

from __future__ import annotations

import math
import re
import warnings
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image

from .deconv import apply_blur
from .fried import OpticalParams, build_kernel


class ImageFormatError(Exception):
    """Unparseable or unsupported image file."""


def _parse_pgm(data: bytes, path) -> np.ndarray:
    # Header: "P5" <ws> width <ws> height <ws> maxval <single ws> raster.
    # '#' comments may appear inside the whitespace runs.
    pos = 0

    def err(msg):
        raise ImageFormatError(f"{path}: {msg} at byte {pos}")

    if data[:2] != b"P5":
        err("not a binary PGM (missing P5 magic)")
    pos = 2

    def token():
        nonlocal pos
        while pos < len(data):
            c = data[pos:pos + 1]
            if c == b"#":
                eol = data.find(b"\n", pos)
                if eol < 0:
                    err("unterminated comment")
                pos = eol + 1
            elif c.isspace():
                pos += 1
            else:
                break
        m = re.match(rb"\d+", data[pos:])
        if not m:
            err("expected an integer header field")
        pos += m.end()
        return int(m.group())

    width, height, maxval = token(), token(), token()
    if width <= 0 or height <= 0:
        err(f"invalid dimensions {width}x{height}")
    if not (0 < maxval <= 255):
        err(f"unsupported maxval {maxval} (only 8-bit PGM is handled)")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        err("missing whitespace before raster")
    pos += 1
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        pos = len(data)
        err(f"raster truncated (need {width * height} bytes)")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return pixels.astype(float) / maxval


def load_image(path) -> np.ndarray:
    """Load a grayscale image as a float array in [0, 1].

    Dispatches on content: PGM (P5) is parsed directly, everything else
    goes through Pillow.  Color images collapse to the channel mean with
    a warning.
    """
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        return _parse_pgm(data, path)
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise ImageFormatError(f"{path}: cannot decode image: {exc}") from exc
    if img.mode == "L":
        return np.asarray(img, dtype=float) / 255.0
    if img.mode in ("I;16", "I"):
        return np.asarray(img, dtype=float) / 65535.0
    if img.mode == "1":
        return np.asarray(img.convert("L"), dtype=float) / 255.0
    # Color (or alpha-carrying) input: average the channels.
    warnings.warn(f"{path}: color image converted to grayscale by channel mean")
    rgb = np.asarray(img.convert("RGB"), dtype=float)
    return rgb.mean(axis=2) / 255.0


def _quantize(image, maxval: int) -> np.ndarray:
    u = np.asarray(image, dtype=float)
    if u.ndim != 2 or u.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {u.shape}")
    clipped = np.clip(u, 0.0, 1.0)
    # Round half away from zero (values are non-negative after clipping).
    return np.floor(clipped * maxval + 0.5)


def save_image(image, path, bits: int = 8) -> None:
    """Clamp to [0, 1], quantize and write PGM or PNG (by extension).

    PGM is always 8-bit (maxval 255).  PNG supports ``bits`` of 8 or 16.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        if bits != 8:
            raise ValueError("PGM output is 8-bit only")
        q = _quantize(image, 255).astype(np.uint8)
        h, w = q.shape
        path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + q.tobytes())
    elif suffix == ".png":
        if bits == 8:
            Image.fromarray(_quantize(image, 255).astype(np.uint8), mode="L").save(path)
        elif bits == 16:
            Image.fromarray(_quantize(image, 65535).astype(np.uint16)).save(path)
        else:
            raise ValueError(f"bits must be 8 or 16, got {bits}")
    else:
        raise ValueError(f"unsupported output format {suffix!r} (use .pgm or .png)")


def simulate_blur(image, optics: OpticalParams, noise_sigma: float = 0.0,
                  seed: int = 0) -> np.ndarray:
    """Blur with the kernel built from ``optics``, plus optional seeded
    additive white Gaussian noise.

    ``noise_sigma = 0`` reproduces the pure blur bit-exactly (the RNG is
    never touched).
    """
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    u = np.asarray(image, dtype=float)
    kernel = build_kernel(optics, width=u.shape[1], height=u.shape[0])
    out = apply_blur(u, kernel)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        out = out + rng.normal(0.0, noise_sigma, size=out.shape)
    return out


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB with peak 1; inf for identical inputs."""
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def bundled_texture_path() -> Path:
    """Path of the bundled 256x256 textured test image."""
    return Path(resources.files("turbdeblur").joinpath("data/texture_256.pgm"))


def load_bundled_texture() -> np.ndarray:
    """The bundled textured test image used by the reproduction commands."""
    return load_image(bundled_texture_path())
