"""
sRGB <-> Oklab conversion and perceptual color distances.

Images are numpy arrays of shape (H, W, 3). RGB inputs are 8-bit
gamma-encoded sRGB; Oklab outputs are float64 (L, a, b) triples with
L in [0, 1]. All math runs in float64.

Reference: https://bottosson.github.io/posts/oklab/
"""

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError

# linear sRGB -> LMS
_M1 = np.array([
    [0.4122214708, 0.5363325363, 0.0514459929],
    [0.2119034982, 0.6806995451, 0.1073969566],
    [0.0883024619, 0.2817188376, 0.6299787005],
])

# cube-root LMS -> Lab
_M2 = np.array([
    [0.2104542553, 0.7936177850, -0.0040720468],
    [1.9779984951, -2.4285922050, 0.4505937099],
    [0.0259040371, 0.7827717662, -0.8086757660],
])

_M1_INV = np.linalg.inv(_M1)
_M2_INV = np.linalg.inv(_M2)

# Rec. 709 luminance weights, applied to linear RGB.
LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


def _check_rgb(image):
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise InvalidInputError(f"expected an (H, W, 3) RGB array, got shape {image.shape}")
    if image.shape[0] == 0 or image.shape[1] == 0:
        raise InvalidInputError("image has no pixels")
    return image


def srgb_to_linear(image):
    """Decode 8-bit sRGB code values to linear light in [0, 1]."""
    v = np.asarray(image, dtype=np.float64) / 255.0
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(linear):
    """Encode linear light to sRGB, returned as float code values in [0, 255]."""
    v = np.clip(np.asarray(linear, dtype=np.float64), 0.0, 1.0)
    v = np.where(v <= 0.0031308, v * 12.92, 1.055 * v ** (1.0 / 2.4) - 0.055)
    return v * 255.0


def linear_to_oklab(linear):
    lms = linear @ _M1.T
    return np.cbrt(lms) @ _M2.T


def oklab_to_linear(lab):
    lms = np.asarray(lab, dtype=np.float64) @ _M2_INV.T
    return (lms ** 3) @ _M1_INV.T


def rgb_to_oklab(image):
    """Convert an 8-bit sRGB image (H, W, 3) to Oklab, pixel by pixel."""
    image = _check_rgb(image)
    return linear_to_oklab(srgb_to_linear(image))


def oklab_to_rgb(lab):
    """Inverse of :func:`rgb_to_oklab`; returns rounded uint8 sRGB."""
    rgb = linear_to_srgb(oklab_to_linear(lab))
    return np.rint(rgb).astype(np.uint8)


def grayscale(image):
    """Linear-light luminance of an 8-bit sRGB image, values in [0, 1]."""
    image = _check_rgb(image)
    return srgb_to_linear(image) @ LUMA_WEIGHTS


def delta_e(p1, p2):
    """Euclidean distance between two Oklab colors."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    return float(np.sqrt(np.sum((p1 - p2) ** 2)))


def delta_e_map(x, y):
    """Per-pixel Oklab distance between two equally sized Oklab images."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"image shapes differ: {x.shape} vs {y.shape}")
    if x.ndim != 3 or x.shape[2] != 3:
        raise InvalidInputError(f"expected (H, W, 3) Oklab arrays, got {x.shape}")
    return np.sqrt(np.sum((x - y) ** 2, axis=2))


def ok_term(x, y):
    """Mean per-pixel Oklab distance. Not clamped; sRGB inputs stay below ~1.05."""
    dmap = delta_e_map(x, y)
    if dmap.size == 0:
        raise InvalidInputError("image has no pixels")
    return float(dmap.mean())
