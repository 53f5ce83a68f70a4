"""
Gabor filter dictionary and per-patch texture energies.

A filter is a complex Gabor kernel: a Gaussian envelope times a complex
carrier exp(i 2 pi f x'), where f is the scale in cycles/pixel and x' is
the coordinate along the orientation angle (x = column, y = row). The
real (cosine) part is made exactly zero-mean so flat regions give no
response. The envelope is normalized to unit sum, which gives every
filter unit gain at its centre frequency.

Convolutions are "same" sized with reflective borders and are done in
the Fourier domain, all filters of a bank at once.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import fft

from .errors import InvalidInputError

DEFAULT_SCALES = (0.1, 0.2, 0.3, 0.4)
DEFAULT_ORIENTATIONS = (0.0, 30.0, 60.0, 90.0, 120.0, 150.0)

# sigma = SIGMA_PER_WAVELENGTH * wavelength gives ~1 octave bandwidth.
SIGMA_PER_WAVELENGTH = 0.56

# Below this accumulated energy a patch counts as flat.
FLAT_ENERGY = 1e-12


@dataclass(frozen=True)
class GaborParams:
    scale: float
    orientation: float
    kernel_size: int
    sigma: float

    def __post_init__(self):
        if self.scale <= 0:
            raise InvalidInputError(f"scale must be positive, got {self.scale}")
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise InvalidInputError(f"kernel_size must be odd and >= 3, got {self.kernel_size}")
        if self.sigma <= 0:
            raise InvalidInputError(f"sigma must be positive, got {self.sigma}")

    @property
    def wavelength(self):
        return 1.0 / self.scale

    def capped(self, side):
        """Same filter with the kernel shrunk to fit a ``side`` x ``side`` raster."""
        limit = side if side % 2 == 1 else side - 1
        if self.kernel_size <= limit:
            return self
        if limit < 3:
            raise InvalidInputError(f"raster side {side} is too small for any Gabor kernel")
        return GaborParams(self.scale, self.orientation, limit, self.sigma)


def default_params(scale, orientation):
    sigma = SIGMA_PER_WAVELENGTH / scale
    size = math.ceil(6.0 * sigma + 1.0)
    if size % 2 == 0:
        size += 1
    return GaborParams(float(scale), float(orientation), size, sigma)


def build_dictionary(scales=DEFAULT_SCALES, orientations=DEFAULT_ORIENTATIONS):
    """Cartesian product of scales and orientations, scale-major."""
    scales = list(scales)
    orientations = list(orientations)
    if not scales or not orientations:
        raise InvalidInputError("scales and orientations must be nonempty")
    for s in scales:
        if not s > 0:
            raise InvalidInputError(f"scales must be positive, got {s}")
    return [default_params(s, o) for s in scales for o in orientations]


def dictionary_shape(dictionary):
    """(number of scales, number of orientations) of a scale-major dictionary."""
    scales = list(dict.fromkeys(p.scale for p in dictionary))
    n_s = len(scales)
    if n_s == 0 or len(dictionary) % n_s:
        return (1, len(dictionary))
    return (n_s, len(dictionary) // n_s)


def gabor_kernel(params):
    """Complex kernel (real = cosine phase, imag = sine phase)."""
    half = params.kernel_size // 2
    y, x = np.mgrid[-half:half + 1, -half:half + 1].astype(np.float64)
    theta = math.radians(params.orientation)
    xr = x * math.cos(theta) + y * math.sin(theta)
    yr = -x * math.sin(theta) + y * math.cos(theta)
    envelope = np.exp(-(xr ** 2 + yr ** 2) / (2.0 * params.sigma ** 2))
    envelope /= envelope.sum()
    phase = 2.0 * math.pi * params.scale * xr
    real = envelope * np.cos(phase)
    imag = envelope * np.sin(phase)
    real -= real.mean()
    imag -= imag.mean()
    return real + 1j * imag


class FilterBank:
    """Precomputed kernel spectra for rasters of one fixed shape.

    ``responses`` returns an array of shape (n_filters, H, W) holding the
    complex filter outputs F_real + i F_imag.
    """

    def __init__(self, dictionary, shape):
        self.shape = (int(shape[0]), int(shape[1]))
        side = min(self.shape)
        self.dictionary = [p.capped(side) for p in dictionary]
        if not self.dictionary:
            raise InvalidInputError("empty filter dictionary")
        frame = max(p.kernel_size for p in self.dictionary)
        self.pad = frame // 2
        self.frame = frame
        h, w = self.shape
        self.fft_shape = (h + 2 * self.pad, w + 2 * self.pad)
        spectra = np.zeros((len(self.dictionary),) + self.fft_shape, dtype=np.complex128)
        for n, p in enumerate(self.dictionary):
            k = gabor_kernel(p)
            off = (frame - p.kernel_size) // 2
            spectra[n, off:off + p.kernel_size, off:off + p.kernel_size] = k
        self.spectra = fft.fft2(spectra, axes=(1, 2))

    def responses(self, raster):
        raster = np.asarray(raster, dtype=np.float64)
        if raster.shape != self.shape:
            raise InvalidInputError(f"raster shape {raster.shape} does not match bank shape {self.shape}")
        padded = np.pad(raster, self.pad, mode="symmetric")
        spectrum = fft.fft2(padded)
        out = fft.ifft2(self.spectra * spectrum[None], axes=(1, 2))
        # Circular wrap only touches the first frame-1 rows/cols.
        lo = self.frame - 1
        h, w = self.shape
        return out[:, lo:lo + h, lo:lo + w]

    def magnitudes(self, raster):
        return np.abs(self.responses(raster))

    def energies(self, raster):
        """Unnormalized energies sum(|F|^2), one per filter."""
        r = self.responses(raster)
        return np.sum(r.real ** 2 + r.imag ** 2, axis=(1, 2))


@dataclass(frozen=True)
class GaborResponse:
    real: np.ndarray
    imag: np.ndarray
    magnitude: np.ndarray


def _check_patch(patch):
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 2 or patch.shape[0] != patch.shape[1]:
        raise InvalidInputError(f"patch must be a square 2-D raster, got shape {patch.shape}")
    return patch


def apply_gabor(patch, params):
    patch = _check_patch(patch)
    if patch.shape[0] < params.kernel_size:
        raise InvalidInputError(
            f"patch side {patch.shape[0]} is smaller than kernel size {params.kernel_size}")
    r = FilterBank([params], patch.shape).responses(patch)[0]
    return GaborResponse(r.real.copy(), r.imag.copy(), np.abs(r))


def normalize_energy(raw, shape):
    total = float(np.sum(raw))
    if total < FLAT_ENERGY:
        return np.full(shape, 1.0 / (shape[0] * shape[1]))
    return (np.asarray(raw) / total).reshape(shape)


def patch_energy(patch, dictionary, bank=None):
    """Normalized energy matrix (n_scales x n_orientations) of one patch.

    Flat patches, whose total energy is below ``FLAT_ENERGY``, get the
    uniform matrix.
    """
    patch = _check_patch(patch)
    if bank is None:
        bank = FilterBank(dictionary, patch.shape)
    return normalize_energy(bank.energies(patch), dictionary_shape(dictionary))


def patch_energies(patches, dictionary, jobs=1):
    """Energy matrices for a list of equally sized patches, in input order."""
    patches = [_check_patch(p) for p in patches]
    if not patches:
        return []
    bank = FilterBank(dictionary, patches[0].shape)
    shape = dictionary_shape(dictionary)

    def one(p):
        return normalize_energy(bank.energies(p), shape)

    if jobs <= 1 or len(patches) == 1:
        return [one(p) for p in patches]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, patches))
