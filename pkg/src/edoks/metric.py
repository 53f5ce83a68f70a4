"""
EDOK / EDOKS scores and their explanation maps.

The score combines a texture term (EMD between Gabor signatures) with a
color term (mean Oklab distance):

    EDOK  = alpha * EMD + (1 - alpha) * OK
    EDOKS = 1 / (EDOK + c)
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import gabor
from .color import delta_e_map, grayscale, ok_term, rgb_to_oklab
from .emd import GROUND_DISTANCES, emd
from .errors import ConfigError, DimensionMismatchError, InvalidInputError
from .signature import DEFAULT_PATCH_SIZE, SPAWN_RATIO, signature

DEFAULT_ALPHA = 0.5
DEFAULT_C = 1e-12
MAP_FLOOR = 1e-9


@dataclass(frozen=True)
class MetricConfig:
    alpha: float = DEFAULT_ALPHA
    patch_size: int = DEFAULT_PATCH_SIZE
    c: float = DEFAULT_C
    scales: tuple = gabor.DEFAULT_SCALES
    orientations: tuple = gabor.DEFAULT_ORIENTATIONS
    spawn_ratio: float = SPAWN_RATIO
    ground: str = "l1"
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        object.__setattr__(self, "orientations", tuple(float(o) for o in self.orientations))
        self.validate()

    def validate(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.c > 0:
            raise ConfigError(f"c must be positive, got {self.c}")
        if int(self.patch_size) != self.patch_size or self.patch_size < 3:
            raise ConfigError(f"patch size must be an integer >= 3, got {self.patch_size}")
        if not self.scales or any(not s > 0 for s in self.scales):
            raise ConfigError(f"scales must be a nonempty list of positive frequencies, got {self.scales}")
        if not self.orientations:
            raise ConfigError("orientations must be nonempty")
        if not self.spawn_ratio > 0:
            raise ConfigError(f"spawn ratio must be positive, got {self.spawn_ratio}")
        if self.ground not in GROUND_DISTANCES:
            raise ConfigError(f"unknown ground distance {self.ground!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    def dictionary(self):
        return gabor.build_dictionary(self.scales, self.orientations)

    def echo(self):
        """Config fields that affect scores, for embedding in outputs."""
        d = asdict(self)
        d.pop("jobs")
        d["p"] = d.pop("patch_size")
        d["scales"] = list(d["scales"])
        d["orientations"] = list(d["orientations"])
        return d


@dataclass
class MetricReport:
    emd_value: float
    ok_value: float
    edok_value: float
    edoks_value: float
    config: MetricConfig
    texture_diff: Optional[np.ndarray] = field(default=None, repr=False)
    color_diff: Optional[np.ndarray] = field(default=None, repr=False)
    overlay: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self):
        """JSON-ready record with the frozen key names."""
        return {
            "emd": self.emd_value,
            "ok": self.ok_value,
            "edok": self.edok_value,
            "edoks": self.edoks_value,
            "alpha": self.config.alpha,
            "p": self.config.patch_size,
            "c": self.config.c,
            "scales": list(self.config.scales),
            "orientations": list(self.config.orientations),
        }


def combine(emd_value, ok_value, alpha):
    """Convex combination of the two terms, kept inside [min, max] under rounding."""
    v = alpha * emd_value + (1.0 - alpha) * ok_value
    lo, hi = min(emd_value, ok_value), max(emd_value, ok_value)
    return min(max(v, lo), hi)


def similarity(edok_value, c=DEFAULT_C):
    return 1.0 / (edok_value + c)


def _check_pair(x, y):
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != 3 or x.shape[2] != 3 or y.ndim != 3 or y.shape[2] != 3:
        raise InvalidInputError(f"expected (H, W, 3) RGB arrays, got {x.shape} and {y.shape}")
    if x.shape != y.shape:
        raise DimensionMismatchError(f"image sizes differ: {x.shape[1]}x{x.shape[0]} vs {y.shape[1]}x{y.shape[0]}")
    return x, y


def texture_term(x, y, cfg):
    d = cfg.dictionary()
    sx = signature(x, cfg.patch_size, d, cfg.spawn_ratio, jobs=cfg.jobs)
    sy = signature(y, cfg.patch_size, d, cfg.spawn_ratio, jobs=cfg.jobs)
    return emd(sx, sy, GROUND_DISTANCES[cfg.ground]).value


def color_term(x, y):
    return ok_term(rgb_to_oklab(x), rgb_to_oklab(y))


def terms(x, y, cfg=None):
    """(EMD, OK) for one image pair; the two pipelines run concurrently."""
    cfg = cfg or MetricConfig()
    x, y = _check_pair(x, y)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            t = pool.submit(texture_term, x, y, cfg)
            c = pool.submit(color_term, x, y)
            return t.result(), c.result()
    return texture_term(x, y, cfg), color_term(x, y)


def edok(x, y, cfg=None):
    cfg = cfg or MetricConfig()
    e, o = terms(x, y, cfg)
    return combine(e, o, cfg.alpha)


def edoks(x, y, cfg=None, maps=False):
    """Full report for one pair. ``maps=True`` also fills the three rasters."""
    cfg = cfg or MetricConfig()
    e, o = terms(x, y, cfg)
    d = combine(e, o, cfg.alpha)
    report = MetricReport(e, o, d, similarity(d, cfg.c), cfg)
    if maps:
        report.texture_diff = texture_diff_map(x, y, cfg)
        report.color_diff = delta_e_map(rgb_to_oklab(x), rgb_to_oklab(y))
        report.overlay = overlay_map(report.texture_diff, report.color_diff)
    return report

def normalize_map(m, floor=0.0):
    """Scale to a peak of 1. Maps whose peak is at or below ``floor`` become zeros."""
    m = np.asarray(m, dtype=np.float64)
    top = m.max() if m.size else 0.0
    if top <= floor:
        return np.zeros_like(m)
    return m / top


def texture_diff_map(x, y, cfg=None):
    """Mean over all filters of ||F_x| - |F_y||, on whole-image responses, scaled to [0, 1]."""
    cfg = cfg or MetricConfig()
    x, y = _check_pair(x, y)
    gx, gy = grayscale(x), grayscale(y)
    dictionary = cfg.dictionary()
    diff = np.zeros(gx.shape)
    # One filter at a time keeps memory at a single spectrum for large images.
    for params in dictionary:
        bank = gabor.FilterBank([params], gx.shape)
        diff += np.abs(bank.magnitudes(gx)[0] - bank.magnitudes(gy)[0])
    # FFT round-off on flat input sits near 1e-16; do not stretch it to 1.
    return normalize_map(diff / len(dictionary), floor=MAP_FLOOR)


def overlay_map(texture, color):
    """Pixelwise maximum of the two max-normalized maps."""
    texture = np.asarray(texture, dtype=np.float64)
    color = np.asarray(color, dtype=np.float64)
    if texture.shape != color.shape:
        raise DimensionMismatchError(f"map shapes differ: {texture.shape} vs {color.shape}")
    return np.maximum(normalize_map(texture), normalize_map(color))
