"""
Texture signatures: patch energies clustered into weighted centroids.
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np

from . import gabor
from .color import grayscale
from .errors import InvalidInputError

DEFAULT_PATCH_SIZE = 128
SPAWN_RATIO = 0.5
MAX_ITERATIONS = 100
# Points closer than this (L1) are treated as one texture at start-up.
SAME_POINT = 1e-9


@dataclass(frozen=True)
class Signature:
    centroids: np.ndarray  # (k, d)
    weights: np.ndarray  # (k,)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centroids, dtype=np.float64))
        w = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        if c.shape[0] == 0 or c.shape[0] != w.shape[0]:
            raise InvalidInputError(
                f"signature needs k >= 1 centroids and k weights, got {c.shape[0]} and {w.shape[0]}")
        if np.any(w < 0):
            raise InvalidInputError("signature weights must be nonnegative")
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "weights", w)

    @property
    def k(self):
        return len(self.weights)

    def to_dict(self):
        return {
            "k": self.k,
            "centroids": self.centroids.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        sig = cls(np.array(data["centroids"], dtype=np.float64), np.array(data["weights"], dtype=np.float64))
        if "k" in data and int(data["k"]) != sig.k:
            raise InvalidInputError(f"k={data['k']} does not match {sig.k} stored centroids")
        return sig

    def dumps(self):
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def split_patches(image, p):
    """Non-overlapping p x p tiles in row-major order; partial tiles are dropped."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise InvalidInputError(f"expected a 2-D raster, got shape {image.shape}")
    m, n = image.shape
    if p < 3:
        raise InvalidInputError(f"patch size must be >= 3, got {p}")
    if p > min(m, n):
        raise InvalidInputError(f"patch size {p} exceeds image size {m}x{n}")
    rows, cols = m // p, n // p
    return [image[r * p:(r + 1) * p, c * p:(c + 1) * p] for r in range(rows) for c in range(cols)]


def _l1(points, centers):
    return np.abs(points[:, None, :] - centers[None, :, :]).sum(axis=2)


def _mean_pairwise(centers):
    k = len(centers)
    d = _l1(centers, centers)
    return d[np.triu_indices(k, 1)].mean()


def meng_hee_heng(energies, spawn_ratio=SPAWN_RATIO, max_iter=MAX_ITERATIONS):
    """Cluster energy vectors, choosing the number of clusters on the fly.

    Starts from the two mutually farthest points (a single centre when all
    points coincide). Each round assigns points to their nearest centre
    under L1, recomputes means, and then spawns a new centre at the point
    farthest from its own centre if that distance exceeds ``spawn_ratio``
    times the mean distance between centres. Stops at a fixed point or
    after ``max_iter`` rounds. Ties go to the lowest index.

    Returns (centroids, weights, labels).
    """
    x = np.asarray([np.ravel(e) for e in energies], dtype=np.float64)
    if x.ndim != 2 or len(x) == 0:
        raise InvalidInputError("meng_hee_heng needs at least one energy vector")
    l = len(x)

    d = _l1(x, x)
    # argmax returns the first maximum in row-major order: lowest (i, j).
    i, j = np.unravel_index(np.argmax(d), d.shape)
    if d[i, j] <= SAME_POINT:
        centers = x[[0]]
    else:
        centers = x[sorted((i, j))]

    labels = None
    for _ in range(max_iter):
        new_labels = np.argmin(_l1(x, centers), axis=1)
        used = np.unique(new_labels)
        centers = np.array([x[new_labels == c].mean(axis=0) for c in used])
        new_labels = np.searchsorted(used, new_labels)

        spawned = False
        if len(centers) >= 2:
            spread = np.abs(x - centers[new_labels]).sum(axis=1)
            far = int(np.argmax(spread))
            if spread[far] > spawn_ratio * _mean_pairwise(centers):
                centers = np.vstack([centers, x[far]])
                spawned = True
        if not spawned and labels is not None and np.array_equal(labels, new_labels):
            labels = new_labels
            break
        labels = new_labels
        if spawned:
            labels = None

    if labels is None:
        labels = np.argmin(_l1(x, centers), axis=1)
        used = np.unique(labels)
        centers = np.array([x[labels == c].mean(axis=0) for c in used])
        labels = np.searchsorted(used, labels)

    counts = np.bincount(labels, minlength=len(centers))
    return centers, counts / l, labels


def effective_patch_size(shape, p):
    side = min(shape[:2])
    if p > side:
        warnings.warn(f"patch size {p} exceeds image side {side}; using {side}", stacklevel=3)
        return side
    return p


def signature(image, p=DEFAULT_PATCH_SIZE, dictionary=None, spawn_ratio=SPAWN_RATIO, jobs=1):
    """Texture signature of an 8-bit sRGB image (H, W, 3)."""
    if dictionary is None:
        dictionary = gabor.build_dictionary()
    gray = grayscale(image)
    p = effective_patch_size(gray.shape, p)
    patches = split_patches(gray, p)
    energies = gabor.patch_energies(patches, dictionary, jobs=jobs)
    centers, weights, _ = meng_hee_heng(energies, spawn_ratio=spawn_ratio)
    return Signature(centers, weights)
