import os
import warnings

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError


def load_rgb(path):
    """Decode a PNG/JPEG file to an (H, W, 3) uint8 sRGB array.

    Alpha channels are dropped with a warning; grayscale and palette
    images are expanded to RGB.
    """
    try:
        with Image.open(path) as im:
            im.load()
            if "A" in im.getbands() or (im.mode == "P" and "transparency" in im.info):
                warnings.warn(f"{path}: alpha channel ignored", stacklevel=2)
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64)
                arr = np.rint(arr / (65535.0 if arr.max() > 255 else 255.0) * 255.0).astype(np.uint8)
                return np.repeat(arr[:, :, None], 3, axis=2)
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except FileNotFoundError as e:
        raise DecodeError(f"{path}: no such file") from e
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise DecodeError(f"{path}: cannot decode image ({e})") from e


def save_rgb(path, image):
    Image.fromarray(np.asarray(image, dtype=np.uint8), "RGB").save(path, format="PNG", optimize=False)


def save_gray_map(path, values):
    """Write a [0, 1] float map as an 8-bit grayscale PNG."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    Image.fromarray(np.rint(v * 255.0).astype(np.uint8), "L").save(path, format="PNG", optimize=False)


def save_raw_map(path, values):
    np.save(path, np.asarray(values, dtype=np.float64), allow_pickle=False)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
