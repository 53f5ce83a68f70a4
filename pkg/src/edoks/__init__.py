"""EDOKS: texture (EMD over Gabor signatures) plus Oklab color similarity."""

from .color import delta_e, delta_e_map, ok_term, oklab_to_rgb, rgb_to_oklab
from .emd import EmdResult, FlowMatrix, emd, ground_distance
from .errors import ConfigError, DecodeError, DimensionMismatchError, InvalidInputError, SolverError
from .gabor import GaborParams, apply_gabor, build_dictionary, patch_energy
from .metric import (MetricConfig, MetricReport, edok, edoks, overlay_map,
                     texture_diff_map)
from .signature import Signature, meng_hee_heng, signature, split_patches

__version__ = "0.1.0"
