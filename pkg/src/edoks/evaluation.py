"""
Human-judgement evaluation: 2AFC accuracy, JND group means, MOS
correlations with a 5-parameter logistic mapping, and the alpha sweep.

Manifest CSVs are UTF-8 with a header row; image paths are relative to
the manifest's directory.

    2AFC:  ref_path,p0_path,p1_path,judge       (judge = fraction preferring p1)
    JND:   ref_path,dist_path,votes_same,judges
"""

import csv
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from scipy import optimize, special, stats

from .errors import InvalidInputError
from .metric import MetricConfig, combine, similarity, terms

TWOAFC_COLUMNS = ("ref_path", "p0_path", "p1_path", "judge")
JND_COLUMNS = ("ref_path", "dist_path", "votes_same", "judges")


@dataclass
class TripletSample:
    ref: Any
    p0: Any
    p1: Any
    human_choice: float

    def __post_init__(self):
        if not 0.0 <= self.human_choice <= 1.0:
            raise InvalidInputError(f"human choice must lie in [0, 1], got {self.human_choice}")


@dataclass
class JndSample:
    ref: Any
    distorted: Any
    votes_same: int
    judges: int = 3

    def __post_init__(self):
        if self.judges < 1 or not 0 <= self.votes_same <= self.judges:
            raise InvalidInputError(f"votes_same={self.votes_same} out of range for {self.judges} judges")

    @property
    def mos(self):
        return self.votes_same / self.judges


@dataclass(frozen=True)
class MosRecord:
    mos: float
    metric_score: float


@dataclass(frozen=True)
class LogisticFit:
    beta: tuple
    residual: float
    degenerate: bool = False

    def __call__(self, x):
        return logistic(np.asarray(x, dtype=np.float64), *self.beta)


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- manifests ---------------------------------------------------------------

def read_manifest_rows(path, columns):
    """Rows of a manifest as dicts, original values untouched.

    Returns (rows, base) where ``base`` is the directory relative paths
    resolve against.
    """
    base = os.path.dirname(os.path.abspath(path))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in columns if c not in (reader.fieldnames or ())]
        if missing:
            raise InvalidInputError(f"{path}: manifest is missing columns {missing}")
        return list(reader), base


def resolve(base, rel):
    return os.path.normpath(os.path.join(base, rel))


def read_twoafc_manifest(path):
    rows, base = read_manifest_rows(path, TWOAFC_COLUMNS)
    return [TripletSample(resolve(base, r["ref_path"]), resolve(base, r["p0_path"]),
                          resolve(base, r["p1_path"]), float(r["judge"])) for r in rows]


def read_jnd_manifest(path):
    rows, base = read_manifest_rows(path, JND_COLUMNS)
    return [JndSample(resolve(base, r["ref_path"]), resolve(base, r["dist_path"]),
                      int(r["votes_same"]), int(r["judges"])) for r in rows]


def _image(obj):
    if isinstance(obj, (str, os.PathLike)):
        from .io import load_rgb
        return load_rgb(obj)
    return np.asarray(obj)


# -- 2AFC ----------------------------------------------------------------------

def twoafc_credit(score0, score1, human_choice):
    """Credit for one triplet given similarity scores of p0 and p1 to the reference."""
    if score1 > score0:
        return human_choice
    if score0 > score1:
        return 1.0 - human_choice
    return 0.5


def twoafc_accuracy(samples, scorer, jobs=1):
    """Mean agreement credit; ``scorer(ref, img)`` returns a similarity."""
    samples = list(samples)
    if not samples:
        raise InvalidInputError("2AFC accuracy needs at least one sample")

    def one(s):
        ref = _image(s.ref)
        return scorer(ref, _image(s.p0)), scorer(ref, _image(s.p1))

    scores = _map(one, samples, jobs)
    credits = [twoafc_credit(s0, s1, s.human_choice) for (s0, s1), s in zip(scores, samples)]
    return float(np.mean(credits))


# -- JND -------------------------------------------------------------------------

def jnd_group_means(samples, scores):
    """Mean score over unanimous-same and unanimous-not-same samples."""
    same = [sc for s, sc in zip(samples, scores) if s.votes_same == s.judges]
    not_same = [sc for s, sc in zip(samples, scores) if s.votes_same == 0]
    if not same:
        raise InvalidInputError("no unanimous 'same' samples")
    if not not_same:
        raise InvalidInputError("no unanimous 'not same' samples")
    return float(np.mean(same)), float(np.mean(not_same))


def mos_records(samples, scores):
    return [MosRecord(s.mos, float(sc)) for s, sc in zip(samples, scores)]


def score_pairs(pairs, cfg=None):
    """(EMD, OK) terms for each (ref, distorted) pair, in input order."""
    cfg = cfg or MetricConfig()
    inner = replace(cfg, jobs=1)
    return _map(lambda p: terms(_image(p[0]), _image(p[1]), inner), list(pairs), cfg.jobs)


# -- statistics ------------------------------------------------------------------

def logistic(x, b1, b2, b3, b4, b5):
    # 1 / (1 + exp(b2 (x - b3))) written with expit to avoid overflow.
    return b1 * (0.5 - special.expit(-b2 * (x - b3))) + b4 * x + b5


def _sse(beta, x, y):
    with np.errstate(over="ignore", invalid="ignore"):
        r = logistic(x, *beta) - y
    v = float(np.dot(r, r))
    return v if math.isfinite(v) else math.inf


def fit_logistic(scores, mos, restarts=5, seed=0):
    """Least-squares fit of the 5-parameter logistic mapping.

    Nelder-Mead from the standard initial guess, restarted from perturbed
    copies of the best point so far. A plain affine fit is included as a
    seed so that linear relations are matched exactly, and the winner is
    polished with Levenberg-Marquardt. Scores are standardized while
    fitting; the returned parameters are in the original score units.
    """
    x = np.asarray(scores, dtype=np.float64)
    y = np.asarray(mos, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("scores and mos must be 1-D and of equal length")
    if len(x) < 5:
        raise InvalidInputError(f"logistic fit needs at least 5 points, got {len(x)}")
    if np.all(x == x[0]):
        warnings.warn("constant scores: logistic fit degenerates to a constant", stacklevel=2)
        beta = (0.0, 0.0, float(x[0]), 0.0, float(y.mean()))
        return LogisticFit(beta, _sse(beta, x, y), degenerate=True)

    mu, sd = float(x.mean()), float(x.std())
    z = (x - mu) / sd
    start = np.array([np.ptp(y), 1.0, 0.0, 0.0, y.mean()])
    slope, intercept = np.polyfit(z, y, 1)
    affine = np.array([0.0, 1.0, 0.0, slope, intercept])

    rng = np.random.default_rng(seed)
    opts = {"xatol": 1e-10, "fatol": 1e-14, "maxfev": 4000, "adaptive": True}

    def simplex(guess):
        return optimize.minimize(_sse, guess, args=(z, y), method="Nelder-Mead", options=opts)

    best = min((simplex(g) for g in (start, affine)), key=lambda r: r.fun)
    for _ in range(restarts):
        scale = np.maximum(np.abs(best.x), 1e-3) * 0.1
        res = simplex(best.x + rng.normal(size=5) * scale)
        if res.fun < best.fun:
            best = res
    b, fun = best.x, best.fun
    with np.errstate(over="ignore", invalid="ignore"):
        polished = optimize.least_squares(lambda beta: logistic(z, *beta) - y, b, method="lm",
                                          xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if np.all(np.isfinite(polished.x)) and _sse(polished.x, z, y) < fun:
        b = polished.x
    b1, b2, b3, b4, b5 = (float(v) for v in b)
    beta = (b1, b2 / sd, mu + b3 * sd, b4 / sd, b5 - b4 * mu / sd)
    return LogisticFit(beta, _sse(beta, x, y))


def correlations(scores, mos):
    """(SROCC, KROCC, PLCC). Rank coefficients are tie-corrected (Kendall tau-b);
    PLCC is computed after the logistic mapping. Undefined values are NaN."""
    x = np.asarray(scores, dtype=np.float64)
    y = np.asarray(mos, dtype=np.float64)
    if x.shape != y.shape or len(x) < 3:
        raise InvalidInputError("correlations need two equal-length lists of at least 3 values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        return math.nan, math.nan, math.nan
    rho = srocc(x, y)
    krocc = float(stats.kendalltau(x, y, variant="b").statistic)
    if len(x) >= 5:
        mapped = fit_logistic(x, y)(x)
    else:
        mapped = x
    if np.all(mapped == mapped[0]):
        plcc = math.nan
    else:
        plcc = float(stats.pearsonr(mapped, y).statistic)
    return rho, krocc, plcc


def srocc(scores, mos):
    x = np.asarray(scores, dtype=np.float64)
    y = np.asarray(mos, dtype=np.float64)
    if np.all(x == x[0]) or np.all(y == y[0]):
        return math.nan
    return float(stats.spearmanr(x, y).statistic)


# -- alpha sweep -----------------------------------------------------------------

def alpha_grid(step):
    if not 0 < step <= 1:
        raise InvalidInputError(f"step must lie in (0, 1], got {step}")
    n = int(round(1.0 / step))
    grid = [round(i * step, 10) for i in range(n + 1) if i * step <= 1 + 1e-9]
    if grid[-1] < 1.0:
        grid.append(1.0)
    return grid


def alpha_sweep(term_pairs, mos, alphas, c=1e-12):
    """SROCC of EDOKS against MOS for each alpha, reusing cached (EMD, OK) terms."""
    alphas = list(alphas)
    if not alphas:
        raise InvalidInputError("alpha grid is empty")
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise InvalidInputError("alpha grid must lie within [0, 1]")
    out = []
    for a in alphas:
        scores = [similarity(combine(e, o, a), c) for e, o in term_pairs]
        out.append((a, srocc(scores, mos)))
    return out
