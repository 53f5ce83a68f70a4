"""
Command-line front end.

    edoks compare A B [--emit-maps DIR]
    edoks batch MANIFEST
    edoks eval-2afc MANIFEST [--output DIR]
    edoks eval-jnd MANIFEST [--output DIR]
    edoks alpha-sweep MANIFEST [--step 0.01] [--output DIR]
    edoks maps A B --out DIR [--raw]

Exit codes: 0 ok, 1 some batch rows failed, 2 unreadable input,
3 image size mismatch, 4 invalid configuration.
"""

import argparse
import csv
import io as _io
import json
import math
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import evaluation as ev
from . import plotting
from .errors import ConfigError, DecodeError, DimensionMismatchError, InvalidInputError
from .io import ensure_dir, load_rgb, save_gray_map, save_raw_map
from .metric import MetricConfig, combine, edoks, similarity, terms

EXIT_OK = 0
EXIT_ROW_FAILURES = 1
EXIT_DECODE = 2
EXIT_DIMENSION = 3
EXIT_CONFIG = 4


def _float_list(text):
    try:
        return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError as e:
        raise ConfigError(f"cannot parse number list {text!r}") from e


def _default_jobs():
    env = os.environ.get("EDOKS_JOBS")
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"EDOKS_JOBS must be an integer, got {env!r}") from None


def config_from_args(args):
    kw = {}
    if args.alpha is not None:
        kw["alpha"] = args.alpha
    if args.patch_size is not None:
        kw["patch_size"] = args.patch_size
    if args.c is not None:
        kw["c"] = args.c
    if args.scales is not None:
        kw["scales"] = _float_list(args.scales)
    if args.orientations is not None:
        kw["orientations"] = _float_list(args.orientations)
    kw["jobs"] = args.jobs if args.jobs is not None else _default_jobs()
    return MetricConfig(**kw)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return _jsonable(v.item())
    return v


def dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if not math.isfinite(v) else repr(v)
    return str(v)


def _csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _config_cells(cfg):
    return [cfg.alpha, cfg.patch_size, cfg.c,
            ";".join(repr(s) for s in cfg.scales), ";".join(repr(o) for o in cfg.orientations)]


CONFIG_HEADER = ["alpha", "p", "c", "scales", "orientations"]


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_maps(outdir, x, y, report, raw=False):
    ensure_dir(outdir)
    for name, m in (("texture_diff", report.texture_diff), ("color_diff", report.color_diff),
                    ("overlay", report.overlay)):
        shown = m if name != "color_diff" else np.clip(m, 0.0, 1.0)
        save_gray_map(os.path.join(outdir, f"{name}.png"), shown)
        plotting.save_heatmap(os.path.join(outdir, f"{name}_heat.png"), shown)
        if raw:
            save_raw_map(os.path.join(outdir, f"{name}.npy"), m)
    plotting.explanation_figure(os.path.join(outdir, "explanation.png"), x, y, report)


# -- subcommands -----------------------------------------------------------------

def _load_pair(a, b):
    x, y = load_rgb(a), load_rgb(b)
    if x.shape != y.shape:
        raise DimensionMismatchError(
            f"image sizes differ: {a} is {x.shape[1]}x{x.shape[0]}, {b} is {y.shape[1]}x{y.shape[0]}")
    return x, y


def cmd_compare(args, cfg, out):
    x, y = _load_pair(args.a, args.b)
    report = edoks(x, y, cfg, maps=bool(args.emit_maps))
    if args.emit_maps:
        write_maps(args.emit_maps, x, y, report, raw=args.raw)
    record = report.to_dict()
    if args.format == "csv":
        out.write(_csv_text(list(record), [[record[k] if not isinstance(record[k], list)
                                            else ";".join(repr(v) for v in record[k]) for k in record]]))
    else:
        out.write(dumps(record))
    return EXIT_OK


def cmd_maps(args, cfg, out):
    x, y = _load_pair(args.a, args.b)
    report = edoks(x, y, cfg, maps=True)
    write_maps(args.out, x, y, report, raw=args.raw)
    out.write(dumps(report.to_dict()))
    return EXIT_OK


BATCH_HEADER = ["index", "ref_path", "dist_path", "emd", "ok", "edok", "edoks"] + CONFIG_HEADER + ["error"]


def cmd_batch(args, cfg, out):
    rows, base = ev.read_manifest_rows(args.manifest, ("ref_path", "dist_path"))
    inner = replace(cfg, jobs=1)

    def one(item):
        idx, row = item
        ref, dist = row.get("ref_path"), row.get("dist_path")
        try:
            if not ref or not dist:
                raise InvalidInputError("row is missing ref_path or dist_path")
            x, y = _load_pair(ev.resolve(base, ref), ev.resolve(base, dist))
            e, o = terms(x, y, inner)
            d = combine(e, o, cfg.alpha)
            return [idx, ref, dist, e, o, d, similarity(d, cfg.c)] + _config_cells(cfg) + [""]
        except InvalidInputError as exc:
            return [idx, ref, dist, None, None, None, None] + _config_cells(cfg) + [str(exc).replace("\n", " ")]

    results = ev._map(one, list(enumerate(rows)), cfg.jobs)
    failed = sum(1 for r in results if r[-1])
    if args.format == "json":
        out.write(dumps([dict(zip(BATCH_HEADER, r)) for r in results]))
    else:
        out.write(_csv_text(BATCH_HEADER, results))
    if failed:
        print(f"{failed} of {len(results)} rows failed", file=sys.stderr)
        return EXIT_ROW_FAILURES
    return EXIT_OK


def _external_scores(rows, column, lower_is_similar):
    try:
        vals = [float(r[column]) for r in rows]
    except KeyError:
        raise ConfigError(f"manifest has no column {column!r}") from None
    return [-v for v in vals] if lower_is_similar else vals


def cmd_eval_2afc(args, cfg, out):
    rows, base = ev.read_manifest_rows(args.manifest, ev.TWOAFC_COLUMNS)
    samples = [ev.TripletSample(ev.resolve(base, r["ref_path"]), ev.resolve(base, r["p0_path"]),
                                ev.resolve(base, r["p1_path"]), float(r["judge"])) for r in rows]
    if not samples:
        raise InvalidInputError("manifest has no samples")
    if args.score_columns:
        c0, c1 = (args.score_columns.split(",") + [""])[:2]
        s0 = _external_scores(rows, c0, args.lower_is_similar)
        s1 = _external_scores(rows, c1, args.lower_is_similar)
        scores = list(zip(s0, s1))
    else:
        pairs = [(s.ref, s.p0) for s in samples] + [(s.ref, s.p1) for s in samples]
        t = ev.score_pairs(pairs, cfg)
        sims = [similarity(combine(e, o, cfg.alpha), cfg.c) for e, o in t]
        scores = list(zip(sims[:len(samples)], sims[len(samples):]))
    credits = [ev.twoafc_credit(a, b, s.human_choice) for (a, b), s in zip(scores, samples)]
    summary = {
        "accuracy": float(np.mean(credits)),
        "n": len(samples),
        "scores": args.score_columns or "edoks",
        "config": cfg.echo(),
    }
    if args.output:
        ensure_dir(args.output)
        header = ["index", "ref_path", "p0_path", "p1_path", "judge", "score0", "score1", "credit"]
        table = [[i, r["ref_path"], r["p0_path"], r["p1_path"], s.human_choice, a, b, cr]
                 for i, (r, s, (a, b), cr) in enumerate(zip(rows, samples, scores, credits))]
        _write_text(os.path.join(args.output, "scores.csv"), _csv_text(header, table))
        _write_text(os.path.join(args.output, "summary.json"), dumps(summary))
    out.write(dumps(summary))
    return EXIT_OK


def _jnd_samples(rows, base):
    return [ev.JndSample(ev.resolve(base, r["ref_path"]), ev.resolve(base, r["dist_path"]),
                         int(r["votes_same"]), int(r["judges"])) for r in rows]


def _jnd_terms(samples, cfg):
    return ev.score_pairs([(s.ref, s.distorted) for s in samples], cfg)


def cmd_eval_jnd(args, cfg, out):
    rows, base = ev.read_manifest_rows(args.manifest, ev.JND_COLUMNS)
    samples = _jnd_samples(rows, base)
    if not samples:
        raise InvalidInputError("manifest has no samples")
    t = None
    if args.score_column:
        scores = _external_scores(rows, args.score_column, args.lower_is_similar)
    else:
        t = _jnd_terms(samples, cfg)
        scores = [similarity(combine(e, o, cfg.alpha), cfg.c) for e, o in t]
    mos = [s.mos for s in samples]

    summary = {"n": len(samples), "scores": args.score_column or "edoks"}
    try:
        same, not_same = ev.jnd_group_means(samples, scores)
        summary.update(mean_same=same, mean_not_same=not_same,
                       ratio=same / not_same if not_same else None)
    except InvalidInputError as exc:
        warnings.warn(str(exc), stacklevel=1)
        summary.update(mean_same=None, mean_not_same=None, ratio=None)
    summary["n_same"] = sum(1 for s in samples if s.votes_same == s.judges)
    summary["n_not_same"] = sum(1 for s in samples if s.votes_same == 0)
    fit = None
    if len(samples) >= 3:
        srocc, krocc, plcc = ev.correlations(scores, mos)
        summary.update(srocc=srocc, krocc=krocc, plcc=plcc)
        if len(samples) >= 5 and not all(s == scores[0] for s in scores):
            fit = ev.fit_logistic(scores, mos)
            summary["logistic"] = {"beta": list(fit.beta), "residual": fit.residual}
    summary["config"] = cfg.echo()

    if args.output:
        ensure_dir(args.output)
        header = ["index", "ref_path", "dist_path", "votes_same", "judges", "mos", "emd", "ok", "edok", "score"]
        table = []
        for i, (r, s, sc) in enumerate(zip(rows, samples, scores)):
            e, o = t[i] if t is not None else (None, None)
            d = combine(e, o, cfg.alpha) if t is not None else None
            table.append([i, r["ref_path"], r["dist_path"], s.votes_same, s.judges, s.mos, e, o, d, sc])
        _write_text(os.path.join(args.output, "scores.csv"), _csv_text(header, table))
        _write_text(os.path.join(args.output, "summary.json"), dumps(summary))
        means = None
        if summary["mean_same"] is not None:
            means = [summary["mean_same"], summary["mean_not_same"]]
        plotting.jnd_figure(os.path.join(args.output, "jnd.png"), scores, mos, fit, means)
    out.write(dumps(summary))
    return EXIT_OK


def _sweep_inputs(path, cfg):
    """(terms, mos) from a JND manifest, or from a scores.csv written by eval-jnd."""
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    if {"emd", "ok", "mos"} <= set(header):
        rows, _ = ev.read_manifest_rows(path, ("emd", "ok", "mos"))
        return [(float(r["emd"]), float(r["ok"])) for r in rows], [float(r["mos"]) for r in rows]
    rows, base = ev.read_manifest_rows(path, ev.JND_COLUMNS)
    samples = _jnd_samples(rows, base)
    return _jnd_terms(samples, cfg), [s.mos for s in samples]


def cmd_alpha_sweep(args, cfg, out):
    grid = ev.alpha_grid(args.step)
    t, mos = _sweep_inputs(args.manifest, cfg)
    if len(t) < 3:
        raise InvalidInputError("alpha sweep needs at least 3 samples")
    rows = ev.alpha_sweep(t, mos, grid, cfg.c)
    text = _csv_text(["alpha", "srocc"] + CONFIG_HEADER[1:],
                     [[a, s] + _config_cells(cfg)[1:] for a, s in rows])
    if args.output:
        ensure_dir(args.output)
        _write_text(os.path.join(args.output, "alpha_sweep.csv"), text)
        plotting.alpha_sweep_figure(os.path.join(args.output, "alpha_sweep.png"), rows)
    out.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("metric")
    g.add_argument("--alpha", type=float, help="texture weight in [0, 1] (default 0.5)")
    g.add_argument("--patch-size", type=int, help="signature patch side in pixels (default 128)")
    g.add_argument("--c", type=float, help="offset in 1/(EDOK + c) (default 1e-12)")
    g.add_argument("--scales", help="comma-separated Gabor frequencies, cycles/pixel")
    g.add_argument("--orientations", help="comma-separated Gabor orientations, degrees")
    g.add_argument("--jobs", type=int, help="worker threads (default $EDOKS_JOBS or 1)")

    ap = argparse.ArgumentParser(prog="edoks", description="EDOKS perceptual image similarity.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", parents=[common], help="score one image pair")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--emit-maps", metavar="DIR", help="also write explanation maps to DIR")
    p.add_argument("--raw", action="store_true", help="with --emit-maps, also dump float maps as .npy")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("batch", parents=[common], help="score every pair of a manifest")
    p.add_argument("manifest", help="CSV with ref_path,dist_path columns")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("eval-2afc", parents=[common], help="2AFC agreement with human judges")
    p.add_argument("manifest")
    p.add_argument("--output", metavar="DIR", help="write scores.csv and summary.json here")
    p.add_argument("--score-columns", metavar="COL0,COL1", help="use precomputed manifest scores")
    p.add_argument("--lower-is-similar", action="store_true", help="external scores are distances")
    p.set_defaults(func=cmd_eval_2afc)

    p = sub.add_parser("eval-jnd", parents=[common], help="JND group means and MOS correlations")
    p.add_argument("manifest")
    p.add_argument("--output", metavar="DIR", help="write scores.csv, summary.json and jnd.png here")
    p.add_argument("--score-column", metavar="COL", help="use a precomputed manifest score column")
    p.add_argument("--lower-is-similar", action="store_true", help="external scores are distances")
    p.set_defaults(func=cmd_eval_jnd)

    p = sub.add_parser("alpha-sweep", parents=[common], help="SROCC as a function of alpha")
    p.add_argument("manifest", help="JND manifest, or scores.csv from eval-jnd")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--output", metavar="DIR", help="write alpha_sweep.csv and alpha_sweep.png here")
    p.set_defaults(func=cmd_alpha_sweep)

    p = sub.add_parser("maps", parents=[common], help="write explanation maps for one pair")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--raw", action="store_true", help="also dump float maps as .npy")
    p.set_defaults(func=cmd_maps)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if getattr(args, "step", None) is not None:
            ev.alpha_grid(args.step)
    except InvalidInputError as exc:
        print(f"edoks: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args, cfg, out)
    except ConfigError as exc:
        print(f"edoks: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DimensionMismatchError as exc:
        print(f"edoks: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (DecodeError, InvalidInputError, OSError, ValueError) as exc:
        print(f"edoks: {exc}", file=sys.stderr)
        return EXIT_DECODE


if __name__ == "__main__":
    sys.exit(main())
