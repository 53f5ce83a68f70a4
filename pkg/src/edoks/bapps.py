"""
Convert a BAPPS download into the harness's manifest CSVs.

Expected layout (as distributed with the LPIPS code)::

    <root>/2afc/val/<category>/{ref,p0,p1}/<id>.png
    <root>/2afc/val/<category>/judge/<id>.npy    fraction of judges preferring p1
    <root>/jnd/val/<category>/{p0,p1}/<id>.png
    <root>/jnd/val/<category>/same/<id>.npy      fraction of judges answering "same"

Usage::

    edoks-bapps ROOT OUTDIR [--split val] [--judges 3]

writes OUTDIR/2afc_<split>.csv and OUTDIR/jnd_<split>.csv with paths
relative to OUTDIR.
"""

import argparse
import csv
import os
import sys

import numpy as np

from .evaluation import JND_COLUMNS, TWOAFC_COLUMNS


def _categories(base):
    if not os.path.isdir(base):
        return []
    return sorted(d for d in os.listdir(base) if os.path.isdir(os.path.join(base, d)))


def _ids(folder):
    return sorted(os.path.splitext(f)[0] for f in os.listdir(folder) if f.endswith(".npy"))


def _scalar(path):
    return float(np.asarray(np.load(path)).ravel()[0])


def twoafc_rows(root, split, outdir):
    base = os.path.join(root, "2afc", split)
    for cat in _categories(base):
        d = os.path.join(base, cat)
        for i in _ids(os.path.join(d, "judge")):
            rel = [os.path.relpath(os.path.join(d, sub, i + ".png"), outdir) for sub in ("ref", "p0", "p1")]
            yield rel + [repr(_scalar(os.path.join(d, "judge", i + ".npy")))]


def jnd_rows(root, split, outdir, judges=3):
    base = os.path.join(root, "jnd", split)
    for cat in _categories(base):
        d = os.path.join(base, cat)
        for i in _ids(os.path.join(d, "same")):
            frac = _scalar(os.path.join(d, "same", i + ".npy"))
            votes = int(round(frac * judges))
            rel = [os.path.relpath(os.path.join(d, sub, i + ".png"), outdir) for sub in ("p0", "p1")]
            yield rel + [str(votes), str(judges)]


def _write(path, header, rows):
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)
            n += 1
    return n


def main(argv=None):
    ap = argparse.ArgumentParser(prog="edoks-bapps", description="Build manifests from a BAPPS directory tree.")
    ap.add_argument("root", help="BAPPS dataset root (contains 2afc/ and jnd/)")
    ap.add_argument("outdir", help="where to write the manifest CSVs")
    ap.add_argument("--split", default="val")
    ap.add_argument("--judges", type=int, default=3, help="judges per JND pair")
    args = ap.parse_args(argv)

    os.makedirs(args.outdir, exist_ok=True)
    outdir = os.path.abspath(args.outdir)
    n2 = _write(os.path.join(outdir, f"2afc_{args.split}.csv"), TWOAFC_COLUMNS,
                twoafc_rows(args.root, args.split, outdir))
    nj = _write(os.path.join(outdir, f"jnd_{args.split}.csv"), JND_COLUMNS,
                jnd_rows(args.root, args.split, outdir, args.judges))
    print(f"2afc: {n2} triplets, jnd: {nj} pairs", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
