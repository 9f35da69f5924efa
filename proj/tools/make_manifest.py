#!/usr/bin/env python3
"""Write a harness manifest CSV for a benchmark database laid out as shipped.

  make_manifest.py live    ROOT out.csv [--convert DIR]
  make_manifest.py tid2008 ROOT out.csv [--convert DIR]
  make_manifest.py tid2013 ROOT out.csv [--convert DIR]
  make_manifest.py csiq    ROOT out.csv --scores csiq_dmos.csv

Expected layouts:
  live     ROOT/{jp2k,jpeg,wn,gblur,fastfading}/imgN.bmp, ROOT/refimgs/,
           ROOT/dmos_realigned.mat (or dmos.mat), ROOT/refnames_all.mat
  tid*     ROOT/reference_images/I01.BMP, ROOT/distorted_images/i01_01_1.bmp,
           ROOT/mos_with_names.txt
  csiq     ROOT/src_imgs/<image>.png, ROOT/dst_imgs/<type>/<image>.<TYPE>.<lev>.png;
           --scores is the "all_by_image" sheet of csiq.DMOS.xlsx (.csv or .xlsx)
           with columns image, dst_type, dst_lev, dmos.

The haarpsi decoder reads PNG and binary PGM/PPM only. LIVE and TID ship BMP,
so pass --convert DIR to write PNG copies there (needs Pillow) and point the
manifest at the copies.

LIVE and CSIQ scores are DMOS: evaluate with --dmos LIVE,CSIQ.
"""

import argparse
import csv
import sys
from pathlib import Path

LIVE_FOLDERS = [("jp2k", 227), ("jpeg", 233), ("wn", 174), ("gblur", 174),
                ("fastfading", 174)]

CSIQ_TYPES = {
    "noise": "awgn",
    "jpeg": "jpeg",
    "jpeg 2000": "jpeg2000",
    "fnoise": "fnoise",
    "blur": "blur",
    "contrast": "contrast",
}


class Converter:
    def __init__(self, root, out_dir):
        self.root = root
        self.out_dir = Path(out_dir).resolve() if out_dir else None

    def __call__(self, path):
        path = Path(path)
        if self.out_dir is None or path.suffix.lower() not in (".bmp",):
            return path
        target = self.out_dir / path.relative_to(self.root).with_suffix(".png")
        if not target.exists():
            from PIL import Image
            target.parent.mkdir(parents=True, exist_ok=True)
            Image.open(path).convert("RGB").save(target)
        return target


def find_file(directory, name):
    """Case-insensitive lookup; the databases mix .BMP and .bmp."""
    exact = Path(directory) / name
    if exact.exists():
        return exact
    lowered = name.lower()
    for p in Path(directory).iterdir():
        if p.name.lower() == lowered:
            return p
    raise FileNotFoundError(f"{name} not found in {directory}")


def live_rows(root, convert):
    from scipy.io import loadmat

    realigned = root / "dmos_realigned.mat"
    if realigned.exists():
        mat = loadmat(realigned)
        scores = mat["dmos_new"].ravel()
    else:
        mat = loadmat(root / "dmos.mat")
        scores = mat["dmos"].ravel()
    orgs = mat["orgs"].ravel()
    refnames = [str(r[0]) for r in loadmat(root / "refnames_all.mat")["refnames_all"].ravel()]
    index = 0
    for folder, count in LIVE_FOLDERS:
        for k in range(1, count + 1):
            if not orgs[index]:
                yield (convert(find_file(root / "refimgs", refnames[index])),
                       convert(find_file(root / folder, f"img{k}.bmp")),
                       float(scores[index]), "LIVE", folder)
            index += 1


def tid_rows(root, label, convert):
    with open(root / "mos_with_names.txt") as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                continue
            mos, name = float(parts[0]), parts[1]
            image, distortion, _ = Path(name).stem.split("_")
            reference = find_file(root / "reference_images", f"I{image[1:]}.BMP")
            yield (convert(reference),
                   convert(find_file(root / "distorted_images", name)),
                   mos, label, distortion)


def csiq_rows(root, scores_path):
    scores_path = Path(scores_path)
    if scores_path.suffix.lower() == ".xlsx":
        import pandas as pd
        records = pd.read_excel(scores_path, sheet_name="all_by_image").to_dict("records")
    else:
        with open(scores_path, newline="") as f:
            records = list(csv.DictReader(f))
    for rec in records:
        image = str(rec["image"]).strip()
        kind = str(rec["dst_type"]).strip().lower()
        level = int(float(rec["dst_lev"]))
        folder = root / "dst_imgs" / CSIQ_TYPES[kind]
        candidates = [p for p in folder.iterdir()
                      if p.name.lower().startswith(image.lower() + ".")
                      and p.name.lower().endswith(f".{level}.png")]
        if len(candidates) != 1:
            raise FileNotFoundError(f"{image} {kind} level {level} in {folder}")
        yield (find_file(root / "src_imgs", image + ".png"), candidates[0],
               float(rec["dmos"]), "CSIQ", CSIQ_TYPES[kind])


def main(argv):
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("database", choices=["live", "tid2008", "tid2013", "csiq"])
    parser.add_argument("root", type=Path)
    parser.add_argument("out", type=Path)
    parser.add_argument("--convert", help="directory for PNG copies of BMP files")
    parser.add_argument("--scores", help="CSIQ score sheet (.csv or .xlsx)")
    args = parser.parse_args(argv)

    root = args.root.resolve()
    convert = Converter(root, args.convert)
    if args.database == "live":
        rows = live_rows(root, convert)
    elif args.database == "csiq":
        if not args.scores:
            parser.error("csiq needs --scores")
        rows = csiq_rows(root, args.scores)
    else:
        rows = tid_rows(root, args.database.upper(), convert)

    count = 0
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["reference_path", "distorted_path", "mos", "database", "distortion"])
        for ref, dist, mos, label, distortion in rows:
            w.writerow([ref, dist, repr(mos), label, distortion])
            count += 1
    print(f"{args.out}: {count} rows", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
