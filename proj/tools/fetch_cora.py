#!/usr/bin/env python3
"""Download the LINQS Cora release and convert it to the spcnet dataset layout.

    python3 tools/fetch_cora.py [--out data/cora] [--url URL | --archive cora.tgz]

Writes edges.txt, features.txt, labels.txt and meta.json. Node ids follow the
order of cora.content; class ids follow the sorted class names. Citations are
made undirected and deduplicated; self-citations are dropped.
"""
import argparse
import io
import json
import os
import sys
import tarfile
import urllib.request

DEFAULT_URL = "https://linqs-data.soe.ucsc.edu/public/lbc/cora.tgz"


def read_member(tar, suffix):
    for m in tar.getmembers():
        if m.name.endswith(suffix):
            return tar.extractfile(m).read().decode()
    raise SystemExit(f"archive has no member ending in {suffix}")


def convert(archive_bytes, out_dir):
    with tarfile.open(fileobj=io.BytesIO(archive_bytes), mode="r:gz") as tar:
        content = read_member(tar, "cora.content")
        cites = read_member(tar, "cora.cites")

    ids, feats, names = [], [], []
    for line in content.splitlines():
        parts = line.split()
        if not parts:
            continue
        ids.append(parts[0])
        feats.append(parts[1:-1])
        names.append(parts[-1])
    index = {pid: i for i, pid in enumerate(ids)}
    classes = {c: i for i, c in enumerate(sorted(set(names)))}

    edges = set()
    dropped = 0
    for line in cites.splitlines():
        parts = line.split()
        if len(parts) != 2:
            continue
        a, b = parts
        if a not in index or b not in index:
            dropped += 1
            continue
        i, j = index[a], index[b]
        if i != j:
            edges.add((min(i, j), max(i, j)))

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "edges.txt"), "w") as f:
        for i, j in sorted(edges):
            f.write(f"{i} {j}\n")
    with open(os.path.join(out_dir, "features.txt"), "w") as f:
        for row in feats:
            f.write(" ".join(row) + "\n")
    with open(os.path.join(out_dir, "labels.txt"), "w") as f:
        for n in names:
            f.write(f"{classes[n]}\n")
    with open(os.path.join(out_dir, "meta.json"), "w") as f:
        json.dump({"name": "cora", "C": len(classes), "d": len(feats[0])}, f, indent=2)
        f.write("\n")
    print(f"nodes={len(ids)} edges={len(edges)} d={len(feats[0])} C={len(classes)} "
          f"dropped_citations={dropped} out={out_dir}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=os.path.join("data", "cora"))
    ap.add_argument("--url", default=DEFAULT_URL)
    ap.add_argument("--archive", help="use a local cora.tgz instead of downloading")
    args = ap.parse_args()
    if args.archive:
        with open(args.archive, "rb") as f:
            data = f.read()
    else:
        try:
            with urllib.request.urlopen(args.url, timeout=60) as r:
                data = r.read()
        except OSError as e:
            print(f"download failed: {e}", file=sys.stderr)
            return 1
    convert(data, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
