#!/usr/bin/env python3
"""Fetch MovieLens-100k and write it as the tab-separated u.data layout.

Tries the GroupLens archive first. When that host is unreachable it falls back
to the copy of the ratings table bundled with the pytorch-widedeep wheel, which
preserves the original record order.
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL_MEMBER = "pytorch_widedeep/datasets/data/MovieLens100k_data.parquet.brotli"


def from_grouplens():
    with urllib.request.urlopen(GROUPLENS_URL, timeout=20) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data")


def from_wheel():
    import pandas as pd

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
             "-d", tmp, "pytorch-widedeep==1.7.0"],
            check=True,
        )
        wheel = next(pathlib.Path(tmp).glob("pytorch_widedeep-*.whl"))
        frame = pd.read_parquet(io.BytesIO(zipfile.ZipFile(wheel).read(WHEEL_MEMBER)))
    lines = (
        f"{u}\t{i}\t{r}\t{t}\n"
        for u, i, r, t in frame[["user_id", "movie_id", "rating", "timestamp"]].itertuples(index=False)
    )
    return "".join(lines).encode()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/ml-100k/u.data")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        payload = from_grouplens()
    except Exception as err:  # noqa: BLE001
        print(f"grouplens unavailable ({err}); using pytorch-widedeep copy", file=sys.stderr)
        payload = from_wheel()
    out.write_bytes(payload)
    count = payload.count(b"\n")
    print(f"wrote {out} ({count} ratings)")


if __name__ == "__main__":
    main()
