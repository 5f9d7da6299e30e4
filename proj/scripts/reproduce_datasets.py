#!/usr/bin/env python3
"""Convert public interaction datasets to CSV and run the audit on them.

Not part of CI: the datasets must be downloaded by hand (licences and size).

  scripts/reproduce_datasets.py ml1m ratings.dat out/ml1m
  scripts/reproduce_datasets.py diginetica train-item-views.csv out/diginetica
  scripts/reproduce_datasets.py zvuk zvuk-interactions.parquet out/zvuk

Each run writes <out>/interactions.csv, then `stats` and a GTS q=0.9 `audit`
into <out>/stats and <out>/audit.
"""
import argparse
import csv
import datetime as dt
import subprocess
import sys
from pathlib import Path


def convert_ml1m(src, dst):
    # UserID::MovieID::Rating::Timestamp (seconds)
    with open(src, encoding="latin-1") as f, open(dst, "w", newline="") as out:
        w = csv.writer(out)
        w.writerow(["user_id", "item_id", "timestamp"])
        for line in f:
            user, item, _rating, ts = line.rstrip("\r\n").split("::")
            w.writerow([user, item, int(ts) * 1000])


def convert_diginetica(src, dst):
    # sessionId;userId;itemId;timeframe;eventdate. Sessions act as users;
    # timeframe is milliseconds since the start of the event date.
    with open(src, newline="") as f, open(dst, "w", newline="") as out:
        r = csv.DictReader(f, delimiter=";")
        w = csv.writer(out)
        w.writerow(["user_id", "item_id", "timestamp"])
        for row in r:
            day = dt.datetime.strptime(row["eventdate"], "%Y-%m-%d").replace(tzinfo=dt.timezone.utc)
            w.writerow([row["sessionId"], row["itemId"], int(day.timestamp()) * 1000 + int(row["timeframe"])])


def convert_zvuk(src, dst):
    import pandas as pd  # parquet support needs pyarrow

    df = pd.read_parquet(src)
    ts = pd.to_datetime(df["datetime"], utc=True).astype("int64") // 1_000_000
    pd.DataFrame({"user_id": df["user_id"], "item_id": df["track_id"], "timestamp": ts}).to_csv(dst, index=False)


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("dataset", choices=["ml1m", "diginetica", "zvuk"])
    p.add_argument("source", type=Path)
    p.add_argument("out", type=Path)
    p.add_argument("--splitaudit", default="splitaudit", help="path to the splitaudit binary")
    args = p.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "interactions.csv"
    {"ml1m": convert_ml1m, "diginetica": convert_diginetica, "zvuk": convert_zvuk}[args.dataset](args.source, csv_path)

    name = ["--name", args.dataset]
    subprocess.run([args.splitaudit, "stats", str(csv_path), *name, "--out-dir", str(args.out / "stats")], check=True)
    code = subprocess.run([args.splitaudit, "audit", str(csv_path), *name, "--split", "gts", "--q-val", "0.8",
                           "--q-test", "0.9", "--out-dir", str(args.out / "audit")]).returncode
    sys.exit(code)


if __name__ == "__main__":
    main()
