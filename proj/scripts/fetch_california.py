#!/usr/bin/env python3
"""Regenerate assets/california_housing.csv.

Prefers scikit-learn's bundled fetcher. Without scikit-learn, downloads the
raw StatLib "houses" table from the tabular-benchmark dataset on Hugging Face
and applies the usual derivations (AveRooms = total_rooms / households, and so
on). Either way the output is the 20,640-row table with the median house
value, in units of $100,000, as the last column.

Usage: python3 scripts/fetch_california.py [output.csv]
"""

import csv
import io
import math
import sys
import urllib.request

SCHEMA = [
    "MedInc", "HouseAge", "AveRooms", "AveBedrms",
    "Population", "AveOccup", "Latitude", "Longitude", "MedHouseVal",
]

FALLBACK_URL = (
    "https://huggingface.co/datasets/inria-soda/tabular-benchmark/"
    "resolve/main/reg_num/houses.csv"
)

# lowercase alias -> raw column role
ALIASES = {
    "medianincome": "median_income",
    "median_income": "median_income",
    "medinc": "median_income",
    "housingmedianage": "housing_median_age",
    "housing_median_age": "housing_median_age",
    "houseage": "housing_median_age",
    "totalrooms": "total_rooms",
    "total_rooms": "total_rooms",
    "totalbedrooms": "total_bedrooms",
    "total_bedrooms": "total_bedrooms",
    "population": "population",
    "households": "households",
    "latitude": "latitude",
    "longitude": "longitude",
    "medianhousevalue": "target",
    "median_house_value": "target",
    "medhouseval": "target",
}


def rows_from_sklearn():
    try:
        from sklearn.datasets import fetch_california_housing
    except ImportError:
        return None
    print("using scikit-learn's fetcher")
    data = fetch_california_housing()
    rows = []
    for x, y in zip(data.data, data.target):
        rows.append(list(map(float, x)) + [float(y)])
    if list(data.feature_names) != SCHEMA[:-1]:
        raise SystemExit(f"unexpected sklearn feature order: {data.feature_names}")
    return rows


def rows_from_download():
    print(f"downloading {FALLBACK_URL}")
    with urllib.request.urlopen(FALLBACK_URL) as resp:
        text = resp.read().decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    cols = {}
    for idx, name in enumerate(header):
        role = ALIASES.get(name.strip().lower())
        if role:
            cols[role] = idx
    missing = [r for r in set(ALIASES.values()) if r not in cols]
    if missing:
        raise SystemExit(f"download is missing columns: {sorted(missing)}")

    raw = [[float(cell) for cell in line] for line in reader if line]

    # The benchmark copy stores log1p(dollars); other mirrors store dollars
    # or the already-scaled $100,000 units. Pick the inverse by value range.
    targets = [r[cols["target"]] for r in raw]
    hi = max(targets)
    if hi < 20.0:
        to_units = lambda t: round(math.expm1(t)) / 1e5
    elif hi < 1000.0:
        to_units = lambda t: t  # already in $100,000
    else:
        to_units = lambda t: t / 1e5

    rows = []
    for r in raw:
        households = r[cols["households"]]
        rows.append([
            r[cols["median_income"]],
            r[cols["housing_median_age"]],
            r[cols["total_rooms"]] / households,
            r[cols["total_bedrooms"]] / households,
            r[cols["population"]],
            r[cols["population"]] / households,
            r[cols["latitude"]],
            r[cols["longitude"]],
            to_units(r[cols["target"]]),
        ])
    return rows


def verify(rows):
    if len(rows) != 20640:
        raise SystemExit(f"expected 20640 rows, got {len(rows)}")
    target = [r[-1] for r in rows]
    mean = sum(target) / len(target)
    if abs(mean - 2.068558169089147) > 1e-9:
        raise SystemExit(f"mean target {mean!r} does not match the known value")
    capped = sum(1 for t in target if t == 5.00001)
    if capped != 965:
        raise SystemExit(f"expected 965 rows at the $500,001 cap, got {capped}")
    if abs(target[0] - 4.526) > 1e-12 or abs(target[1] - 3.585) > 1e-12:
        raise SystemExit("row order does not match the StatLib original")


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "assets/california_housing.csv"
    rows = rows_from_sklearn()
    if rows is None:
        rows = rows_from_download()
    verify(rows)
    with open(out_path, "w", newline="") as f:
        f.write(",".join(SCHEMA) + "\n")
        for r in rows:
            f.write(",".join(repr(v) for v in r) + "\n")
    print(f"wrote {len(rows)} rows to {out_path}")


if __name__ == "__main__":
    main()
