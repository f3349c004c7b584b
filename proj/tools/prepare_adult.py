#!/usr/bin/env python3
"""Build data/adult/adult.csv from the raw UCI Adult files.

Usage: prepare_adult.py ADULT_DATA ADULT_TEST OUT_CSV

Both raw files are concatenated (32,561 + 16,281 = 48,842 rows). The test
file's banner line is skipped and the trailing '.' on its income labels is
dropped so both halves share one label vocabulary. '?' is kept as an
ordinary category value.
"""

import csv
import sys

RAW_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]

OUT_COLUMNS = [
    "id", "workclass", "education", "marital_status", "occupation",
    "relationship", "sex", "age", "income",
]


def read_rows(path):
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != len(RAW_COLUMNS):
                raise ValueError(f"{path}: bad row: {line!r}")
            row = dict(zip(RAW_COLUMNS, fields))
            row["income"] = row["income"].rstrip(".")
            yield row


def main(argv):
    if len(argv) != 4:
        print(__doc__, file=sys.stderr)
        return 2
    data_path, test_path, out_path = argv[1:]
    with open(out_path, "w", newline="") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(OUT_COLUMNS)
        next_id = 1
        for path in (data_path, test_path):
            for row in read_rows(path):
                row["id"] = str(next_id)
                next_id += 1
                writer.writerow([row[c] for c in OUT_COLUMNS])
    print(f"wrote {next_id - 1} rows to {out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
