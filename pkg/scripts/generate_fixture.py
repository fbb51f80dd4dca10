"""Regenerates the bundled financial_reports_2023.csv fixture.

The stats agent's published output for this file is mean 85.3, std 4.2,
sample_size 500 (after rounding to one decimal), so the generator draws a
seeded normal sample and rescales it to hit those statistics exactly before
rounding the values to two decimals.
"""

import csv
import random
import statistics
from pathlib import Path

TARGET_MEAN = 85.3
TARGET_STD = 4.2
ROWS = 500
SEED = 20230915

OUT = Path(__file__).resolve().parents[1] / "src" / "aios_server" / "data" / "financial_reports_2023.csv"


def main() -> None:
    rng = random.Random(SEED)
    raw = [rng.gauss(TARGET_MEAN, TARGET_STD) for _ in range(ROWS)]
    mu = statistics.fmean(raw)
    sigma = statistics.pstdev(raw)
    values = [round((x - mu) / sigma * TARGET_STD + TARGET_MEAN, 2) for x in raw]

    mean = statistics.fmean(values)
    pstd = statistics.pstdev(values)
    sstd = statistics.stdev(values)
    assert round(mean, 1) == TARGET_MEAN, mean
    assert round(pstd, 1) == TARGET_STD, pstd
    assert round(sstd, 1) == TARGET_STD, sstd

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record_id", "quarter", "value"])
        for i, value in enumerate(values, start=1):
            writer.writerow([f"R{i:04d}", f"Q{(i - 1) % 4 + 1}", f"{value:.2f}"])
    print(f"wrote {ROWS} rows to {OUT}")
    print(f"mean={mean:.6f} pstd={pstd:.6f} sstd={sstd:.6f}")


if __name__ == "__main__":
    main()
