"""
Does the rank transfer across datasets
======================================

Ranks measured on the pretraining data and on a downstream dataset move
together across a sweep, so selecting on one is a fair proxy for the other.
"""

import csv
from pathlib import Path

from rankgauge import rank_transfer_report

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "vicreg_transfer.csv"

with open(FIXTURE, newline="") as fh:
    rows = list(csv.DictReader(fh))

imagenet = [(r["label"], float(r["x"])) for r in rows]
inat18 = [(r["label"], float(r["y"])) for r in rows]

# %%
report = rank_transfer_report(imagenet, inat18)
print(f"Pearson r over {report.n_pairs} runs: {report.pearson_r:.4f}")
