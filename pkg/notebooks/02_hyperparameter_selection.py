"""
Picking a run without labels
============================

Given the rank of each run in a sweep, keep the highest one. Ranks are
clipped at the embedding dimension, and a plateau of clipped runs is broken
by looking at each run's neighbours along the sweep axis.
"""

from pathlib import Path

from rankgauge import load_manifest, manifest_from_ranks, select_by_rank

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "vicreg_nu_sweep.json"

# %%
# A VICReg sweep over the covariance loss weight, with ImageNet ranks.
sweep = load_manifest(FIXTURE)
result = select_by_rank(sweep)
for run, entry in zip(sweep.runs, result.trace):
    print(f"nu={run.hp_value:<5} rank={entry.rank:8.2f}  {entry.decision}")
print("chosen:", result.chosen_run_id)

# %%
# The neighbour rule on a plateau: the last 20 before the drop wins.
plateau = select_by_rank(manifest_from_ranks([10, 20, 20, 20, 5]))
print(plateau.decisions, "->", plateau.chosen_index)

# %%
# Clipping: 2400 and 2100 both saturate a 2048-dimensional embedding.
clipped = select_by_rank(manifest_from_ranks([2400, 2100, 1900], clip_cap=2048))
print([t.rank for t in clipped.trace], "->", clipped.chosen_index)
