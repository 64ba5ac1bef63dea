"""A small ablation table on a handful of generated scenarios.

Generates six fresh scenarios, then runs the full agent and each variant
with one component switched off (36 episodes, a few minutes on one core).

With six episodes a single contact moves H-Coll by almost 17 points, so
the ordering of rows can flip from one seed to the next; on this seed the
variant without dynamic obstacles happens to come out ahead. Use the
bundled 20-scenario suite over several seeds (``socialnav ablate --seed N``)
for a real comparison.

    python3 demos/03_mini_ablation.py
"""

from pathlib import Path

from socnavmap import RunConfig
from socnavmap.artifacts import format_table
from socnavmap.runner import run_ablation
from socnavmap.scenegen import GenParams, generate_suite

suite = Path("out/demo_ablation/suite")
generate_suite(suite, count=6, seed=77, params=GenParams(humans=(4, 6)))
print(f"generated {len(list(suite.glob('*.json')))} scenarios in {suite}")

rows = run_ablation(suite, RunConfig(seed=1), Path("out/demo_ablation/runs"))
print(format_table(rows, "variant"))
