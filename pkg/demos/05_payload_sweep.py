"""
A miniature payload sweep through the experiment harness
========================================================

The harness crosses policies x payload sizes x seeds, evaluates each cell
with common random numbers, and writes results.csv / summary.csv.  This demo
keeps it cheap (non-learning policies, two payload points); the full
desk-scale experiment is one CLI call:

    hetvnet sweep --config experiment.cfg --out results/

The summary can then be rendered with the companion plotting tool:

    plot_results results/summary.csv fig4.svg --kind fig4
"""

import tempfile
from pathlib import Path

from hetvnet.config import loads_config
from hetvnet.harness import run_experiment

CONFIG = """
scenario.num_vehicles = 12
scenario.num_v2v = 3
scenario.num_v2i = 3
scenario.num_wifi_aps = 2
sweep.payload_bytes = 1060, 3180, 6360
sweep.seeds = 1, 2
sweep.policies = random, greedy
sweep.replicates = 20
"""

out = Path(tempfile.mkdtemp(prefix="hetvnet-demo-"))
results, summary = run_experiment(loads_config(CONFIG), out_dir=str(out))

print(open(summary).read())
print(f"full per-run rows in {results}")
