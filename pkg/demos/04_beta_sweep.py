"""How the learned allocation tracks the optimum as interference grows.

For each interference ratio beta, train from scratch and compare the
learned allocation's sum throughput against the closed-form optimum and
the two naive baselines: greedy (full power to the higher-cap transmitter
only) and simultaneous (everyone at full power). Below the crossover the
optimum is full power everywhere; above it, serving the stronger link
alone wins.

Uses a coarse grid to stay quick; the full-resolution sweep is
`coopa sweep --config <file> --betas 0:1:0.05` (results land in sweep.csv).
"""

import csv
import tempfile
from pathlib import Path

from coopa import cli

config = cli.ExperimentConfig(
    n_power=9,
    betas=tuple(round(0.1 * k, 1) for k in range(11)),
    seed=1,
)
out = Path(tempfile.mkdtemp()) / "sweep.csv"
print(f"sweeping {len(config.betas)} beta values on a {config.n_power}-level grid "
      f"({config.resolve_episodes(config.network(0.5))} episodes each)...")
cli.run_sweep(config, out)

with open(out, newline="") as fh:
    rows = list(csv.DictReader(fh))

print(f"\n{'beta':>5} {'learned':>9} {'optimal':>9} {'greedy':>9} {'simult.':>9}   "
      "learned allocation (mW)")
for r in rows:
    print(f"{float(r['beta']):5.2f} "
          f"{float(r['qcopa_throughput']):9.4f} "
          f"{float(r['optimal_throughput']):9.4f} "
          f"{float(r['greedy_throughput']):9.4f} "
          f"{float(r['simultaneous_throughput']):9.4f}   "
          f"({float(r['qcopa_p1_mw']):7.4f}, {float(r['qcopa_p2_mw']):7.4f})")

worst = max(
    abs(float(r["qcopa_throughput"]) - float(r["optimal_throughput"]))
    / float(r["optimal_throughput"])
    for r in rows
)
print(f"\nworst relative gap to the closed form: {worst:.3%}")
print(f"full results written to {out}")
