"""The interference channel model, step by step.

Two small base stations share a frequency block. Each serves one user;
a fraction beta of each transmitter's power lands as interference at the
other user. This script walks through the power units, the SINR, and the
network objective.
"""

import numpy as np

from coopa import radio

# Powers are configured in dBm but all arithmetic is linear milliwatts.
print("power unit conversions")
for dbm in (0.0, 10.0, 13.0):
    print(f"  {dbm:5.1f} dBm = {radio.dbm_to_mw(dbm):8.4f} mW")

# The reference scenario: gains 2.5 / 1.5, caps 10 / 13 dBm, 1 mW noise,
# symmetric interference ratio beta = 0.3.
cfg = radio.two_cell_config(beta=0.3)
cap1, cap2 = cfg.p_max_mw
print(f"\ncaps: {cap1:.4f} mW and {cap2:.4f} mW, noise {cfg.noise_mw} mW")

# SINR of user 1 degrades as transmitter 2 powers up.
print("\nSINR at user 1, transmitter 1 at full power:")
for p2 in np.linspace(0.0, cap2, 5):
    s = radio.sinr(0, [cap1, p2], cfg)
    print(f"  p2 = {p2:7.4f} mW -> SINR_1 = {s:7.4f}, "
          f"throughput {radio.throughput(0, [cap1, p2], cfg):.4f} bits/s/Hz")

# The objective is the sum throughput. Scan a coarse grid to see its shape:
# at beta = 0.3 the best corner is (0, cap2), serving the stronger link alone.
print("\nsum throughput over a 5x5 power grid (rows: p1, cols: p2):")
levels1 = np.linspace(0.0, cap1, 5)
levels2 = np.linspace(0.0, cap2, 5)
header = "        " + "  ".join(f"{p2:7.2f}" for p2 in levels2)
print(header)
for p1 in levels1:
    row = [radio.sum_throughput([p1, p2], cfg) for p2 in levels2]
    print(f"  {p1:5.2f} " + "  ".join(f"{v:7.4f}" for v in row))

best = max(
    ((p1, p2) for p1 in levels1 for p2 in levels2),
    key=lambda pp: radio.sum_throughput(list(pp), cfg),
)
print(f"\nbest corner on this coarse grid: {best[0]:.2f} mW, {best[1]:.2f} mW")
