# Basins of attraction at machine precision, written as PPM images.
#
#   python3 05_basins.py [output-directory]
import sys
from pathlib import Path

import numpy as np

from mproots.basins import BasinConfig, compute_basin, grid_points, render_basin, write_ppm
from mproots.solvers import FamilyParams, MethodSpec

out = Path(sys.argv[1] if len(sys.argv) > 1 else "basins")
out.mkdir(parents=True, exist_ok=True)

cases = [
    ("newton_z2", (1, 0, -1), MethodSpec.newton()),
    ("newton_z3", (1, 0, 0, -1), MethodSpec.newton()),
    ("om8_z3", (1, 0, 0, -1), MethodSpec.om8()),
    ("om8_z3_alt", (1, 0, 0, -1), MethodSpec.om8(FamilyParams(1, 2, 1, 0))),
    ("sm7_z4", (1, 0, 0, 0, -1), MethodSpec.sm7()),
    ("steffensen_z3", (1, 0, 0, -1), MethodSpec.steffensen()),
]
for name, poly, method in cases:
    cfg = BasinConfig(poly, (-2, 2, -2, 2), (240, 240), method=method)
    res = compute_basin(cfg)
    path = write_ppm(out / (name + ".ppm"), render_basin(cfg))
    black = np.mean(res.index < 0)
    mean_it = res.iterations[res.index >= 0].mean()
    print("%-14s %s  no root: %5.1f%%  mean iterations: %.2f" % (name, path, 100 * black, mean_it))

# Three basins of z^3 - 1 are congruent: count pixels inside the inscribed disc.
cfg = BasinConfig((1, 0, 0, -1), resolution=(301, 301))
res = compute_basin(cfg)
disc = np.abs(grid_points(cfg)) <= 2
print("OM8 z^3-1 basin sizes in |z| <= 2:", np.bincount(res.index[disc & (res.index >= 0)]))
