"""Measured correlation loss against ``10 log10 sinc^2(upsilon)``.

Runs the stratified subset of the table4 sweep (``--smoke`` for 16 rows,
``--full`` for all 1664) and prints one line per row.
"""

import argparse
import csv

from rdacc.experiments import run_loss_sweep
from rdacc.scenario import preset

ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("--out", default="demo_out/loss")
ap.add_argument("--smoke", action="store_true")
ap.add_argument("--full", action="store_true")
ap.add_argument("--workers", type=int, default=1)
args = ap.parse_args()

res = run_loss_sweep(preset("table4"), args.out, full=args.full, smoke=args.smoke,
                     workers=args.workers)
with open(res["csv"]) as fh:
    for row in sorted(csv.DictReader(fh), key=lambda r: float(r["upsilon"])):
        print(f"upsilon {float(row['upsilon']):6.3f}  measured {float(row['loss_db']):8.3f} dB"
              f"  sinc^2 {float(row['predicted_db']):8.3f} dB")
