"""Accelerating target processed with and without the acceleration hypothesis.

Writes ``mismatch_scan.csv`` (best zero-acceleration response per velocity)
and ``mismatch.json`` under the output directory.  Takes a few minutes.
"""

import argparse
import json

from rdacc.experiments import acceleration_mismatch, build_cube
from rdacc.scenario import preset

ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("--out", default="demo_out/mismatch")
ap.add_argument("--workers", type=int, default=1)
args = ap.parse_args()

sc = preset("table1")
w, cube = build_cube(sc)
res = acceleration_mismatch(sc, cube=cube, w=w, workers=args.workers, out=args.out)
print(json.dumps(res, indent=2))
