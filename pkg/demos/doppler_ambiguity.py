"""Velocity-ambiguity levels of a stationary target, Costas versus LFM."""

import argparse
import json

from rdacc.experiments import ambiguity_levels
from rdacc.scenario import preset

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--out", default="demo_out/ambiguity")
args = ap.parse_args()

sc = preset("table3")
for kind in ("costas", "lfm"):
    res = ambiguity_levels(sc.with_waveform(kind), n=4, out=args.out)
    print(json.dumps(res))
