"""Per-hypothesis cost of the FFT compressor versus direct correlation."""

import argparse

from rdacc.experiments import DEFAULT_BENCH_SIZES, nlogn_fit_r2, run_bench

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--out", default="demo_out/bench")
ap.add_argument("--full", action="store_true", help="time the oracle on every delay bin")
args = ap.parse_args()

res = run_bench(args.out, DEFAULT_BENCH_SIZES, full=args.full)
for r in res["rows"]:
    print(f"{r['n_r']:>7} x {r['n_t']:<6} fft {r['cago_s'] * 1e3:8.1f} ms  "
          f"direct {r['oracle_s']:8.2f} s  ratio {r['measured_ratio']:7.0f}  "
          f"estimate {r['speedup_estimate']:6.0f}")
print(f"R^2 of an N log N fit: {nlogn_fit_r2(res['rows']):.4f}")
