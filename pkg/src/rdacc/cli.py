"""``rdacc`` command line: synth, map, loss-sweep and bench subcommands.

Failures print a one-line JSON object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import experiments as ex
from .errors import ParameterError, RdaccError
from .scenario import WaveformSpec, load_scenario
from .synth import load_cube


def _floats(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _sizes(text: str):
    out = []
    for item in text.split(","):
        try:
            n_r, n_t = item.lower().split("x")
            out.append((int(n_r), int(n_t)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"size {item!r} is not of the form NRxNT")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rdacc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", default="table1",
                            help="preset name (table1..table4) or scenario file")
            sp.add_argument("--seed", type=int, default=None, help="noise seed override")
            sp.add_argument("--waveform", choices=("lfm", "costas"), default=None)
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--full", action="store_true", help="full-size grids, sweeps and timings")
        sp.add_argument("--workers", type=int, default=1)

    common(sub.add_parser("synth", help="write an echo cube"))
    m = sub.add_parser("map", help="range-Doppler(-acceleration) map and peak report")
    common(m)
    m.add_argument("--method", choices=ex.METHODS, default="cago")
    m.add_argument("--a-values", type=_floats, default=None,
                   help="force acceleration hypotheses, e.g. 0 or 0,300")
    m.add_argument("--v-values", type=_floats, default=None)
    m.add_argument("--no-stretch", action="store_true",
                   help="drop intra-pulse stretch compensation")
    m.add_argument("--cube", default=None, help="process this cube file instead of synthesizing")
    ls = sub.add_parser("loss-sweep", help="correlation loss versus acceleration ratio")
    common(ls)
    ls.add_argument("--smoke", action="store_true", help="small stratified subset")
    b = sub.add_parser("bench", help="FFT path versus time-domain oracle timings")
    common(b, scenario=False)
    b.add_argument("--sizes", type=_sizes, default=None, help="e.g. 16384x4096,32768x8192")
    return p


def _scenario(args):
    sc = load_scenario(args.scenario)
    if args.waveform:
        sc = replace(sc, waveform=WaveformSpec(args.waveform))
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    return sc


def run(args) -> dict:
    if args.workers < 1:
        raise ParameterError("--workers must be >= 1")
    if args.command == "bench":
        sizes = args.sizes or ex.DEFAULT_BENCH_SIZES
        res = ex.run_bench(args.out, sizes, full=args.full)
        return {"csv": res["csv"]}
    sc = _scenario(args)
    if args.command == "synth":
        return ex.run_synth(sc, args.out)
    if args.command == "map":
        cube = load_cube(args.cube) if args.cube else None
        res = ex.run_map(sc, args.method, args.out, full=args.full, workers=args.workers,
                         a_values=args.a_values, v_values=args.v_values,
                         stretch=False if args.no_stretch else None, cube=cube)
        return res
    if args.command == "loss-sweep":
        return ex.run_loss_sweep(sc, args.out, full=args.full, smoke=args.smoke,
                                 workers=args.workers)
    raise ParameterError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        res = run(args)
    except RdaccError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "IOError", "message": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps(res, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
