"""Run every sweep spec in scripts/sweeps/ and print a compact outage table.

    python scripts/run_trend_sweeps.py --jobs 4 --out results/

Each sweep writes <out>/<name>.csv plus a manifest next to it.
"""

import argparse
import json
from pathlib import Path

from coopraman.harness import load_sweep_spec, run_sweep
from coopraman.scenario import SystemConfig, load_scenario

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--specs", default=str(HERE / "sweeps"), help="directory of sweep JSON files")
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--scenario", help="base scenario JSON")
    ap.add_argument("--trials", type=int, help="override trials per point")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    base = load_scenario(args.scenario) if args.scenario else SystemConfig()
    out = Path(args.out)
    summary = {}
    for path in sorted(Path(args.specs).glob("*.json")):
        spec, _ = load_sweep_spec(path)
        if args.trials:
            spec.trials = args.trials
        res = run_sweep(spec, base, jobs=args.jobs)
        res.write(out / f"{path.stem}.csv")
        summary[path.stem] = res.wall_time
        print(f"\n{spec.parameter} ({res.wall_time:.1f} s)")
        print(f"{'value':>12} {'estimator':>12} {'tau':>5} {'outage':>7} {'median':>8}")
        for r in res.rows():
            print(f"{r['param_value']:>12g} {r['estimator']:>12} {r['tau_t']:>5g} "
                  f"{r['outage']:>7.3f} {r['median_mse']:>8.3f}")
    print(json.dumps({"wall_time_s": summary}))


if __name__ == "__main__":
    main()
