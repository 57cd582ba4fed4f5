"""Run a series of differential campaigns and tabulate the verdicts.

    python3 scripts/fuzz_campaign.py --count 1000 --jobs 4
    python3 scripts/fuzz_campaign.py --sweep-fault-rate 0 0.2 0.5 --count 300

Each row is one campaign.  DISAGREE witnesses are shrunk and saved to
``--regressions`` (``regressions/`` by default).
"""
from __future__ import annotations

import argparse
import json
import sys

from letrec_ipu.harness.campaign import CampaignConfig, run_campaign

COLUMNS = ["AgreeAnswer", "AgreeFaulty", "Inconclusive", "DISAGREE"]


def main() -> int:
    ap = argparse.ArgumentParser(description="differential campaigns over generated programs")
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fuel", type=int, default=5000)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--prims", choices=["mixed", "on", "off"], default="mixed")
    ap.add_argument("--sweep-fault-rate", type=float, nargs="+", default=[0.2], metavar="P")
    ap.add_argument("--regressions", default="regressions")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    prims = {"mixed": None, "on": True, "off": False}[args.prims]
    rows = []
    for rate in args.sweep_fault_rate:
        cfg = CampaignConfig(count=args.count, seed=args.seed, prims=prims, fault_rate=rate,
                             fuel=args.fuel, k=args.k, jobs=args.jobs, regressions=args.regressions)
        rep = run_campaign(cfg)
        rows.append({"fault_rate": rate, **rep.to_json()})
        for seed, v, path in rep.disagreements:
            print(f"DISAGREE at seed {seed}: {v.detail} -> {path}", file=sys.stderr)

    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'rate':>5} {'total':>6} " + " ".join(f"{c:>12}" for c in COLUMNS) + f" {'injected':>9} {'conclusive':>10} {'secs':>6}")
        for r in rows:
            counts = " ".join(f"{r['counts'].get(c, 0):>12}" for c in COLUMNS)
            print(f"{r['fault_rate']:>5.2f} {r['total']:>6} {counts} {r['injected_faults']:>9} "
                  f"{100 * r['conclusive_ratio']:>9.1f}% {r['elapsed_seconds']:>6.1f}")
    return 1 if any(r["counts"].get("DISAGREE") for r in rows) else 0


if __name__ == "__main__":
    sys.exit(main())
