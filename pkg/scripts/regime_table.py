"""Q2 / CA table for the three data-availability regimes (u-only, y-only, both).

Uses the true toy parameters on synthetic data, or, with ``--data``, fits the
kernel parameters on random 30% splits of an expression CSV through the
``gapgp eval`` command and tabulates its aggregate.

    python scripts/regime_table.py --seeds 10
    python scripts/regime_table.py --data kr.csv --preset becker-kr --model mrna
"""
import argparse
import json
import tempfile
from pathlib import Path

import numpy as np

from gapgp import cli
from gapgp.experiments import REGIMES, evaluate_regimes, toy_dataset, toy_model


def synthetic(args):
    table = {}
    for variant in ("mrna", "protein"):
        model = toy_model(variant, args.n_terms)
        runs = [evaluate_regimes(model, toy_dataset(model, seed)) for seed in range(args.seeds)]
        table[variant] = {
            reg: {ch: {m: [r[reg][ch][m] for r in runs] for m in ("q2", "ca")} for ch in ("U", "Y")} for reg in REGIMES
        }
    return table


def from_csv(args):
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "eval.json"
        argv = ["eval", "--data", args.data, "--model", args.model, "--preset", args.preset, "--freeze", "mech",
                "--seeds", str(args.seeds), "--n-terms", str(args.n_terms), "--out", str(out)]
        if args.t_min is not None:
            argv += ["--t-min", str(args.t_min)]
        rc = cli.main(argv)
        if rc:
            raise SystemExit(rc)
        doc = json.loads(out.read_text())
    table = {args.model: {}}
    for reg, runs in doc["per_seed"].items():
        table[args.model][reg] = {
            ch: {m: [r["metrics"][ch][m] for r in runs if ch in r["metrics"]] for m in ("q2", "ca")} for ch in ("U", "Y")
        }
    return table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n-terms", type=int, default=10)
    ap.add_argument("--data")
    ap.add_argument("--model", choices=["mrna", "protein"], default="mrna")
    ap.add_argument("--preset", default="toy")
    ap.add_argument("--t-min", type=float, default=None)
    args = ap.parse_args()

    table = from_csv(args) if args.data else synthetic(args)
    print(f"{'model':8} {'regime':8} {'Q2(u)':>16} {'Q2(y)':>16} {'CA(u)':>12} {'CA(y)':>12}")
    for variant, rows in table.items():
        for reg, chans in rows.items():
            cells = []
            for m in ("q2", "ca"):
                for ch in ("U", "Y"):
                    v = chans[ch][m]
                    width = 16 if m == "q2" else 12
                    cells.append(f"{np.mean(v):.3f} ± {np.std(v):.3f}".rjust(width) if v else "-".rjust(width))
            print(f"{variant:8} {reg:8} " + " ".join(cells))


if __name__ == "__main__":
    main()
