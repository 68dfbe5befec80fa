"""Information acquisition comparison: random vs shadow price vs InfoGain selection.

    python scripts/run_acquisition.py --trials 50 --k 5 --out results/acquire
"""

import argparse
import logging
import math
from pathlib import Path

import numpy as np

from ccce.csvio import write_csv
from ccce.montecarlo import ACQUIRE_COLUMNS, ACQUIRE_SUMMARY_COLUMNS, TrialConfig, run_info_acquisition
from ccce.vertiport import VertiportScenario


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gamma", type=float, default=1.5)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results/acquire")
    args = p.parse_args()
    logging.basicConfig(level=logging.ERROR)

    scen = VertiportScenario(gamma=args.gamma, seed=args.seed)
    res = run_info_acquisition(scen, TrialConfig(trials=args.trials, k_acquire=args.k, alpha=args.alpha, seed=args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "acquire.csv", ACQUIRE_COLUMNS, res.rows)
    write_csv(out / "acquire_summary.csv", ACQUIRE_SUMMARY_COLUMNS, res.summary())
    for row in res.summary():
        print(f"{row['strategy']:>13}: mean {row['mean']:.5f}  sem {row['sem']:.5f}  median {row['median']:.5f}")
    diff = res.normalized("shadow_price") - res.normalized("infogain")
    print(f"shadow_price - infogain: mean {diff.mean():.5f}, paired sem {np.std(diff, ddof=1) / math.sqrt(diff.size):.5f}, "
          f"infogain better in {int(np.sum(diff > 1e-12))}/{diff.size} trials, worse in {int(np.sum(diff < -1e-12))}")


if __name__ == "__main__":
    main()
