"""Run the full experiment set: sweeps at gamma 1.5 and 1.02, effective cost curve, acquisition.

    python scripts/run_all_experiments.py --out results
"""

import argparse
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent


def run(cmd):
    print("$", " ".join(cmd), flush=True)
    subprocess.run(cmd, check=True)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--trials", type=int, default=50)
    args = p.parse_args()
    out = Path(args.out)
    py = sys.executable
    run([py, str(HERE / "run_alpha_sweep.py"), "--gamma", "1.5", "--trials", str(args.trials), "--out", str(out / "sweep_gamma1.5")])
    run([py, str(HERE / "run_alpha_sweep.py"), "--gamma", "1.02", "--trials", str(args.trials), "--out", str(out / "sweep_gamma1.02")])
    run([py, str(HERE / "run_acquisition.py"), "--trials", str(args.trials), "--out", str(out / "acquire")])
    run([py, "-m", "ccce", "sweep-alpha", "--config", str(ROOT / "configs" / "sweep_low_congestion.yaml"),
         "--out", str(out / "effective_cost_gamma1.02")])
    run([py, "-m", "ccce", "solve", "--config", str(ROOT / "configs" / "solve.yaml"), "--out", str(out / "solve")])


if __name__ == "__main__":
    main()
