#!/usr/bin/env python3
"""Containment-checking experiment over the synthetic benchmark classes.

For each class: generate oracle-certified (original, upgrade) pairs, run
the checker, and tabulate average path counts, whether path merging (PM)
and path extension (PE) were used, and the average check time.

    python3 scripts/benchmark_experiment.py [pairs-per-class] [base-seed]
"""

import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent
                       / "src"))

from plccontain.benchmarks import CLASSES, gen_bench
from plccontain.containment import containment_checker
from plccontain.petri_net import translate


def main():
    pairs = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    base = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    print(f"{'class':<10}{'paths v0':>9}{'paths v1':>9}{'PM':>5}{'PE':>5}"
          f"{'time (s)':>10}{'verdicts':>26}")
    for cls in CLASSES:
        n_paths0 = n_paths1 = 0.0
        used_pm = used_pe = False
        total = 0.0
        verdicts = {}
        for seed in range(base, base + pairs):
            v0, v1 = gen_bench(cls, seed=seed)
            n0, n1 = translate(v0), translate(v1)
            t0 = time.time()
            verdict = containment_checker(n0, n1)
            total += time.time() - t0
            n_paths0 += len(verdict.cover0.paths)
            n_paths1 += len(verdict.cover1.paths)
            for _, beta in verdict.ledger.pairs:
                if " v " in beta.id:
                    used_pm = True
                if "." in beta.id:
                    used_pe = True
            verdicts[verdict.code] = verdicts.get(verdict.code, 0) + 1
        print(f"{cls:<10}{n_paths0 / pairs:>9.1f}{n_paths1 / pairs:>9.1f}"
              f"{'yes' if used_pm else 'no':>5}"
              f"{'yes' if used_pe else 'no':>5}"
              f"{total / pairs:>10.3f}{str(verdicts):>26}")


if __name__ == "__main__":
    main()
