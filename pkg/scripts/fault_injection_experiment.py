#!/usr/bin/env python3
"""Fault-injection experiment.

Injects the three erroneous-upgrade patterns into generated benchmarks of
the classes they target, checks that every mutant is flagged
non-contained, and tabulates detection time and the non-equivalence
fraction (1 - BisimDegree) per fault type and class.

    python3 scripts/fault_injection_experiment.py [mutants-per-combo]
"""

import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent
                       / "src"))

from plccontain.benchmarks import gen_bench
from plccontain.containment import containment_checker
from plccontain.mutation import MutationInapplicable, MutationSpec, mutate
from plccontain.petri_net import translate

PLAN = [
    ("type1", "medium"), ("type1", "simple"),
    ("type2", "complex"), ("type2", "basic"),
    ("type3", "medium"), ("type3", "complex"),
]


def main():
    per = int(sys.argv[1]) if len(sys.argv) > 1 else 8
    print(f"{'type':<8}{'class':<10}{'mutants':>8}{'killed':>8}"
          f"{'1-BisimDegree':>15}{'time (s)':>10}")
    for kind, cls in PLAN:
        produced = killed = 0
        degrees = []
        elapsed = 0.0
        for seed in range(60):
            if produced >= per:
                break
            v0, _ = gen_bench(cls, seed=seed, certify=False)
            try:
                mutant = mutate(v0, MutationSpec(kind, seed=seed))
            except MutationInapplicable:
                continue
            produced += 1
            n0, nm = translate(v0), translate(mutant)
            t0 = time.time()
            verdict = containment_checker(n0, nm)
            elapsed += time.time() - t0
            if verdict.code == "MAY_NOT_BE_EQUIVALENT" and \
                    verdict.ledger.unmatched0 and verdict.ledger.unmatched1:
                killed += 1
            degrees.append(1 - float(verdict.bisim_degree))
        mean = sum(degrees) / len(degrees) if degrees else 0.0
        print(f"{kind:<8}{cls:<10}{produced:>8}{killed:>8}"
              f"{mean:>14.1%}{elapsed / max(produced, 1):>10.3f}")


if __name__ == "__main__":
    main()
