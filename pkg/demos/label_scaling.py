"""Mean labels against n on the clean counterexample instance for all four learners."""
import numpy as np

from calsim import CalruptionConfig, counterexample_instance, schedule_none
from calsim import run_calruption, run_passive_erm, run_robustcal

SEEDS, DELTA = 10, 0.05


def main():
    ce = counterexample_instance()
    print(f"{'n':>8} {'passive':>8} {'vanilla':>8} {'modified':>9} {'calruption':>11}")
    for k in range(12, 19):
        n = 2**k
        sched = schedule_none(ce, n)
        cfg = CalruptionConfig.practical(n, DELTA, ce.num_hypotheses)
        row = [
            np.mean([run_passive_erm(ce, sched, n, s).labels_used for s in range(SEEDS)]),
            np.mean([run_robustcal(ce, sched, n, DELTA, "vanilla", s).labels_used for s in range(SEEDS)]),
            np.mean([run_robustcal(ce, sched, n, DELTA, "modified", s).labels_used for s in range(SEEDS)]),
            np.mean([run_calruption(ce, sched, cfg, s).labels_used for s in range(SEEDS)]),
        ]
        print(f"{n:>8} {row[0]:>8.0f} {row[1]:>8.0f} {row[2]:>9.0f} {row[3]:>11.0f}")


if __name__ == "__main__":
    main()
