"""A burst covering CALruption's first epoch: soft elimination recovers, hard elimination does not."""
import numpy as np

from calsim import CalruptionConfig, counterexample_instance, run_calruption, run_robustcal
from calsim.harness.scenarios import build_schedule

N, SEEDS, DELTA = 2**20, 20, 0.05


def main():
    ce = counterexample_instance()
    cfg = CalruptionConfig.practical(N, DELTA, ce.num_hypotheses)
    tau = cfg.epoch_length(1)
    sched = build_schedule("burst", {"tau": tau, "eta": 1}, ce, N)
    print(f"n={N}, labels follow h2 on rounds 1..{tau}, C_total={sched.total:.0f}")
    cal = [run_calruption(ce, sched, cfg, s) for s in range(SEEDS)]
    rob = [run_robustcal(ce, sched, N, DELTA, "modified", s) for s in range(SEEDS)]
    for name, runs in (("calruption", cal), ("robustcal_modified", rob)):
        print(f"{name:>18}: output h1 {np.mean([r.output_h == 0 for r in runs]):.0%}, "
              f"mean labels {np.mean([r.labels_used for r in runs]):.0f}")
    print("calruption gap estimates per epoch (seed 0):")
    for l, gaps in enumerate(cal[0].gap_trajectory, start=1):
        print(f"  epoch {l}: {np.round(gaps, 4).tolist()}")


if __name__ == "__main__":
    main()
