"""What the two recovery modes buy back, on one bad draw and on average.

At -10 dB error power the transmitter's beam and interference subspace are
visibly misplaced.  A receiver that keeps the matched combiner built for
the clean design gets jammed; a receiver that knows the transmitter's
estimate (reported estimate, "fdd" mode) reconstructs the mess and whitens
it exactly; one that only knows the error statistics ("tdd" mode) whitens
the expected mess instead.

Run:  python3 demos/robust_receivers.py
"""
from __future__ import annotations

from wiretap import (
    CsiErrorModel,
    compute_moments,
    fdd_receiver,
    generate_channels,
    naive_trial,
    partition_svd,
    tdd_receiver,
)
from wiretap.channels import sample_csi_error
from wiretap.harness import ExperimentConfig, run_experiment
from wiretap.units import to_db

TARGET = 100.0
ERR = CsiErrorModel.iid(0.1)  # -10 dB error power


def one_draw() -> None:
    chan = generate_channels(5, 5, 5, rng_seed=42)
    svd = partition_svd(chan.h_ba)
    dh = sample_csi_error(ERR, 5, 5, rng_seed=4242)

    report, _, _, _ = naive_trial(chan, dh, TARGET, svd=svd)
    moments = compute_moments(svd, ERR)
    _, rep_fdd = fdd_receiver(chan, chan.h_ba.entries + dh, TARGET)
    _, rep_tdd = tdd_receiver(chan, svd, moments, dh, TARGET)

    print("single error draw at -10 dB error power (target 20 dB):")
    print(f"  matched combiner, unaware of the mismatch: "
          f"{to_db(report.sinr_b):7.2f} dB")
    print(f"  receiver knowing the exact estimate:       "
          f"{to_db(rep_fdd.sinr_b):7.2f} dB")
    print(f"  receiver knowing only the statistics:      "
          f"{to_db(rep_tdd.sinr_b):7.2f} dB")


def averaged(trials: int = 300) -> None:
    cfg = ExperimentConfig(
        na=5, nb=5, ne=5,
        sigma_h_db=(-10.0,),
        power_db=20.0,
        target_sinr_db=20.0,
        schemes=("naive", "robust_fdd", "robust_tdd"),
        trials=trials,
        master_seed=7,
    )
    res = run_experiment(cfg)

    label = {
        "naive": "unaware receiver",
        "robust_fdd": "exact-estimate receiver",
        "robust_tdd": "statistics-only receiver",
    }
    print(f"\npooled over {trials} channel/error draws (ratio of averages):")
    for scheme in cfg.schemes:
        db = res.series[scheme]["roe_sinr_b_db"][0]
        print(f"  {label[scheme] + ':':<30}{db:7.2f} dB")
    print("\nThe exact-knowledge receiver lands on target every non-outage trial;"
          "\nthe statistical one gives up only the beam misalignment it cannot see.")


if __name__ == "__main__":
    one_draw()
    averaged()
