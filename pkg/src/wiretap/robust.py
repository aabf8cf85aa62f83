"""Receiver-side defenses against a transmitter acting on stale channel data.

The transmitter's estimate H + dH misplaces the data direction and the
interference subspace, so the intended receiver is partly jammed.  Two
recovery modes are modeled, differing in what the receiver knows:

* ``fdd``: the receiver knows the exact estimate the transmitter used (it
  reported the estimate itself), so it can reconstruct the whole transmit
  configuration and whiten the leaked interference it actually receives.
* ``tdd``: the receiver knows only the true channel and the error
  statistics, so it whitens the expected interference instead, built from
  the closed-form perturbation moments.

In both modes the receiver also picks the data-power fraction: it solves for
the smallest fraction whose (predicted) output SINR meets the target and
feeds that number back to the transmitter, which otherwise keeps its own
estimated directions.  Reported SINRs are always evaluated against the
transmission that actually happened, through the true channel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .channels import ChannelSet, SvdPartition, as_matrix, partition_svd
from .exceptions import ParameterError
from .perturbation import PerturbMoments, first_vector_leak
from .transmit import (
    LinkSinr,
    RxBeamformer,
    SinrReport,
    TxScheme,
    eve_mmse_beamformer,
    evaluate_sinr,
    link_sinr,
    noise_covariance_for,
    noise_factor_for,
)

# Diagonal loading fraction applied when an expected-interference matrix
# fails to be positive definite.
_LOADING = 1e-8


@dataclass(frozen=True)
class RobustContext:
    """What the receiver believed when it built its combiner.

    ``q_int`` is the interference-plus-noise covariance it whitened,
    ``t_hat`` the data signature it matched to, ``rho`` the power fraction
    it requested.  ``loaded`` records that diagonal loading was needed to
    make the expected covariance positive definite.
    """

    mode: str
    q_int: np.ndarray
    t_hat: np.ndarray
    rho: float
    outage: bool
    loaded: bool = False


def _solve_fraction(gain, target_sinr: float) -> tuple[float, bool]:
    """Smallest rho in (0, 1] with gain(rho) >= target_sinr.

    ``gain`` is the predicted combiner output SINR as a function of the data
    power fraction; raising rho adds signal and removes interference, so it
    crosses the target at most once.  Returns (1.0, True) when even the full
    budget falls short.
    """
    if target_sinr <= 0:
        raise ParameterError(f"target_sinr must be positive, got {target_sinr}")
    if gain(1.0) < target_sinr:
        return 1.0, True
    root = scipy.optimize.brentq(
        lambda r: gain(r) - target_sinr, 1e-14, 1.0, xtol=1e-15, rtol=8.9e-16
    )
    return float(root), False


def _rank1_gain(
    lam: np.ndarray, weights: np.ndarray, power_p: float, na: int, sigma_sq: float
):
    """Output SINR versus rho for a pure rank-one data signature.

    With interference eigenvalues lam and squared signature projections
    ``weights``, the whitened combiner's output SINR is

        g(rho) = rho * P * sum_i weights_i / (beta(rho) * lam_i + sigma_sq).
    """

    def gain(rho: float) -> float:
        beta = _beta(rho, power_p, na)
        return rho * power_p * float(np.sum(weights / (beta * lam + sigma_sq)))

    return gain


def _whitened_combiner(
    evecs: np.ndarray, lam: np.ndarray, signature: np.ndarray, beta: float, sigma_sq: float
) -> np.ndarray:
    """(beta * A + sigma_sq I)^-1 signature via the eigendecomposition of A."""
    proj = evecs.conj().T @ signature
    return evecs @ (proj / (beta * lam + sigma_sq))


def _beta(rho: float, power_p: float, na: int) -> float:
    return (1.0 - rho) * power_p / (na - 1) if na > 1 else 0.0


def _fdd_trial(
    chan: ChannelSet,
    part_tilde: SvdPartition,
    target_sinr: float,
    *,
    propagate_through_estimate: bool = False,
) -> tuple[RxBeamformer, SinrReport, RobustContext, LinkSinr, LinkSinr, TxScheme]:
    """Full-knowledge recovery for one trial, from the estimate's partition."""
    h_true = chan.h_ba.entries
    h_design = part_tilde.reconstruct() if propagate_through_estimate else h_true
    t_tilde = part_tilde.v1
    leak_fac = h_design @ part_tilde.t_prime
    cov_int = leak_fac @ leak_fac.conj().T
    lam, evecs = np.linalg.eigh(cov_int)
    lam = np.clip(lam, 0.0, None)
    signature = h_design @ t_tilde
    weights = np.abs(evecs.conj().T @ signature) ** 2

    rho, outage = _solve_fraction(
        _rank1_gain(lam, weights, chan.power_p, chan.na, chan.sigma_b_sq),
        target_sinr,
    )
    scheme = TxScheme(
        t=t_tilde,
        rho=rho,
        q_z=noise_covariance_for(part_tilde.t_prime, rho, chan.power_p),
        power_p=chan.power_p,
        target_sinr=target_sinr,
        outage=outage,
        q_z_factor=noise_factor_for(part_tilde.t_prime, rho, chan.power_p),
    )
    beta = _beta(rho, chan.power_p, chan.na)
    w = _whitened_combiner(evecs, lam, signature, beta, chan.sigma_b_sq)
    beam = RxBeamformer(w=w, kind="robust_fdd")
    q_int = beta * cov_int + chan.sigma_b_sq * np.eye(chan.nb)
    ctx = RobustContext(
        mode="fdd", q_int=0.5 * (q_int + q_int.conj().T), t_hat=t_tilde,
        rho=rho, outage=outage,
    )
    w_e = eve_mmse_beamformer(chan, scheme)
    report = evaluate_sinr(chan, scheme, beam, w_e)
    bob = link_sinr(chan.h_ba, scheme, beam, chan.sigma_b_sq)
    eve = link_sinr(chan.h_ea, scheme, w_e, chan.sigma_e_sq)
    return beam, report, ctx, bob, eve, scheme


def fdd_receiver(
    chan: ChannelSet,
    h_tilde,
    target_sinr: float,
    *,
    propagate_through_estimate: bool = False,
) -> tuple[RxBeamformer, SinrReport]:
    """Recovery when the receiver knows the transmitter's exact estimate.

    The receiver reconstructs the transmit configuration from ``h_tilde``,
    whitens the interference it actually receives through the true channel,
    and requests the power fraction that lands the output SINR exactly on
    target (non-outage trials hit it to numerical precision).

    ``propagate_through_estimate=True`` switches the receiver's design to
    propagate the reconstructed transmission through the estimate rather
    than the true channel; the reported SINR stays physical either way.
    """
    part_tilde = partition_svd(as_matrix(h_tilde))
    beam, report, _, _, _, _ = _fdd_trial(
        chan, part_tilde, target_sinr,
        propagate_through_estimate=propagate_through_estimate,
    )
    return beam, report


def _tdd_trial(
    chan: ChannelSet,
    svd: SvdPartition,
    moments: PerturbMoments,
    part_tilde: SvdPartition,
    target_sinr: float,
) -> tuple[RxBeamformer, SinrReport, RobustContext, LinkSinr, LinkSinr, TxScheme]:
    """Statistical recovery for one trial, from a precomputed partition."""
    if target_sinr <= 0:
        raise ParameterError(f"target_sinr must be positive, got {target_sinr}")
    h_true = chan.h_ba.entries
    t_hat = svd.v1 + moments.e_dv1
    signature = h_true @ t_hat

    # Expected interference shape per unit of interference power: the full
    # channel subspace minus the nominal data direction, with the mean drift
    # of the transmit beam folded in through the cross terms.  This is all
    # the receiver's statistics can say about where the transmitter's
    # interference floor moved.
    cross = svd.sigma1 * np.outer(svd.u1, (h_true @ moments.e_dv1).conj())
    shape = (
        h_true @ h_true.conj().T
        - svd.sigma1**2 * np.outer(svd.u1, svd.u1.conj())
        - cross
        - cross.conj().T
    )
    shape = 0.5 * (shape + shape.conj().T)
    lam, evecs = np.linalg.eigh(shape)

    # Power sizing: enough data power to hit the target against the mean
    # leaked interference at the matched direction, at nominal beam gain.
    # The truncated leak overshoots the measured mean badly once errors get
    # large, so it is resummed to leak/(1+leak), which respects the physical
    # bound of one and tracks the measured mean leak closely.  The beam's
    # misalignment itself is the transmitter's error; no receive-side choice
    # undoes it, so it is deliberately not chased with extra data power
    # (which would only bleed interference power and secrecy).  The residual
    # shortfall, growing with the error power, is the misalignment loss.
    lam1 = svd.sigma1**2
    leak = max(first_vector_leak(svd, moments), 0.0)
    leak = leak / (1.0 + leak)
    if chan.na > 1:
        leak_share = leak / (chan.na - 1)
        rho = (
            target_sinr
            * (chan.sigma_b_sq + lam1 * chan.power_p * leak_share)
            / (lam1 * chan.power_p * (1.0 + target_sinr * leak_share))
        )
    else:
        rho = target_sinr * chan.sigma_b_sq / (lam1 * chan.power_p)
    outage = rho >= 1.0
    if outage:
        rho = 1.0
    beta = _beta(rho, chan.power_p, chan.na)

    # The drift cross terms can push an eigenvalue of the expected
    # covariance slightly negative for large error power; restore
    # definiteness by diagonal loading and flag the trial.
    sigma_eff = chan.sigma_b_sq
    loaded = False
    worst = beta * float(lam.min()) + sigma_eff if lam.size else sigma_eff
    if worst <= 0.0:
        loaded = True
        trace = beta * float(np.sum(lam)) + chan.nb * sigma_eff
        delta = _LOADING * abs(trace) / chan.nb
        if worst + delta <= 0.0:
            delta = (1.0 + 1e-6) * (-worst)
        sigma_eff += delta
    scheme = TxScheme(
        t=part_tilde.v1,
        rho=rho,
        q_z=noise_covariance_for(part_tilde.t_prime, rho, chan.power_p),
        power_p=chan.power_p,
        target_sinr=target_sinr,
        outage=outage,
        q_z_factor=noise_factor_for(part_tilde.t_prime, rho, chan.power_p),
    )
    w = _whitened_combiner(evecs, lam, signature, beta, sigma_eff)
    beam = RxBeamformer(w=w, kind="robust_tdd")
    q_int = beta * shape + sigma_eff * np.eye(chan.nb)
    ctx = RobustContext(
        mode="tdd", q_int=q_int, t_hat=t_hat, rho=rho, outage=outage, loaded=loaded
    )
    w_e = eve_mmse_beamformer(chan, scheme)
    report = evaluate_sinr(chan, scheme, beam, w_e)
    bob = link_sinr(chan.h_ba, scheme, beam, chan.sigma_b_sq)
    eve = link_sinr(chan.h_ea, scheme, w_e, chan.sigma_e_sq)
    return beam, report, ctx, bob, eve, scheme


def tdd_receiver(
    chan: ChannelSet,
    svd: SvdPartition,
    moments: PerturbMoments,
    err_sample: np.ndarray,
    target_sinr: float,
) -> tuple[RxBeamformer, SinrReport]:
    """Recovery when the receiver knows the channel and error statistics.

    The receiver never sees the transmitter's estimate.  It whitens the
    expected interference-plus-noise covariance built from the mean beam
    drift, matches to the expected data signature H (v_1 + E{dv_1}), and
    requests the power fraction sized against the mean leaked interference
    (with the leak resummed to respect its physical bound).  The
    transmitter keeps its own estimated directions but applies the
    requested fraction.  The reported SINR is evaluated against the actual
    transmission through the true channel, so it fluctuates around the
    request; the average shortfall grows with the error power because the
    beam's misalignment is deliberately not chased with extra data power.
    """
    h_tilde = chan.h_ba.entries + as_matrix(err_sample)
    part_tilde = partition_svd(h_tilde)
    beam, report, _, _, _, _ = _tdd_trial(chan, svd, moments, part_tilde, target_sinr)
    return beam, report
