"""Transmit designs, receive beamformers, and SINR evaluation.

One data stream is sent along a unit direction ``t`` with power ``rho * P``;
the remaining budget feeds synthetic interference with covariance ``q_z``,
shaped to miss the intended receiver while jamming everyone else.  Evaluation
is deliberately generic: the scheme handed to ``evaluate_sinr`` may have been
designed from a stale channel estimate while propagation uses the true
channel, which is exactly the mismatch the rest of the package studies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channels import ChannelSet, SvdPartition, as_matrix, partition_svd
from .exceptions import DegenerateChannelError, DimensionError, ParameterError

# rho at or above this value means all power goes to the data stream.
_RHO_CEIL = 1.0 - 1e-15


@dataclass(frozen=True)
class TxScheme:
    """A complete transmit configuration.

    ``t`` is the unit-norm data direction, ``rho`` the fraction of the budget
    spent on data, ``q_z`` the interference covariance, and ``outage``
    records that the target SINR was unreachable so all power went to data.
    ``target_sinr`` is the linear SINR the design aimed for.

    ``q_z_factor``, when present, is a matrix F with q_z = F F^H.  Designs
    keep it because a receiver orthogonal to the interference sees a residual
    of order machine-epsilon squared, which only survives evaluation through
    the factor (amplitudes first, then squared); the assembled covariance
    buries it under round-off of the large cancelling entries.
    """

    t: np.ndarray
    rho: float
    q_z: np.ndarray
    power_p: float
    target_sinr: float
    outage: bool = False
    q_z_factor: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.complex128)
        if t.ndim != 1:
            raise DimensionError(f"t must be a vector, got shape {t.shape}")
        nrm = np.linalg.norm(t)
        if abs(nrm - 1.0) > 1e-9:
            raise ParameterError(f"t must have unit norm, got {nrm}")
        if not (0.0 <= self.rho <= 1.0):
            raise ParameterError(f"rho must lie in [0, 1], got {self.rho}")
        if self.power_p <= 0 or self.target_sinr <= 0:
            raise ParameterError("power_p and target_sinr must be positive")
        q = np.asarray(self.q_z, dtype=np.complex128)
        if q.shape != (t.size, t.size):
            raise DimensionError(f"q_z shape {q.shape} does not match t length {t.size}")
        herm = np.max(np.abs(q - q.conj().T)) if q.size else 0.0
        scale = max(float(np.abs(np.trace(q)).real), 1.0)
        if herm > 1e-9 * scale:
            raise ParameterError(f"q_z is not Hermitian within tolerance ({herm:.3e})")
        if self.outage and (self.rho != 1.0 or np.any(q != 0)):
            raise ParameterError("an outage scheme must have rho = 1 and q_z = 0")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q_z", q)
        if self.q_z_factor is not None:
            f = np.asarray(self.q_z_factor, dtype=np.complex128)
            if f.ndim != 2 or f.shape[0] != t.size:
                raise DimensionError(
                    f"q_z_factor shape {f.shape} does not match t length {t.size}"
                )
            mismatch = float(np.max(np.abs(f @ f.conj().T - q)))
            if mismatch > 1e-9 * scale:
                raise ParameterError(
                    f"q_z_factor does not reproduce q_z (max deviation {mismatch:.3e})"
                )
            object.__setattr__(self, "q_z_factor", f)

    @property
    def data_power(self) -> float:
        return self.rho * self.power_p

    @property
    def noise_power(self) -> float:
        return float(np.real(np.trace(self.q_z)))


@dataclass(frozen=True)
class RxBeamformer:
    """A receive combining vector with a tag naming how it was built."""

    w: np.ndarray
    kind: str

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.complex128)
        if w.ndim != 1 or not np.any(w):
            raise ParameterError("beamformer must be a nonzero vector")
        if self.kind not in ("matched", "mmse", "robust_fdd", "robust_tdd"):
            raise ParameterError(f"unknown beamformer kind {self.kind!r}")
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class LinkSinr:
    """SINR of one link, with the powers behind it."""

    sinr: float
    signal_power: float
    interference_power: float
    noise_power: float

    @property
    def interference_plus_noise(self) -> float:
        return self.interference_power + self.noise_power


@dataclass(frozen=True)
class SinrReport:
    """Outcome of one trial: both receivers' SINRs and the secrecy proxy."""

    sinr_b: float
    sinr_e: float
    secrecy_capacity: float
    outage: bool


def required_rho(sigma1: float, target_sinr: float, power_p: float, sigma_b_sq: float) -> float:
    """Data-power fraction that meets ``target_sinr`` on a clean link.

    With interference confined to the receiver's orthogonal subspace the
    matched combiner sees SINR = rho * P * sigma1^2 / sigma_b_sq, so the
    required fraction is sigma_b_sq * S / (sigma1^2 * P).  Values >= 1 mean
    the target is out of reach at this budget.
    """
    if target_sinr <= 0:
        raise ParameterError(f"target_sinr must be positive, got {target_sinr}")
    if power_p <= 0 or sigma_b_sq <= 0 or sigma1 <= 0:
        raise ParameterError("sigma1, power_p, sigma_b_sq must all be positive")
    return sigma_b_sq * target_sinr / (sigma1**2 * power_p)


def noise_covariance_for(t_prime: np.ndarray, rho: float, power_p: float) -> np.ndarray:
    """Isotropic interference covariance over the columns of ``t_prime``.

    Spends (1-rho)*P split evenly across the na-1 columns.  A single-antenna
    transmitter has no orthogonal directions and gets an all-zero covariance,
    as does a design with rho = 1.
    """
    na = t_prime.shape[0]
    if na == 1 or rho >= _RHO_CEIL:
        return np.zeros((na, na), dtype=np.complex128)
    beta = (1.0 - rho) * power_p / (na - 1)
    return beta * (t_prime @ t_prime.conj().T)


def noise_factor_for(t_prime: np.ndarray, rho: float, power_p: float) -> np.ndarray | None:
    """Factor F with F F^H equal to :func:`noise_covariance_for`'s output.

    Returns None for the degenerate zero-covariance cases.
    """
    na = t_prime.shape[0]
    if na == 1 or rho >= _RHO_CEIL:
        return None
    beta = (1.0 - rho) * power_p / (na - 1)
    return np.sqrt(beta) * t_prime


def interference_level(scheme: TxScheme) -> float:
    """Per-direction interference power of a scheme built by this module."""
    na = scheme.t.size
    if na == 1 or scheme.rho >= _RHO_CEIL:
        return 0.0
    return (1.0 - scheme.rho) * scheme.power_p / (na - 1)


def design_artificial_noise(chan: ChannelSet, svd: SvdPartition, target_sinr: float) -> TxScheme:
    """Transmit design when the eavesdropper channel is unknown.

    Data rides the strongest right singular direction of the receiver
    channel; the leftover budget is spread isotropically over the orthogonal
    complement, which the intended receiver never sees but any other receiver
    does.  When even the full budget cannot meet the target the design
    degrades to rho = 1 with no interference and the outage flag set.

    Pass a perturbed partition to model a transmitter acting on a stale
    estimate; the power and noise figures still come from ``chan``.
    """
    rho = required_rho(svd.sigma1, target_sinr, chan.power_p, chan.sigma_b_sq)
    outage = rho >= _RHO_CEIL
    if outage:
        rho = 1.0
    q = noise_covariance_for(svd.t_prime, rho, chan.power_p)
    return TxScheme(
        t=svd.v1, rho=rho, q_z=q, power_p=chan.power_p,
        target_sinr=target_sinr, outage=outage,
        q_z_factor=noise_factor_for(svd.t_prime, rho, chan.power_p),
    )


def design_known_ecsi(
    chan: ChannelSet,
    h_ea_assumed,
    target_sinr: float,
    *,
    full_power: bool = False,
) -> TxScheme:
    """Transmit design that minimizes the eavesdropper SINR at fixed QoS.

    All power goes to the data stream; the direction solves the generalized
    eigenproblem between the two channel Gram matrices.  With fewer
    eavesdropper antennas than transmit antennas the direction lands in the
    eavesdropper's null space and her SINR is exactly zero.  The data
    fraction is the minimum meeting ``target_sinr`` at the intended receiver
    with a matched combiner (the remainder goes unused); ``full_power=True``
    transmits the whole budget instead.
    """
    hb = chan.h_ba.entries
    he = as_matrix(h_ea_assumed)
    if hb.shape[1] != he.shape[1]:
        raise DimensionError(f"channel column counts differ: {hb.shape[1]} vs {he.shape[1]}")
    na = hb.shape[1]
    a = hb.conj().T @ hb
    b = he.conj().T @ he
    t = None
    if he.shape[0] >= na:
        try:
            _, vecs = scipy.linalg.eigh(a, b)
            t = vecs[:, -1]
        except np.linalg.LinAlgError:
            t = None
    if t is None:
        # The eavesdropper Gram matrix is singular; pose the reciprocal
        # problem instead and take the smallest ratio, which puts t inside
        # the eavesdropper's null space.
        try:
            _, vecs = scipy.linalg.eigh(b, a)
        except np.linalg.LinAlgError as exc:
            raise DegenerateChannelError(
                "both channel Gram matrices are singular; no direction is identifiable"
            ) from exc
        t = vecs[:, 0]
    t = t / np.linalg.norm(t)
    gain = float(np.real(np.vdot(t, a @ t)))
    if gain <= 0:
        raise DegenerateChannelError("data direction has zero gain to the intended receiver")
    rho = chan.sigma_b_sq * target_sinr / (chan.power_p * gain)
    outage = rho >= _RHO_CEIL
    if outage or full_power:
        rho = 1.0
    q = np.zeros((na, na), dtype=np.complex128)
    return TxScheme(t=t, rho=rho, q_z=q, power_p=chan.power_p,
                    target_sinr=target_sinr, outage=outage)


def bob_matched_beamformer(chan: ChannelSet, scheme: TxScheme) -> RxBeamformer:
    """Combiner matched to the received data signature, w = H t.

    Optimal when no interference reaches the receiver; under
    ``design_artificial_noise`` with an exact channel it attains the target
    SINR exactly.
    """
    return RxBeamformer(w=chan.h_ba.entries @ scheme.t, kind="matched")


def mmse_combiner(h, scheme: TxScheme, sigma_sq: float, q_z_true=None) -> np.ndarray:
    """Max-SINR combiner against a scheme's interference plus noise.

    Solves (H Q H^H + sigma^2 I) w = H t for the channel ``h`` the combiner
    actually sees.  ``q_z_true`` overrides the scheme covariance when the
    transmitted interference differs from the nominal design.
    """
    arr = as_matrix(h)
    q = scheme.q_z if q_z_true is None else np.asarray(q_z_true, dtype=np.complex128)
    cov = arr @ q @ arr.conj().T + sigma_sq * np.eye(arr.shape[0])
    rhs = arr @ scheme.t
    return scipy.linalg.solve(cov, rhs, assume_a="pos")


def eve_mmse_beamformer(chan: ChannelSet, scheme: TxScheme, q_z_true=None) -> RxBeamformer:
    """The best linear receiver the eavesdropper can run.

    She knows her own channel and the full transmit configuration, so her
    combiner whitens the interference she actually receives.  A scheme that
    nulls her exactly leaves the MMSE solution at zero, where any combiner
    is equally good; a fixed unit vector stands in so the zero SINR is still
    reportable.
    """
    w = mmse_combiner(chan.h_ea, scheme, chan.sigma_e_sq, q_z_true=q_z_true)
    if not np.any(w):
        w = np.zeros(as_matrix(chan.h_ea).shape[0], dtype=np.complex128)
        w[0] = 1.0
    return RxBeamformer(w=w, kind="mmse")


def _as_vector(w) -> np.ndarray:
    if isinstance(w, RxBeamformer):
        return w.w
    return np.asarray(w, dtype=np.complex128)


def link_sinr(h, scheme: TxScheme, w, sigma_sq: float, q_z_true=None) -> LinkSinr:
    """SINR seen through channel ``h`` with combiner ``w``.

    The quadratic forms are evaluated directly, so the scheme's direction and
    covariance may come from a stale estimate while ``h`` is the true
    channel.  Powers are reported for the unit-norm combiner (the SINR does
    not depend on the scale of ``w``, but the split does); noise_power is
    then exactly ``sigma_sq``, and sums of the components across trials give
    a well-defined ratio-of-expectations estimate.
    """
    arr = as_matrix(h)
    w = _as_vector(w)
    if w.ndim != 1 or w.size != arr.shape[0]:
        raise DimensionError(f"combiner length {w.shape} does not match channel rows {arr.shape[0]}")
    if sigma_sq <= 0:
        raise ParameterError(f"sigma_sq must be positive, got {sigma_sq}")
    scale = np.linalg.norm(w)
    if scale == 0.0:
        raise ParameterError("combiner must be nonzero")
    w = w / scale
    ht = arr @ scheme.t
    sig = scheme.data_power * abs(np.vdot(w, ht)) ** 2
    if q_z_true is None and scheme.q_z_factor is not None:
        # Through the factor the received interference is a sum of squared
        # amplitudes, so a combiner orthogonal to it measures the true
        # epsilon-squared residual instead of covariance round-off.
        amps = scheme.q_z_factor.conj().T @ (arr.conj().T @ w)
        interf = float(np.real(np.vdot(amps, amps)))
    else:
        q = scheme.q_z if q_z_true is None else np.asarray(q_z_true, dtype=np.complex128)
        hqh = arr @ q @ arr.conj().T
        interf = float(np.real(np.vdot(w, hqh @ w)))
        # Clamp tiny negative round-off from the quadratic form.
        interf = max(interf, 0.0)
    noise = sigma_sq * float(np.real(np.vdot(w, w)))
    return LinkSinr(
        sinr=float(sig) / (interf + noise),
        signal_power=float(sig),
        interference_power=interf,
        noise_power=noise,
    )


def evaluate_sinr(chan: ChannelSet, scheme: TxScheme, w_b, w_e, q_z_true=None) -> SinrReport:
    """Evaluate one trial at both receivers.

    ``q_z_true`` is the interference covariance actually transmitted; it
    defaults to the scheme's own.  The secrecy number is the clamped
    difference of the two log rates at the beamformer outputs.
    """
    bob = link_sinr(chan.h_ba, scheme, w_b, chan.sigma_b_sq, q_z_true=q_z_true)
    eve = link_sinr(chan.h_ea, scheme, w_e, chan.sigma_e_sq, q_z_true=q_z_true)
    return SinrReport(
        sinr_b=bob.sinr,
        sinr_e=eve.sinr,
        secrecy_capacity=secrecy_capacity_proxy(bob.sinr, eve.sinr),
        outage=scheme.outage,
    )


def secrecy_capacity_proxy(sinr_b: float, sinr_e: float) -> float:
    """Clamped rate difference log2(1+SINR_b) - log2(1+SINR_e), in bits/use.

    Negative differences clamp to zero: secrecy is simply lost, not owed.
    """
    if sinr_b < 0 or sinr_e < 0:
        raise ParameterError("SINRs must be nonnegative")
    rate = np.log2(1.0 + sinr_b) - np.log2(1.0 + sinr_e)
    return float(max(rate, 0.0))


# Relative slack when checking whether a link delivered its provisioned
# rate; covers solver round-off in designs that hit the target exactly.
_GOODPUT_SLACK = 1e-9


def secure_goodput(sinr_b: float, sinr_e: float, target_sinr: float) -> float:
    """Secret bits per use actually banked at the provisioned rate.

    The transmitter commits to a code rate of log2(1 + target) before the
    realized channel is known.  A trial where the intended receiver's SINR
    falls short of the target is a decoding outage and earns nothing; on the
    remaining trials the secret rate is the provisioned rate minus the
    eavesdropper's rate, clamped at zero.  Unlike
    :func:`secrecy_capacity_proxy`, which credits whatever instantaneous
    rate gap a trial happens to produce, this metric only pays out for
    secrecy delivered at the rate the link was designed to carry.
    """
    if target_sinr <= 0:
        raise ParameterError(f"target_sinr must be positive, got {target_sinr}")
    if sinr_b < 0 or sinr_e < 0:
        raise ParameterError("SINRs must be nonnegative")
    if sinr_b < target_sinr * (1.0 - _GOODPUT_SLACK):
        return 0.0
    rate = np.log2(1.0 + target_sinr) - np.log2(1.0 + sinr_e)
    return float(max(rate, 0.0))


def secrecy_capacity_full(chan: ChannelSet, scheme: TxScheme, q_z_true=None) -> float:
    """Matrix mutual-information secrecy rate for the transmitted covariance.

    Uses the full transmit covariance rho*P*t*t^H + q_z through both channels
    rather than the scalar beamformer outputs.  Reported as an alternative
    metric; the scalar proxy is the default everywhere else.
    """
    q = scheme.q_z if q_z_true is None else np.asarray(q_z_true, dtype=np.complex128)
    q_a = scheme.data_power * np.outer(scheme.t, scheme.t.conj()) + q
    hb = chan.h_ba.entries
    he = chan.h_ea.entries
    eye_b = np.eye(hb.shape[0])
    eye_e = np.eye(he.shape[0])
    _, logdet_b = np.linalg.slogdet(eye_b + hb @ q_a @ hb.conj().T / chan.sigma_b_sq)
    _, logdet_e = np.linalg.slogdet(eye_e + he @ q_a @ he.conj().T / chan.sigma_e_sq)
    return float(max((logdet_b - logdet_e) / np.log(2.0), 0.0))


def perfect_csi_trial(chan: ChannelSet, target_sinr: float, svd: SvdPartition | None = None):
    """Run the whole perfect-knowledge pipeline for one channel.

    Returns (scheme, bob beamformer, eve beamformer, report).  Convenience
    wrapper used by the experiment harness and the self checks.
    """
    part = svd if svd is not None else partition_svd(chan.h_ba)
    scheme = design_artificial_noise(chan, part, target_sinr)
    w_b = bob_matched_beamformer(chan, scheme)
    w_e = eve_mmse_beamformer(chan, scheme)
    return scheme, w_b, w_e, evaluate_sinr(chan, scheme, w_b, w_e)
