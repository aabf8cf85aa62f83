"""Second-order statistics of a perturbed singular value decomposition.

When the transmitter designs from an estimate H + dH instead of H, the
quantities the design rests on (the dominant right singular vector, the
largest singular value) move.  For zero-mean circularly-symmetric dH with
known covariance, every first and second moment of those movements has a
closed form in the unperturbed decomposition and the error covariance.  This
module computes them, turns them into a closed-form receive-SINR degradation
estimate, and provides the matching Monte Carlo simulation of the mismatched
("naive") link.

Conventions.  The channel is n_rx x n_tx with n_rx <= n_tx; perturbed
singular vectors are phase-aligned so the inner product with their
unperturbed counterpart is real and positive, matching
``channels.align_singular_vectors``.  All moment formulas are exact through
second order in dH.  The central object is the second-moment tensor of the
error expressed in the singular bases,

    M[i, j, k, l] = E{ (u_i^H dH v_j) (u_k^H dH v_l)^* },

with i, k over the n_rx left directions and j, l over all n_tx right
directions (null-space directions included).  For an i.i.d. error of
per-entry variance s2 the tensor collapses to s2 * delta_ik * delta_jl.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channels import ChannelSet, CsiErrorModel, SvdPartition, as_matrix, partition_svd
from .exceptions import IllConditionedGapError, ParameterError, ValidityRangeError
from .transmit import (
    LinkSinr,
    SinrReport,
    TxScheme,
    design_artificial_noise,
    eve_mmse_beamformer,
    evaluate_sinr,
    link_sinr,
    required_rho,
)

# Relative threshold below which a pairwise eigenvalue gap of the channel
# Gram matrix makes the second-order expansion meaningless.
_PAIR_GAP_TOL = 1e-10


@dataclass(frozen=True)
class PerturbMoments:
    """Closed-form perturbation moments for one channel and error model.

    Fields:
      d             real (f-1,): reciprocal gaps 1/(sigma_i^2 - sigma_f^2).
      g             E{dH v_f v_f^H dH^H}, the error energy seen through the
                    weakest right direction (n_rx x n_rx).
      g_prime       E{dH V_s D V_s^H dH^H} with D = diag(d) (n_rx x n_rx).
      g_dprime      E{dH^H U_s D U_s^H dH} (n_tx x n_tx).
      k             E{dH V_s V_s^H dH^H} (n_rx x n_rx).
      e_dv_s        E{dV_s}: mean drift of the strong right singular
                    vectors, columns j = 1..f-1 (n_tx x (f-1)).
      e_vs_dvs      E{V_s^H dV_s}: the same drifts in the strong right
                    basis ((f-1) x (f-1)); diagonal entries are the real,
                    nonpositive self-alignment losses.
      e_dsigma1     E{d sigma_1}: mean drift of the top singular value.
      e_dsigma1_sq  E{(d sigma_1)^2}: its second moment.
      e_dv1         E{dv_1}: first column of e_dv_s (n_tx,).
      e_dv1_outer   E{dv_1 dv_1^H}: spread of the dominant right vector
                    around its mean, Hermitian PSD (n_tx x n_tx).  Its trace
                    equals the leaked power E{1 - |v_1^H v~_1|^2}, so
                    v_1 v_1^H + v_1 e_dv1^H + e_dv1 v_1^H + e_dv1_outer is a
                    trace-one model of E{v~_1 v~_1^H}.
    """

    d: np.ndarray
    g: np.ndarray
    g_prime: np.ndarray
    g_dprime: np.ndarray
    k: np.ndarray
    e_dv_s: np.ndarray
    e_vs_dvs: np.ndarray
    e_dsigma1: float
    e_dsigma1_sq: float
    e_dv1: np.ndarray
    e_dv1_outer: np.ndarray

    def scaled(self, factor: float) -> PerturbMoments:
        """Moments for the same channel with the error covariance scaled.

        Every expectation is linear in the error covariance, so scaling by
        ``factor`` is exact.  The reciprocal gaps ``d`` describe the channel,
        not the error, and stay as they are.
        """
        if factor < 0:
            raise ParameterError(f"scale factor must be nonnegative, got {factor}")
        return replace(
            self,
            g=self.g * factor,
            g_prime=self.g_prime * factor,
            g_dprime=self.g_dprime * factor,
            k=self.k * factor,
            e_dv_s=self.e_dv_s * factor,
            e_vs_dvs=self.e_vs_dvs * factor,
            e_dsigma1=self.e_dsigma1 * factor,
            e_dsigma1_sq=self.e_dsigma1_sq * factor,
            e_dv1=self.e_dv1 * factor,
            e_dv1_outer=self.e_dv1_outer * factor,
        )


def _second_moment_tensor(svd: SvdPartition, err: CsiErrorModel) -> np.ndarray:
    """The tensor M[i, j, k, l] of the error in the singular bases."""
    m, n = svd.n_rx, svd.n_tx
    if err.kind == "iid":
        return err.sigma_h_sq * np.einsum(
            "ik,jl->ijkl", np.eye(m), np.eye(n)
        ).astype(np.complex128)
    t = err.cov_tensor(m, n)
    u = svd.u_full
    v = svd.v_full
    stage = np.einsum("ai,apbq->ipbq", u.conj(), t)
    stage = np.einsum("pj,ipbq->ijbq", v, stage)
    stage = np.einsum("bk,ijbq->ijkq", u, stage)
    return np.einsum("ql,ijkq->ijkl", v.conj(), stage)


def _sandwich_rows(x: np.ndarray, svd: SvdPartition, err: CsiErrorModel) -> np.ndarray:
    """E{dH x dH^H} for an n_tx x n_tx weight x (result n_rx x n_rx)."""
    m, n = svd.n_rx, svd.n_tx
    if err.kind == "iid":
        return err.sigma_h_sq * np.trace(x) * np.eye(m, dtype=np.complex128)
    t = err.cov_tensor(m, n)
    return np.einsum("pq,apbq->ab", x, t)


def _sandwich_cols(y: np.ndarray, svd: SvdPartition, err: CsiErrorModel) -> np.ndarray:
    """E{dH^H y dH} for an n_rx x n_rx weight y (result n_tx x n_tx)."""
    m, n = svd.n_rx, svd.n_tx
    if err.kind == "iid":
        return err.sigma_h_sq * np.trace(y) * np.eye(n, dtype=np.complex128)
    t = err.cov_tensor(m, n)
    return np.einsum("ab,bqap->pq", y, t)


def compute_moments(svd: SvdPartition, err: CsiErrorModel) -> PerturbMoments:
    """Closed-form perturbation moments of the decomposition under ``err``.

    Expansion of the Gram matrix (H+dH)^H (H+dH) around H^H H through second
    order gives, for each strong right vector v_j, the coefficient of its
    drift on every other unperturbed right vector v_k.  First-order
    coefficients have zero mean; their magnitudes and the second-order means
    combine into all the fields documented on :class:`PerturbMoments`.

    Raises :class:`IllConditionedGapError` when the partition was flagged
    ill-conditioned or any pairwise singular-value gap is too small for the
    expansion to hold.
    """
    if svd.ill_conditioned:
        raise IllConditionedGapError(
            "singular-value gaps too small: perturbation moments are unreliable"
        )
    m, n = svd.n_rx, svd.n_tx
    f = svd.f
    sig = svd.singular_values
    lam = sig**2
    lam1 = lam[0]
    if m > 1:
        pair_gaps = lam[:-1] - lam[1:]
        if np.min(pair_gaps) < _PAIR_GAP_TOL * lam1:
            raise IllConditionedGapError(
                "near-degenerate singular values: perturbation moments are unreliable"
            )
    sig_ext = np.concatenate([sig, np.zeros(n - m)])
    lam_ext = np.concatenate([lam, np.zeros(n - m)])

    mom = _second_moment_tensor(svd, err)

    def drift_coefficients(j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Mean drift coefficients of right vector j on every direction.

        Returns (coeff, num1, inv_gap): coeff[k] is E{v_k^H dv_j} through
        second order, with the k = j entry holding the real self-alignment
        loss, and num1 * inv_gap**2 is the mean squared first-order
        coefficient on each other direction.
        """
        gap = lam[j] - lam_ext
        inv_gap = np.zeros(n)
        mask = np.arange(n) != j
        inv_gap[mask] = 1.0 / gap[mask]

        # |first-order coefficient|^2 on every other direction.
        a_kj = np.zeros(n)
        a_kj[:m] = np.real(np.einsum("kk->k", mom[:, j, :, j]))
        b_kj = np.real(np.einsum("kk->k", mom[j, :, j, :]))
        num1 = lam_ext * a_kj + lam[j] * b_kj

        # Second-order mean coefficients: couplings through every third
        # direction, the diagonal correction, and the direct Gram term.
        a1 = np.zeros((n, n), dtype=np.complex128)
        a1[:m, :] = np.einsum("kll->kl", mom[:, :, j, :])
        b1 = np.zeros((n, n), dtype=np.complex128)
        b1[:m, :] = lam[:, None] * np.einsum("llk->lk", mom[:, j, :, :])
        t1 = (sig_ext * sig[j] * (a1 @ inv_gap) + (inv_gap @ b1)) * inv_gap

        m4 = np.zeros(n, dtype=np.complex128)
        m4[:m] = mom[:, j, j, j]
        m5 = mom[j, j, j, :]
        t2 = (sig_ext * sig[j] * m4 + lam[j] * m5) * inv_gap**2

        t3 = np.einsum("iik->k", mom[:, j, :, :]) * inv_gap

        coeff = t1 - t2 + t3
        coeff[j] = -0.5 * np.sum(num1[mask] * inv_gap[mask] ** 2)
        return coeff, num1, inv_gap

    # The dominant vector has a drift even when the strong set below is
    # empty (single-row channels, where it is also the weakest).
    coeff0, num1_0, inv_gap0 = drift_coefficients(0)
    e_dv1 = svd.v_full @ coeff0

    # Full covariance of the first-order fluctuation of v_1: cross moments
    # of the coefficients on every pair of other directions.  Unconjugated
    # error moments vanish by circular symmetry, leaving two terms.
    m_row = np.zeros((n, n), dtype=np.complex128)
    m_row[:m, :m] = mom[:, 0, :, 0]
    m_col = np.conj(mom[0, :, 0, :])
    spread = (np.outer(sig_ext, sig_ext) * m_row + lam1 * m_col) * np.outer(
        inv_gap0, inv_gap0
    )
    e_dv1_outer = svd.v_full @ spread @ svd.v_full.conj().T
    e_dv1_outer = (e_dv1_outer + e_dv1_outer.conj().T) / 2.0

    e_dv_coeff = np.zeros((n, f - 1), dtype=np.complex128)
    if f > 1:
        e_dv_coeff[:, 0] = coeff0
    for j in range(1, f - 1):
        e_dv_coeff[:, j] = drift_coefficients(j)[0]
    e_dv_s = svd.v_full @ e_dv_coeff
    e_vs_dvs = e_dv_coeff[: f - 1, :].copy()

    trace_term = float(np.real(np.einsum("ii->", mom[:, 0, :, 0])))
    coupling_term = float(np.sum(num1_0 * inv_gap0))
    m1111 = float(np.real(mom[0, 0, 0, 0]))
    sigma1 = sig[0]
    e_dsigma1 = (trace_term + coupling_term) / (2.0 * sigma1) - m1111 / (4.0 * sigma1)
    e_dsigma1_sq = 0.5 * m1111

    d = 1.0 / (lam[: f - 1] - lam[f - 1])
    dmat_v = svd.v_s @ np.diag(d) @ svd.v_s.conj().T
    dmat_u = svd.u_s @ np.diag(d) @ svd.u_s.conj().T

    return PerturbMoments(
        d=d,
        g=_sandwich_rows(np.outer(svd.v_f, svd.v_f.conj()), svd, err),
        g_prime=_sandwich_rows(dmat_v, svd, err),
        g_dprime=_sandwich_cols(dmat_u, svd, err),
        k=_sandwich_rows(svd.v_s @ svd.v_s.conj().T, svd, err),
        e_dv_s=e_dv_s,
        e_vs_dvs=e_vs_dvs,
        e_dsigma1=float(e_dsigma1),
        e_dsigma1_sq=float(e_dsigma1_sq),
        e_dv1=e_dv1,
        e_dv1_outer=e_dv1_outer,
    )


def _self_drift(svd: SvdPartition, moments: PerturbMoments) -> float:
    """Real part of E{v_1^H dv_1}, the dominant vector's alignment loss."""
    return float(np.real(np.vdot(svd.v1, moments.e_dv1)))


def first_vector_leak(svd: SvdPartition, moments: PerturbMoments) -> float:
    """Expected power of the dominant right vector landing off itself.

    E{1 - |v_1^H v~_1|^2} through second order; equals minus twice the real
    part of the self-alignment drift.
    """
    return -2.0 * _self_drift(svd, moments)


def naive_sinr_terms(
    svd: SvdPartition, moments: PerturbMoments, chan: ChannelSet, target_sinr: float
) -> tuple[float, float]:
    """Numerator and denominator of the closed-form naive-receiver SINR.

    The numerator is the expected received signal power (up to a common
    factor), the denominator the expected interference-plus-noise power at
    the matched combiner that was built from the unperturbed channel.
    Splitting the ratio out lets callers pool several channels before
    dividing.  Raises :class:`ValidityRangeError` if the nominal design is
    already in outage, where the expansion does not apply.
    """
    rho = required_rho(svd.sigma1, target_sinr, chan.power_p, chan.sigma_b_sq)
    if rho >= 1.0:
        raise ValidityRangeError(
            "nominal design is in outage; the closed-form degradation is undefined"
        )
    lam1 = svd.sigma1**2
    na = chan.na
    two_re_drift = 2.0 * _self_drift(svd, moments)
    upsilon = (
        2.0 * moments.e_dsigma1 / svd.sigma1 + moments.e_dsigma1_sq / lam1
    )
    numerator = lam1 * rho * chan.power_p * (1.0 + two_re_drift - upsilon)
    beta = (1.0 - rho) * chan.power_p / (na - 1) if na > 1 else 0.0
    denominator = chan.sigma_b_sq - lam1 * beta * two_re_drift
    return numerator, denominator


def predict_naive_sinr(
    svd: SvdPartition, moments: PerturbMoments, chan: ChannelSet, target_sinr: float
) -> float:
    """Closed-form expected SINR of the mismatched (naive) receiver.

    The transmitter designs from a perturbed channel while the receiver
    keeps the combiner matched to the true one; the expected signal loss and
    expected interference leakage both follow from the moments.  With a zero
    error model this reduces exactly to ``target_sinr``.

    Raises :class:`ValidityRangeError` when either term of the ratio leaves
    the region where the second-order expansion is meaningful (too large an
    error for this channel).
    """
    numerator, denominator = naive_sinr_terms(svd, moments, chan, target_sinr)
    if denominator <= 0.0:
        raise ValidityRangeError(
            "predicted interference-plus-noise power is nonpositive; "
            "error variance is outside the validity range for this channel"
        )
    if numerator <= 0.0:
        raise ValidityRangeError(
            "predicted signal power is nonpositive; "
            "error variance is outside the validity range for this channel"
        )
    return numerator / denominator


def naive_trial(
    chan: ChannelSet,
    err_sample: np.ndarray,
    target_sinr: float,
    *,
    svd: SvdPartition | None = None,
    svd_tilde: SvdPartition | None = None,
) -> tuple[SinrReport, LinkSinr, LinkSinr, TxScheme]:
    """One mismatched trial, returning the report plus both raw link powers.

    The transmitter designs everything (direction, power split,
    interference) from H + err_sample; the intended receiver keeps the
    matched combiner built from the true H.  The eavesdropper, as always,
    tracks the actual transmission.  Precomputed partitions can be passed in
    by sweep loops that already have them.
    """
    part = svd if svd is not None else partition_svd(chan.h_ba)
    if svd_tilde is None:
        h_tilde = chan.h_ba.entries + as_matrix(err_sample)
        svd_tilde = partition_svd(h_tilde)
    scheme = design_artificial_noise(chan, svd_tilde, target_sinr)
    w_b = chan.h_ba.entries @ part.v1
    w_e = eve_mmse_beamformer(chan, scheme)
    report = evaluate_sinr(chan, scheme, w_b, w_e)
    bob = link_sinr(chan.h_ba, scheme, w_b, chan.sigma_b_sq)
    eve = link_sinr(chan.h_ea, scheme, w_e, chan.sigma_e_sq)
    return report, bob, eve, scheme


def simulate_naive(chan: ChannelSet, err_sample: np.ndarray, target_sinr: float) -> SinrReport:
    """Simulate one trial of the mismatched design; see :func:`naive_trial`."""
    report, _, _, _ = naive_trial(chan, err_sample, target_sinr)
    return report
