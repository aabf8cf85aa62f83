"""Monte Carlo experiment harness: sweeps, pairing, and reproducibility.

A sweep varies exactly one quantity (eavesdropper antennas, target SINR, or
error level) and runs every requested scheme on identical channel and error
draws at each point, so scheme-to-scheme gaps are paired.  Seeding is
hierarchical and absolute: each random object derives from the master seed,
a stream tag, and the trial index, which makes results bit-identical no
matter how trials are split across worker processes.

Per-trial metrics are materialized and reduced once at the end; means are
arithmetic means of linear SINR, and a pooled ratio-of-expectations figure
(mean signal power over mean interference-plus-noise power) is kept
alongside for comparisons against the closed-form degradation estimate,
which predicts exactly that ratio.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .channels import (
    ChannelMatrix,
    ChannelSet,
    CsiErrorModel,
    SvdPartition,
    complex_gaussian,
    partition_svd,
    perturb_ecsi,
)
from .exceptions import ConfigError, ValidityRangeError
from .perturbation import (
    compute_moments,
    naive_sinr_terms,
    naive_trial,
)
from .robust import _fdd_trial, _tdd_trial
from .transmit import (
    bob_matched_beamformer,
    design_artificial_noise,
    design_known_ecsi,
    eve_mmse_beamformer,
    evaluate_sinr,
    link_sinr,
    secrecy_capacity_full,
    secure_goodput,
)
from .units import from_db, to_db
from .version import __version__

SCHEMES = (
    "perfect",
    "known_ecsi",
    "imperfect_ecsi",
    "naive",
    "robust_fdd",
    "robust_tdd",
    "analytic_naive",
)
_NEEDS_ERROR = {"naive", "robust_fdd", "robust_tdd", "analytic_naive"}
SCENARIOS = (
    "fig1_ne_sweep",
    "fig2_prediction",
    "fig3_sinr_vs_target",
    "fig4_secrecy",
    "fig5_sigma_sweep",
    "custom",
)
# Error levels above this (dB) are outside the trusted range of the
# second-order expansion; such points are marked extrapolated.
EXTRAPOLATION_EDGE_DB = -10.0

# Stream tags for per-trial seeding.
_TAG_CHANNEL = 101
_TAG_EVE = 102
_TAG_ERROR = 103
_TAG_ECSI = 104

_METRICS = (
    "sinr_b", "sinr_e", "secrecy", "outage",
    "signal_b", "intnoise_b", "signal_e", "intnoise_e", "flagged",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one sweep needs; exactly one field may hold a list.

    ``ne``, ``target_sinr_db``, and ``sigma_h_db`` accept either a scalar or
    a sequence; a sequence marks the sweep axis.  ``sigma_h_db`` may be None
    when no scheme involves transmitter-side channel error.
    """

    scenario: str = "custom"
    na: int = 5
    nb: int = 5
    ne: int | tuple[int, ...] = 5
    target_sinr_db: float | tuple[float, ...] = 20.0
    sigma_h_db: float | tuple[float, ...] | None = None
    gamma_ecsi: float = 0.05
    trials: int = 3000
    power_db: float = 20.0
    sigma_b_sq: float = 1.0
    sigma_e_sq: float = 1.0
    master_seed: int = 1
    schemes: tuple[str, ...] = ("perfect",)
    threads: int = 1
    propagate_through_estimate: bool = False
    secrecy_metric: str = "goodput"

    def __post_init__(self):
        for name in ("ne", "target_sinr_db", "sigma_h_db"):
            value = getattr(self, name)
            if isinstance(value, (list, tuple, np.ndarray)):
                object.__setattr__(self, name, tuple(type_of(name)(v) for v in value))
        if isinstance(self.schemes, str):
            object.__setattr__(
                self, "schemes",
                tuple(s.strip() for s in self.schemes.split(",") if s.strip()),
            )
        elif isinstance(self.schemes, (list, np.ndarray)):
            object.__setattr__(self, "schemes", tuple(self.schemes))
        self.validate()

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if not (isinstance(self.na, int) and isinstance(self.nb, int)):
            raise ConfigError("na and nb must be integers")
        if self.na < 1 or self.nb < 1:
            raise ConfigError("na and nb must be at least 1")
        if self.nb > self.na:
            raise ConfigError(
                f"more receive than transmit antennas (nb={self.nb} > na={self.na}) "
                "is not supported by the decomposition convention"
            )
        for v in _as_tuple(self.ne):
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"ne values must be positive integers, got {v!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if not (0.0 <= self.gamma_ecsi <= 1.0):
            raise ConfigError(f"gamma_ecsi must lie in [0, 1], got {self.gamma_ecsi}")
        if self.sigma_b_sq <= 0 or self.sigma_e_sq <= 0:
            raise ConfigError("noise powers must be positive")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; choose from {SCHEMES}")
        axes = [
            name
            for name in ("ne", "target_sinr_db", "sigma_h_db")
            if isinstance(getattr(self, name), tuple)
        ]
        if len(axes) > 1:
            raise ConfigError(f"only one quantity may be swept, got {axes}")
        if self.sigma_h_db is None and _NEEDS_ERROR.intersection(self.schemes):
            raise ConfigError(
                "sigma_h_db is required for schemes with transmitter-side error: "
                f"{sorted(_NEEDS_ERROR.intersection(self.schemes))}"
            )
        if self.secrecy_metric not in ("goodput", "proxy", "full"):
            raise ConfigError(
                "secrecy_metric must be 'goodput', 'proxy', or 'full', "
                f"got {self.secrecy_metric!r}"
            )

    @property
    def power_p(self) -> float:
        return float(from_db(self.power_db))

    def axis(self) -> tuple[str, tuple]:
        """The swept field and its values; a scalar run sweeps one target."""
        for name in ("ne", "target_sinr_db", "sigma_h_db"):
            value = getattr(self, name)
            if isinstance(value, tuple):
                return name, value
        return "target_sinr_db", (float(self.target_sinr_db),)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def type_of(name: str):
    return int if name == "ne" else float


def _as_tuple(value) -> tuple:
    return value if isinstance(value, tuple) else (value,)


def preset_config(scenario: str, **overrides) -> ExperimentConfig:
    """Named sweep setups matching the package's standard experiments."""
    presets: dict[str, dict[str, Any]] = {
        "fig1_ne_sweep": dict(
            na=4, nb=4, ne=tuple(range(1, 21)), target_sinr_db=20.0,
            sigma_h_db=None, schemes=("perfect", "known_ecsi", "imperfect_ecsi"),
        ),
        "fig2_prediction": dict(
            na=5, nb=5, ne=5, target_sinr_db=20.0,
            sigma_h_db=(-30.0, -25.0, -20.0, -15.0, -10.0),
            schemes=("naive", "analytic_naive"),
        ),
        "fig3_sinr_vs_target": dict(
            na=5, nb=5, ne=5, target_sinr_db=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0),
            sigma_h_db=-10.0,
            schemes=("perfect", "naive", "robust_fdd", "robust_tdd"),
        ),
        "fig4_secrecy": dict(
            na=5, nb=5, ne=5, target_sinr_db=(5.0, 10.0, 15.0, 20.0),
            sigma_h_db=-10.0,
            schemes=("naive", "robust_fdd", "robust_tdd", "known_ecsi"),
        ),
        "fig5_sigma_sweep": dict(
            na=5, nb=5, ne=5, target_sinr_db=20.0,
            sigma_h_db=(-40.0, -35.0, -30.0, -25.0, -20.0, -15.0, -10.0, -5.0),
            schemes=("naive", "robust_fdd", "robust_tdd"),
        ),
    }
    if scenario not in presets:
        raise ConfigError(f"no preset for scenario {scenario!r}; choose from {sorted(presets)}")
    params: dict[str, Any] = {"scenario": scenario, **presets[scenario]}
    params.update(overrides)
    return ExperimentConfig(**params)


@dataclass(frozen=True)
class SweepResult:
    """Reduced sweep output plus enough metadata to reproduce it."""

    axis_name: str
    axis: tuple
    schemes: tuple[str, ...]
    series: dict[str, dict[str, tuple]]
    extrapolated: tuple[bool, ...]
    meta: dict[str, Any] = field(default_factory=dict)

    def records(self) -> list[dict[str, Any]]:
        """Flatten to one record per (point, scheme), for table output."""
        rows = []
        for p, value in enumerate(self.axis):
            for scheme in self.schemes:
                row: dict[str, Any] = {
                    "axis": self.axis_name,
                    "axis_value": value,
                    "scheme": scheme,
                    "extrapolated": self.extrapolated[p],
                }
                for metric, values in self.series[scheme].items():
                    row[metric] = values[p]
                rows.append(row)
        return rows


def _seed(cfg: ExperimentConfig, tag: int, trial: int, point: int | None = None):
    entropy = [cfg.master_seed, tag, trial]
    if point is not None:
        entropy.append(point)
    return np.random.SeedSequence(entropy)


def _rng(cfg: ExperimentConfig, tag: int, trial: int, point: int | None = None):
    return np.random.default_rng(_seed(cfg, tag, trial, point))


def _secrecy(cfg: ExperimentConfig, chan: ChannelSet, scheme, report) -> float:
    """Per-trial secrecy under the configured metric.

    "goodput" pays the provisioned secret rate only on trials where the
    intended link actually reaches its target SINR, so schemes are compared
    on secrecy they reliably deliver rather than on lucky fades; "proxy" is
    the instantaneous clamped rate difference at the beamformer outputs;
    "full" is the matrix mutual-information rate of the transmitted
    covariance.
    """
    if cfg.secrecy_metric == "full":
        return secrecy_capacity_full(chan, scheme)
    if cfg.secrecy_metric == "goodput":
        return secure_goodput(report.sinr_b, report.sinr_e, scheme.target_sinr)
    return report.secrecy_capacity


def _point_values(cfg: ExperimentConfig, axis_name: str, value):
    ne = value if axis_name == "ne" else cfg.ne
    target_db = value if axis_name == "target_sinr_db" else cfg.target_sinr_db
    sigma_db = value if axis_name == "sigma_h_db" else cfg.sigma_h_db
    return int(ne), float(target_db), None if sigma_db is None else float(sigma_db)


def _run_chunk(cfg: ExperimentConfig, lo: int, hi: int) -> np.ndarray:
    """Metrics for trials [lo, hi): shape (points, schemes, metrics, trials)."""
    axis_name, axis_values = cfg.axis()
    n_points = len(axis_values)
    n_schemes = len(cfg.schemes)
    out = np.full((n_points, n_schemes, len(_METRICS), hi - lo), np.nan)

    power_p = cfg.power_p
    needs_error = bool(_NEEDS_ERROR.intersection(cfg.schemes))
    needs_moments = bool({"robust_tdd", "analytic_naive"}.intersection(cfg.schemes))
    eve_per_point = axis_name == "ne"

    for idx, trial in enumerate(range(lo, hi)):
        h_ba = ChannelMatrix(
            complex_gaussian(_rng(cfg, _TAG_CHANNEL, trial), cfg.nb, cfg.na)
        )
        svd = partition_svd(h_ba)
        dh_unit = None
        if needs_error:
            dh_unit = complex_gaussian(_rng(cfg, _TAG_ERROR, trial), cfg.nb, cfg.na)
        moments_unit = None
        if needs_moments:
            moments_unit = compute_moments(svd, CsiErrorModel.iid(1.0))

        h_ea_fixed = None
        ecsi_fixed = None
        if not eve_per_point:
            h_ea_fixed = ChannelMatrix(
                complex_gaussian(_rng(cfg, _TAG_EVE, trial), _as_tuple(cfg.ne)[0], cfg.na)
            )
            if "imperfect_ecsi" in cfg.schemes:
                ecsi_fixed = perturb_ecsi(
                    h_ea_fixed, cfg.gamma_ecsi, _seed(cfg, _TAG_ECSI, trial)
                )

        for p, axis_value in enumerate(axis_values):
            ne, target_db, sigma_db = _point_values(cfg, axis_name, axis_value)
            target = float(from_db(target_db))
            if eve_per_point:
                h_ea = ChannelMatrix(
                    complex_gaussian(_rng(cfg, _TAG_EVE, trial, p), ne, cfg.na)
                )
            else:
                h_ea = h_ea_fixed
            chan = ChannelSet(
                h_ba=h_ba, h_ea=h_ea, sigma_b_sq=cfg.sigma_b_sq,
                sigma_e_sq=cfg.sigma_e_sq, power_p=power_p,
            )

            part_tilde = None
            moments = None
            if needs_error and sigma_db is not None:
                sigma_sq = float(from_db(sigma_db))
                dh = np.sqrt(sigma_sq) * dh_unit
                part_tilde = partition_svd(h_ba.entries + dh)
                if needs_moments:
                    moments = moments_unit.scaled(sigma_sq)

            for s, scheme_name in enumerate(cfg.schemes):
                out[p, s, :, idx] = _one_scheme(
                    cfg, scheme_name, chan, svd, target, part_tilde, moments, trial, p,
                    ecsi_fixed,
                )
    return out


def _one_scheme(
    cfg: ExperimentConfig,
    name: str,
    chan: ChannelSet,
    svd: SvdPartition,
    target: float,
    part_tilde,
    moments,
    trial: int,
    point: int,
    ecsi_fixed,
) -> np.ndarray:
    row = np.full(len(_METRICS), np.nan)

    if name == "analytic_naive":
        try:
            num, den = naive_sinr_terms(svd, moments, chan, target)
        except ValidityRangeError:
            row[8] = 1.0
            return row
        row[4], row[5] = num, den
        if num > 0.0 and den > 0.0:
            row[0] = num / den
            row[8] = 0.0
        else:
            row[8] = 1.0
        return row

    if name == "perfect":
        scheme = design_artificial_noise(chan, svd, target)
        w_b = bob_matched_beamformer(chan, scheme)
    elif name == "known_ecsi":
        scheme = design_known_ecsi(chan, chan.h_ea, target)
        w_b = bob_matched_beamformer(chan, scheme)
    elif name == "imperfect_ecsi":
        assumed = (
            ecsi_fixed
            if ecsi_fixed is not None
            else perturb_ecsi(chan.h_ea, cfg.gamma_ecsi, _seed(cfg, _TAG_ECSI, trial, point))
        )
        scheme = design_known_ecsi(chan, assumed, target)
        w_b = bob_matched_beamformer(chan, scheme)
    elif name == "naive":
        report, bob, eve, scheme = naive_trial(
            chan, None, target, svd=svd, svd_tilde=part_tilde
        )
        return _fill(row, cfg, chan, scheme, report, bob, eve)
    elif name == "robust_fdd":
        _, report, ctx, bob, eve, scheme = _fdd_trial(
            chan, part_tilde, target,
            propagate_through_estimate=cfg.propagate_through_estimate,
        )
        return _fill(row, cfg, chan, scheme, report, bob, eve)
    elif name == "robust_tdd":
        _, report, ctx, bob, eve, scheme = _tdd_trial(
            chan, svd, moments, part_tilde, target
        )
        return _fill(row, cfg, chan, scheme, report, bob, eve, flagged=ctx.loaded)
    else:  # pragma: no cover - validate() already refused unknown names
        raise ConfigError(f"unknown scheme {name!r}")

    w_e = eve_mmse_beamformer(chan, scheme)
    report = evaluate_sinr(chan, scheme, w_b, w_e)
    bob = link_sinr(chan.h_ba, scheme, w_b, chan.sigma_b_sq)
    eve = link_sinr(chan.h_ea, scheme, w_e, chan.sigma_e_sq)
    return _fill(row, cfg, chan, scheme, report, bob, eve)


def _fill(row, cfg, chan, scheme, report, bob, eve, flagged: bool = False) -> np.ndarray:
    row[:] = (
        report.sinr_b, report.sinr_e, _secrecy(cfg, chan, scheme, report),
        float(report.outage), bob.signal_power, bob.interference_plus_noise,
        eve.signal_power, eve.interference_plus_noise, float(flagged),
    )
    return row


def _db_or_neg_inf(x: float) -> float:
    if not np.isfinite(x) or x <= 0.0:
        return float("-inf") if x == 0.0 else float("nan")
    return float(to_db(x))


def _reduce(metrics: np.ndarray, cfg: ExperimentConfig) -> dict[str, dict[str, tuple]]:
    series: dict[str, dict[str, tuple]] = {}
    for s, scheme in enumerate(cfg.schemes):
        per_metric: dict[str, list] = {
            "mean_sinr_b": [], "stderr_sinr_b": [], "mean_sinr_b_db": [],
            "stderr_sinr_b_db": [],
            "mean_sinr_e": [], "stderr_sinr_e": [], "mean_sinr_e_db": [],
            "mean_secrecy": [], "stderr_secrecy": [],
            "roe_sinr_b": [], "roe_sinr_b_db": [],
            "roe_sinr_e": [], "roe_sinr_e_db": [],
            "outage_count": [], "flagged_count": [], "n_valid": [],
        }
        for p in range(metrics.shape[0]):
            block = metrics[p, s]
            sinr_b, sinr_e, secrecy = block[0], block[1], block[2]
            outage, signal_b, intnoise_b = block[3], block[4], block[5]
            signal_e, intnoise_e, flagged = block[6], block[7], block[8]

            mean_b, se_b, n_valid = _mean_stderr(sinr_b)
            mean_e, se_e, _ = _mean_stderr(sinr_e)
            mean_s, se_s, _ = _mean_stderr(secrecy)
            roe = _pooled_ratio(signal_b, intnoise_b)
            roe_e = _pooled_ratio(signal_e, intnoise_e)

            per_metric["mean_sinr_b"].append(mean_b)
            per_metric["stderr_sinr_b"].append(se_b)
            per_metric["mean_sinr_b_db"].append(_db_or_neg_inf(mean_b))
            per_metric["stderr_sinr_b_db"].append(
                float(10.0 / np.log(10.0) * se_b / mean_b)
                if mean_b > 0 and np.isfinite(se_b)
                else float("nan")
            )
            per_metric["mean_sinr_e"].append(mean_e)
            per_metric["stderr_sinr_e"].append(se_e)
            per_metric["mean_sinr_e_db"].append(_db_or_neg_inf(mean_e))
            per_metric["mean_secrecy"].append(mean_s)
            per_metric["stderr_secrecy"].append(se_s)
            per_metric["roe_sinr_b"].append(roe)
            per_metric["roe_sinr_b_db"].append(_db_or_neg_inf(roe))
            per_metric["roe_sinr_e"].append(roe_e)
            per_metric["roe_sinr_e_db"].append(_db_or_neg_inf(roe_e))
            per_metric["outage_count"].append(int(np.nansum(outage)))
            per_metric["flagged_count"].append(int(np.nansum(flagged)))
            per_metric["n_valid"].append(n_valid)
        series[scheme] = {k: tuple(v) for k, v in per_metric.items()}
    return series


def _pooled_ratio(signal: np.ndarray, intnoise: np.ndarray) -> float:
    """Ratio of summed signal power to summed interference-plus-noise."""
    sig_sum = np.nansum(signal)
    intn_sum = np.nansum(intnoise)
    return float(sig_sum / intn_sum) if intn_sum > 0 else float("nan")


def _mean_stderr(values: np.ndarray) -> tuple[float, float, int]:
    valid = values[~np.isnan(values)]
    n = valid.size
    if n == 0:
        return float("nan"), float("nan"), 0
    mean = float(np.mean(valid))
    se = float(np.std(valid, ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return mean, se, n


def run_experiment(cfg: ExperimentConfig) -> SweepResult:
    """Run one configured sweep and reduce it to a :class:`SweepResult`.

    Results are reproducible bit for bit from the config alone, including
    across different ``threads`` settings.
    """
    cfg.validate()
    started = time.perf_counter()
    axis_name, axis_values = cfg.axis()

    if cfg.threads == 1 or cfg.trials < 2 * cfg.threads:
        metrics = _run_chunk(cfg, 0, cfg.trials)
    else:
        bounds = np.linspace(0, cfg.trials, cfg.threads + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(
                pool.map(_run_chunk, [cfg] * cfg.threads, bounds[:-1], bounds[1:])
            )
        metrics = np.concatenate(parts, axis=3)

    series = _reduce(metrics, cfg)
    if axis_name == "sigma_h_db":
        extrapolated = tuple(v > EXTRAPOLATION_EDGE_DB for v in axis_values)
    elif cfg.sigma_h_db is None:
        extrapolated = tuple(False for _ in axis_values)
    else:
        flag = float(cfg.sigma_h_db) > EXTRAPOLATION_EDGE_DB
        extrapolated = tuple(flag for _ in axis_values)

    meta = {
        "config": cfg.to_dict(),
        "version": __version__,
        "wall_time_s": time.perf_counter() - started,
    }
    return SweepResult(
        axis_name=axis_name,
        axis=tuple(axis_values),
        schemes=cfg.schemes,
        series=series,
        extrapolated=extrapolated,
        meta=meta,
    )


def run_prediction_comparison(cfg: ExperimentConfig) -> SweepResult:
    """Closed-form degradation estimate against the simulated naive link.

    Requires both the ``naive`` and ``analytic_naive`` schemes.  The
    analytic series' pooled figure divides channel-averaged expected powers,
    matching the pooled ratio reported for the simulation.
    """
    missing = {"naive", "analytic_naive"} - set(cfg.schemes)
    if missing:
        raise ConfigError(f"prediction comparison needs schemes {sorted(missing)}")
    return run_experiment(cfg)


def run_ecsi_comparison(cfg: ExperimentConfig) -> SweepResult:
    """Eavesdropper-knowledge comparison across her antenna counts."""
    if cfg.axis()[0] != "ne":
        raise ConfigError("the eavesdropper comparison sweeps ne")
    return run_experiment(cfg)
