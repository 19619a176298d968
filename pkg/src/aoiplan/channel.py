"""Predictive channel profile along the patrol trajectory.

Builds the per-(base station, resource block, slot) large-scale gain and
Gamma-fading shape tensors from scenario geometry (3GPP UMi path loss,
elevation-dependent LOS blockage, spatially correlated log-normal
shadowing), precomputes the effective channel floor used by the
water-filling solver, and samples small-scale fading realizations for
Monte Carlo evaluation.

The deterministic capacity surrogate used throughout the planner is

    rate(p) = log2(1 + beta(kappa) * p * g / noise)

where ``beta(kappa) = exp(psi(kappa)) / kappa`` discounts the mean SNR for
fading severity (psi is the digamma function).  The surrogate lower-bounds
the fading-averaged capacity and becomes tight at high SNR or high kappa.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import Scenario

__all__ = [
    "ChannelProfile",
    "FadingSample",
    "pathloss_db",
    "los_probability",
    "digamma",
    "fading_severity",
    "capacity_lower_bound",
    "build_profile",
    "sample_fading",
    "save_profile",
    "load_profile",
]


# ----------------------------------------------------------------------
# Scalar channel maths
# ----------------------------------------------------------------------

def pathloss_db(distance_m, fc_ghz, is_los):
    """3GPP UMi path loss in dB.

    LOS:  22.0 + 28.0 log10(d) + 20 log10(f_c)
    NLOS: 22.7 + 36.7 log10(d) + 26 log10(f_c)

    ``distance_m`` must be strictly positive.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("distance_m must be > 0")
    fc = np.asarray(fc_ghz, dtype=float)
    if np.any(fc <= 0.0):
        raise ValueError("fc_ghz must be > 0")
    los = 22.0 + 28.0 * np.log10(d) + 20.0 * np.log10(fc)
    nlos = 22.7 + 36.7 * np.log10(d) + 26.0 * np.log10(fc)
    out = np.where(is_los, los, nlos)
    return float(out) if out.ndim == 0 else out


def los_probability(elevation_deg):
    """Line-of-sight probability vs. elevation angle (degrees).

    P = 1 / (1 + 6 exp(-0.15 (theta - 6))); monotone increasing, in (0, 1).
    """
    theta = np.asarray(elevation_deg, dtype=float)
    arg = np.clip(-0.15 * (theta - 6.0), -700.0, 700.0)
    out = 1.0 / (1.0 + 6.0 * np.exp(arg))
    return float(out) if out.ndim == 0 else out


_ASYMPTOTIC_SHIFT = 10.0
# Bernoulli-number coefficients of the asymptotic expansion
_PSI_SERIES = (
    (2, 1.0 / 12.0),
    (4, -1.0 / 120.0),
    (6, 1.0 / 252.0),
    (8, -1.0 / 240.0),
    (10, 1.0 / 132.0),
)


def digamma(x):
    """Digamma function for positive arguments.

    Recurrence shifts the argument above 10, then an asymptotic series in
    1/x^2 is applied; accurate to ~1e-12 over [1e-3, 1e6].
    """
    z = np.asarray(x, dtype=float)
    if np.any(z <= 0.0):
        raise ValueError("digamma requires positive arguments")
    z = np.atleast_1d(z.copy())
    acc = np.zeros_like(z)
    # at most ceil(10 - 1e-3) shifts are ever needed
    for _ in range(10):
        low = z < _ASYMPTOTIC_SHIFT
        if not low.any():
            break
        acc[low] -= 1.0 / z[low]
        z[low] += 1.0
    result = acc + np.log(z) - 0.5 / z
    inv2 = 1.0 / (z * z)
    term = np.ones_like(z)
    for _, coeff in _PSI_SERIES:
        term = term * inv2
        result -= coeff * term
    out = result.reshape(np.shape(x))
    return float(out) if out.ndim == 0 else out


def fading_severity(kappa):
    """Severity factor beta = exp(psi(kappa)) / kappa in (0, 1).

    Strictly increasing in kappa: ~0.56 for unit shape (Rayleigh-like),
    tending to 1 as the line-of-sight component dominates.
    """
    k = np.asarray(kappa, dtype=float)
    if np.any(k <= 0.0):
        raise ValueError("kappa must be > 0")
    out = np.exp(digamma(k)) / k
    return float(out) if np.ndim(out) == 0 else out


def capacity_lower_bound(power, gain, kappa, noise):
    """Deterministic surrogate log2(1 + beta * p * g / noise); 0 at p = 0."""
    p = np.asarray(power, dtype=float)
    if np.any(p < 0.0):
        raise ValueError("power must be >= 0")
    snr = fading_severity(kappa) * p * np.asarray(gain, dtype=float) / noise
    out = np.log2(1.0 + snr)
    return float(out) if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------
# Profile construction
# ----------------------------------------------------------------------

@dataclass
class ChannelProfile:
    """Predicted channel along the trajectory.

    gain, shape, iota are (N, K, T) tensors; ``iota = noise / (beta * gain)``
    is the per-entry water-filling floor.  Arrays are frozen (read-only)
    after construction so profiles can be shared across solver threads.
    """

    gain: np.ndarray
    shape: np.ndarray
    iota: np.ndarray
    noise_power: float
    seed: int | None = None

    def __post_init__(self):
        for name in ("gain", "shape", "iota"):
            arr = getattr(self, name)
            if arr.ndim != 3:
                raise ValueError(f"{name} must be an (N, K, T) tensor")
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
                raise ValueError(f"{name} entries must be finite and > 0")
        if self.gain.shape != self.shape.shape or self.gain.shape != self.iota.shape:
            raise ValueError("gain, shape, iota dimensions disagree")
        for name in ("gain", "shape", "iota"):
            getattr(self, name).setflags(write=False)

    @property
    def dims(self):
        return self.gain.shape

    @classmethod
    def from_arrays(cls, gain, shape, noise_power, seed=None) -> "ChannelProfile":
        gain = np.ascontiguousarray(gain, dtype=float)
        shape = np.ascontiguousarray(shape, dtype=float)
        if gain.ndim != 3 or np.any(gain <= 0.0):
            raise ValueError("gain must be an (N, K, T) tensor of positives")
        iota = noise_power / (fading_severity(shape) * gain)
        return cls(gain=gain, shape=shape, iota=iota, noise_power=float(noise_power), seed=seed)


@dataclass
class FadingSample:
    """One small-scale fading realization, unit-mean Gamma per entry."""

    realization: np.ndarray

    def __post_init__(self):
        if np.any(self.realization <= 0.0):
            raise ValueError("fading draws must be > 0")


def _correlated_shadowing(rng, sigma_db, step_dist_m, corr_dist_m, num_bs, horizon):
    """Per-BS log-normal shadowing with exponential spatial correlation.

    AR(1) over trajectory arc steps reproduces the kernel
    cov(s, s') = sigma^2 exp(-|arc|/corr_dist) exactly on a 1-D path.
    """
    draws = rng.standard_normal((num_bs, horizon))
    if sigma_db == 0.0:
        return np.zeros((num_bs, horizon))
    field = np.empty((num_bs, horizon))
    field[:, 0] = sigma_db * draws[:, 0]
    if corr_dist_m > 0.0:
        rho = np.exp(-step_dist_m / corr_dist_m)  # length T-1
    else:
        rho = np.zeros(max(horizon - 1, 0))
    innov = sigma_db * np.sqrt(1.0 - rho**2)
    for t in range(1, horizon):
        field[:, t] = rho[t - 1] * field[:, t - 1] + innov[t - 1] * draws[:, t]
    return field


def build_profile(scenario: Scenario, seed: int) -> ChannelProfile:
    """Predict {gain, shape} along the trajectory; deterministic per seed.

    Draw order (fixed): blockage uniforms (N, T), shadowing normals (N, T),
    then Gamma shapes.  Blockage and shadowing are shared across resource
    blocks; the Gamma shape is drawn once per (BS, RB) and held over time
    unless the scenario requests per-slot redraws.
    """
    rng = np.random.default_rng(seed)
    traj = scenario.trajectory_array()      # (T, 3)
    bs = scenario.bs_array()                # (N, 3)
    N, K, T = scenario.num_bs_N, scenario.num_rb_K, scenario.horizon_T

    diff = traj[None, :, :] - bs[:, None, :]          # (N, T, 3)
    dist = np.linalg.norm(diff, axis=2)               # (N, T)
    if np.any(dist <= 0.0):
        raise ValueError("UAV trajectory passes through a BS position")
    elev = np.degrees(np.arcsin(np.clip(diff[:, :, 2] / dist, -1.0, 1.0)))

    p_los = los_probability(elev)
    is_los = rng.random((N, T)) < p_los

    step = np.linalg.norm(np.diff(traj, axis=0), axis=1) if T > 1 else np.zeros(0)
    shadow_db = _correlated_shadowing(
        rng, scenario.shadowing_sigma_db, step, scenario.shadowing_corr_dist_m, N, T
    )

    pl = pathloss_db(dist, scenario.carrier_freq_ghz, is_los)
    gain_nt = 10.0 ** ((-pl + shadow_db) / 10.0)       # (N, T)
    gain = np.repeat(gain_nt[:, None, :], K, axis=1)   # (N, K, T)

    lo, hi = scenario.kappa_range
    if scenario.kappa_per_slot:
        shape = rng.uniform(lo, hi, size=(N, K, T))
    else:
        shape = np.repeat(rng.uniform(lo, hi, size=(N, K))[:, :, None], T, axis=2)

    return ChannelProfile.from_arrays(gain, shape, scenario.noise_power_delta2, seed=seed)


def sample_fading(profile: ChannelProfile, seed: int) -> FadingSample:
    """Draw independent unit-mean Gamma fading per entry; deterministic per seed."""
    rng = np.random.default_rng(seed)
    xi = rng.gamma(shape=profile.shape, scale=1.0 / profile.shape)
    return FadingSample(realization=xi)


# ----------------------------------------------------------------------
# Profile persistence (bit-exact binary dump)
# ----------------------------------------------------------------------

def save_profile(profile: ChannelProfile, path) -> None:
    """Write the profile as an .npz tensor dump (lossless round trip)."""
    np.savez(
        path,
        gain=profile.gain,
        shape=profile.shape,
        iota=profile.iota,
        noise_power=np.float64(profile.noise_power),
        seed=np.int64(-1 if profile.seed is None else profile.seed),
        dims=np.asarray(profile.dims, dtype=np.int64),
    )


def load_profile(path) -> ChannelProfile:
    """Load a profile written by :func:`save_profile`."""
    with np.load(path) as data:
        dims = tuple(int(d) for d in data["dims"])
        gain = data["gain"]
        shape = data["shape"]
        iota = data["iota"]
        if gain.shape != dims:
            raise ValueError(f"profile header dims {dims} disagree with tensor {gain.shape}")
        seed = int(data["seed"])
        prof = ChannelProfile(
            gain=gain,
            shape=shape,
            iota=iota,
            noise_power=float(data["noise_power"]),
            seed=None if seed < 0 else seed,
        )
    return prof
