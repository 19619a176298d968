"""Shared scenario/profile builders for the test suite."""

import math

import numpy as np
import pytest

from aoiplan import ChannelProfile, build_profile
from aoiplan.scenario import Scenario


def desk_scenario(seed, T=8, N=2, K=3, tau=3, vbar=4.0, pbar_dbm=20.0,
                  shadowing_sigma_db=math.sqrt(8.0), kappa_range=(1.0, 30.0)):
    """Small randomized scenario sized for brute-force oracles."""
    rng = np.random.default_rng(seed)
    traj = tuple((float(6.0 * t), 0.0, 50.0) for t in range(T))
    bs = tuple(
        (float(rng.uniform(-60, 60)), float(rng.uniform(-60, 60)), 0.0)
        for _ in range(N)
    )
    return Scenario(
        horizon_T=T, num_bs_N=N, num_rb_K=K, aoi_bound_tau=tau,
        payload_threshold_vbar=vbar,
        power_budget_pbar=10.0 ** (pbar_dbm / 10.0),
        noise_power_delta2=1e-9,
        uav_trajectory=traj, bs_positions=bs,
        carrier_freq_ghz=3.0,
        shadowing_sigma_db=shadowing_sigma_db,
        shadowing_corr_dist_m=5.0,
        kappa_range=kappa_range,
        master_seed=seed,
    )


def synthetic_profile(seed, N=2, K=3, L=3, gain_exp_range=(-1.5, 1.5),
                      kappa_range=(1.0, 30.0), noise=1.0):
    """Profile built straight from arrays; floors land around O(1)."""
    rng = np.random.default_rng(seed)
    gain = 10.0 ** rng.uniform(*gain_exp_range, size=(N, K, L))
    shape = rng.uniform(*kappa_range, size=(N, K, L))
    return ChannelProfile.from_arrays(gain, shape, noise_power=noise)


@pytest.fixture
def small_scenario():
    return desk_scenario(3)


@pytest.fixture
def small_profile(small_scenario):
    return build_profile(small_scenario, small_scenario.master_seed)
