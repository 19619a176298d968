"""Scenario configuration: ingestion, validation, and canonical defaults.

A :class:`Scenario` is the single immutable description of a planning
problem: horizon, fleet geometry, radio constants, freshness bound, and
seeds.  Every other module consumes it read-only, so instances are safe to
share across concurrent solver tasks.

Unit conventions
----------------
Power quantities are stored internally in linear milliwatts; the config
file accepts either linear values (canonical keys, exact round trip) or
dBm convenience keys (``power_budget_dbm`` / ``noise_power_dbm``) that are
converted at the boundary.  The rate threshold ``payload_threshold_vbar``
is an aggregated spectral efficiency (bit/s/Hz summed over resource blocks
and slots); multiplying by the system bandwidth is an export-time concern.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ScenarioParseError, ScenarioValidationError

KAPPA_FLOOR = 1e-3  # Gamma shape must stay strictly positive


def dbm_to_linear_mw(x_dbm: float) -> float:
    """Convert dBm to linear milliwatts."""
    return 10.0 ** (x_dbm / 10.0)


def linear_mw_to_dbm(x_mw: float) -> float:
    """Convert linear milliwatts to dBm."""
    if x_mw <= 0.0:
        raise ValueError(f"non-positive power {x_mw} has no dBm representation")
    return 10.0 * math.log10(x_mw)


def energy_to_dbm(energy_mw_slots: float, num_slots: int) -> float:
    """Express a power-sum in dBm of average per-slot power."""
    return linear_mw_to_dbm(energy_mw_slots / num_slots)


@dataclass(frozen=True)
class Scenario:
    """Validated, immutable planning scenario.

    Positions are (x, y, z) metre triples; ``uav_trajectory`` has exactly
    ``horizon_T`` entries.  ``kappa_range`` bounds the Gamma shape drawn
    per base-station/resource-block pair.
    """

    horizon_T: int
    num_bs_N: int
    num_rb_K: int
    aoi_bound_tau: int
    payload_threshold_vbar: float
    power_budget_pbar: float      # linear mW per slot
    noise_power_delta2: float     # linear mW
    uav_trajectory: tuple         # tuple of (x, y, z) tuples, length T
    bs_positions: tuple           # tuple of (x, y, z) tuples, length N
    carrier_freq_ghz: float
    shadowing_sigma_db: float
    shadowing_corr_dist_m: float
    kappa_range: tuple            # (low, high)
    master_seed: int
    slot_duration: float = 1.0
    kappa_per_slot: bool = False  # redraw the Gamma shape every slot

    def __post_init__(self):
        violations = _collect_violations(self)
        if violations:
            raise ScenarioValidationError(violations)

    def trajectory_array(self) -> np.ndarray:
        return np.asarray(self.uav_trajectory, dtype=float)

    def bs_array(self) -> np.ndarray:
        return np.asarray(self.bs_positions, dtype=float)


def _collect_violations(s: Scenario) -> list:
    v = []
    if not (isinstance(s.horizon_T, int) and s.horizon_T >= 1):
        v.append(f"horizon_T must be an integer >= 1, got {s.horizon_T!r}")
    if not (isinstance(s.num_bs_N, int) and s.num_bs_N >= 1):
        v.append(f"num_bs_N must be an integer >= 1, got {s.num_bs_N!r}")
    if not (isinstance(s.num_rb_K, int) and s.num_rb_K >= 1):
        v.append(f"num_rb_K must be an integer >= 1, got {s.num_rb_K!r}")
    if not (isinstance(s.aoi_bound_tau, int) and 1 <= s.aoi_bound_tau):
        v.append(f"aoi_bound_tau must be an integer >= 1, got {s.aoi_bound_tau!r}")
    elif isinstance(s.horizon_T, int) and s.horizon_T >= 1 and s.aoi_bound_tau > s.horizon_T:
        v.append(
            f"aoi_bound_tau must not exceed horizon_T "
            f"({s.aoi_bound_tau} > {s.horizon_T})"
        )
    if not s.payload_threshold_vbar > 0.0:
        v.append(f"payload_threshold_vbar must be > 0, got {s.payload_threshold_vbar!r}")
    if not s.power_budget_pbar > 0.0:
        v.append(f"power_budget_pbar must be > 0, got {s.power_budget_pbar!r}")
    if not s.noise_power_delta2 > 0.0:
        v.append(f"noise_power_delta2 must be > 0, got {s.noise_power_delta2!r}")
    if not s.slot_duration > 0.0:
        v.append(f"slot_duration must be > 0, got {s.slot_duration!r}")
    if not s.carrier_freq_ghz > 0.0:
        v.append(f"carrier_freq_ghz must be > 0, got {s.carrier_freq_ghz!r}")
    if s.shadowing_sigma_db < 0.0:
        v.append(f"shadowing_sigma_db must be >= 0, got {s.shadowing_sigma_db!r}")
    if s.shadowing_corr_dist_m < 0.0:
        v.append(f"shadowing_corr_dist_m must be >= 0, got {s.shadowing_corr_dist_m!r}")

    if isinstance(s.horizon_T, int) and len(s.uav_trajectory) != s.horizon_T:
        v.append(
            f"uav_trajectory length {len(s.uav_trajectory)} does not match "
            f"horizon_T {s.horizon_T}"
        )
    if isinstance(s.num_bs_N, int) and len(s.bs_positions) != s.num_bs_N:
        v.append(
            f"bs_positions length {len(s.bs_positions)} does not match "
            f"num_bs_N {s.num_bs_N}"
        )
    for name, pts in (("uav_trajectory", s.uav_trajectory), ("bs_positions", s.bs_positions)):
        for i, p in enumerate(pts):
            if len(p) != 3:
                v.append(f"{name}[{i}] must be an (x, y, z) triple, got {p!r}")
            elif p[2] < 0.0:
                v.append(f"{name}[{i}] altitude must be >= 0, got {p[2]!r}")

    if len(s.kappa_range) != 2:
        v.append(f"kappa_range must be a (low, high) pair, got {s.kappa_range!r}")
    else:
        lo, hi = s.kappa_range
        if not lo >= KAPPA_FLOOR:
            v.append(f"kappa_range low must be >= {KAPPA_FLOOR}, got {lo!r}")
        if not hi >= lo:
            v.append(f"kappa_range high must be >= low, got {s.kappa_range!r}")
    if not isinstance(s.master_seed, int):
        v.append(f"master_seed must be an integer, got {s.master_seed!r}")
    return v


# Canonical config keys.  Power keys come in exclusive linear/dBm pairs.
_REQUIRED_KEYS = (
    "horizon_T", "num_bs_N", "num_rb_K", "aoi_bound_tau",
    "payload_threshold_vbar", "uav_trajectory", "bs_positions",
    "carrier_freq_ghz", "shadowing_sigma_db", "shadowing_corr_dist_m",
    "kappa_range", "master_seed",
)
_OPTIONAL_KEYS = ("slot_duration", "kappa_per_slot")
_POWER_KEYS = {
    "power_budget_pbar": "power_budget_dbm",
    "noise_power_delta2": "noise_power_dbm",
}


def parse_scenario(text: str) -> Scenario:
    """Parse a JSON scenario document into a validated :class:`Scenario`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"scenario document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario document must be a JSON object")

    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_KEYS)
    known |= set(_POWER_KEYS) | set(_POWER_KEYS.values())
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ScenarioParseError(f"unknown scenario keys: {', '.join(unknown)}")

    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    for linear_key, dbm_key in _POWER_KEYS.items():
        if linear_key in doc and dbm_key in doc:
            raise ScenarioParseError(
                f"keys {linear_key} and {dbm_key} are mutually exclusive"
            )
        if linear_key not in doc and dbm_key not in doc:
            missing.append(f"{linear_key} (or {dbm_key})")
    if missing:
        raise ScenarioParseError(f"missing scenario keys: {', '.join(missing)}")

    kwargs = {}
    for key in _REQUIRED_KEYS + _OPTIONAL_KEYS:
        if key in doc:
            kwargs[key] = doc[key]
    for linear_key, dbm_key in _POWER_KEYS.items():
        if linear_key in doc:
            kwargs[linear_key] = doc[linear_key]
        else:
            try:
                kwargs[linear_key] = dbm_to_linear_mw(float(doc[dbm_key]))
            except (TypeError, ValueError) as exc:
                raise ScenarioParseError(f"key {dbm_key} is not a number") from exc

    for key in ("uav_trajectory", "bs_positions"):
        try:
            kwargs[key] = tuple(tuple(float(c) for c in p) for p in kwargs[key])
        except (TypeError, ValueError) as exc:
            raise ScenarioParseError(f"key {key} must be a list of [x, y, z] triples") from exc
    try:
        kwargs["kappa_range"] = tuple(float(c) for c in kwargs["kappa_range"])
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError("key kappa_range must be a [low, high] pair") from exc

    return Scenario(**kwargs)


def load_scenario(path) -> Scenario:
    """Load and validate a scenario from a JSON file."""
    return parse_scenario(Path(path).read_text())


def scenario_to_dict(scenario: Scenario) -> dict:
    """Serialize a scenario with canonical (linear-power) keys."""
    out = {}
    for f in fields(Scenario):
        val = getattr(scenario, f.name)
        if f.name in ("uav_trajectory", "bs_positions"):
            val = [list(p) for p in val]
        elif f.name == "kappa_range":
            val = list(val)
        out[f.name] = val
    return out


def save_scenario(scenario: Scenario, path) -> None:
    """Write a scenario as JSON; ``load_scenario`` round-trips field-for-field."""
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def scenario_digest(scenario: Scenario) -> str:
    """Stable hash of the canonical serialization, used in plan-file headers."""
    import hashlib

    blob = json.dumps(scenario_to_dict(scenario), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def default_patrol_scenario(
    seed: int,
    *,
    horizon: int = 60,
    num_bs: int = 5,
    num_rb: int = 16,
    aoi_bound: int = 4,
    payload_threshold: float = 24.0,
    power_budget_dbm: float = 23.0,
    noise_power_dbm: float = -90.0,
    area_side_m: float = 200.0,
    altitude_m: float = 50.0,
    speed_mps: float = 6.0,
) -> Scenario:
    """Build the circular-patrol scenario with its documented defaults.

    The UAV flies a circle of radius ``area_side_m / 2`` centred on the
    monitored square at 50 m altitude and 6 m/s; base stations are placed
    uniformly at random on the ground inside the square.  Reproducible
    from ``seed``.
    """
    rng = np.random.default_rng(seed)
    radius = area_side_m / 2.0
    omega = speed_mps / radius  # rad per slot at 1 s slots
    t = np.arange(horizon)
    traj = tuple(
        (radius * math.cos(omega * ti), radius * math.sin(omega * ti), altitude_m)
        for ti in t
    )
    half = area_side_m / 2.0
    bs_xy = rng.uniform(-half, half, size=(num_bs, 2))
    bs = tuple((float(x), float(y), 0.0) for x, y in bs_xy)
    return Scenario(
        horizon_T=horizon,
        num_bs_N=num_bs,
        num_rb_K=num_rb,
        aoi_bound_tau=aoi_bound,
        payload_threshold_vbar=payload_threshold,
        power_budget_pbar=dbm_to_linear_mw(power_budget_dbm),
        noise_power_delta2=dbm_to_linear_mw(noise_power_dbm),
        uav_trajectory=traj,
        bs_positions=bs,
        carrier_freq_ghz=3.0,
        shadowing_sigma_db=math.sqrt(8.0),
        shadowing_corr_dist_m=5.0,
        kappa_range=(1.0, 30.0),
        master_seed=seed,
    )
