"""Plan file format: self-validating JSON serialization of a policy plan.

Header carries the scenario digest and the solve parameters; the body
stores sampling instants plus sparse (bs, rb, slot, power) records per
interval (all indices 1-based).  Loading re-checks the structural
invariants; rate-target validation against a channel profile is a
separate step because it needs the profile tensors.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .channel import ChannelProfile, capacity_lower_bound
from .errors import PlanFormatError
from .sim import Leg, PolicyPlan

FORMAT_TAG = "aoiplan-plan-v1"
_POWER_SLACK = 1.0 + 1e-9
_RATE_SLACK = 1.0 - 1e-9


def save_plan(plan: PolicyPlan, path, scenario_digest: str, power_budget: float,
              seed: int | None = None) -> None:
    doc = {
        "format": FORMAT_TAG,
        "scenario_hash": scenario_digest,
        "seed": seed,
        "kind": plan.kind,
        "horizon": plan.horizon,
        "aoi_bound": plan.aoi_bound,
        "epsilon_theta": plan.rb_cap,
        "delivery_threshold": plan.delivery_threshold,
        "power_budget": power_budget,
        "success_mode": plan.success_mode,
        "planned_energy": plan.planned_energy if plan.feasible else None,
        "spent_energy": plan.spent_energy,
        "dims": list(plan.legs[0].assignment.shape[:2]),
        "instants": list(plan.instants),
        "legs": [
            {
                "start": leg.start,
                "end": leg.end,
                "target": leg.target,
                "feasible": leg.feasible,
                "entries": [
                    [int(n) + 1, int(k) + 1, int(t) + leg.start, float(leg.power[n, k, t])]
                    for n, k, t in zip(*np.nonzero(leg.assignment))
                ],
            }
            for leg in plan.legs
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_plan(path) -> tuple[PolicyPlan, dict]:
    """Load a plan file; returns (plan, header dict).

    Re-validates the structural invariants: instant ordering, freshness
    gaps for interval plans, capacity families per slot, and per-slot
    power against the recorded budget.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise PlanFormatError(f"plan file is not valid JSON: {exc}") from exc
    if doc.get("format") != FORMAT_TAG:
        raise PlanFormatError(f"unrecognized plan format {doc.get('format')!r}")

    try:
        horizon = int(doc["horizon"])
        aoi_bound = int(doc["aoi_bound"])
        rb_cap = int(doc["epsilon_theta"])
        N, K = (int(x) for x in doc["dims"])
        power_budget = float(doc["power_budget"])
        legs_doc = doc["legs"]
        kind = doc["kind"]
        mode = doc["success_mode"]
        threshold = float(doc["delivery_threshold"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanFormatError(f"plan header incomplete or malformed: {exc}") from exc

    plan = PolicyPlan(
        kind=kind, horizon=horizon, aoi_bound=aoi_bound, rb_cap=rb_cap,
        delivery_threshold=threshold, success_mode=mode,
    )
    prev_end = 1
    for leg_doc in legs_doc:
        start, end = int(leg_doc["start"]), int(leg_doc["end"])
        if start != prev_end:
            raise PlanFormatError(f"legs are not contiguous at slot {start}")
        if not 1 <= start < end <= horizon + 1:
            raise PlanFormatError(f"leg [{start}, {end}) outside horizon {horizon}")
        if mode == "interval" and end - start > aoi_bound:
            raise PlanFormatError(
                f"interval plan leg [{start}, {end}) exceeds freshness bound {aoi_bound}"
            )
        prev_end = end
        L = end - start
        assignment = np.zeros((N, K, L), dtype=np.int8)
        power = np.zeros((N, K, L))
        for rec in leg_doc["entries"]:
            n, k, t, p = int(rec[0]) - 1, int(rec[1]) - 1, int(rec[2]), float(rec[3])
            if not (0 <= n < N and 0 <= k < K and start <= t < end):
                raise PlanFormatError(f"entry {rec} outside leg [{start}, {end})")
            if p <= 0.0:
                raise PlanFormatError(f"entry {rec} carries non-positive power")
            if assignment[n, k, t - start]:
                raise PlanFormatError(f"duplicate entry at (bs={n+1}, rb={k+1}, t={t})")
            assignment[n, k, t - start] = 1
            power[n, k, t - start] = p
        if int(assignment.sum(axis=0).max(initial=0)) > 1:
            raise PlanFormatError("an RB is assigned to two base stations in one slot")
        if int(assignment.sum(axis=1).max(initial=0)) > rb_cap:
            raise PlanFormatError("a BS exceeds the load cap in some slot")
        slot_power = power.sum(axis=(0, 1))
        if np.any(slot_power > power_budget * _POWER_SLACK):
            raise PlanFormatError("per-slot power exceeds the recorded budget")
        plan.legs.append(Leg(
            start=start, end=end, target=float(leg_doc["target"]),
            assignment=assignment, power=power,
            planned_energy=float(power.sum()) if leg_doc["feasible"] else math.inf,
            spent_energy=float(power.sum()),
            feasible=bool(leg_doc["feasible"]),
        ))
    if prev_end != horizon + 1:
        raise PlanFormatError(f"legs end at {prev_end}, expected {horizon + 1}")
    return plan, doc


def validate_plan_rates(plan: PolicyPlan, profile: ChannelProfile) -> None:
    """Check each feasible leg's expected rate against its target."""
    for leg in plan.legs:
        if not leg.feasible:
            continue
        sl = slice(leg.start - 1, leg.end - 1)
        rate = capacity_lower_bound(
            leg.power, profile.gain[:, :, sl], profile.shape[:, :, sl], profile.noise_power
        )
        total = float(np.where(leg.assignment.astype(bool), rate, 0.0).sum())
        if total < leg.target * _RATE_SLACK:
            raise PlanFormatError(
                f"leg [{leg.start}, {leg.end}) delivers expected rate {total:.6g} "
                f"below its target {leg.target:.6g}"
            )
