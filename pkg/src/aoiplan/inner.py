"""Per-interval minimum-energy power and access control.

Solves: minimize total transmit power over one communication interval,
subject to a deterministic sum-rate target, a per-slot sum-power cap, the
per-RB exclusivity constraint, and the per-BS load cap.

Structure of the optimum (from KKT analysis of the convex relaxation):
power follows capped water-filling, p = [level - floor]+, while the active
set per slot is a min-cost b-matching with weights
w = p - ln2 * level * rate.  The map level -> (assigned power, assigned
rate) is monotone but jumps where the optimal matching switches; the jumps
are repaired by mixing the two one-sided limit assignments, which keeps
the mixed power/rate curves continuous so nested bisection searches find
the exact relaxed optimum:

  1. per-slot cap level where assigned power hits the budget,
  2. global water level where the (lower-limit) rate curve brackets the
     target,
  3. mixing coefficient closing the residual rate gap.

The exported plan is binary: the limit supports are frozen and the water
level re-solved within them, which meets the rate target and power caps
exactly at a small measured energy premium over the mixed optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelProfile
from .errors import BinaryRoundingError
from .matching import AssignmentProblem, min_cost_b_matching

LN2 = math.log(2.0)

RATE_REL_TOL = 1e-6    # rate-target tolerance, relative
POWER_REL_TOL = 1e-9   # power-cap tolerance, relative
BRACKET_REL_TOL = 1e-13
MAX_BISECT = 200

__all__ = [
    "IntervalSpec",
    "InnerSolution",
    "Infeasible",
    "water_fill",
    "assignment_weights",
    "extended_power",
    "extended_rate",
    "solve_slot_cap",
    "solve_interval",
]


@dataclass(frozen=True)
class IntervalSpec:
    """One communication interval [start, end) in 1-based slot indices.

    The freshness bound (end - start <= aoi bound) is the caller's duty;
    the whole-horizon baseline deliberately exceeds it.
    """

    start: int
    end: int
    rb_cap: int
    rate_target: float
    power_cap: float

    def __post_init__(self):
        if not (1 <= self.start < self.end):
            raise ValueError(f"need 1 <= start < end, got [{self.start}, {self.end})")
        if self.rb_cap < 1:
            raise ValueError("rb_cap must be >= 1")
        if self.rate_target < 0.0:
            raise ValueError("rate_target must be >= 0")
        if self.power_cap <= 0.0:
            raise ValueError("power_cap must be > 0")

    @property
    def num_slots(self) -> int:
        return self.end - self.start


@dataclass
class InnerSolution:
    """Binary transmission plan for one interval plus optimality diagnostics.

    ``energy`` is the relaxed (mixed) optimum used as the timing-graph edge
    weight; ``binary_energy`` is what the exported plan actually spends.
    ``slot_levels`` are the binary plan's per-slot water levels, so active
    powers equal [slot_level - floor]+ entrywise.
    """

    assignment: np.ndarray   # (N, K, L) of {0, 1}
    power: np.ndarray        # (N, K, L), zero off the assignment
    energy: float
    binary_energy: float
    expected_rate: float     # binary plan rate, >= target
    global_level: float      # uncapped global water level of the relaxed solve
    slot_levels: np.ndarray  # (L,)
    mix: np.ndarray          # (L,) mixing coefficients of the relaxed solve


@dataclass(frozen=True)
class Infeasible:
    """Returned when even all-slots-at-cap cannot reach the rate target."""

    max_rate: float


def water_fill(level, iota):
    """Power/rate pair at a water level: ([level-iota]+, [log2(level/iota)]+)."""
    i = np.asarray(iota, dtype=float)
    lvl = float(level)
    power = np.maximum(0.0, lvl - i)
    active = lvl > i
    rate = np.zeros_like(i, dtype=float)
    if lvl > 0.0:
        rate = np.where(active, np.log2(np.maximum(lvl, 1e-300) / i), 0.0)
    return power, rate


def assignment_weights(level, iota):
    """Matching weights w = p - ln2 * level * rate; 0 on inactive entries."""
    power, rate = water_fill(level, iota)
    return power - LN2 * float(level) * rate


def _slot_state(level, iota2d, cap):
    power, rate = water_fill(level, iota2d)
    w = power - LN2 * float(level) * rate
    sel = min_cost_b_matching(AssignmentProblem(w, cap)).select.astype(bool)
    return sel, float(power[sel].sum()), float(rate[sel].sum())


@dataclass
class _SlotLimits:
    a_minus: np.ndarray
    a_plus: np.ndarray
    p_minus: float
    p_plus: float
    r_minus: float
    r_plus: float


def _slot_limits(level, iota2d, cap, rel_eps=1e-7, abs_floor=1e-12) -> _SlotLimits:
    """One-sided limit assignments at ``level``, valued at ``level`` itself."""
    power, rate = water_fill(level, iota2d)
    eps = max(abs(level) * rel_eps, abs_floor)
    out = []
    for side in (level - eps, level + eps):
        w = assignment_weights(side, iota2d)
        sel = min_cost_b_matching(AssignmentProblem(w, cap)).select.astype(bool)
        out.append((sel, float(power[sel].sum()), float(rate[sel].sum())))
    (am, pm, rm), (ap, pp, rp) = out
    return _SlotLimits(am, ap, pm, pp, rm, rp)


def extended_power(level, xi, iota2d, cap):
    """Mixed-limit slot power (1-xi) * P(level-) + xi * P(level+)."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    lim = _slot_limits(level, iota2d, cap)
    return (1.0 - xi) * lim.p_minus + xi * lim.p_plus


def extended_rate(level, xi, iota2d, cap):
    """Mixed-limit slot rate (1-xi) * R(level-) + xi * R(level+)."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    lim = _slot_limits(level, iota2d, cap)
    return (1.0 - xi) * lim.r_minus + xi * lim.r_plus


@dataclass
class _SlotCap:
    level: float          # cap water level
    xi: float             # mixing that pins assigned power to the budget
    limits: _SlotLimits   # one-sided limits at the cap level
    rate_at_cap: float    # mixed rate with the slot pinned at its power cap


def solve_slot_cap(iota2d: np.ndarray, cap: int, power_cap: float) -> _SlotCap:
    """Find the slot's cap level: smallest level whose assigned power
    reaches the per-slot budget, with the mixing coefficient that lands on
    the budget exactly when the crossing happens at a matching switch.
    """
    lo = float(iota2d.min())
    hi = float(iota2d.max()) + float(power_cap)  # assigned power >= hi - max(iota) there
    tol_p = POWER_REL_TOL * power_cap
    for _ in range(MAX_BISECT):
        if hi - lo <= max(BRACKET_REL_TOL * hi, 1e-300):
            break
        mid = 0.5 * (lo + hi)
        _, p_mid, _ = _slot_state(mid, iota2d, cap)
        if p_mid >= power_cap:
            hi = mid
        else:
            lo = mid
    level = hi
    lim = _slot_limits(level, iota2d, cap)
    gap = lim.p_plus - lim.p_minus
    if gap > tol_p and lim.p_minus <= power_cap <= lim.p_plus:
        xi = (power_cap - lim.p_minus) / gap
    else:
        xi = 1.0
    rate_at_cap = (1.0 - xi) * lim.r_minus + xi * lim.r_plus
    return _SlotCap(level=level, xi=xi, limits=lim, rate_at_cap=rate_at_cap)


# ----------------------------------------------------------------------
# Binary plan extraction: re-solve the water level on frozen supports
# ----------------------------------------------------------------------

def _support_cap_level(iotas: np.ndarray, power_cap: float) -> float:
    """Exact level where water-filling over a fixed support spends the budget."""
    s = np.sort(iotas)
    prefix = np.cumsum(s)
    for m in range(1, len(s) + 1):
        lvl = (power_cap + prefix[m - 1]) / m
        upper = s[m] if m < len(s) else math.inf
        if s[m - 1] <= lvl <= upper:
            return float(lvl)
    return float((power_cap + prefix[-1]) / len(s))


def _fixed_support_solve(supports, iota3d, rate_target, power_cap):
    """Min-energy capped water-filling with frozen per-slot supports.

    Returns (slot_levels, energy, rate) or None when the supports cannot
    carry the target under the per-slot power caps.
    """
    L = iota3d.shape[2]
    slot_iotas = []
    cap_levels = np.zeros(L)
    for t in range(L):
        vals = iota3d[:, :, t][supports[t]]
        slot_iotas.append(np.sort(vals))
        cap_levels[t] = _support_cap_level(vals, power_cap) if vals.size else 0.0

    def rate_at(mu):
        total = 0.0
        for t in range(L):
            vals = slot_iotas[t]
            if not vals.size:
                continue
            lvl = min(mu, cap_levels[t])
            act = vals[vals < lvl]
            if act.size:
                total += float(np.log2(lvl / act).sum())
        return total

    if rate_target <= 0.0:
        return np.zeros(L), 0.0, 0.0
    hi = float(cap_levels.max(initial=0.0))
    if hi <= 0.0:
        return None
    max_rate = rate_at(hi)
    if max_rate < rate_target * (1.0 - 1e-9):
        return None
    lo = float(min(v[0] for v in slot_iotas if v.size))
    for _ in range(MAX_BISECT):
        if hi - lo <= max(BRACKET_REL_TOL * hi, 1e-300):
            break
        mid = 0.5 * (lo + hi)
        if rate_at(mid) >= rate_target:
            hi = mid
        else:
            lo = mid
    mu = hi  # upper bracket end guarantees rate >= target
    levels = np.minimum(mu, cap_levels)
    energy = 0.0
    for t in range(L):
        vals = slot_iotas[t]
        if vals.size:
            energy += float(np.maximum(0.0, levels[t] - vals).sum())
    return levels, energy, rate_at(mu)


def _zero_solution(N, K, L):
    return InnerSolution(
        assignment=np.zeros((N, K, L), dtype=np.int8),
        power=np.zeros((N, K, L)),
        energy=0.0,
        binary_energy=0.0,
        expected_rate=0.0,
        global_level=0.0,
        slot_levels=np.zeros(L),
        mix=np.zeros(L),
    )


def solve_interval(spec: IntervalSpec, profile: ChannelProfile):
    """Minimum-energy plan for one interval, or :class:`Infeasible`.

    The relaxed optimum (``energy``) is exact up to the bisection
    tolerances; the attached binary plan satisfies the rate target and the
    per-slot power caps by construction.
    """
    N, K, T = profile.dims
    if not spec.end <= T + 1:
        raise ValueError(f"interval [{spec.start}, {spec.end}) exceeds horizon {T}")
    L = spec.num_slots
    iota3d = profile.iota[:, :, spec.start - 1 : spec.end - 1]
    vbar = float(spec.rate_target)
    if vbar <= 0.0:
        return _zero_solution(N, K, L)

    caps = [solve_slot_cap(iota3d[:, :, t], spec.rb_cap, spec.power_cap) for t in range(L)]
    cap_levels = np.array([c.level for c in caps])
    max_rate = float(sum(c.rate_at_cap for c in caps))
    if max_rate < vbar * (1.0 - 1e-12):
        return Infeasible(max_rate=max_rate)

    def total_rate(mu):
        total = 0.0
        for t in range(L):
            if mu >= cap_levels[t]:
                total += caps[t].rate_at_cap
            else:
                _, _, r = _slot_state(mu, iota3d[:, :, t], spec.rb_cap)
                total += r
        return total

    lo = float(iota3d.min())
    hi = float(cap_levels.max())
    for _ in range(MAX_BISECT):
        if hi - lo <= max(BRACKET_REL_TOL * hi, 1e-300):
            break
        mid = 0.5 * (lo + hi)
        if total_rate(mid) >= vbar:
            hi = mid
        else:
            lo = mid
    mu = hi

    # one-sided limits per slot at the final levels
    limits, xi_max = [], np.ones(L)
    for t in range(L):
        if mu >= cap_levels[t]:
            limits.append(caps[t].limits)
            xi_max[t] = caps[t].xi
        else:
            limits.append(_slot_limits(mu, iota3d[:, :, t], spec.rb_cap))

    def mixed_rate(xi):
        total = 0.0
        for t in range(L):
            x = min(xi, xi_max[t])
            total += (1.0 - x) * limits[t].r_minus + x * limits[t].r_plus
        return total

    tol_r = RATE_REL_TOL * vbar
    if mixed_rate(0.0) >= vbar - tol_r:
        xi_star = 0.0
    elif mixed_rate(1.0) <= vbar:
        xi_star = 1.0
    else:
        xlo, xhi = 0.0, 1.0
        for _ in range(MAX_BISECT):
            if xhi - xlo <= 1e-15:
                break
            xmid = 0.5 * (xlo + xhi)
            if mixed_rate(xmid) >= vbar:
                xhi = xmid
            else:
                xlo = xmid
        xi_star = xhi

    mix = np.minimum(xi_star, xi_max)
    energy_mixed = float(
        sum((1.0 - mix[t]) * limits[t].p_minus + mix[t] * limits[t].p_plus for t in range(L))
    )

    # binary plan: freeze a limit support per slot and re-solve the level
    candidates = [
        [limits[t].a_plus for t in range(L)],
        [limits[t].a_minus for t in range(L)],
    ]
    best = None
    best_supports = None
    for supports in candidates:
        sol = _fixed_support_solve(supports, iota3d, vbar, spec.power_cap)
        if sol is not None and (best is None or sol[1] < best[1]):
            best = sol
            best_supports = supports
    if best is None:
        raise BinaryRoundingError(
            f"no limit support meets rate {vbar} within the power cap on "
            f"interval [{spec.start}, {spec.end})"
        )
    levels, binary_energy, binary_rate = best

    assignment = np.zeros((N, K, L), dtype=np.int8)
    power = np.zeros((N, K, L))
    for t in range(L):
        # drop support entries left dry by the re-leveling; an RB with zero
        # power is not occupied
        sup = best_supports[t] & (iota3d[:, :, t] < levels[t])
        assignment[:, :, t] = sup.astype(np.int8)
        power[:, :, t] = np.where(sup, levels[t] - iota3d[:, :, t], 0.0)

    return InnerSolution(
        assignment=assignment,
        power=power,
        energy=energy_mixed,
        binary_energy=float(binary_energy),
        expected_rate=float(binary_rate),
        global_level=mu,
        slot_levels=levels,
        mix=mix,
    )
