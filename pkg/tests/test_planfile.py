import json

import numpy as np
import pytest

from aoiplan import build_profile
from aoiplan.errors import PlanFormatError
from aoiplan.planfile import load_plan, save_plan, validate_plan_rates
from aoiplan.scenario import scenario_digest
from aoiplan.sim import age_aware_plan

from conftest import desk_scenario


@pytest.fixture()
def saved_plan(tmp_path):
    s = desk_scenario(3)
    prof = build_profile(s, 3)
    plan = age_aware_plan(s, prof, rb_cap=2)
    path = tmp_path / "plan.json"
    save_plan(plan, path, scenario_digest(s), s.power_budget_pbar, seed=3)
    return s, prof, plan, path


def test_roundtrip_preserves_plan(saved_plan):
    s, prof, plan, path = saved_plan
    back, header = load_plan(path)
    assert back.instants == plan.instants
    assert back.spent_energy == pytest.approx(plan.spent_energy, rel=1e-12)
    assert header["scenario_hash"] == scenario_digest(s)
    validate_plan_rates(back, prof)
    for leg, orig in zip(back.legs, plan.legs):
        assert np.array_equal(leg.assignment, orig.assignment)
        assert np.allclose(leg.power, orig.power, rtol=0, atol=0)


def _mutate(path, tmp_path, fn):
    doc = json.loads(path.read_text())
    fn(doc)
    out = tmp_path / "bad.json"
    out.write_text(json.dumps(doc))
    return out


def test_rejects_wrong_format_tag(saved_plan, tmp_path):
    *_, path = saved_plan
    bad = _mutate(path, tmp_path, lambda d: d.update(format="other"))
    with pytest.raises(PlanFormatError):
        load_plan(bad)


def test_rejects_gap_beyond_bound(saved_plan, tmp_path):
    *_, path = saved_plan

    def widen(doc):
        doc["legs"] = [{
            "start": 1, "end": doc["horizon"] + 1,
            "target": 1.0, "feasible": True, "entries": [],
        }]
        doc["instants"] = [1]

    bad = _mutate(path, tmp_path, widen)
    with pytest.raises(PlanFormatError) as err:
        load_plan(bad)
    assert "freshness" in str(err.value)


def test_rejects_duplicate_entry(saved_plan, tmp_path):
    *_, path = saved_plan

    def dup(doc):
        entries = doc["legs"][0]["entries"]
        entries.append(list(entries[0]))

    bad = _mutate(path, tmp_path, dup)
    with pytest.raises(PlanFormatError):
        load_plan(bad)


def test_rejects_power_above_budget(saved_plan, tmp_path):
    *_, path = saved_plan

    def pump(doc):
        doc["legs"][0]["entries"][0][3] = doc["power_budget"] * 10.0

    bad = _mutate(path, tmp_path, pump)
    with pytest.raises(PlanFormatError):
        load_plan(bad)


def test_rejects_rb_conflict(saved_plan, tmp_path):
    s, *_ , path = saved_plan

    def conflict(doc):
        leg = doc["legs"][0]
        n1, k1, t1, p1 = leg["entries"][0]
        other_n = 1 if n1 == 2 else 2
        leg["entries"].append([other_n, k1, t1, p1 * 1e-6])

    bad = _mutate(path, tmp_path, conflict)
    with pytest.raises(PlanFormatError):
        load_plan(bad)


def test_rate_validation_catches_power_cut(saved_plan, tmp_path):
    s, prof, _, path = saved_plan

    def halve(doc):
        for leg in doc["legs"]:
            for rec in leg["entries"]:
                rec[3] *= 0.01

    bad = _mutate(path, tmp_path, halve)
    plan, _ = load_plan(bad)
    with pytest.raises(PlanFormatError):
        validate_plan_rates(plan, prof)
