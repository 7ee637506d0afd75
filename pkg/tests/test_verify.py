import json
import math

import pytest

from oscfid import verify
from oscfid.verify import REGISTRY, Report, UnknownCheckError, VerifyConfig, mutated, run_all, run_one

CHEAP = ["sec3.weights.g1", "lemma3.2.recurrence", "lemma3.2.period", "eq3.6.identity",
         "inv.wronskian", "inv.energy"]


def test_registry_covers_every_family():
    prefixes = {cid.split(".")[0] for cid in REGISTRY}
    for p in ("sec3", "lemma3", "prop3", "prop4", "prop6", "sec4", "sec6", "eq3", "inv", "gq", "remark5"):
        assert p in prefixes
    assert "prop6.3.ball" in REGISTRY and "prop4.5.cusp" in REGISTRY


def test_cheap_checks_pass():
    rep = run_all(only=CHEAP)
    assert [c.id for c in rep.checks] == CHEAP
    assert not rep.failed, rep.to_text()


def test_deterministic_for_seed():
    cfg = VerifyConfig(seed=42)
    a = run_all(cfg, only=CHEAP)
    b = run_all(cfg, only=CHEAP)
    assert a.to_text() == b.to_text()


def test_threads_give_same_report():
    a = run_all(only=CHEAP)
    b = run_all(only=CHEAP, workers=3)
    assert a.checks == b.checks


def test_unknown_id():
    with pytest.raises(UnknownCheckError):
        run_all(only=["no.such.check"])
    with pytest.raises(UnknownCheckError):
        run_one("no.such.check")


def test_serialisation():
    rep = run_all(only=["inv.wronskian"])
    doc = json.loads(rep.to_json())
    assert doc["checks"][0]["id"] == "inv.wronskian"
    assert doc["meta"]["seed"] == 0
    lines = rep.to_text().splitlines()
    assert lines[-2] == "id,status,margin,tolerance,detail"
    assert lines[-1].startswith("inv.wronskian,pass,")
    assert rep.elapsed >= 0


def test_judge_states():
    assert verify._judge("x", 0.1, 0.0).status == "pass"
    assert verify._judge("x", -1e-9, 1e-8).status == "pass"
    assert verify._judge("x", -1.0, 1e-8).status == "fail"
    assert verify._judge("x", -1.0, 1e-8, uncertainty=2.0, scale=1.0).status == "inconclusive"
    rep = Report([verify._judge("x", -1.0, 0.0, uncertainty=2.0, scale=1.0)])
    assert rep.inconclusive and not rep.failed


def test_mutated_config():
    cfg = mutated(seed=3, unstable_ball_radius=1.0)
    assert cfg.seed == 3 and cfg.unstable_ball_radius == 1.0
    assert VerifyConfig().unstable_ball_radius == pytest.approx(math.sqrt(3))


def test_large_coupling_ball_bound_reported_vacuous():
    rep = run_all(mutated(g_values=(10.0,), gauss_grid=4, ball_grid=2, n_samples=20_000),
                  only=["prop4.3.ball"])
    c = rep.checks[0]
    assert c.status == "pass" and "vacuous" in c.detail
