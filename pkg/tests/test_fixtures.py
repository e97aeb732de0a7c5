import copy
import json

import pytest

from crownwave import fixtures as fx
from crownwave import verify


def test_every_record_tagged(fixture_doc):
    assert fixture_doc["oracle_dps"] == fx.ORACLE_DPS
    for rec in fixture_doc["records"]:
        assert rec["provenance"] in fx.PROVENANCE, rec["id"]
    ids = [r["id"] for r in fixture_doc["records"]]
    assert len(ids) == len(set(ids))


def test_record_counts(fixture_doc):
    assert len(fx.records(fixture_doc, "hyp2f1")) == fx.HYP_POINTS * len(fx.REFERENCE_SETS)
    assert len(fx.records(fixture_doc, "boundary")) == 2 * len(fx.BOUNDARY_XS) * len(fx.REFERENCE_SETS)
    assert len(fx.records(fixture_doc, "jump")) == 1
    assert len(fx.records(fixture_doc, "digamma")) == 1


def test_verdicts_recorded(fixture_doc):
    verdicts = {r["id"]: r for r in fx.records(fixture_doc, "verdict")}
    assert set(verdicts) == {"verdict/connection_constant_placement", "verdict/recursion_constants",
                             "verdict/apex_sign"}
    assert all(v["passed"] for v in verdicts.values())
    assert 3.5 < verdicts["verdict/recursion_constants"]["ratio"] < 4.5
    assert min(verdicts["verdict/apex_sign"]["probe_ratio_tau256"].values()) >= 1e3


def test_integrity_clean(fixture_doc):
    assert fx.check_integrity(fixture_doc) == []


def test_missing_tag_refused(fixture_doc):
    doc = copy.deepcopy(fixture_doc)
    del doc["records"][3]["provenance"]
    doc["records"][7]["provenance"] = "folklore"
    problems = fx.check_integrity(doc)
    assert len(problems) == 2
    assert all("provenance" in p for p in problems)


def test_tampered_value_detected(fixture_doc):
    doc = copy.deepcopy(fixture_doc)
    rec = next(r for r in doc["records"] if r["provenance"] == "mp-side-limit")
    rec["value_re"] *= 1 + 1e-9
    assert any(rec["id"] in p for p in fx.check_integrity(doc))


def test_env_override(tmp_path, monkeypatch, fixture_doc):
    doc = copy.deepcopy(fixture_doc)
    doc["records"][0].pop("provenance")
    (tmp_path / fx.FIXTURE_NAME).write_text(json.dumps(doc))
    monkeypatch.setenv(fx.ENV_VAR, str(tmp_path))
    assert fx.fixture_path() == tmp_path / fx.FIXTURE_NAME
    with pytest.raises(fx.FixtureError, match="integrity"):
        verify.run_all(numbers=[1])


def test_unreadable_fixtures(tmp_path, monkeypatch):
    monkeypatch.setenv(fx.ENV_VAR, str(tmp_path / "nowhere"))
    with pytest.raises(fx.FixtureError, match="cannot read"):
        fx.load()


def test_generation_reproducible(tmp_path, fixture_doc):
    path = fx.generate(tmp_path / fx.FIXTURE_NAME)
    fresh = fx.load(path)
    assert fresh["records"] == fixture_doc["records"]
