import json
from fractions import Fraction

import pytest
from click.testing import CliRunner

from coinvlat import pipeline as pl
from coinvlat.cli import main


def test_check_line_format():
    rep = pl.ClassReport("10F")
    c = rep.add("table3.index", 3, 3)
    assert c.passed and c.line() == "[PASS] table3.index: computed=3 expected=3 (transcribed)"
    rep.add("table3.cbar", 63, 64)
    assert not rep.passed and [f.cell for f in rep.failures()] == ["table3.cbar"]


def test_report_json_roundtrip():
    rep = pl.ClassReport("6E")
    rep.add("table4.rho1", Fraction(5, 6), Fraction(5, 6))
    rep.facts["Sg"] = 9100
    rep.search = {"method": "index1", "selected_orders": [978208358400]}
    data = json.loads(json.dumps(pl.report_json([rep])))
    (back,) = pl.report_from_json(data)
    assert back.class_tag == "6E" and back.passed
    assert back.facts["Sg"] == 9100
    with pytest.raises(ValueError):
        pl.report_from_json({"schema": 0, "classes": []})


def test_empty_report_markdown_mentions_weakening(tmp_path):
    md, js = pl.emit_report([], tmp_path)
    assert pl.WEAKENING in md.read_text()
    assert json.loads(js.read_text())["passed"] is True


def test_run_class_table3_10f(cache_dir):
    rep = pl.run_class("10F", stages=("table3",), cache_dir=cache_dir)
    assert rep.passed, [c.line() for c in rep.failures()]
    assert rep.facts["disc_index"] == 3


def test_primary_invariants_of_10f_discriminant(contexts):
    assert pl.elementary_divisors(contexts("10F").disc) == [2, 2, 2, 2, 5, 5]


def test_c_voa_order(contexts, expectations):
    for name in ("6E", "10F"):
        assert pl.c_voa_order(contexts(name)) == expectations["classes"][name]["c_voa"]["order"]


def test_cli_build_and_verify(cache_dir, tmp_path):
    runner = CliRunner()
    r = runner.invoke(main, ["build", "6E"])
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["checks"]["rootless"] is True
    r = runner.invoke(main, ["--cache", cache_dir, "verify", "table2", "--class", "10F"])
    assert r.exit_code == 0, r.output
    assert "[FAIL]" not in r.output and "10F [PASS] table2.aut_lattice" in r.output
    r = runner.invoke(main, ["--cache", cache_dir, "verify", "theorem", "--class", "10F"])
    assert r.exit_code == 0 and "[SKIP]" in r.output
    r = runner.invoke(main, ["--cache", cache_dir, "report", "--out", str(tmp_path), "--class", "10F"])
    assert r.exit_code == 0, r.output
    assert (tmp_path / "report.md").exists()


def test_cli_irr_space_digest_stable():
    runner = CliRunner()
    a = json.loads(runner.invoke(main, ["irr-space", "10F"]).output)
    b = json.loads(runner.invoke(main, ["--seed", "5", "irr-space", "10F"]).output)
    assert a["q_table_sha256"] == b["q_table_sha256"]
    assert a["Sg"] == 432 and a["layout"] == "doubled"


def test_cli_rejects_unknown_class():
    r = CliRunner().invoke(main, ["build", "7X"])
    assert r.exit_code != 0


def test_odd_footprint(contexts):
    from coinvlat.groups import Group, point_stabilizer

    ctx = contexts("10F")
    Gv = point_stabilizer(ctx.orth_irr.group, ctx.irr.vacuum_label())
    assert pl.odd_footprint_ok(ctx, Gv)
    trivial = Group(Gv.action, [], [])
    assert not pl.odd_footprint_ok(ctx, trivial)
    with pytest.raises(ValueError):
        pl.odd_footprint_ok(contexts("8E"), trivial)
