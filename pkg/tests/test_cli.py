from __future__ import annotations

import json
from pathlib import Path

from oaindex import cli


def test_staged_commands_match_full_run(tmp_path, capsys):
    d = tmp_path / "demo"
    assert cli.main(["synth", str(d), "--records", "1500", "--seed", "3"]) == 0
    cfg = str(d / "config.json")
    assert cli.main(["validate", "--config", cfg]) == 0
    assert "config OK" in capsys.readouterr().out

    assert cli.main(["run", "--config", cfg, "--workers", "1"]) == 0
    out = capsys.readouterr().out
    assert "records accepted" in out and "lacking a NUTS1 region" in out

    agg, ind, sch = tmp_path / "agg.csv", tmp_path / "ind.csv", tmp_path / "schemes.json"
    assert cli.main(["aggregate", "--config", cfg, "-o", str(agg), "--report", str(tmp_path / "ingest.json")]) == 0
    assert cli.main(["indicators", "--aggregates", str(agg), "--scheme", str(d / "scheme.csv"), "-o", str(ind)]) == 0
    assert cli.main(["classify", "--indicators", str(ind), "-o", str(sch)]) == 0
    exp = tmp_path / "exp"
    assert cli.main([
        "export", "--indicators", str(ind), "--schemes", str(sch), "--registry", str(d / "registry.csv"),
        "--geometry", f"country={d / 'geometry_country.geojson'}", "-o", str(exp),
    ]) == 0

    full = d / "out"
    assert agg.read_bytes() == (full / "aggregates.csv").read_bytes()
    assert ind.read_bytes() == (full / "indicators.csv").read_bytes()
    assert sch.read_bytes() == (full / "schemes.json").read_bytes()
    for name in ("choropleth_country_noai.csv", "country_oa_share_2015-2018.geojson"):
        assert (exp / name).read_bytes() == (full / name).read_bytes()
    ingest = json.loads((tmp_path / "ingest.json").read_text())
    assert ingest["accepted"] == 1500


def test_flags_override_config_and_env(tmp_path, monkeypatch, capsys):
    d = tmp_path / "demo"
    cli.main(["synth", str(d), "--records", "50"])
    monkeypatch.setenv("OAINDEX_CONFIG", str(d / "config.json"))
    assert cli.main(["validate"]) == 0
    capsys.readouterr()
    assert cli.main(["validate", "--jenks-classes", "0", "--period", "2000-2010"]) == 1
    err = capsys.readouterr().err
    assert "jenks_classes" in err
    assert "overlap" not in err


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "c.json"
    bad.write_text("{")
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err


def test_failed_run_exits_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"corpus": ["none.jsonl"], "output_dir": "out"}))
    assert cli.main(["run", "--config", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert "error [validate]" in err
    assert (tmp_path / "out" / "run_report.json").exists()


def test_missing_input_file_exit_1(tmp_path, capsys):
    code = cli.main(["indicators", "--aggregates", str(tmp_path / "x.csv"), "--scheme", str(tmp_path / "s.csv"), "-o", str(tmp_path / "o.csv")])
    assert code == 1
    assert "error [indicators]" in capsys.readouterr().err
    assert not Path(tmp_path / "o.csv").exists()
