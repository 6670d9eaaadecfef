import json

import jsonschema

from photonweave.cli import (
    PROTOCOL_RESULT_SCHEMA,
    REPORT_SCHEMA,
    main,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def strip_timing(report):
    report = dict(report)
    report.pop("timing_seconds", None)
    return report


def test_simulate_ghz(capsys):
    code, report = run_cli(capsys, "simulate", "--protocol", "ghz", "--users", "3")
    assert code == 0
    jsonschema.validate(report, REPORT_SCHEMA)
    result = report["results"]["result"]
    jsonschema.validate(result, PROTOCOL_RESULT_SCHEMA)
    assert result["probability"]["exponent"] == 2
    assert result["final_graph"]["edges"] == [[1, 2], [1, 3]]


def test_simulate_path_result_schema(capsys):
    code, report = run_cli(capsys, "simulate", "--protocol", "path", "--users", "3")
    assert code == 0
    jsonschema.validate(report["results"]["result"], PROTOCOL_RESULT_SCHEMA)


def test_reports_byte_identical(capsys):
    _, a = run_cli(capsys, "simulate", "--protocol", "cycle", "--users", "4")
    _, b = run_cli(capsys, "simulate", "--protocol", "cycle", "--users", "4")
    assert strip_timing(a) == strip_timing(b)
    _, c = run_cli(capsys, "montecarlo", "--protocol", "ghz", "--users", "3",
                   "--trials", "2000", "--seed", "3")
    _, d = run_cli(capsys, "montecarlo", "--protocol", "ghz", "--users", "3",
                   "--trials", "2000", "--seed", "3")
    assert strip_timing(c) == strip_timing(d)


def test_chain_requires_seed(capsys):
    code = main(["simulate", "--protocol", "chain", "--blocks", "path4,path4"])
    assert code == 2


def test_montecarlo_requires_seed(capsys):
    code = main(["montecarlo", "--protocol", "ghz", "--users", "3", "--trials", "10"])
    assert code == 2


def test_classify_empty_word_usage_error(capsys):
    code = main(["classify", "--word", ""])
    assert code == 2


def test_classify_prediction_only(capsys):
    code, report = run_cli(capsys, "classify", "--word", "XYYY")
    assert code == 0
    assert report["pass"] is None
    assert report["results"]["predicted"] == "leafed-cycle"


def test_classify_with_simulation(capsys):
    code, report = run_cli(capsys, "classify", "--word", "XXY", "--n", "6")
    assert code == 0 and report["pass"] is True
    assert report["results"]["equivalent"] is True


def test_runtime_error_exit_code(capsys):
    code = main(["classify", "--word", "X" * 10, "--n", "20"])
    assert code == 1  # size cap exceeded is a runtime failure, not usage


def test_usage_error_exit_code_from_argparse(capsys):
    code = main(["simulate", "--protocol", "warp"])
    assert code == 2


def test_verify_single_suite(capsys):
    code, report = run_cli(capsys, "verify", "--suite", "cz-gate")
    assert code == 0 and report["pass"] is True
    assert report["results"]["criteria"][0]["name"] == "cz-gate"


def test_export_dot(tmp_path, capsys):
    graph_file = tmp_path / "p3.json"
    graph_file.write_text('{"vertices": [1, 2, 3], "edges": [[1, 2], [2, 3]]}')
    out_file = tmp_path / "p3.dot"
    code, report = run_cli(capsys, "export", "--in", str(graph_file),
                           "--format", "dot", "--out", str(out_file))
    assert code == 0
    dot = out_file.read_text()
    assert dot.count("--") == 2
    assert sum(line.strip().rstrip(";").isdigit() for line in dot.splitlines()) == 3
    # bit-stable: exporting again yields identical bytes
    code, _ = run_cli(capsys, "export", "--in", str(graph_file),
                      "--format", "dot", "--out", str(out_file))
    assert out_file.read_text() == dot


def test_export_state_csv(tmp_path, capsys):
    from photonweave.optics import GBell, prepare, state_to_json

    state_file = tmp_path / "state.json"
    state_file.write_text(state_to_json(prepare([GBell(0, 1)])))
    code, report = run_cli(capsys, "export", "--in", str(state_file), "--format", "csv")
    assert code == 0
    assert report["results"]["content"].startswith("occupations,re,im")
    assert len(report["results"]["content"].strip().splitlines()) == 5


def test_export_bad_combination(tmp_path, capsys):
    graph_file = tmp_path / "g.json"
    graph_file.write_text('{"vertices": [1], "edges": []}')
    code = main(["export", "--in", str(graph_file), "--format", "csv"])
    assert code == 2


def test_out_dir_env_var(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PHOTONWEAVE_OUT_DIR", str(tmp_path))
    code = main(["simulate", "--protocol", "ghz", "--users", "2", "--out", "report.json"])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["results"]["result"]["probability"]["exponent"] == 1


def test_verify_appendix_b_cli(capsys):
    code, report = run_cli(capsys, "verify", "--suite", "appendix-b", "--n", "8")
    assert code == 0 and report["pass"] is True


def test_montecarlo_csv_log(tmp_path, capsys):
    csv_file = tmp_path / "trials.csv"
    code, report = run_cli(capsys, "montecarlo", "--protocol", "chain",
                           "--blocks", "three,three", "--trials", "50",
                           "--seed", "2", "--csv", str(csv_file))
    assert code == 0
    lines = csv_file.read_text().strip().splitlines()
    assert lines[0] == "trial,success,blocks,bell_pairs,fusions"
    assert len(lines) == 51
