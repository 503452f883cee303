import json

import pytest

from sinkless.acceptance import MatrixConfig
from sinkless.cli import main
from sinkless.graph_core import loads_edge_list


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def payload(text):
    return json.loads(text)["payload"]


# ---------------------------------------------------------------- generate


def test_generate_fixture_summary(capsys):
    code, out, _ = run(capsys, "generate", "fixture", "--name", "k6_cover")
    assert code == 0
    assert payload(out) == {"n": 12, "m": 30, "girth": 4, "regular": 5}


def test_generate_writes_edge_list(capsys, tmp_path):
    path = tmp_path / "g.txt"
    code, _, _ = run(capsys, "generate", "regular", "--n", "4", "--d", "3", "--out", str(path))
    assert code == 0
    g = loads_edge_list(path.read_text())
    assert (g.n, g.m) == (4, 6)


def test_generate_infeasible_parameters(capsys):
    code, _, err = run(capsys, "generate", "regular", "--n", "5", "--d", "3")
    assert code == 2 and "infeasible" in err


def test_bad_arguments_are_usage_errors(capsys):
    assert run(capsys, "generate", "cube")[0] == 2
    assert run(capsys)[0] == 2


# ---------------------------------------------------------------- run


def test_run_on_path_fixture(capsys):
    code, out, _ = run(capsys, "run", "--graph", "fig1_path")
    assert code == 0
    p = payload(out)
    assert p["violations"] == [] and p["measured_max_radius"] <= p["declared_locality"]


def test_run_csv_output(capsys):
    code, out, _ = run(capsys, "run", "--graph", "fig1_path", "--format", "csv")
    header, row = out.strip().splitlines()
    assert code == 0 and "violations" in header.split(",")


def test_run_payload_is_deterministic(capsys, tmp_path):
    path = tmp_path / "g.txt"
    run(capsys, "generate", "regular", "--n", "60", "--d", "3", "--seed", "4", "--out", str(path))
    args = ("run", "--graph", str(path), "--ids", "random", "--schedule", "random", "--seed", "9")
    a, b = payload(run(capsys, *args)[1]), payload(run(capsys, *args)[1])
    assert a == b


@pytest.mark.parametrize("engine", ["composed", "fast"])
def test_run_engines(capsys, engine):
    code, out, _ = run(capsys, "run", "--graph", "k55", "--engine", engine)
    assert code == 0 and payload(out)["engine"] == engine


def test_run_rejects_malformed_graph(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 x\n")
    code, _, err = run(capsys, "run", "--graph", str(path))
    assert code == 2 and "cannot parse" in err
    assert run(capsys, "run", "--graph", str(tmp_path / "missing.txt"))[0] == 2


# ---------------------------------------------------------------- refute


def test_refute_constant_at_zero_rounds(capsys):
    code, out, _ = run(capsys, "refute", "--candidate", "constant_O")
    p = payload(out)
    assert code == 0 and p["kind"] == "passive_sink" and p["zero_round_branch"] == "B"


def test_refute_writes_certificate(capsys, tmp_path):
    path = tmp_path / "cert.json"
    code, out, _ = run(capsys, "refute", "--candidate", "parity", "--T", "1", "--out", str(path))
    assert code == 0
    cert = json.loads(path.read_text())
    assert cert["support_graph_ref"] == "fixture:k6_cover"
    assert cert["input_edge_ids"] == payload(out)["input_edge_ids"]


def test_refute_table_candidate(capsys, tmp_path):
    path = tmp_path / "table.txt"
    path.write_text("# active=black T=0\n*; *; O\n")
    code, out, _ = run(capsys, "refute", "--candidate", str(path))
    assert code == 0 and payload(out)["candidate"] == "table.txt"


def test_refute_usage_errors(capsys):
    assert run(capsys, "refute", "--candidate", "parity", "--T", "2")[0] == 2
    assert run(capsys, "refute", "--candidate", "bogus")[0] == 2
    assert run(capsys, "refute", "--candidate", "parity", "--graph", "fig1_path")[0] == 2


# ---------------------------------------------------------------- acceptance


def test_acceptance_empty_matrix_passes_with_warnings(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(MatrixConfig.empty().as_dict()))
    code, _, err = run(capsys, "acceptance", "--config", str(path))
    assert code == 0 and "warning" in err


def test_acceptance_catches_a_buggy_greedy_rule(capsys, tmp_path):
    cfg = MatrixConfig.empty().as_dict()
    cfg.update(greedy_graphs=20, greedy_orders=5, greedy_rule2="lowest_id")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, out, err = run(capsys, "acceptance", "--config", str(path), "--criteria", "3")
    assert code == 1 and "criterion  3 FAIL" in err


def test_acceptance_bad_config(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"bogus": 1}')
    assert run(capsys, "acceptance", "--config", str(path))[0] == 2
