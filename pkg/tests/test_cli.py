import json

import pytest

from spanforge.cli import main


@pytest.fixture()
def formula_file(tmp_path):
    path = tmp_path / "bal4.formula"
    path.write_text("OR(AND(x1,x2),AND(x3,x4))")
    return str(path)


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_command(capsys, formula_file):
    code, out, _ = run(capsys, "parse", formula_file)
    assert code == 0
    tree = json.loads(out)
    assert tree["gate"] == "OR" and len(tree["children"]) == 2


def test_metrics_table_and_json(capsys, formula_file):
    code, out, _ = run(capsys, "metrics", formula_file)
    assert code == 0 and "adv      2" in out
    code, out, _ = run(capsys, "metrics", formula_file, "--json")
    data = json.loads(out)
    assert data["n"] == 4 and data["adv"] == pytest.approx(2.0)


def test_compose_round_trip(capsys, tmp_path, formula_file):
    out_path = tmp_path / "prog.json"
    code, _, _ = run(capsys, "compose", formula_file, "-o", str(out_path))
    assert code == 0
    from spanforge.spanprog import SpanProgram, eval_span

    prog = SpanProgram.from_json(out_path.read_text())
    assert prog.n == 4
    assert eval_span(prog, "1100") == 1 and eval_span(prog, "1000") == 0


def test_wsize_single_input(capsys, formula_file):
    code, out, _ = run(capsys, "wsize", formula_file, "--input", "1100")
    assert code == 0
    data = json.loads(out)
    assert data["case"] == 1
    assert data["size"] == pytest.approx(2.0, abs=1e-6)


def test_wsize_all_inputs_on_program_json(capsys, tmp_path, formula_file):
    prog_path = tmp_path / "prog.json"
    run(capsys, "compose", formula_file, "-o", str(prog_path))
    code, out, _ = run(capsys, "wsize", str(prog_path), "--all")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 16
    assert max(r["size"] for r in rows) == pytest.approx(2.0, abs=1e-6)


def test_graph_dot(capsys, tmp_path, formula_file):
    dot_path = tmp_path / "g.dot"
    code, _, _ = run(capsys, "graph", formula_file, "--dot", str(dot_path))
    assert code == 0
    text = dot_path.read_text()
    assert text.startswith("graph") and "weight=" in text
    code, out, _ = run(capsys, "graph", formula_file, "--input", "0000")
    assert code == 0 and "partner" in out


def test_check_all_pass(capsys, formula_file):
    code, out, _ = run(capsys, "check", formula_file, "--lemma", "balance")
    assert code == 0
    reports = json.loads(out)
    assert reports and all(r["passed"] for r in reports)


def test_check_gap_single_input(capsys, formula_file):
    code, out, _ = run(capsys, "check", formula_file, "--lemma", "gap",
                       "--input", "1100")
    assert code == 0
    assert json.loads(out)[0]["lemma"] == "gap"


def test_exit_codes(capsys, tmp_path, formula_file):
    # usage -> 1
    code, _, _ = run(capsys, "wsize")
    assert code == 1
    # unknown file -> 2
    code, _, err = run(capsys, "metrics", str(tmp_path / "missing.f"))
    assert code == 2
    # bad bit string -> 2
    code, _, _ = run(capsys, "wsize", formula_file, "--input", "xyz1")
    assert code == 2
    # corrupted program JSON -> 2 with a schema error
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "dim": 1}')
    code, _, err = run(capsys, "check", str(bad), "--lemma", "canonical")
    assert code == 2 and "schema error" in err
    # parse error -> 2
    badf = tmp_path / "bad.formula"
    badf.write_text("AND(x1,x1)")
    code, _, _ = run(capsys, "metrics", str(badf))
    assert code == 2
    # syntax errors carry file:line:col
    badf.write_text("AND(x1,\n  y2)")
    code, _, err = run(capsys, "metrics", str(badf))
    assert code == 2 and f"{badf}:2:3" in err


def test_registry_flag(capsys, tmp_path):
    gates = tmp_path / "gates.txt"
    gates.write_text("gate XOR2 arity=2 tt=0110\n")
    f = tmp_path / "xor.formula"
    f.write_text("XOR2(x1,x2)")
    code, out, _ = run(capsys, "metrics", str(f), "--registry", str(gates),
                       "--json")
    assert code == 0
    assert json.loads(out)["methods"] == ["minimax"]


def test_sweep_deterministic_and_seeded(capsys, tmp_path):
    csv1 = tmp_path / "a.csv"
    csv2 = tmp_path / "b.csv"
    for path in (csv1, csv2):
        code, _, _ = run(capsys, "sweep", "--family", "balanced-andor",
                         "--sizes", "2..8", "--csv", str(path), "--jobs", "2")
        assert code == 0
    assert csv1.read_bytes() == csv2.read_bytes()
    header = csv1.read_text().splitlines()[0]
    assert header == "n,adv,sigma_minus,wsize,wsizef,abs_norm,t_est,gap"


def test_sweep_empty_range_header_only(capsys, tmp_path):
    csv = tmp_path / "empty.csv"
    code, _, _ = run(capsys, "sweep", "--family", "skew-andor",
                     "--sizes", "5..4", "--csv", str(csv))
    assert code == 0
    assert csv.read_text().strip() == "n,adv,sigma_minus,wsize,wsizef,abs_norm,t_est,gap"


def test_sweep_seed_env_override(capsys, tmp_path, monkeypatch):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    run(capsys, "sweep", "--family", "random-andor", "--sizes", "4..6",
        "--csv", str(a), "--seed", "1")
    monkeypatch.setenv("SPANFORGE_SEED", "1")
    run(capsys, "sweep", "--family", "random-andor", "--sizes", "4..6",
        "--csv", str(b), "--seed", "7")
    assert a.read_bytes() == b.read_bytes()


def test_sweep_figure(capsys, tmp_path):
    png = tmp_path / "fig.png"
    code, _, _ = run(capsys, "sweep", "--family", "balanced-andor",
                     "--sizes", "2..8", "--csv", str(tmp_path / "s.csv"),
                     "--fig", str(png))
    assert code == 0
    assert png.stat().st_size > 1000


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed=5\n")
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    run(capsys, "sweep", "--family", "random-andor", "--sizes", "4..5",
        "--csv", str(a), "--config", str(cfg))
    run(capsys, "sweep", "--family", "random-andor", "--sizes", "4..5",
        "--csv", str(b), "--seed", "5")
    assert a.read_bytes() == b.read_bytes()
    bad = tmp_path / "bad.cfg"
    bad.write_text("frobnicate=1\n")
    code, _, _ = run(capsys, "sweep", "--family", "random-andor",
                     "--sizes", "4..5", "--csv", str(a), "--config", str(bad))
    assert code == 2


def test_config_tolerance_reaches_checker(capsys, tmp_path, formula_file):
    # an absurdly large tolerance from the config cannot break a passing
    # check; a negative CLI tolerance must override it and fail the
    # equality-tight balance items
    cfg = tmp_path / "t.cfg"
    cfg.write_text("tolerance=100.0\n")
    code, _, _ = run(capsys, "check", formula_file, "--lemma", "balance",
                     "--config", str(cfg))
    assert code == 0
    code, _, _ = run(capsys, "check", formula_file, "--lemma", "balance",
                     "--config", str(cfg), "--tolerance=-1e9")
    assert code == 3


def test_check_verification_failure_exit_code(capsys, tmp_path):
    # a program that is canonical-shaped but with a wrong target fails
    prog = {"n": 1, "dim": 1, "target": [2.0], "free": [],
            "inputs": [{"j": 1, "b": 1, "vectors": [[1.0]]}]}
    path = tmp_path / "prog.json"
    path.write_text(json.dumps(prog))
    code, out, err = run(capsys, "check", str(path), "--lemma", "canonical")
    assert code == 3
