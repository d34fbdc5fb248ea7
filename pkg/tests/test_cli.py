import json

import pytest

from qlogismos.cli import main, render_ascii


@pytest.fixture
def built(tmp_path, fixture_path):
    def make(name, *extra):
        out = tmp_path / f"{name}.graph.json"
        assert main(["build", "--input", str(fixture_path(name)), "--output", str(out), *extra]) == 0
        return out

    return make


def solve(graph, out, *extra):
    return main(["solve", "-i", str(graph), "-o", str(out), "--restarts", "2", "--maxiter", "60", *extra])


def test_build_single_column(built):
    data = json.loads(built("single_column").read_text())
    assert len(data["edges"]) == 3
    assert data["epsilon"] == 5 and data["source"] == 2 and data["sink"] == 3
    assert data["delta"] == 2


def test_build_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"columns": 1, "height": 2}))
    assert main(["build", "-i", str(bad), "-o", str(tmp_path / "g.json")]) == 2
    bad.write_text("{not json")
    assert main(["build", "-i", str(bad)]) == 2
    assert main(["build", "-i", str(tmp_path / "missing.json")]) == 2
    bad.write_text(json.dumps({"columns": 2, "costs": [[1, 2], [3, 4]], "delta": -1}))
    assert main(["build", "-i", str(bad)]) == 2


def test_build_delta_override(built):
    assert json.loads(built("chain3", "--delta", "1").read_text())["delta"] == 1


def test_solve_verify_report_round_trip(built, tmp_path, capsys):
    for name in ("single_column", "chain3", "degenerate", "grid2x2"):
        graph = built(name)
        result = tmp_path / f"{name}.result.json"
        assert solve(graph, result) == 0
        out = capsys.readouterr().out
        for label in ("Solution is:", "Objective function value:", "Segmentation set:", "Background set:"):
            assert label in out
        data = json.loads(result.read_text())
        assert data["q_s"] == 1 and data["q_t"] == 0 and data["valid_cut"]
        assert "wall_seconds" not in data
        assert main(["verify", "-i", str(graph), "-r", str(result)]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and out.count("PASS") >= 2


def test_solve_accepts_instance_file(fixture_path, tmp_path):
    out = tmp_path / "r.json"
    assert solve(fixture_path("single_column"), out) == 0
    assert json.loads(out.read_text())["objective"] == -5


def test_solve_record_time(built, tmp_path):
    out = tmp_path / "r.json"
    assert solve(built("single_column"), out, "--record-time") == 0
    assert json.loads(out.read_text())["wall_seconds"] >= 0


def test_solve_resource_error(tmp_path):
    inst = tmp_path / "big.json"
    inst.write_text(json.dumps({"columns": 5, "height": 5, "costs": [[0, 1, 2, 3, 4]] * 5, "delta": 1}))
    assert main(["solve", "-i", str(inst), "-o", str(tmp_path / "r.json")]) == 3


def test_solve_invalid_flags(built):
    assert main(["solve", "-i", str(built("single_column")), "--reps", "0"]) == 2
    assert main(["solve", "-i", str(built("single_column")), "--shots", "-1"]) == 2


def test_verify_detects_corrupted_bitstring(built, tmp_path, capsys):
    graph = built("chain3")
    result = tmp_path / "r.json"
    assert solve(graph, result) == 0
    data = json.loads(result.read_text())
    bits = list(data["bitstring"])
    bits[0] = "0"  # drop a bottom node: its source edge is cut
    data["bitstring"] = "".join(bits)
    result.write_text(json.dumps(data))
    capsys.readouterr()
    assert main(["verify", "-i", str(graph), "-r", str(result)]) == 4
    out = capsys.readouterr().out
    assert "PASS: separates" in out
    assert "FAIL: minimum capacity" in out


def test_verify_invalid_cut(built, tmp_path, capsys):
    graph = built("single_column")
    result = tmp_path / "r.json"
    result.write_text(json.dumps({"bitstring": "10", "q_s": 1, "q_t": 1}))
    assert main(["verify", "-i", str(graph), "-r", str(result)]) == 4
    assert "FAIL: separates" in capsys.readouterr().out


def test_oracle_report(built, tmp_path):
    out = tmp_path / "o.json"
    assert main(["oracle", "-i", str(built("degenerate")), "-o", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["consistent"] is True
    assert report["E0"] == report["flow"] - report["epsilon"]
    assert len(report["minimizers"]) == 2
    assert main(["oracle", "-i", str(built("chain3")), "-o", str(out), "--oracle-method", "preflow"]) == 0
    assert json.loads(out.read_text())["E0"] is None


def test_oracle_skips_brute_force_when_oversized(tmp_path, capsys):
    inst = tmp_path / "big.json"
    inst.write_text(json.dumps({"columns": 3, "height": 7, "costs": [[0, 5, 1, 6, 2, 7, 3]] * 3, "delta": 1}))
    out = tmp_path / "o.json"
    assert main(["oracle", "-i", str(inst), "-o", str(out)]) == 0
    assert "brute force skipped" in capsys.readouterr().err
    report = json.loads(out.read_text())
    assert report["E0"] is None and report["flow"] >= 0


def test_report_ascii(built, tmp_path, capsys):
    graph = built("single_column")
    result = tmp_path / "r.json"
    solve(graph, result)
    capsys.readouterr()
    assert main(["report", "-i", str(result), "--format", "ascii"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split() == ["2", "."]
    assert lines[2].split() == ["1", "S"]


def test_report_three_columns(built, tmp_path):
    graph = built("chain3")
    result = tmp_path / "r.json"
    solve(graph, result)
    text = render_ascii(json.loads(result.read_text()))
    assert text.count("S") == 3
    data = json.loads(result.read_text())
    levels = [k for _, k in data["surface"]]
    assert all(abs(a - b) <= 0 for a, b in zip(levels, levels[1:]))


def test_report_json_passthrough(built, tmp_path, capsys):
    result = tmp_path / "r.json"
    solve(built("single_column"), result)
    capsys.readouterr()
    assert main(["report", "-i", str(result), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out) == json.loads(result.read_text())


def test_report_empty_file(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert main(["report", "-i", str(empty)]) == 2
