import json

import pytest

from atmr.cli import main


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(
        f"problems: [CORRIDOR]\nalgorithms: [atmr]\nN: 12\nmax_fes: 120\nruns: 2\n"
        f"reference_count: 20\noutput_dir: {tmp_path / 'out'}\n"
    )
    return path


def test_list_problems(capsys):
    assert main(["list-problems"]) == 0
    assert "BNH" in capsys.readouterr().out.split()


def test_front_to_stdout(capsys):
    assert main(["front", "--problem", "CORRIDOR", "--count", "5", "--param", "D=4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "f1,f2" and len(lines) == 6


def test_front_unknown_problem(capsys):
    assert main(["front", "--problem", "CTPX", "--count", "5"]) == 2
    assert "BNH" in capsys.readouterr().err


def test_run_and_summarize(config_file, tmp_path, capsys):
    assert main(["run", "--config", str(config_file), "--jobs", "1", "--seed", "3"]) == 0
    out = tmp_path / "out"
    seeds = sorted(p.stem for p in (out / "runs" / "CORRIDOR" / "atmr").glob("*.json"))
    assert seeds == ["3", "4"]
    (out / "summary.csv").unlink()
    assert main(["summarize", "--dir", str(out)]) == 0
    assert (out / "summary.csv").exists()
    record = next((out / "runs").rglob("*.json"))
    assert main(["replay", "--record", str(record)]) == 0
    assert "identical" in capsys.readouterr().out


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("problems: [NOPE]\n")
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["summarize", "--dir", str(tmp_path)]) == 2


def test_tampered_record_fails_replay(config_file, tmp_path):
    assert main(["run", "--config", str(config_file), "--jobs", "1"]) == 0
    path = next((tmp_path / "out" / "runs").rglob("*.json"))
    record = json.loads(path.read_text())
    record["final_population"]["G"][0] += 1.0
    path.write_text(json.dumps(record))
    assert main(["replay", "--record", str(path)]) == 3
