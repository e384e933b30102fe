import subprocess
import sys

import pytest

from projlines.cli import main
from projlines.io import load_lineset_file

SMALL = ["--i", "20000", "--n1", "30", "--n2", "3", "--i1", "2000", "--i2", "5000", "--i3", "20000"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(out):
    return dict(line.split(": ", 1) for line in out.strip().splitlines())


def test_config_writes_file(tmp_path, capsys):
    path = tmp_path / "c.txt"
    code, _, _ = run(capsys, "config", "--d", "3", "--out", str(path))
    assert code == 0
    f = load_lineset_file(path)
    assert f.count == 7 and "riesz1" in f.energies


def test_energy_command(tmp_path, capsys):
    path = tmp_path / "c.txt"
    run(capsys, "config", "--d", "2", "--out", str(path))
    code, out, _ = run(capsys, "energy", "--in", str(path), "--kernel", "riesz:4")
    vals = parse(out)
    assert code == 0
    assert float(vals["energy.riesz4"]) == pytest.approx(32 / 3, rel=1e-14)


def test_optimize_deterministic(capsys):
    argv = ["optimize", "--d", "3", "--n", "7", "--kernel", "log", "--starts", "3", "--seed", "5"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    vals = parse(a)
    assert vals["seed"] == "5"
    assert float(vals["energy"]) == pytest.approx(11.144559022472546622, rel=1e-9)


def test_seed_is_required(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval-k", "--in", "x", "--r", "20"])
    assert exc.value.code == 2
    assert "--seed" in capsys.readouterr().err


def test_missing_file_exit_code(capsys):
    code, out, err = run(capsys, "energy", "--in", "/nonexistent/file.txt")
    assert code == 1 and out == ""
    assert "error" in err


def test_eval_k_too_many_lines(tmp_path, capsys):
    path = tmp_path / "c.txt"
    path.write_text("d: 2\ncount: 4\nvectors:\n1 0\n0 1\n0.6 0.8\n0.8 -0.6\n")
    code, _, err = run(capsys, "eval-k", "--in", str(path), "--r", "20", "--seed", "1")
    assert code == 1 and "exceed" in err


def test_stochastic_commands_reproducible(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    run(capsys, "config", "--d", "3", "--out", str(cfg))
    commands = [
        ["eval-k", "--in", str(cfg), "--r", "20", "--samples", "50000", "--seed", "3"],
        ["mc-max", "--d", "3", "--r", "20", "--seed", "3", *SMALL],
        ["local", "--in", str(cfg), "--sigma", "0.1", "--r", "20", "--seed", "3", *SMALL],
        ["packing", "--d", "2", "--n", "3", "--starts", "2", "--seed", "3"],
    ]
    for argv in commands:
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b, argv[0]
        assert parse(a)["seed"] == "3"


def test_kbar(capsys):
    code, out, _ = run(capsys, "kbar", "--d", "2", "--r", "20")
    assert code == 0
    assert float(parse(out)["Kbar"]) == pytest.approx(2.5299819068468716, rel=1e-10)


def test_ratios_csv_and_svg(tmp_path, capsys):
    csv_path, svg_path = tmp_path / "r.csv", tmp_path / "r.svg"
    argv = ["ratios", "--d", "2", "--r", "20", "--seed", "4", "--methods", "i,ii",
            "--out", str(csv_path), "--svg", str(svg_path), *SMALL]
    assert run(capsys, *argv)[0] == 0
    first = csv_path.read_text()
    assert first.splitlines()[0] == "d,r,alpha,method,K,Kbar,ratio,stderr,seed"
    assert len(first.splitlines()) == 3
    assert svg_path.read_text().startswith("<svg")
    run(capsys, *argv)
    assert csv_path.read_text() == first


def test_ratios_thread_count_does_not_change_output(tmp_path):
    argv = [sys.executable, "-m", "projlines.cli", "ratios", "--d", "2", "--r", "20", "--seed", "4",
            "--methods", "i,ii", *SMALL]
    a = subprocess.run(argv, capture_output=True, text=True, env={"PROJLINES_THREADS": "1", "PATH": ""})
    b = subprocess.run(argv, capture_output=True, text=True, env={"PROJLINES_THREADS": "3", "PATH": ""})
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout


def test_bad_kernel(capsys):
    with pytest.raises(SystemExit):
        main(["optimize", "--d", "2", "--n", "3", "--kernel", "gauss", "--seed", "1"])
