import json
import os
import subprocess
import sys

import pytest

from nearfocus.cli import main
from nearfocus.codebook import load_codebook, phase_checksum
from nearfocus.config import RunConfig

SMALL = ["--rows", "8", "--cols", "8", "--az-bins", "6", "--r-bins", "6"]


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main(list(argv) + ["--out", str(out)])
    return code, out


def read_all(directory):
    return {p: (directory / p).read_bytes() for p in sorted(os.listdir(directory))}


@pytest.mark.parametrize("argv, files", [
    (["pwae"], ["pwae.csv"]),
    (["cai"], ["cai.csv"]),
    (["sweep", "--codewords", "4,9", "--trials", "3", "--distances", "2,8"], ["sweep.csv"]),
    (["hw-sim"], ["hwsim.csv"]),
    (["selftest", "--scenes", "20"], ["selftest.txt"]),
    (["codebook", "build", "--kind", "uniform3d", "--k", "12"], ["codebook-uniform3d-12.txt"]),
])
def test_subcommands_write_outputs(tmp_path, argv, files):
    # options of a nested subcommand follow its last positional word
    code, out = run(tmp_path, *argv, *SMALL)
    assert code == 0
    command = "-".join(a for a in argv[:2] if not a.startswith("-") and a in
                       ("pwae", "cai", "sweep", "hw-sim", "selftest", "codebook", "build"))
    for f in files:
        assert (out / f).stat().st_size > 0
    manifest = json.loads((out / f"manifest-{command}.json").read_text())
    assert manifest["outputs"] == sorted(files)
    assert "out" not in manifest["config"]


def test_sweep_table_shape(tmp_path):
    code, out = run(tmp_path, "sweep", "--codewords", "4,9", "--trials", "3", "--distances", "2,8", *SMALL)
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "codebook,codewords,distance_m,mean_snr_db,trials,seed"
    assert len(lines) == 1 + 3 * 2 * 2


def test_sweep_example_deterministic(tmp_path):
    argv = ["sweep", "--codewords", "100", "--trials", "10", "--seed", "7"]
    _, a = run(tmp_path, *argv, "--workers", "1", name="a")
    _, b = run(tmp_path, *argv, "--workers", "4", name="b")
    assert read_all(a) == read_all(b)


def test_deterministic_across_processes(tmp_path):
    outputs = []
    for i, threads in enumerate(["1", "4"]):
        out = tmp_path / f"p{i}"
        env = {**os.environ, "OPENBLAS_NUM_THREADS": threads, "OMP_NUM_THREADS": threads}
        subprocess.run([sys.executable, "-m", "nearfocus.cli", "sweep", "--codewords", "9",
                        "--trials", "5", "--seed", "3", "--workers", str(2 * i + 1), *SMALL,
                        "--out", str(out)], check=True, env=env)
        outputs.append(read_all(out))
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize("argv", [["pwae"], ["cai"], ["hw-sim"],
                                  ["codebook", "build", "--kind", "nonuniform3d", "--k", "7"]])
def test_every_subcommand_repeatable(tmp_path, argv):
    _, a = run(tmp_path, *argv, *SMALL, "--workers", "1", name="a")
    _, b = run(tmp_path, *argv, *SMALL, "--workers", "3", name="b")
    assert read_all(a) == read_all(b)


def test_nonuniform_codebook_file(tmp_path):
    code, out = run(tmp_path, "codebook", "build", "--kind", "nonuniform3d", "--k", "100")
    assert code == 0
    path = out / "codebook-nonuniform3d-100.txt"
    text = path.read_text().splitlines()
    rows = [line for line in text if line[:1].isdigit()]
    assert len(rows) == 100
    cb = load_codebook(path, RunConfig().scene())
    stored = next(line.split()[1] for line in text if line.startswith("#phase_checksum"))
    assert phase_checksum(cb.phase_matrix()) == stored


def test_inspect(tmp_path, capsys):
    run(tmp_path, "codebook", "build", "--kind", "uniform2d", "--k", "5", *SMALL)
    path = tmp_path / "out" / "codebook-uniform2d-5.txt"
    assert main(["codebook", "inspect", str(path), *SMALL]) == 0
    assert "verified" in capsys.readouterr().out
    # a different panel cannot load it
    assert main(["codebook", "inspect", str(path), "--rows", "9"]) == 2


def test_selftest_four_elements(tmp_path, capsys):
    code, out = run(tmp_path, "selftest", "--scenes", "50")
    assert code == 0
    lines = (out / "selftest.txt").read_text().splitlines()
    assert len(lines) == 4 and all(line.startswith("PASS") for line in lines)


def test_precedence_flag_over_file_over_default(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"rows": 6, "cols": 6, "trials": 4, "seed": 9}))
    _, out = run(tmp_path, "sweep", "--config", str(cfg), "--seed", "2", "--codewords", "3",
                 "--distances", "5", "--kinds", "uniform2d")
    m = json.loads((out / "manifest-sweep.json").read_text())["config"]
    assert m["rows"] == 6 and m["trials"] == 4          # file over default
    assert m["seed"] == 2                                  # flag over file
    assert m["freq_ghz"] == RunConfig().freq_ghz           # default kept


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"rows": -3}', '{"colour": 1}',
                                     '{"rows": "many"}'])
def test_invalid_config_exit_code(tmp_path, content, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content)
    code, _ = run(tmp_path, "hw-sim", "--config", str(cfg))
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_invalid_flag_value_exit_code(tmp_path):
    assert run(tmp_path, "cai", "--rows", "0")[0] == 2
    assert run(tmp_path, "sweep", "--kinds", "hexagonal", *SMALL)[0] == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["hw-sim", *SMALL, "--out", str(blocker / "sub")]) == 1


def test_missing_codebook_file(tmp_path):
    assert main(["codebook", "inspect", str(tmp_path / "none.txt")]) != 0
