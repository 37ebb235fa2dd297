import csv
import json

import numpy as np
import pytest

from cmvca.cli import main, parse_config_text, parse_m_grid
from cmvca.dataio import make_blobs, write_csv
from cmvca.errors import ConfigError

BLOBS = [
    "--data.synthetic.n_per_class", "12",
    "--data.synthetic.means", "0,0;10,0;5,8.66",
    "--data.synthetic.stddev", "1.0",
]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_config_text():
    cfg = parse_config_text("# comment\nkernel.mode = rff  # trailing\n\nseeds = 0, 1\n")
    assert cfg == {"kernel.mode": "rff", "seeds": "0, 1"}
    with pytest.raises(ConfigError, match="kernel.mode"):
        parse_config_text("kernel.bogus = 1\n")
    with pytest.raises(ConfigError):
        parse_config_text("no equals sign\n")


def test_parse_m_grid():
    assert parse_m_grid("1..r") is None
    assert parse_m_grid("2..4") == [2, 3, 4]
    assert parse_m_grid("5,1,3") == [1, 3, 5]
    with pytest.raises(ConfigError):
        parse_m_grid("0,1")


def test_synthetic_run_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(BLOBS + ["--seeds", "0,1", "--out", str(out)]) == 0
    curves = _rows(out / "curves.csv")
    assert set(curves[0]) == {"method", "M", "seed", "accuracy"}
    methods = {r["method"] for r in curves}
    assert methods == {"kpca", "keca", "cmvca", "rayleigh", "kda", "cmvda", "cmvda_r"}
    kda = [r for r in curves if r["method"] == "kda"]
    assert {int(r["M"]) for r in kda} == {1, 2}
    assert {r["seed"] for r in kda} == {"0", "1", "mean"}
    ray = _rows(out / "rayleigh.csv")
    assert all(0.0 <= float(r["rayleigh_quotient"]) <= 1.0 + 1e-9 for r in ray)
    summary = _rows(out / "summary.csv")
    assert [r["method"] for r in summary] == ["kpca", "keca", "cmvca", "rayleigh", "kda", "cmvda", "cmvda_r"]
    meta = json.loads((out / "run.json").read_text())
    assert "kda" in meta["seeds"][0]["skipped"]
    assert meta["dataset"]["n_classes"] == 3


def test_six_significant_digits(tmp_path):
    out = tmp_path / "o"
    assert main(BLOBS + ["--methods", "kpca", "--out", str(out)]) == 0
    for r in _rows(out / "curves.csv"):
        digits = r["accuracy"].replace(".", "").lstrip("0")
        assert len(digits) <= 6


def test_explicit_grid_skips_out_of_range(tmp_path):
    out = tmp_path / "o"
    assert main(BLOBS + ["--methods", "kda,cmvda", "--m_grid", "1,2,3", "--out", str(out)]) == 0
    meta = json.loads((out / "run.json").read_text())
    assert meta["seeds"][0]["skipped"] == {"kda": [3]}


def test_config_file_and_override(tmp_path):
    data = tmp_path / "d.csv"
    write_csv(make_blobs([10, 10], [(0, 0), (6, 6)], 1.0, seed=0), data)
    conf = tmp_path / "run.conf"
    conf.write_text(f"data.path = {data}\nmethods = kpca,cmvca\nkernel.sigma = 2.5\nout.dir = {tmp_path / 'a'}\n")
    assert main(["--config", str(conf), "--methods", "cmvca"]) == 0
    meta = json.loads((tmp_path / "a" / "run.json").read_text())
    assert meta["seeds"][0]["sigma"] == 2.5
    assert {r["method"] for r in _rows(tmp_path / "a" / "curves.csv")} == {"cmvca"}


def test_fixed_test_set(tmp_path):
    tr, te = tmp_path / "tr.csv", tmp_path / "te.csv"
    write_csv(make_blobs([8, 8], [(0, 0), (6, 6)], 1.0, seed=0), tr)
    write_csv(make_blobs([5, 5], [(0, 0), (6, 6)], 1.0, seed=1), te)
    out = tmp_path / "o"
    assert main(["--data.path", str(tr), "--data.test_path", str(te), "--methods", "cmvda", "--out", str(out)]) == 0
    meta = json.loads((out / "run.json").read_text())
    assert meta["seeds"][0]["n_train"] == 16 and meta["seeds"][0]["n_test"] == 10


@pytest.mark.parametrize("mode", ["nystrom", "rff"])
def test_approximate_modes(tmp_path, mode):
    out = tmp_path / "o"
    args = BLOBS + ["--kernel.mode", mode, "--approx.n", "20", "--methods", "cmvca,cmvda", "--out", str(out)]
    assert main(args) == 0
    assert _rows(out / "summary.csv")


@pytest.mark.parametrize("args", [
    ["--kernel.mode", "fancy"],
    ["--kernel.sigma", "-1"],
    ["--methods", "pca"],
    ["--split.fraction", "1.5"],
    ["--seeds", "x"],
    ["--no-such-flag", "1"],
])
def test_config_errors_exit_1(tmp_path, args):
    assert main(BLOBS + args + ["--out", str(tmp_path)]) == 1


def test_missing_config_file_exit_1(tmp_path):
    assert main(["--config", str(tmp_path / "absent.conf")]) == 1


def test_data_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,0\n1,oops,1\n")
    assert main(["--data.path", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["--data.path", str(tmp_path / "absent.csv"), "--out", str(tmp_path)]) == 2
    single = tmp_path / "single.csv"
    single.write_text("1,2,0\n3,4,0\n5,6,1\n")
    assert main(["--data.path", str(single), "--out", str(tmp_path)]) == 2


def test_degenerate_sigma_exit_3(tmp_path):
    flat = tmp_path / "flat.csv"
    flat.write_text("".join(f"1,1,{i % 2}\n" for i in range(8)))
    assert main(["--data.path", str(flat), "--out", str(tmp_path / "o")]) == 3


def test_repeat_runs_are_byte_identical(tmp_path):
    files = ("curves.csv", "rayleigh.csv", "summary.csv", "run.json")
    snapshots = []
    for _ in range(2):
        assert main(BLOBS + ["--seeds", "0,3", "--out", str(tmp_path)]) == 0
        snapshots.append([(tmp_path / f).read_bytes() for f in files])
    assert snapshots[0] == snapshots[1]
