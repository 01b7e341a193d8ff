import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from rdacc.cli import main

TINY = """\
[scenario]
name = tiny
seed = 5
snr_db = 20.0

[radar]
fc = 1.3e9
B = 1e6
Tpri = 5e-3
Tp = 1e-3
Np = 4

[waveform]
kind = costas

[grid]
v_cells = 1
a_cells = 1

[target.1]
r0 = 150e3
v0 = 350
a0 = 400

[sweep]
fc = 1.3e9
B = 1e6
Tpri = 5e-3
Tp = 1e-3, 2e-3
r0 = 150e3
v0 = 0
a0 = 0, 600
Np = 4
subset = 3
smoke = 2
"""


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.ini"
    p.write_text(TINY)
    return str(p)


def _files(d: Path):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_synth_is_deterministic(tiny, tmp_path, capsys):
    for k in (1, 2):
        assert main(["synth", "--scenario", tiny, "--out", str(tmp_path / f"s{k}")]) == 0
    a, b = _files(tmp_path / "s1"), _files(tmp_path / "s2")
    assert set(a) == {"cube.iq", "cube.iq.hdr"}
    assert a == b
    assert main(["synth", "--scenario", tiny, "--seed", "6", "--out", str(tmp_path / "s3")]) == 0
    assert _files(tmp_path / "s3")["cube.iq"] != a["cube.iq"]


def test_map_outputs_identical_across_workers(tiny, tmp_path, capsys):
    for w in (1, 3):
        assert main(["map", "--scenario", tiny, "--workers", str(w),
                     "--out", str(tmp_path / f"m{w}")]) == 0
    a, b = _files(tmp_path / "m1"), _files(tmp_path / "m3")
    assert a == b
    assert len([n for n in a if n.endswith(".csv")]) == 3
    peak = json.loads(a["peak.json"])
    assert peak["v0"] == 350.0 and peak["a0"] == 400.0
    assert abs(peak["r0"] - 150e3) < 1e-6


def test_map_csv_layout(tiny, tmp_path, capsys):
    assert main(["map", "--scenario", tiny, "--a-values", "400", "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "rda_a000.csv")))
    assert rows[0][0] == "delay_s"
    assert rows[1] == ["a_mps2", "400.0"]
    assert [float(r[0]) for r in rows[3:]][1] == 350.0
    assert len(rows) == 3 + 3
    assert all(len(r) == len(rows[0]) for r in rows[3:])


@pytest.mark.parametrize("method", ["classic", "oracle"])
def test_other_methods(tiny, tmp_path, capsys, method):
    assert main(["map", "--scenario", tiny, "--method", method, "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["method"] == method
    assert (tmp_path / "peak.json").exists()


def test_map_from_saved_cube(tiny, tmp_path, capsys):
    main(["synth", "--scenario", tiny, "--out", str(tmp_path / "s")])
    main(["map", "--scenario", tiny, "--out", str(tmp_path / "a")])
    main(["map", "--scenario", tiny, "--cube", str(tmp_path / "s" / "cube.iq"),
          "--out", str(tmp_path / "b")])
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_library_error_is_json(tmp_path, capsys):
    assert main(["map", "--scenario", "table9", "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParameterError" and "table9" in err["message"]


def test_sweep_needs_sweep_section(tmp_path, capsys):
    assert main(["loss-sweep", "--scenario", "table1", "--out", str(tmp_path)]) == 2


def test_loss_sweep_smoke(tiny, tmp_path, capsys):
    assert main(["loss-sweep", "--scenario", tiny, "--smoke", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "loss_sweep.csv")))
    assert len(rows) == 2
    assert {r["a0"] for r in rows} == {"0.0", "600.0"}
    for r in rows:
        assert r["status"] == "ok"
        assert abs(float(r["loss_db"]) - float(r["predicted_db"])) < 0.1


def test_bench_small(tmp_path, capsys):
    assert main(["bench", "--sizes", "2048x512,4096x1024", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "bench.csv")))
    assert [int(r["n_r"]) for r in rows] == [2048, 4096]
    assert all(float(r["cago_s"]) > 0 for r in rows)


def test_bad_sizes_rejected(capsys):
    with pytest.raises(SystemExit):
        main(["bench", "--sizes", "big"])


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "rdacc", "map", "--scenario", "nope",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 2
    assert json.loads(res.stderr)["error"] == "ParameterError"
