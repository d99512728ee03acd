import hashlib
import json
from pathlib import Path

import pytest

from crystalpr.cli import main


def run(args):
    return main([str(a) for a in args])


def read_manifest(d: Path) -> dict:
    return json.loads((d / "manifest.json").read_text())


def test_diffset_hist_reproducible(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        assert run(["diffset-hist", "--N", 60, "--K", 4, "--trials", 200,
                    "--seed", 5, "--out-dir", d]) == 0
    f1 = (d1 / "diffset_hist_N60_K4.csv").read_bytes()
    f2 = (d2 / "diffset_hist_N60_K4.csv").read_bytes()
    assert f1 == f2
    m = read_manifest(d1)
    assert m["seed"] == 5
    assert m["spec"]["command"] == "diffset-hist"
    (entry,) = [o for o in m["outputs"] if o["path"].endswith(".csv")]
    assert entry["sha256"] == hashlib.sha256(f1).hexdigest()
    assert read_manifest(d1) == read_manifest(d2)


def test_seed_required(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run(["diffset-hist", "--N", 60, "--K", 4, "--out-dir", tmp_path])
    assert exc.value.code == 2


def test_invalid_params_exit_2(tmp_path, capsys):
    # K exceeding N surfaces as a usage error, not a traceback
    code = run(["diffset-hist", "--N", 4, "--K", 10, "--trials", 5,
                "--seed", 1, "--out-dir", tmp_path])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_resource_cap_exit_3(tmp_path, capsys):
    code = run(["stabilizers", "--N", 40, "--K", 20, "--cap", 1000,
                "--out-dir", tmp_path])
    assert code == 3
    assert "cap" in capsys.readouterr().err


def test_collisions_command(tmp_path):
    assert run(["collisions", "--N", 100, "--K", "2,6", "--trials", 100,
                "--seed", 3, "--out-dir", tmp_path]) == 0
    lines = (tmp_path / "collisions_N100.csv").read_text().splitlines()
    assert lines[0].startswith("# {")
    assert lines[1] == "K,collision_free_count,mean_collisions"
    rows = [line.split(",") for line in lines[2:]]
    assert rows[0][0] == "2" and rows[0][1] == "100"


def test_stabilizers_table(tmp_path):
    assert run(["stabilizers", "--N", 8, "--K", 4, "--out-dir", tmp_path]) == 0
    lines = (tmp_path / "stabilizers_N8_K4.csv").read_text().splitlines()
    data = {row.split(",")[0]: row.split(",") for row in lines[2:]}
    assert data["0;1;2;5"][3] == "4"
    assert data["0;2;4;6"][1] == "0;2;4"
    doc = json.loads((tmp_path / "stabilizers_N8_K4.json").read_text())
    assert len(doc) == 8


def test_gen_and_instance_roundtrip(tmp_path):
    assert run(["gen", "--N", 12, "--K", 3, "--seed", 7,
                "--photon-scale", 500.0, "--out-dir", tmp_path]) == 0
    doc = json.loads((tmp_path / "instance_N12_K3_seed7.json").read_text())
    assert doc["noise"] == {"photon_scale": 500.0}
    assert len(doc["support"]) == 3
    from crystalpr.datagen import PlantedInstance

    inst = PlantedInstance.from_json_dict(doc)
    assert inst.x_true.group.moduli == (12,)


def test_solve_command(tmp_path):
    assert run(["solve", "--N", 12, "--K", 2, "--seed", 11,
                "--max-iter", 200000, "--out-dir", tmp_path]) == 0
    doc = json.loads((tmp_path / "solve_N12_K2.json").read_text())
    assert doc["result"]["converged"] is True
    assert doc["config"]["beta"] == 0.5


def test_iteration_study_thread_independent(tmp_path):
    base = ["iteration-study", "--N", 8, "--K", "2,3", "--trials", 5,
            "--max-iter", 20000, "--seed", 13]
    d1, d2 = tmp_path / "t1", tmp_path / "t2"
    assert run(base + ["--threads", 1, "--out-dir", d1]) == 0
    assert run(base + ["--threads", 2, "--out-dir", d2]) == 0
    for name in ("iteration_study_N8.csv", "iteration_counts_N8.csv"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_transversality_command(tmp_path):
    assert run(["transversality", "--field", "complex", "--K", 2, "--N", 4,
                "--seed", 17, "--out-dir", tmp_path]) == 0
    doc = json.loads((tmp_path / "transversality_N4_K2_complex.json").read_text())
    assert doc["verdict"] is True
    assert len(doc["per_S"]) == 6
    assert doc["failures"] == []


def test_uniqueness_sweep_command(tmp_path):
    assert run(["uniqueness-sweep", "--N", 8, "--K", 4, "--starts", 30,
                "--seed", 19, "--out-dir", tmp_path]) == 0
    doc = json.loads((tmp_path / "uniqueness_sweep_N8_K4.json").read_text())
    assert doc["K"] == 4
    assert len(doc["rows"]) == 7


def test_plot_histogram_and_determinism(tmp_path):
    assert run(["diffset-hist", "--N", 30, "--K", 3, "--trials", 50,
                "--seed", 23, "--out-dir", tmp_path]) == 0
    csv = tmp_path / "diffset_hist_N30_K3.csv"
    s1, s2 = tmp_path / "p1.svg", tmp_path / "p2.svg"
    assert run(["plot", "--csv", csv, "--kind", "histogram", "--out", s1]) == 0
    assert run(["plot", "--csv", csv, "--kind", "line", "--out", s2, "--log-y"]) == 0
    assert s1.read_text().startswith("<svg")
    assert run(["plot", "--csv", csv, "--kind", "histogram", "--out", tmp_path / "p3.svg"]) == 0
    assert s1.read_bytes() == (tmp_path / "p3.svg").read_bytes()


def test_plot_empty_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("value,count\n")
    out = tmp_path / "empty.svg"
    assert run(["plot", "--csv", empty, "--kind", "histogram", "--out", out]) == 0
    text = out.read_text()
    assert text.startswith("<svg") and "</svg>" in text


def test_plot_bad_kind_exit_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run(["plot", "--csv", "x.csv", "--kind", "scatter", "--out", "o.svg"])
    assert exc.value.code == 2


def test_config_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 77}))
    assert run(["--config", cfg, "diffset-hist", "--N", 20, "--K", 2,
                "--seed", 29, "--out-dir", tmp_path]) == 0
    meta = json.loads(
        (tmp_path / "diffset_hist_N20_K2.csv").read_text().splitlines()[0].lstrip("# ")
    )
    assert meta["trials"] == 77
    # explicit flags beat the config file
    assert run(["--config", cfg, "diffset-hist", "--N", 20, "--K", 2, "--trials", 5,
                "--seed", 29, "--out-dir", tmp_path]) == 0
    meta = json.loads(
        (tmp_path / "diffset_hist_N20_K2.csv").read_text().splitlines()[0].lstrip("# ")
    )
    assert meta["trials"] == 5
